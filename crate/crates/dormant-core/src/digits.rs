//! Base-p digit arithmetic and exponent-tuple combinatorics.
//!
//! Everything downstream consumes the same small vocabulary: a prime `p`
//! and a level horizon `p^N` fixed by a [`DigitContext`], residues presented
//! through their base-p digits, weakly/strictly increasing exponent tuples
//! (the sets `Xi`), the stage splittings `a = s1 + p^M * s2`, shift-class
//! canonical forms, and the parity reindexing `tau`.
//!
//! All values are exact; anything that can outgrow a machine word is a
//! [`BigInt`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin, valid for all u64 inputs with this witness set.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The pair `(p, N)`: a prime and the level horizon `p^N`.
///
/// The operator level is `N - 1`; `N` itself is the number of base-p digits
/// every residue carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitContext {
    p: u64,
    n: u32,
}

impl DigitContext {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::input(format!("p = {p} is not prime")));
        }
        if n == 0 {
            return Err(Error::input("N must be >= 1"));
        }
        Ok(DigitContext { p, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p^N`, the horizon every exponent lives below.
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.n)
    }

    /// `p^k` for `k <= N`.
    pub fn p_pow(&self, k: u32) -> BigInt {
        BigInt::from(self.p).pow(k)
    }
}

/// Reduce an arbitrary integer into `[0, p^N)` and expand it in base p.
///
/// Returns the `N` digits `(d[0], ..., d[N-1])` with
/// `sum_s p^s * d[s] = d mod p^N`.
pub fn lift_and_digits(d: &BigInt, ctx: DigitContext) -> Vec<u64> {
    let modulus = ctx.modulus();
    let mut rem = d.mod_floor(&modulus);
    let p = BigInt::from(ctx.p());
    let mut digits = Vec::with_capacity(ctx.n() as usize);
    for _ in 0..ctx.n() {
        let (q, r) = rem.div_rem(&p);
        digits.push(r.to_u64().expect("digit < p fits in u64"));
        rem = q;
    }
    digits
}

/// Digits of `-d`, i.e. `lift_and_digits(-d, ctx)`.
pub fn negate_digits(d: &BigInt, ctx: DigitContext) -> Vec<u64> {
    lift_and_digits(&(-d), ctx)
}

/// The unique stage splitting `a = s1 + p^M * s2` with `0 <= s1 < p^M` and
/// `0 <= s2 < p^(N-M)`.
pub fn split_m(a: &BigInt, m: u32, ctx: DigitContext) -> Result<(BigInt, BigInt)> {
    if m > ctx.n() {
        return Err(Error::input(format!(
            "split stage M = {m} exceeds N = {}",
            ctx.n()
        )));
    }
    if a.is_negative() || *a >= ctx.modulus() {
        return Err(Error::input(format!(
            "exponent {a} outside [0, p^N) for p = {}, N = {}",
            ctx.p(),
            ctx.n()
        )));
    }
    let pm = ctx.p_pow(m);
    let (s2, s1) = a.div_rem(&pm);
    Ok((s1, s2))
}

/// An element of `Xi_{m,N}`: a weakly (or strictly) increasing tuple of
/// integers in `[0, p^N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentTuple {
    entries: Vec<BigInt>,
    ctx: DigitContext,
    strict: bool,
}

impl ExponentTuple {
    pub fn new(entries: Vec<BigInt>, ctx: DigitContext, strict: bool) -> Result<Self> {
        let modulus = ctx.modulus();
        for e in &entries {
            if e.is_negative() || *e >= modulus {
                return Err(Error::input(format!("entry {e} outside [0, p^N)")));
            }
        }
        for w in entries.windows(2) {
            if w[0] > w[1] || (strict && w[0] == w[1]) {
                return Err(Error::input(format!(
                    "entries not {} increasing: {} then {}",
                    if strict { "strictly" } else { "weakly" },
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(ExponentTuple {
            entries,
            ctx,
            strict,
        })
    }

    pub fn from_u64(entries: &[u64], ctx: DigitContext, strict: bool) -> Result<Self> {
        Self::new(entries.iter().map(|&e| BigInt::from(e)).collect(), ctx, strict)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ctx(&self) -> DigitContext {
        self.ctx
    }

    pub fn is_strict_variant(&self) -> bool {
        self.strict
    }

    /// Entrywise `a / p^N`, each in `[0, 1)`.
    pub fn normalized(&self) -> Vec<BigRational> {
        let modulus = self.ctx.modulus();
        self.entries
            .iter()
            .map(|e| BigRational::new(e.clone(), modulus.clone()))
            .collect()
    }
}

/// Result of splitting a tuple entrywise at stage `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSplit {
    pub s1: Vec<BigInt>,
    pub s2: Vec<BigInt>,
    /// True iff both component sequences are weakly increasing, i.e. the
    /// split data again form exponent tuples and may be used as weights.
    pub monotone: bool,
}

/// Split every entry of `t` as `s1 + p^M * s2` and report whether both
/// component sequences stay weakly increasing.
pub fn split_tuple_monotone(t: &ExponentTuple, m: u32) -> Result<TupleSplit> {
    let mut s1 = Vec::with_capacity(t.len());
    let mut s2 = Vec::with_capacity(t.len());
    for e in t.entries() {
        let (a, b) = split_m(e, m, t.ctx())?;
        s1.push(a);
        s2.push(b);
    }
    let monotone = s1.windows(2).all(|w| w[0] <= w[1]) && s2.windows(2).all(|w| w[0] <= w[1]);
    Ok(TupleSplit { s1, s2, monotone })
}

/// Does `entries` define a valid length-`m` tuple for the requested variant?
pub fn xi_contains(entries: &[BigInt], m: usize, ctx: DigitContext, strict: bool) -> bool {
    entries.len() == m && ExponentTuple::new(entries.to_vec(), ctx, strict).is_ok()
}

/// Number of tuples `enumerate_xi` would yield: `C(p^N + m - 1, m)` for the
/// weak variant, `C(p^N, m)` for the strict one.
pub fn xi_cardinality(m: usize, ctx: DigitContext, strict: bool) -> BigInt {
    let modulus = ctx.modulus();
    let top = if strict {
        modulus
    } else {
        modulus + BigInt::from(m as u64) - BigInt::one()
    };
    // C(top, m) over exact integers.
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..m {
        let factor = &top - BigInt::from(i as u64);
        if factor.is_negative() || factor.is_zero() {
            return BigInt::zero();
        }
        num *= factor;
        den *= BigInt::from((i + 1) as u64);
    }
    num / den
}

/// Lexicographic, complete, duplicate-free stream over `Xi_{m,N}`.
pub struct XiIter {
    ctx: DigitContext,
    strict: bool,
    modulus: BigInt,
    state: Option<Vec<BigInt>>,
}

impl Iterator for XiIter {
    type Item = ExponentTuple;

    fn next(&mut self) -> Option<ExponentTuple> {
        let current = self.state.as_ref()?.clone();
        let tuple = ExponentTuple::new(current.clone(), self.ctx, self.strict)
            .expect("iterator state is always a valid tuple");
        // Advance: find the rightmost entry that can still grow.
        let m = current.len();
        let mut next = current;
        let step = if self.strict { BigInt::one() } else { BigInt::zero() };
        let mut pos = m;
        while pos > 0 {
            let i = pos - 1;
            // Entry i may grow iff the refilled tail still fits below p^N:
            // after the bump, entry m-1 becomes next[i] + 1 + (m-1-i)*step.
            let max_i = &self.modulus - BigInt::one() - BigInt::from((m - 1 - i) as u64) * &step;
            if next[i] < max_i {
                next[i] += 1;
                for j in i + 1..m {
                    next[j] = &next[j - 1] + &step;
                }
                self.state = Some(next);
                return Some(tuple);
            }
            pos -= 1;
        }
        self.state = None;
        Some(tuple)
    }
}

/// Enumerate `Xi_{m,N}` lexicographically. Refuses (with the exact count in
/// the message) when the cardinality exceeds `cap`.
pub fn enumerate_xi(m: usize, ctx: DigitContext, strict: bool, cap: u64) -> Result<XiIter> {
    let card = xi_cardinality(m, ctx, strict);
    if card > BigInt::from(cap) {
        return Err(Error::input(format!(
            "enumeration of Xi_({m},{}) would yield {card} tuples, above the cap {cap}",
            ctx.n()
        )));
    }
    let state = if card.is_zero() {
        None
    } else {
        let step = if strict { 1u64 } else { 0 };
        Some((0..m as u64).map(|i| BigInt::from(i * step)).collect())
    };
    Ok(XiIter {
        ctx,
        strict,
        modulus: ctx.modulus(),
        state,
    })
}

/// Canonical representative of the shift class of a strict tuple.
///
/// Among the `p^N` shifts `{a + c mod p^N}` (sorted ascending), pick the
/// lexicographically smallest. Two strict tuples are shift-equivalent iff
/// their canonical forms coincide. The representative choice is a
/// convention of this crate; only the equivalence itself is intrinsic.
pub fn rho_canonical(t: &ExponentTuple) -> Result<ExponentTuple> {
    if !t.is_strict_variant() {
        return Err(Error::input(
            "shift canonicalization is defined on strict tuples only",
        ));
    }
    let modulus = t.ctx().modulus();
    let mut best: Option<Vec<BigInt>> = None;
    let mut c = BigInt::zero();
    while c < modulus {
        let mut shifted: Vec<BigInt> = t
            .entries()
            .iter()
            .map(|a| (a + &c).mod_floor(&modulus))
            .collect();
        shifted.sort();
        match &best {
            Some(b) if *b <= shifted => {}
            _ => best = Some(shifted),
        }
        c += 1;
    }
    ExponentTuple::new(best.unwrap_or_default(), t.ctx(), true)
}

/// The parity reindexing `tau(b) = (b-1)/2` for odd `b`, `(p-1-b)/2` for
/// even `b`; defined for odd p and `0 <= b <= p-1`.
pub fn tau(b: u64, p: u64) -> Result<u64> {
    if p % 2 == 0 {
        return Err(Error::input("tau requires an odd prime"));
    }
    if b >= p {
        return Err(Error::input(format!("tau argument {b} outside [0, p)")));
    }
    Ok(if b % 2 == 1 { (b - 1) / 2 } else { (p - 1 - b) / 2 })
}

/// An r-tuple of exponent tuples sharing one context (the global weights).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    tuples: Vec<ExponentTuple>,
}

impl WeightVector {
    /// Tuples must share one context. An empty vector is allowed (r = 0).
    pub fn new(tuples: Vec<ExponentTuple>) -> Result<Self> {
        if let Some(first) = tuples.first() {
            let ctx = first.ctx();
            if tuples.iter().any(|t| t.ctx() != ctx) {
                return Err(Error::input("weight tuples do not share a context"));
            }
        }
        Ok(WeightVector { tuples })
    }

    pub fn tuples(&self) -> &[ExponentTuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn normalized(&self) -> Vec<Vec<BigRational>> {
        self.tuples.iter().map(|t| t.normalized()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, n: u32) -> DigitContext {
        DigitContext::new(p, n).unwrap()
    }

    #[test]
    fn rejects_non_prime_and_zero_level() {
        assert!(DigitContext::new(6, 1).is_err());
        assert!(DigitContext::new(1, 1).is_err());
        assert!(DigitContext::new(5, 0).is_err());
        assert!(DigitContext::new(2, 3).is_ok());
        assert!(DigitContext::new(1_000_003, 1).is_ok());
    }

    #[test]
    fn digits_zero_and_forced_expansions() {
        assert_eq!(lift_and_digits(&BigInt::zero(), ctx(5, 2)), vec![0, 0]);
        assert_eq!(lift_and_digits(&BigInt::from(13), ctx(5, 2)), vec![3, 2]);
        // -4 = 5 mod 9
        assert_eq!(lift_and_digits(&BigInt::from(-4), ctx(3, 2)), vec![2, 1]);
    }

    #[test]
    fn negate_digits_examples() {
        assert_eq!(negate_digits(&BigInt::zero(), ctx(3, 2)), vec![0, 0]);
        assert_eq!(negate_digits(&BigInt::from(4), ctx(3, 2)), vec![2, 1]);
        assert_eq!(negate_digits(&BigInt::from(1), ctx(5, 1)), vec![4]);
    }

    #[test]
    fn split_examples_and_errors() {
        let c = ctx(5, 2);
        let (s1, s2) = split_m(&BigInt::from(13), 1, c).unwrap();
        assert_eq!((s1, s2), (BigInt::from(3), BigInt::from(2)));
        let (s1, s2) = split_m(&BigInt::from(13), 0, c).unwrap();
        assert_eq!((s1, s2), (BigInt::zero(), BigInt::from(13)));
        let (s1, s2) = split_m(&BigInt::from(13), 2, c).unwrap();
        assert_eq!((s1, s2), (BigInt::from(13), BigInt::zero()));
        assert!(split_m(&BigInt::from(25), 1, c).is_err());
        assert!(split_m(&BigInt::from(-1), 1, c).is_err());
        assert!(split_m(&BigInt::from(3), 3, c).is_err());
    }

    #[test]
    fn split_tuple_monotone_examples() {
        let c = ctx(5, 2);
        let t = ExponentTuple::from_u64(&[0, 1, 2], c, false).unwrap();
        let s = split_tuple_monotone(&t, 1).unwrap();
        assert!(s.monotone);
        assert_eq!(s.s1, vec![BigInt::from(0), BigInt::from(1), BigInt::from(2)]);
        assert_eq!(s.s2, vec![BigInt::zero(), BigInt::zero(), BigInt::zero()]);

        let t = ExponentTuple::from_u64(&[4, 5], c, false).unwrap();
        let s = split_tuple_monotone(&t, 1).unwrap();
        assert!(!s.monotone);
        assert_eq!(s.s1, vec![BigInt::from(4), BigInt::from(0)]);
        assert_eq!(s.s2, vec![BigInt::from(0), BigInt::from(1)]);

        let t = ExponentTuple::from_u64(&[0, 0], c, false).unwrap();
        assert!(split_tuple_monotone(&t, 1).unwrap().monotone);
    }

    #[test]
    fn xi_membership_examples() {
        let c1 = ctx(5, 1);
        let e = |v: &[u64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert!(xi_contains(&e(&[0, 1]), 2, c1, true));
        assert!(!xi_contains(&e(&[1, 1]), 2, c1, true));
        assert!(xi_contains(&e(&[1, 1]), 2, c1, false));
        assert!(!xi_contains(&e(&[0, 5]), 2, c1, false));
        assert!(!xi_contains(&e(&[0, 1]), 3, c1, true));
    }

    #[test]
    fn enumeration_is_lexicographic_complete_and_counted() {
        let c = ctx(2, 1);
        let all: Vec<_> = enumerate_xi(1, c, false, 100).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].entries(), &[BigInt::from(0)]);
        assert_eq!(all[1].entries(), &[BigInt::from(1)]);

        let c = ctx(3, 1);
        let strict: Vec<_> = enumerate_xi(2, c, true, 100).unwrap().collect();
        let got: Vec<Vec<u64>> = strict
            .iter()
            .map(|t| t.entries().iter().map(|e| e.to_u64().unwrap()).collect())
            .collect();
        assert_eq!(got, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(xi_cardinality(2, c, true), BigInt::from(3));

        let c = ctx(2, 1);
        let weak: Vec<_> = enumerate_xi(2, c, false, 100).unwrap().collect();
        assert_eq!(weak.len(), 3);
        assert_eq!(xi_cardinality(2, c, false), BigInt::from(3));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let c = ctx(7, 3);
        assert!(enumerate_xi(4, c, false, 1000).is_err());
    }

    #[test]
    fn rho_canonical_examples() {
        let c = ctx(5, 1);
        let t = ExponentTuple::from_u64(&[0, 1], c, true).unwrap();
        assert_eq!(rho_canonical(&t).unwrap().entries(), t.entries());

        let t = ExponentTuple::from_u64(&[3, 4], c, true).unwrap();
        let canon = rho_canonical(&t).unwrap();
        assert_eq!(canon.entries(), &[BigInt::from(0), BigInt::from(1)]);

        let t = ExponentTuple::from_u64(&[1, 3], c, true).unwrap();
        let canon = rho_canonical(&t).unwrap();
        assert_eq!(canon.entries(), &[BigInt::from(0), BigInt::from(2)]);

        let t = ExponentTuple::from_u64(&[1, 1], c, false).unwrap();
        assert!(rho_canonical(&t).is_err());
    }

    #[test]
    fn rho_is_idempotent_and_orbit_constant_small() {
        // Exhaustive over Xi^<_{2,1} and Xi^<_{3,1} for p = 5.
        let c = ctx(5, 1);
        for m in [2usize, 3] {
            for t in enumerate_xi(m, c, true, 1000).unwrap() {
                let canon = rho_canonical(&t).unwrap();
                assert_eq!(rho_canonical(&canon).unwrap(), canon);
                // Every shift of t has the same canonical form.
                let modulus = c.modulus();
                let mut shift = BigInt::zero();
                while shift < modulus {
                    let mut entries: Vec<BigInt> = t
                        .entries()
                        .iter()
                        .map(|a| (a + &shift).mod_floor(&modulus))
                        .collect();
                    entries.sort();
                    let shifted = ExponentTuple::new(entries, c, true).unwrap();
                    assert_eq!(rho_canonical(&shifted).unwrap(), canon);
                    shift += 1;
                }
            }
        }
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(1, 5).unwrap(), 0);
        assert_eq!(tau(2, 5).unwrap(), 1);
        assert_eq!(tau(0, 7).unwrap(), 3);
        assert!(tau(5, 5).is_err());
        assert!(tau(1, 2).is_err());
    }

    #[test]
    fn weight_vector_context_agreement() {
        let a = ExponentTuple::from_u64(&[0, 1], ctx(5, 1), true).unwrap();
        let b = ExponentTuple::from_u64(&[0, 1], ctx(7, 1), true).unwrap();
        assert!(WeightVector::new(vec![a.clone(), b]).is_err());
        let w = WeightVector::new(vec![a]).unwrap();
        let norm = w.normalized();
        assert_eq!(norm[0][1], BigRational::new(BigInt::one(), BigInt::from(5)));
    }
}
