//! The abstract operator algebra and its model action on the disc.
//!
//! The algebra has one basis symbol per order `j >= 0`; the structure
//! constants mix an ordinary multinomial with factorials of the quotients
//! `q_j` from `j = p^(N-1) * q_j + r_j`. Products are computed over exact
//! rationals first and reduced mod p only after an integrality check: a
//! non-integer structure constant would mean the formula was transcribed
//! wrongly, and we want that to abort, not to truncate.
//!
//! The model module with parameter `d` scales the monomial `t^n` by
//! `q_j! * binom(n - d~, j)` under the order-`j` symbol, where `d~` is the
//! lift of `d` into `[0, p^N)`. Binomials with negative upper index go
//! through the exact identity `binom(-m, j) = (-1)^j binom(m+j-1, j)`
//! before the mod-p (Lucas) evaluation, since naive modular division by
//! `j!` is undefined for `j >= p`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::digits::{lift_and_digits, DigitContext};
use crate::error::{Error, Result};

/// `q_j` from the level convention `j = p^(N-1) * q_j + r_j`.
/// For N = 1 this is `q_j = j`.
pub fn q_of(j: u64, ctx: DigitContext) -> BigInt {
    let base = ctx.p_pow(ctx.n() - 1);
    BigInt::from(j).div_floor(&base)
}

fn factorial(k: &BigInt) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = BigInt::from(2);
    while i <= *k {
        acc *= &i;
        i += 1;
    }
    acc
}

/// `k! mod p`; zero as soon as `k >= p`.
fn factorial_mod_p(k: &BigInt, p: u64) -> u64 {
    if *k >= BigInt::from(p) {
        return 0;
    }
    let k = k.to_u64().expect("k < p fits in u64");
    let mut acc: u64 = 1;
    for i in 2..=k {
        acc = ((acc as u128 * i as u128) % p as u128) as u64;
    }
    acc % p
}

/// Structure constant of the basis product: the coefficient of the order-`j`
/// symbol in the product of the order-`j1` and order-`j2` symbols.
///
/// Computed exactly as
/// `j!/((j1+j2-j)! (j-j1)! (j-j2)!) * q_{j1}! q_{j2}! / q_j!`,
/// asserted integral, and reduced mod p.
pub fn b_coeff(j1: u64, j2: u64, j: u64, ctx: DigitContext) -> Result<u64> {
    if j < j1.max(j2) || j > j1 + j2 {
        return Err(Error::input(format!(
            "coefficient index j = {j} outside [max(j1,j2), j1+j2] = [{}, {}]",
            j1.max(j2),
            j1 + j2
        )));
    }
    let jb = BigInt::from(j);
    let multinomial = BigRational::new(
        factorial(&jb),
        factorial(&BigInt::from(j1 + j2 - j))
            * factorial(&BigInt::from(j - j1))
            * factorial(&BigInt::from(j - j2)),
    );
    let q_part = BigRational::new(
        factorial(&q_of(j1, ctx)) * factorial(&q_of(j2, ctx)),
        factorial(&q_of(j, ctx)),
    );
    let exact = multinomial * q_part;
    if !exact.is_integer() {
        return Err(Error::invariant(format!(
            "structure constant for (j1, j2, j) = ({j1}, {j2}, {j}) is the non-integer {exact}"
        )));
    }
    let p = BigInt::from(ctx.p());
    Ok(exact.to_integer().mod_floor(&p).to_u64().unwrap())
}

/// An element of the operator algebra: a finite F_p-linear combination of
/// basis symbols, stored degree -> nonzero residue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorAlgebraElement {
    ctx: DigitContext,
    terms: BTreeMap<u64, u64>,
}

impl OperatorAlgebraElement {
    pub fn zero(ctx: DigitContext) -> Self {
        OperatorAlgebraElement {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    /// The basis symbol of order `j`.
    pub fn basis(j: u64, ctx: DigitContext) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(j, 1);
        OperatorAlgebraElement { ctx, terms }
    }

    pub fn from_terms(terms: &[(u64, u64)], ctx: DigitContext) -> Self {
        let p = ctx.p();
        let mut map = BTreeMap::new();
        for &(j, c) in terms {
            let c = c % p;
            if c != 0 {
                let entry = map.entry(j).or_insert(0u64);
                *entry = (*entry + c) % p;
                if *entry == 0 {
                    map.remove(&j);
                }
            }
        }
        OperatorAlgebraElement { ctx, terms: map }
    }

    pub fn ctx(&self) -> DigitContext {
        self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.terms.iter().map(|(&j, &c)| (j, c))
    }

    pub fn coefficient(&self, j: u64) -> u64 {
        self.terms.get(&j).copied().unwrap_or(0)
    }

    /// Bilinear extension of the basis product.
    pub fn mul(&self, other: &OperatorAlgebraElement) -> Result<OperatorAlgebraElement> {
        if self.ctx != other.ctx {
            return Err(Error::input("operator algebra context mismatch"));
        }
        let p = self.ctx.p() as u128;
        let mut terms: BTreeMap<u64, u64> = BTreeMap::new();
        for (&j1, &c1) in &self.terms {
            for (&j2, &c2) in &other.terms {
                let scale = (c1 as u128 * c2 as u128) % p;
                for j in j1.max(j2)..=j1 + j2 {
                    let b = b_coeff(j1, j2, j, self.ctx)? as u128;
                    let add = (scale * b) % p;
                    if add != 0 {
                        let entry = terms.entry(j).or_insert(0);
                        *entry = ((*entry as u128 + add) % p) as u64;
                    }
                }
            }
        }
        terms.retain(|_, c| *c != 0);
        Ok(OperatorAlgebraElement {
            ctx: self.ctx,
            terms,
        })
    }
}

/// Shorthand for multiplying two elements (the spec-level product).
pub fn b_mul(
    x: &OperatorAlgebraElement,
    y: &OperatorAlgebraElement,
) -> Result<OperatorAlgebraElement> {
    x.mul(y)
}

fn binom_small_mod_p(a: u64, b: u64, p: u64) -> u64 {
    // a, b < p; multiplicative formula with modular inverses.
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    let mut num = 1u64;
    let mut den = 1u64;
    for t in 0..b {
        num = mulmod(num, (a - t) % p);
        den = mulmod(den, t + 1);
    }
    mulmod(num, powmod(den, p - 2))
}

fn lucas(a: &BigUint, b: &BigUint, p: u64) -> u64 {
    let pb = BigUint::from(p);
    let mut a = a.clone();
    let mut b = b.clone();
    let mut acc = 1u64;
    while !b.is_zero() {
        let (aq, ar) = a.div_rem(&pb);
        let (bq, br) = b.div_rem(&pb);
        acc = ((acc as u128
            * binom_small_mod_p(ar.to_u64().unwrap(), br.to_u64().unwrap(), p) as u128)
            % p as u128) as u64;
        if acc == 0 {
            return 0;
        }
        a = aq;
        b = bq;
    }
    acc
}

/// `binom(n, j) mod p` for any integer `n` and `j >= 0`.
pub fn generalized_binomial_mod_p(n: &BigInt, j: u64, p: u64) -> u64 {
    let jb = BigUint::from(j);
    if !n.is_negative() {
        return lucas(n.magnitude(), &jb, p);
    }
    // binom(-m, j) = (-1)^j * binom(m + j - 1, j)
    let m = n.magnitude();
    let top = m + BigUint::from(j) - BigUint::one();
    let unsigned = lucas(&top, &jb, p);
    if j % 2 == 0 || unsigned == 0 {
        unsigned
    } else {
        p - unsigned
    }
}

/// The residue by which the order-`j` symbol scales `t^n` in the model
/// module with parameter `d`: `q_j! * binom(n - d~, j) mod p`.
pub fn nabla_action_scalar(d: &BigInt, j: u64, n: u64, ctx: DigitContext) -> u64 {
    let p = ctx.p();
    let qfact = factorial_mod_p(&q_of(j, ctx), p);
    if qfact == 0 {
        return 0;
    }
    let lift = d.mod_floor(&ctx.modulus());
    let upper = BigInt::from(n) - lift;
    let binom = generalized_binomial_mod_p(&upper, j, p);
    ((qfact as u128 * binom as u128) % p as u128) as u64
}

/// A series truncated at order `M`: exactly `M` residues mod p, the
/// coefficient of `t^n` sitting at index `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    p: u64,
    coeffs: Vec<u64>,
}

impl TruncatedSeries {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.iter().any(|&c| c >= p) {
            return Err(Error::input("series coefficient not reduced mod p"));
        }
        Ok(TruncatedSeries { p, coeffs })
    }

    /// The all-ones series of length `m` (every monomial present).
    pub fn ones(p: u64, m: usize) -> Self {
        TruncatedSeries {
            p,
            coeffs: vec![1; m],
        }
    }

    /// `t^k` truncated at order `m`.
    pub fn monomial(p: u64, k: usize, m: usize) -> Self {
        let mut coeffs = vec![0; m];
        if k < m {
            coeffs[k] = 1;
        }
        TruncatedSeries { p, coeffs }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }
}

/// Apply the order-`j` symbol of the model module with parameter `d`:
/// coefficient-wise scaling, truncation preserved.
pub fn apply_operator(
    d: &BigInt,
    j: u64,
    s: &TruncatedSeries,
    ctx: DigitContext,
) -> Result<TruncatedSeries> {
    if s.p() != ctx.p() {
        return Err(Error::input("series characteristic differs from context"));
    }
    let p = ctx.p() as u128;
    let coeffs = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, &c)| ((nabla_action_scalar(d, j, n as u64, ctx) as u128 * c as u128) % p) as u64)
        .collect();
    Ok(TruncatedSeries {
        p: ctx.p(),
        coeffs,
    })
}

/// Apply a whole algebra element term by term.
pub fn apply_element(
    x: &OperatorAlgebraElement,
    d: &BigInt,
    s: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let ctx = x.ctx();
    if s.p() != ctx.p() {
        return Err(Error::input("series characteristic differs from context"));
    }
    let p = ctx.p() as u128;
    let mut coeffs = vec![0u64; s.order()];
    for (j, c) in x.terms() {
        let scaled = apply_operator(d, j, s, ctx)?;
        for (acc, v) in coeffs.iter_mut().zip(scaled.coeffs()) {
            *acc = ((*acc as u128 + c as u128 * *v as u128) % p) as u64;
        }
    }
    Ok(TruncatedSeries {
        p: ctx.p(),
        coeffs,
    })
}

/// The N-tuple of monodromy scalars of the model module with parameter `d`:
/// the action of the symbols of orders `1, p, ..., p^(N-1)` on the fiber
/// `t^0`. Always equals `negate_digits(d)`.
pub fn monodromy(d: &BigInt, ctx: DigitContext) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(ctx.n() as usize);
    for s in 0..ctx.n() {
        let j = ctx
            .p_pow(s)
            .to_u64()
            .ok_or_else(|| Error::input("p^s exceeds u64; monodromy order out of reach"))?;
        out.push(nabla_action_scalar(d, j, 0, ctx));
    }
    Ok(out)
}

/// Exponents `n < trunc` annihilated by every symbol of order
/// `1 <= j < p^N`, computed by the direct scan. The result always equals
/// `{ n < trunc : n = d~ mod p^N }`.
pub fn solution_exponents(d: &BigInt, trunc: u64, ctx: DigitContext) -> Result<Vec<u64>> {
    let horizon = ctx
        .modulus()
        .to_u64()
        .ok_or_else(|| Error::input("p^N exceeds u64; solution scan out of reach"))?;
    let mut out = Vec::new();
    'next_n: for n in 0..trunc {
        for j in 1..horizon {
            if nabla_action_scalar(d, j, n, ctx) != 0 {
                continue 'next_n;
            }
        }
        out.push(n);
    }
    Ok(out)
}
