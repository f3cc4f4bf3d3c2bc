//! Split local models on the disc and the pull-back / descent pair.
//!
//! A parabolic datum is the split model of a weighted flag on the Frobenius
//! twist of the disc: weights paired with step ranks. A flat datum is the
//! split normal form of a flat module: the multiset of exponents. Pull-back
//! sends weight/rank steps to exponent atoms; descent reads the weights and
//! ranks back off the atoms. The two are mutually inverse, and the
//! determinant twist `s = sum a^[j] * l^[j]` is preserved.
//!
//! Parabolic data are kept in merged normal form: adjacent equal weights
//! coalesce into one step with the ranks summed. The flat side only ever
//! sees the exponent multiset, so this normal form is exactly what makes
//! descent-after-pull-back the identity on every constructible datum.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::digits::{split_m, DigitContext, ExponentTuple, TupleSplit};
use crate::error::{Error, Result};

/// One step of a quasi-parabolic flag: an exponent (or weight) and the rank
/// it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagStep {
    pub exponent: BigInt,
    pub rank: u64,
}

/// Split parabolic datum: weights in `Xi^<=` (merged to strict normal form)
/// and positive step ranks of matching length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalParabolicDatum {
    ctx: DigitContext,
    weights: Vec<BigInt>,
    flag_type: Vec<u64>,
}

impl LocalParabolicDatum {
    pub fn new(ctx: DigitContext, weights: Vec<BigInt>, flag_type: Vec<u64>) -> Result<Self> {
        if weights.len() != flag_type.len() {
            return Err(Error::input(
                "weights and type must have the same length",
            ));
        }
        if flag_type.iter().any(|&l| l == 0) {
            return Err(Error::input("every type entry must be >= 1"));
        }
        let modulus = ctx.modulus();
        for w in &weights {
            if w.is_negative() || *w >= modulus {
                return Err(Error::input(format!("weight {w} outside [0, p^N)")));
            }
        }
        if weights.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("weights must be weakly increasing"));
        }
        // Merge adjacent equal weights into one step.
        let mut merged_w: Vec<BigInt> = Vec::with_capacity(weights.len());
        let mut merged_t: Vec<u64> = Vec::with_capacity(flag_type.len());
        for (w, l) in weights.into_iter().zip(flag_type) {
            if merged_w.last() == Some(&w) {
                *merged_t.last_mut().unwrap() += l;
            } else {
                merged_w.push(w);
                merged_t.push(l);
            }
        }
        Ok(LocalParabolicDatum {
            ctx,
            weights: merged_w,
            flag_type: merged_t,
        })
    }

    pub fn from_u64(ctx: DigitContext, weights: &[u64], flag_type: &[u64]) -> Result<Self> {
        Self::new(
            ctx,
            weights.iter().map(|&w| BigInt::from(w)).collect(),
            flag_type.to_vec(),
        )
    }

    pub fn ctx(&self) -> DigitContext {
        self.ctx
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn flag_type(&self) -> &[u64] {
        &self.flag_type
    }

    /// The weights as an exponent tuple (strict after merging).
    pub fn weight_tuple(&self) -> ExponentTuple {
        ExponentTuple::new(self.weights.clone(), self.ctx, true)
            .expect("merged weights are strictly increasing")
    }

    pub fn steps(&self) -> Vec<FlagStep> {
        self.weights
            .iter()
            .zip(&self.flag_type)
            .map(|(w, &l)| FlagStep {
                exponent: w.clone(),
                rank: l,
            })
            .collect()
    }

    pub fn rank(&self) -> u64 {
        self.flag_type.iter().sum()
    }
}

/// Split flat datum: the exponent multiset of a flat module in normal form,
/// stored as ascending atoms (exponent, multiplicity) with distinct
/// exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFlatDatum {
    ctx: DigitContext,
    atoms: Vec<(BigInt, u64)>,
}

impl LocalFlatDatum {
    /// Atoms may arrive in any order and with repeats; they are sorted and
    /// merged here. Multiplicities must be positive.
    pub fn new(ctx: DigitContext, atoms: Vec<(BigInt, u64)>) -> Result<Self> {
        let modulus = ctx.modulus();
        for (e, m) in &atoms {
            if *m == 0 {
                return Err(Error::input("atom multiplicity must be >= 1"));
            }
            if e.is_negative() || *e >= modulus {
                return Err(Error::input(format!("exponent {e} outside [0, p^N)")));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(BigInt, u64)> = Vec::with_capacity(atoms.len());
        for (e, m) in atoms {
            if let Some(last) = merged.last_mut() {
                if last.0 == e {
                    last.1 += m;
                    continue;
                }
            }
            merged.push((e, m));
        }
        Ok(LocalFlatDatum { ctx, atoms: merged })
    }

    pub fn from_u64(ctx: DigitContext, atoms: &[(u64, u64)]) -> Result<Self> {
        Self::new(
            ctx,
            atoms.iter().map(|&(e, m)| (BigInt::from(e), m)).collect(),
        )
    }

    pub fn ctx(&self) -> DigitContext {
        self.ctx
    }

    pub fn atoms(&self) -> &[(BigInt, u64)] {
        &self.atoms
    }

    pub fn rank(&self) -> u64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }
}

/// Either kind of local datum; convenient for operations defined on both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalDatum {
    Parabolic(LocalParabolicDatum),
    Flat(LocalFlatDatum),
}

/// Pull a parabolic datum back to its flat model.
///
/// The atoms are `(a^[j], l^[j])`; the returned flag records the induced
/// filtration steps (each obtained by forgetting the last summand), which
/// carry the datum's step order rather than the merged multiset.
pub fn local_pullback(e: &LocalParabolicDatum) -> (LocalFlatDatum, Vec<FlagStep>) {
    let atoms: Vec<(BigInt, u64)> = e
        .weights()
        .iter()
        .zip(e.flag_type())
        .map(|(w, &l)| (w.clone(), l))
        .collect();
    let flag = e.steps();
    let flat = LocalFlatDatum::new(e.ctx(), atoms).expect("parabolic datum entries are in range");
    (flat, flag)
}

/// Descend a flat datum to the parabolic datum it came from: weights are
/// the distinct exponents in ascending order, type the multiplicities.
pub fn local_descent(f: &LocalFlatDatum) -> LocalParabolicDatum {
    let weights: Vec<BigInt> = f.atoms().iter().map(|(e, _)| e.clone()).collect();
    let flag_type: Vec<u64> = f.atoms().iter().map(|(_, m)| *m).collect();
    LocalParabolicDatum::new(f.ctx(), weights, flag_type)
        .expect("flat atoms are valid parabolic data")
}

/// The determinant data of a local datum: the twist `s = sum a^[j] l^[j]`
/// and its residue mod `p^N`.
pub fn local_det(x: &LocalDatum) -> (BigInt, BigInt) {
    let (ctx, pairs): (DigitContext, Vec<(BigInt, u64)>) = match x {
        LocalDatum::Parabolic(e) => (
            e.ctx(),
            e.weights()
                .iter()
                .zip(e.flag_type())
                .map(|(w, &l)| (w.clone(), l))
                .collect(),
        ),
        LocalDatum::Flat(f) => (f.ctx(), f.atoms().to_vec()),
    };
    let twist: BigInt = pairs
        .iter()
        .map(|(e, m)| e * BigInt::from(*m))
        .sum();
    let residue = twist.mod_floor(&ctx.modulus());
    (twist, residue)
}

/// The unique flag forced on a flat datum whose exponents are pairwise
/// distinct (multiplicity one everywhere): one line per exponent, ascending.
/// Errors if any exponent repeats, where uniqueness fails.
pub fn canonical_flag(f: &LocalFlatDatum) -> Result<Vec<FlagStep>> {
    if let Some((e, m)) = f.atoms().iter().find(|(_, m)| *m > 1) {
        return Err(Error::input(format!(
            "exponent {e} has multiplicity {m}; the forced flag needs pairwise distinct exponents"
        )));
    }
    Ok(f.atoms()
        .iter()
        .map(|(e, _)| FlagStep {
            exponent: e.clone(),
            rank: 1,
        })
        .collect())
}

/// Check that the one-shot pull-back agrees with the two-stage one.
///
/// Stage one pulls back the `s2` weights at level `N - M`, stage two the
/// `s1` weights at level `M`; the composite exponent of a step is
/// `s1 + p^M * s2`. Requires the stage weights to be monotone (the split
/// tuples must again be weight data), otherwise errors.
pub fn transitivity_check(e: &LocalParabolicDatum, m: u32) -> Result<bool> {
    let TupleSplit { s1, s2, monotone } = crate::digits::split_tuple_monotone(&e.weight_tuple(), m)?;
    if !monotone {
        return Err(Error::input(
            "stage splitting is not monotone; two-stage pull-back weights undefined",
        ));
    }
    let (one_shot, _) = local_pullback(e);

    // Stage one: flat atoms over exponents s2 (level N - M), one per step.
    // Stage two re-twists each step by s1 at level M. Steps recombine as
    // s1 + p^M * s2 and only then merge into atoms.
    let pm = e.ctx().p_pow(m);
    let mut recombined: Vec<(BigInt, u64)> = Vec::with_capacity(s1.len());
    for ((a1, a2), &l) in s1.iter().zip(&s2).zip(e.flag_type()) {
        // Consistency of the stage data with the original weights.
        let (c1, c2) = split_m(&(a1 + &pm * a2), m, e.ctx())?;
        debug_assert_eq!((&c1, &c2), (a1, a2));
        recombined.push((a1 + &pm * a2, l));
    }
    let two_stage = LocalFlatDatum::new(e.ctx(), recombined)?;
    Ok(two_stage == one_shot)
}
