//! Instrumented counting of field additions/subtractions and
//! multiplications during real multiplications, and the structural checks
//! (recursion of the Toom counts, butterfly-level transform costs) built
//! on top of it.
//!
//! Counting happens at the field layer: [`CountingField`] wraps a
//! [`FieldCtx`] and a [`OpTally`], overriding the tally hooks of the
//! [`Field`] trait. There is exactly one arithmetic implementation; the
//! counted path differs only in the hooks.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use rand::Rng;
use serde::Serialize;

use crate::field::{Field, FieldCtx};
use crate::ntt::{self, NttPlan};
use crate::poly::{self, Poly};
use crate::{karatsuba, toom4, Error};

/// A pair of field-operation tallies. Additive, so parallel sub-runs can
/// be accumulated per branch and summed on join.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub adds: u64,
    pub muls: u64,
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            adds: self.adds + rhs.adds,
            muls: self.muls + rhs.muls,
        }
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        self.adds += rhs.adds;
        self.muls += rhs.muls;
    }
}

impl std::iter::Sum for OpCount {
    fn sum<I: Iterator<Item = OpCount>>(iter: I) -> OpCount {
        iter.fold(OpCount::default(), |a, b| a + b)
    }
}

/// Per-invocation accumulator; never a shared global.
#[derive(Debug, Default)]
pub struct OpTally {
    adds: Cell<u64>,
    muls: Cell<u64>,
}

impl OpTally {
    pub fn new() -> Self {
        Self::default()
    }

    /// A counting view of `ctx` charging into this tally.
    pub fn counting(&self, ctx: FieldCtx) -> CountingField<'_> {
        CountingField { ctx, tally: self }
    }

    pub fn snapshot(&self) -> OpCount {
        OpCount {
            adds: self.adds.get(),
            muls: self.muls.get(),
        }
    }

    pub fn reset(&self) {
        self.adds.set(0);
        self.muls.set(0);
    }
}

/// The counting variant of [`FieldCtx`]: same arithmetic, tallied hooks.
pub struct CountingField<'a> {
    ctx: FieldCtx,
    tally: &'a OpTally,
}

impl Field for CountingField<'_> {
    #[inline]
    fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    #[inline]
    fn note_add(&self) {
        self.tally.adds.set(self.tally.adds.get() + 1);
    }

    #[inline]
    fn note_mul(&self) {
        self.tally.muls.set(self.tally.muls.get() + 1);
    }
}

/// What to measure: one standalone multiplication of the given size, or
/// the transform work (two forwards plus one inverse, no pointwise stage).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureTarget {
    Schoolbook {
        d: usize,
    },
    Karatsuba {
        d: usize,
    },
    /// Scaled Toom-4 multiplication including the final rescale.
    Toom4 {
        d: usize,
        levels: u32,
    },
    Transform {
        n: usize,
        ell: u32,
    },
}

impl std::fmt::Display for MeasureTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureTarget::Schoolbook { d } => write!(f, "schoolbook d={d}"),
            MeasureTarget::Karatsuba { d } => write!(f, "karatsuba d={d}"),
            MeasureTarget::Toom4 { d, levels } => write!(f, "toom4 d={d} L={levels}"),
            MeasureTarget::Transform { n, ell } => write!(f, "transform n={n} ell={ell}"),
        }
    }
}

/// Exact (A, M) tallies of one run of the target. The counts of all these
/// schedules are input-independent, so `trials > 1` only asserts that the
/// measurement is deterministic across fresh random inputs.
pub fn measure<R: Rng + ?Sized>(
    ctx: FieldCtx,
    target: MeasureTarget,
    trials: u32,
    rng: &mut R,
) -> Result<OpCount, Error> {
    assert!(trials >= 1);
    let mut result: Option<OpCount> = None;
    for _ in 0..trials {
        let tally = OpTally::new();
        let field = tally.counting(ctx);
        match target {
            MeasureTarget::Schoolbook { d } => {
                let f = Poly::random(ctx, d, rng);
                let g = Poly::random(ctx, d, rng);
                poly::schoolbook_mul(&field, &f, &g)?;
            }
            MeasureTarget::Karatsuba { d } => {
                let f = Poly::random(ctx, d, rng);
                let g = Poly::random(ctx, d, rng);
                karatsuba::mul(&field, &f, &g)?;
            }
            MeasureTarget::Toom4 { d, levels } => {
                let f = Poly::random(ctx, d, rng);
                let g = Poly::random(ctx, d, rng);
                toom4::mul(&field, &f, &g, levels)?;
            }
            MeasureTarget::Transform { n, ell } => {
                let plan = NttPlan::new(ctx, n, ell)?;
                let f = Poly::random(ctx, n, rng);
                let g = Poly::random(ctx, n, rng);
                let u = ntt::forward(&field, &plan, &f)?;
                ntt::forward(&field, &plan, &g)?;
                ntt::inverse(&field, &plan, &u)?;
            }
        }
        let count = tally.snapshot();
        match result {
            None => result = Some(count),
            Some(prev) => assert_eq!(prev, count, "counts must not depend on input values"),
        }
    }
    Ok(result.expect("at least one trial ran"))
}

// ---------------------------------------------------------------------------
// Structural count checks
// ---------------------------------------------------------------------------

/// One entry of the Toom recursion audit at (d, levels), built from the
/// recursive part only (the rescale is excluded so the sevenfold recursion
/// is visible).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ToomRecursionCheck {
    pub d: usize,
    pub levels: u32,
    pub counts: OpCount,
    pub sub_counts: OpCount,
    /// counts.muls == 7 * sub_counts.muls
    pub muls_recursion_exact: bool,
    /// counts.adds - 7 * sub_counts.adds, a function of d alone.
    pub add_increment: u64,
    /// The frozen per-level constant 54 d - 92.
    pub expected_increment: u64,
    /// The block-size accounting bound 54 d.
    pub bound: u64,
    pub pass: bool,
}

fn toom_scaled_counts<R: Rng + ?Sized>(
    ctx: FieldCtx,
    d: usize,
    levels: u32,
    rng: &mut R,
) -> Result<OpCount, Error> {
    let tally = OpTally::new();
    let field = tally.counting(ctx);
    let f = Poly::random(ctx, d, rng);
    let g = Poly::random(ctx, d, rng);
    toom4::mul_scaled(&field, &f, &g, levels)?;
    Ok(tally.snapshot())
}

/// Audits the count recursion of the scaled Toom-4 multiplication: for
/// every admissible depth L >= 1 on each size, the multiplication count
/// must be exactly seven times the (d/4, L-1) count and the addition
/// increment must equal 54 d - 92 (and stay below the 54 d bound).
pub fn verify_toom_recursion<R: Rng + ?Sized>(
    ctx: FieldCtx,
    sizes: &[usize],
    rng: &mut R,
) -> Result<Vec<ToomRecursionCheck>, Error> {
    let mut memo: BTreeMap<(usize, u32), OpCount> = BTreeMap::new();
    let mut out = Vec::new();
    for &d in sizes {
        for levels in 1..=toom4::max_levels(d) {
            let counts = match memo.get(&(d, levels)) {
                Some(&c) => c,
                None => {
                    let c = toom_scaled_counts(ctx, d, levels, rng)?;
                    memo.insert((d, levels), c);
                    c
                }
            };
            let sub_key = (d / 4, levels - 1);
            let sub_counts = match memo.get(&sub_key) {
                Some(&c) => c,
                None => {
                    let c = toom_scaled_counts(ctx, sub_key.0, sub_key.1, rng)?;
                    memo.insert(sub_key, c);
                    c
                }
            };
            let muls_recursion_exact = counts.muls == 7 * sub_counts.muls;
            let add_increment = counts.adds - 7 * sub_counts.adds;
            let expected_increment = 54 * d as u64 - 92;
            let bound = 54 * d as u64;
            let pass = muls_recursion_exact
                && add_increment == expected_increment
                && add_increment <= bound;
            out.push(ToomRecursionCheck {
                d,
                levels,
                counts,
                sub_counts,
                muls_recursion_exact,
                add_increment,
                expected_increment,
                bound,
                pass,
            });
        }
    }
    Ok(out)
}

/// Transform cost audit: two forward transforms plus one inverse must cost
/// exactly 3 ell n additions and 3 (ell n / 2) + n [ell > 0]
/// multiplications, the butterfly count with the deferred halvings folded
/// into one final scaling pass.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransformCostCheck {
    pub q: u64,
    pub n: usize,
    pub ell: u32,
    pub counts: OpCount,
    pub expected: OpCount,
    pub pass: bool,
}

pub fn verify_transform_cost<R: Rng + ?Sized>(
    ctx: FieldCtx,
    n: usize,
    ell: u32,
    rng: &mut R,
) -> Result<TransformCostCheck, Error> {
    let counts = measure(ctx, MeasureTarget::Transform { n, ell }, 1, rng)?;
    let expected = OpCount {
        adds: 3 * ell as u64 * n as u64,
        muls: 3 * (ell as u64 * n as u64 / 2) + if ell > 0 { n as u64 } else { 0 },
    };
    Ok(TransformCostCheck {
        q: ctx.q(),
        n,
        ell,
        counts,
        expected,
        pass: counts == expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(q: u64) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(2024)
    }

    #[test]
    fn schoolbook_counts() {
        let c = measure(ctx(3329), MeasureTarget::Schoolbook { d: 8 }, 3, &mut rng()).unwrap();
        assert_eq!(c, OpCount { muls: 64, adds: 49 });
    }

    #[test]
    fn karatsuba_counts_match_formulas() {
        let mut r = rng();
        for d in [1usize, 2, 4, 16, 64, 256] {
            let c = measure(ctx(3329), MeasureTarget::Karatsuba { d }, 2, &mut r).unwrap();
            assert_eq!(c.muls as u128, karatsuba::mul_count(d), "muls at d={d}");
            assert_eq!(c.adds as u128, karatsuba::add_count(d), "adds at d={d}");
        }
    }

    #[test]
    fn toom_base_counts() {
        let mut r = rng();
        // Depth 1 on size 4: seven scalar products plus the 2d - 1 = 7
        // rescale multiplications.
        let c = measure(
            ctx(8380417),
            MeasureTarget::Toom4 { d: 4, levels: 1 },
            2,
            &mut r,
        )
        .unwrap();
        assert_eq!(c.muls, 14);
        assert_eq!(c.adds, 124);

        // Depth 0 is Karatsuba with an identity rescale.
        let c = measure(
            ctx(8380417),
            MeasureTarget::Toom4 { d: 16, levels: 0 },
            1,
            &mut r,
        )
        .unwrap();
        assert_eq!(c.muls as u128, karatsuba::mul_count(16));
    }

    #[test]
    fn toom_recursion_audit_small() {
        let mut r = rng();
        let checks = verify_toom_recursion(ctx(8380417), &[16, 64], &mut r).unwrap();
        assert!(!checks.is_empty());
        for check in checks {
            assert!(check.pass, "failed: {check:?}");
            assert_eq!(check.add_increment, 54 * check.d as u64 - 92);
        }
    }

    #[test]
    fn scaled_mul_counts_at_depth_one() {
        // Without the rescale, depth 1 on size 4 is exactly the seven
        // scalar base products.
        let mut r = rng();
        let c = toom_scaled_counts(ctx(8380417), 4, 1, &mut r).unwrap();
        assert_eq!(c.muls, 7);

        // The per-level schedule on size d costs 54 d - 92 additions on
        // top of the seven recursive products.
        let c = toom_scaled_counts(ctx(8380417), 16, 1, &mut r).unwrap();
        let kara4 = OpCount {
            adds: karatsuba::add_count(4) as u64,
            muls: karatsuba::mul_count(4) as u64,
        };
        assert_eq!(c.muls, 7 * kara4.muls);
        assert_eq!(c.adds, 7 * kara4.adds + 54 * 16 - 92);
    }

    #[test]
    fn transform_audit_examples() {
        let mut r = rng();
        let check = verify_transform_cost(ctx(5), 2, 1, &mut r).unwrap();
        assert_eq!(check.expected, OpCount { adds: 6, muls: 5 });
        assert!(check.pass, "{check:?}");

        let check = verify_transform_cost(ctx(3329), 256, 0, &mut r).unwrap();
        assert_eq!(check.expected, OpCount { adds: 0, muls: 0 });
        assert!(check.pass);

        let check = verify_transform_cost(ctx(3329), 256, 7, &mut r).unwrap();
        assert_eq!(
            check.expected,
            OpCount {
                adds: 5376,
                muls: 2944
            }
        );
        assert!(check.pass, "{check:?}");
    }

    #[test]
    fn counting_does_not_change_results() {
        let c = ctx(3329);
        let mut r = rng();
        let f = Poly::random(c, 64, &mut r);
        let g = Poly::random(c, 64, &mut r);
        let tally = OpTally::new();
        let counted = toom4::mul(&tally.counting(c), &f, &g, 2).unwrap();
        let plain = toom4::mul(&c, &f, &g, 2).unwrap();
        assert_eq!(counted.coeffs(), plain.coeffs());
        assert!(tally.snapshot().muls > 0);
    }

    #[test]
    fn tallies_are_additive() {
        let a = OpCount { adds: 3, muls: 4 };
        let b = OpCount { adds: 10, muls: 1 };
        assert_eq!(a + b, OpCount { adds: 13, muls: 5 });
        let total: OpCount = [a, b, a].into_iter().sum();
        assert_eq!(total, OpCount { adds: 16, muls: 9 });
    }
}
