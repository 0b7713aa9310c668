//! Strategy descriptors and the dispatch layer tying (ell, L) parameters
//! to a concrete pipeline: the single entry point for callers that think
//! in strategies rather than transform plans.

use num_rational::BigRational;

use crate::costmodel;
use crate::field::{max_ntt_depth, Field, FieldCtx};
use crate::ntt::{self, InnerMul, NttPlan};
use crate::poly::Poly;
use crate::{toom4, Error};

/// Transform depth choice: a fixed depth or the maximal admissible one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepthChoice {
    Fixed(u32),
    Max,
}

/// Toom recursion depth choice: fixed, the cost-model optimum for the
/// weight in use, or the maximal depth (Toom-4 applied as long as the
/// size splits, Karatsuba at the final base level).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelChoice {
    Fixed(u32),
    Optimal,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    Schoolbook,
    Karatsuba,
    Toom4(LevelChoice),
}

/// A strategy tuple before resolution against a concrete (q, n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HybridParams {
    pub ell: DepthChoice,
    pub multiplier: Multiplier,
}

impl HybridParams {
    pub fn schoolbook() -> Self {
        Self {
            ell: DepthChoice::Max,
            multiplier: Multiplier::Schoolbook,
        }
    }

    pub fn karatsuba() -> Self {
        Self {
            ell: DepthChoice::Max,
            multiplier: Multiplier::Karatsuba,
        }
    }

    /// Toom-4 as deep as the size allows, Karatsuba at the base.
    pub fn pure_toom4() -> Self {
        Self {
            ell: DepthChoice::Max,
            multiplier: Multiplier::Toom4(LevelChoice::Max),
        }
    }

    /// The auto strategy: maximal transform depth and the cost-optimal
    /// Toom depth for the supplied weight.
    pub fn auto() -> Self {
        Self {
            ell: DepthChoice::Max,
            multiplier: Multiplier::Toom4(LevelChoice::Optimal),
        }
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = DepthChoice::Fixed(ell);
        self
    }

    pub fn with_toom_levels(mut self, levels: u32) -> Self {
        self.multiplier = Multiplier::Toom4(LevelChoice::Fixed(levels));
        self
    }
}

/// A fully determined pipeline: prebuilt transform plan plus the inner
/// multiplier on the components.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub plan: NttPlan,
    pub inner: InnerMul,
}

impl Resolved {
    pub fn ell(&self) -> u32 {
        self.plan.ell()
    }

    pub fn d(&self) -> usize {
        self.plan.d()
    }

    pub fn toom_levels(&self) -> u32 {
        match self.inner {
            InnerMul::Toom4 { levels } => levels,
            _ => 0,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "ell={} d={} inner={}",
            self.plan.ell(),
            self.plan.d(),
            self.inner
        )
    }
}

/// Resolves a strategy against (q, n, w): picks the transform depth,
/// derives the Toom depth where requested, validates every invariant, and
/// prebuilds the plan.
pub fn resolve(
    ctx: FieldCtx,
    n: usize,
    params: &HybridParams,
    w: &BigRational,
) -> Result<Resolved, Error> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let ell = match params.ell {
        DepthChoice::Fixed(e) => e,
        DepthChoice::Max => max_ntt_depth(ctx, n),
    };
    let plan = NttPlan::new(ctx, n, ell)?;
    let d = plan.d();
    let inner = match params.multiplier {
        Multiplier::Schoolbook => InnerMul::Schoolbook,
        Multiplier::Karatsuba => InnerMul::Karatsuba,
        Multiplier::Toom4(choice) => {
            toom4::require_coprime_to_30(ctx.q())?;
            let max = toom4::max_levels(d);
            let levels = match choice {
                LevelChoice::Fixed(levels) => {
                    if levels > max {
                        return Err(Error::ToomDepthTooLarge { d, levels, max });
                    }
                    levels
                }
                LevelChoice::Optimal => costmodel::optimal_levels(d as u64, w).0,
                LevelChoice::Max => max,
            };
            InnerMul::Toom4 { levels }
        }
    };
    Ok(Resolved { plan, inner })
}

/// The negacyclic product under a resolved strategy.
pub fn negacyclic_mul<F: Field>(
    field: &F,
    resolved: &Resolved,
    f: &Poly,
    g: &Poly,
) -> Result<Poly, Error> {
    ntt::negacyclic_mul(field, &resolved.plan, f, g, resolved.inner)
}
