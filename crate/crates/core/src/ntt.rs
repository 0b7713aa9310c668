//! Depth-limited transform over F_q[x]/(x^n + 1): forward and inverse
//! radix-2 butterfly passes, pointwise multiplication of the 2^ell CRT
//! components with a pluggable inner multiplier, and the end-to-end
//! negacyclic product.
//!
//! Depth ell splits x^n + 1 into 2^ell binomials x^d - w_j of degree
//! d = n/2^ell, where the w_j run over the primitive 2^(ell+1)-th roots of
//! unity. Each butterfly level costs n additions and n/2 multiplications;
//! the inverse defers all halvings into one final pass of n
//! multiplications by 2^(-ell).

use rayon::prelude::*;

use crate::field::{max_ntt_depth, primitive_root_of_unity, Field, FieldCtx};
use crate::poly::{self, Poly};
use crate::{karatsuba, toom4, Error};

/// Precomputed tables for one (q, n, ell) triple. Immutable and cheap to
/// share; building one is the only place roots of unity are searched.
#[derive(Clone, Debug)]
pub struct NttPlan {
    ctx: FieldCtx,
    n: usize,
    ell: u32,
    zeta: u64,
    /// Butterfly twiddles in forward visit order (level-major, block order).
    twiddles: Vec<u64>,
    /// Inverses of the twiddles in inverse visit order.
    inv_twiddles: Vec<u64>,
    /// Component moduli roots w_j in the transform's output order.
    omegas: Vec<u64>,
    /// 2^(-ell), applied once at the end of the inverse transform.
    inv_scale: u64,
}

impl NttPlan {
    /// Builds the plan, checking depth admissibility and the binomial
    /// factorization it induces.
    pub fn new(ctx: FieldCtx, n: usize, ell: u32) -> Result<Self, Error> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let max = max_ntt_depth(ctx, n);
        if ell > max {
            return Err(Error::DepthNotAdmissible {
                q: ctx.q(),
                n,
                ell,
                max,
            });
        }
        let zeta = primitive_root_of_unity(ctx, 1u64 << (ell + 1))?;

        // Walk the splitting tree: a block for x^m - zeta^e splits into
        // x^(m/2) -+ zeta^(e/2), i.e. exponents e/2 and e/2 + 2^ell.
        let half_order = 1u64 << ell;
        let mut exponents = vec![half_order];
        let mut twiddles = Vec::new();
        let mut levels = Vec::new();
        for _ in 0..ell {
            let mut next = Vec::with_capacity(exponents.len() * 2);
            let mut level = Vec::with_capacity(exponents.len());
            for &e in &exponents {
                level.push(ctx.pow(zeta, e / 2));
                next.push(e / 2);
                next.push(e / 2 + half_order);
            }
            twiddles.extend_from_slice(&level);
            levels.push(level);
            exponents = next;
        }
        let inv_twiddles: Vec<u64> = levels
            .iter()
            .rev()
            .flat_map(|level| {
                level
                    .iter()
                    .map(|&z| ctx.inv(z).expect("twiddle is nonzero"))
            })
            .collect();
        let omegas: Vec<u64> = exponents.iter().map(|&e| ctx.pow(zeta, e)).collect();
        let inv_scale = ctx.inv((1u64 << ell) % ctx.q())?;

        let plan = Self {
            ctx,
            n,
            ell,
            zeta,
            twiddles,
            inv_twiddles,
            omegas,
            inv_scale,
        };
        plan.check_factorization();
        Ok(plan)
    }

    /// Every component root must be a primitive 2^(ell+1)-th root of unity
    /// and the roots pairwise distinct, which makes the binomials coprime
    /// factors of x^n + 1. For small n the product is also expanded
    /// symbolically.
    fn check_factorization(&self) {
        let ctx = self.ctx;
        let q = ctx.q();
        for &w in &self.omegas {
            assert_eq!(ctx.pow(w, 1u64 << self.ell), q - 1, "w^(2^ell) must be -1");
        }
        let mut sorted = self.omegas.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(
            sorted.len(),
            self.omegas.len(),
            "component roots must be distinct"
        );

        if self.n <= 64 {
            let d = self.d();
            let mut acc = vec![1u64];
            for &w in &self.omegas {
                let mut next = vec![0u64; acc.len() + d];
                for (i, &a) in acc.iter().enumerate() {
                    next[i + d] = ctx.add(next[i + d], a);
                    next[i] = ctx.sub(next[i], ctx.mul(w, a));
                }
                acc = next;
            }
            let mut expect = vec![0u64; self.n + 1];
            expect[0] = 1;
            expect[self.n] = 1;
            assert_eq!(acc, expect, "binomials must multiply back to x^n + 1");
        }
    }

    #[inline]
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Component size d = n / 2^ell.
    #[inline]
    pub fn d(&self) -> usize {
        self.n >> self.ell
    }

    #[inline]
    pub fn num_components(&self) -> usize {
        1 << self.ell
    }

    #[inline]
    pub fn zeta(&self) -> u64 {
        self.zeta
    }

    /// Modulus root of component j: component j holds residues modulo
    /// x^d - omega(j).
    #[inline]
    pub fn omega(&self, j: usize) -> u64 {
        self.omegas[j]
    }

    pub fn omegas(&self) -> &[u64] {
        &self.omegas
    }
}

/// The transform image: 2^ell contiguous blocks of length d in the plan's
/// component order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentVector {
    data: Vec<u64>,
    d: usize,
}

impl ComponentVector {
    #[inline]
    pub fn num_components(&self) -> usize {
        self.data.len() / self.d
    }

    #[inline]
    pub fn block_len(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn component(&self, j: usize) -> &[u64] {
        &self.data[j * self.d..(j + 1) * self.d]
    }

    fn matches(&self, plan: &NttPlan) -> Result<(), Error> {
        if self.d != plan.d() || self.data.len() != plan.n() {
            return Err(Error::LengthMismatch(self.data.len(), plan.n()));
        }
        Ok(())
    }
}

/// Inner multiplier used on the CRT components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMul {
    Schoolbook,
    Karatsuba,
    Toom4 { levels: u32 },
}

impl std::fmt::Display for InnerMul {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InnerMul::Schoolbook => write!(f, "schoolbook"),
            InnerMul::Karatsuba => write!(f, "karatsuba"),
            InnerMul::Toom4 { levels } => write!(f, "toom4(L={levels})"),
        }
    }
}

impl InnerMul {
    fn check(&self, plan: &NttPlan) -> Result<(), Error> {
        if let InnerMul::Toom4 { levels } = *self {
            let d = plan.d();
            let max = toom4::max_levels(d);
            if levels > max {
                return Err(Error::ToomDepthTooLarge { d, levels, max });
            }
            if levels > 0 {
                toom4::require_coprime_to_30(plan.q())?;
            }
        }
        Ok(())
    }

    fn product<F: Field>(&self, field: &F, a: &[u64], b: &[u64]) -> Vec<u64> {
        match *self {
            InnerMul::Schoolbook => poly::schoolbook_raw(field, a, b),
            InnerMul::Karatsuba => karatsuba::mul_raw(field, a, b),
            InnerMul::Toom4 { levels } => toom4::mul_scaled_raw(field, a, b, levels),
        }
    }

    /// Scale factor the raw product carries (Toom levels defer 120^L).
    fn deferred_scale(&self, ctx: FieldCtx) -> Result<Option<u64>, Error> {
        match *self {
            InnerMul::Toom4 { levels } if levels > 0 => {
                let inv = ctx.inv(toom4::SCALE % ctx.q())?;
                Ok(Some(ctx.pow(inv, levels as u64)))
            }
            _ => Ok(None),
        }
    }
}

/// Splits f into its CRT components: ell levels of butterflies, each
/// costing n additions and n/2 twiddle multiplications. Depth 0 is the
/// identity.
pub fn forward<F: Field>(field: &F, plan: &NttPlan, f: &Poly) -> Result<ComponentVector, Error> {
    if f.ctx() != plan.ctx {
        return Err(Error::ModulusMismatch(f.q(), plan.q()));
    }
    if f.len() != plan.n {
        return Err(Error::LengthMismatch(f.len(), plan.n));
    }
    let mut a = f.coeffs().to_vec();
    let mut m = plan.n;
    let mut tw = plan.twiddles.iter();
    for _ in 0..plan.ell {
        let half = m / 2;
        for start in (0..plan.n).step_by(m) {
            let z = *tw.next().expect("twiddle table is complete");
            for j in start..start + half {
                let t = field.mul(z, a[j + half]);
                let u = a[j];
                a[j] = field.add(u, t);
                a[j + half] = field.sub(u, t);
            }
        }
        m = half;
    }
    Ok(ComponentVector {
        data: a,
        d: plan.d(),
    })
}

/// Merges the components back; exact inverse of [`forward`]. The
/// butterfly levels run transposed with halvings deferred, then a single
/// pass multiplies by 2^(-ell) (n multiplications, none when ell = 0).
pub fn inverse<F: Field>(field: &F, plan: &NttPlan, v: &ComponentVector) -> Result<Poly, Error> {
    v.matches(plan)?;
    let mut a = v.data.clone();
    let mut m = 2 * plan.d();
    let mut tw = plan.inv_twiddles.iter();
    for _ in 0..plan.ell {
        let half = m / 2;
        for start in (0..plan.n).step_by(m) {
            let z = *tw.next().expect("twiddle table is complete");
            for j in start..start + half {
                let u = a[j];
                let w = a[j + half];
                a[j] = field.add(u, w);
                a[j + half] = field.mul(z, field.sub(u, w));
            }
        }
        m *= 2;
    }
    if plan.ell > 0 {
        for c in a.iter_mut() {
            *c = field.mul(*c, plan.inv_scale);
        }
    }
    Ok(Poly::from_raw(plan.ctx, a))
}

fn fold_component<F: Field>(
    field: &F,
    prod: &[u64],
    d: usize,
    omega: u64,
    unscale: Option<u64>,
) -> Vec<u64> {
    match unscale {
        // Reduction modulo x^d - omega: (d - 1) multiplications and
        // additions on a full product, multiplication-free for omega = -1.
        None => poly::reduce_binomial_raw(field, prod, d, omega),
        // Toom inner: fold the reduction and the deferred 120^(-L) into
        // one scalar pass, 2d - 1 multiplications and d - 1 additions.
        Some(s) => {
            let t = field.ctx().mul(omega, s);
            let mut out = Vec::with_capacity(d);
            for i in 0..d {
                let lo = field.mul(prod[i], s);
                out.push(if i + d < prod.len() {
                    field.add(lo, field.mul(prod[i + d], t))
                } else {
                    lo
                });
            }
            out
        }
    }
}

/// Component-wise products modulo x^d - w_j with the chosen inner
/// multiplier, including the per-component reduction (and, for Toom
/// inners, the deferred rescale).
pub fn pointwise_mul<F: Field>(
    field: &F,
    plan: &NttPlan,
    u: &ComponentVector,
    v: &ComponentVector,
    inner: InnerMul,
) -> Result<ComponentVector, Error> {
    u.matches(plan)?;
    v.matches(plan)?;
    inner.check(plan)?;
    let d = plan.d();
    let unscale = inner.deferred_scale(plan.ctx)?;
    let mut data = Vec::with_capacity(plan.n);
    for j in 0..plan.num_components() {
        let prod = inner.product(field, u.component(j), v.component(j));
        data.extend_from_slice(&fold_component(field, &prod, d, plan.omega(j), unscale));
    }
    Ok(ComponentVector { data, d })
}

/// [`pointwise_mul`] with the components distributed over threads.
/// Results are identical; operation counting is not available here, so
/// this path is for plain (uncounted) workloads.
pub fn pointwise_mul_parallel(
    plan: &NttPlan,
    u: &ComponentVector,
    v: &ComponentVector,
    inner: InnerMul,
) -> Result<ComponentVector, Error> {
    u.matches(plan)?;
    v.matches(plan)?;
    inner.check(plan)?;
    let d = plan.d();
    let ctx = plan.ctx;
    let unscale = inner.deferred_scale(ctx)?;
    let blocks: Vec<Vec<u64>> = (0..plan.num_components())
        .into_par_iter()
        .map(|j| {
            let prod = inner.product(&ctx, u.component(j), v.component(j));
            fold_component(&ctx, &prod, d, plan.omega(j), unscale)
        })
        .collect();
    Ok(ComponentVector {
        data: blocks.concat(),
        d,
    })
}

/// The full pipeline: transform both operands, multiply component-wise,
/// transform back. Exact for every admissible (ell, inner) combination.
pub fn negacyclic_mul<F: Field>(
    field: &F,
    plan: &NttPlan,
    f: &Poly,
    g: &Poly,
    inner: InnerMul,
) -> Result<Poly, Error> {
    let fu = forward(field, plan, f)?;
    let gu = forward(field, plan, g)?;
    let h = pointwise_mul(field, plan, &fu, &gu, inner)?;
    inverse(field, plan, &h)
}

/// Schoolbook-with-reduction oracle for the negacyclic product; the
/// reference every fast path is checked against.
pub fn negacyclic_oracle<F: Field>(field: &F, f: &Poly, g: &Poly) -> Result<Poly, Error> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    let n = f.len();
    let prod = poly::schoolbook_mul(field, f, g)?;
    poly::reduce_binomial(field, &prod, n, field.q() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(q: u64) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    #[test]
    fn plan_depth_admissibility() {
        let c = ctx(8380403);
        assert!(NttPlan::new(c, 256, 0).is_ok());
        assert!(matches!(
            NttPlan::new(c, 256, 1),
            Err(Error::DepthNotAdmissible { max: 0, .. })
        ));
    }

    #[test]
    fn tiny_plan_components() {
        let c = ctx(5);
        let plan = NttPlan::new(c, 2, 1).unwrap();
        assert_eq!(plan.zeta(), 2);
        assert_eq!(plan.omegas(), &[2, 3]);
        assert_eq!(plan.d(), 1);

        let f = Poly::new(c, vec![3, 4]).unwrap();
        let v = forward(&c, &plan, &f).unwrap();
        // f mod (x - 2) = a + 2b, f mod (x - 3) = a + 3b = a - 2b.
        assert_eq!(v.component(0), &[c.add(3, c.mul(2, 4))]);
        assert_eq!(v.component(1), &[c.sub(3, c.mul(2, 4))]);
    }

    #[test]
    fn depth_zero_is_identity() {
        let c = ctx(8380403);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = NttPlan::new(c, 64, 0).unwrap();
        let f = Poly::random(c, 64, &mut rng);
        let v = forward(&c, &plan, &f).unwrap();
        assert_eq!(v.component(0), f.coeffs());
        let back = inverse(&c, &plan, &v).unwrap();
        assert_eq!(back.coeffs(), f.coeffs());
    }

    #[test]
    fn constants_are_transform_invariant() {
        let c = ctx(3329);
        let plan = NttPlan::new(c, 16, 3).unwrap();
        let mut coeffs = vec![0u64; 16];
        coeffs[0] = 1;
        let f = Poly::new(c, coeffs).unwrap();
        let v = forward(&c, &plan, &f).unwrap();
        for j in 0..plan.num_components() {
            let mut want = vec![0u64; plan.d()];
            want[0] = 1;
            assert_eq!(v.component(j), want);
        }
    }

    #[test]
    fn round_trip_all_admissible_depths() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for ell in 0..=7 {
            let plan = NttPlan::new(c, 256, ell).unwrap();
            for _ in 0..10 {
                let f = Poly::random(c, 256, &mut rng);
                let v = forward(&c, &plan, &f).unwrap();
                let back = inverse(&c, &plan, &v).unwrap();
                assert_eq!(back.coeffs(), f.coeffs(), "ell = {ell}");
            }
        }
    }

    #[test]
    fn components_match_long_division() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (n, ell) in [(8usize, 1u32), (16, 2), (64, 3), (64, 6)] {
            let plan = NttPlan::new(c, n, ell).unwrap();
            let f = Poly::random(c, n, &mut rng);
            let v = forward(&c, &plan, &f).unwrap();
            let d = plan.d();
            for j in 0..plan.num_components() {
                // Long-division remainder of f by x^d - w_j.
                let mut work = f.coeffs().to_vec();
                for i in (d..n).rev() {
                    let carry = c.mul(work[i], plan.omega(j));
                    work[i - d] = c.add(work[i - d], carry);
                    work[i] = 0;
                }
                assert_eq!(v.component(j), &work[..d], "n={n} ell={ell} j={j}");
            }
        }
    }

    #[test]
    fn transform_is_additive() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let plan = NttPlan::new(c, 64, 4).unwrap();
        let f = Poly::random(c, 64, &mut rng);
        let g = Poly::random(c, 64, &mut rng);
        let sum = crate::poly::add(&c, &f, &g).unwrap();
        let vf = forward(&c, &plan, &f).unwrap();
        let vg = forward(&c, &plan, &g).unwrap();
        let vsum = forward(&c, &plan, &sum).unwrap();
        for j in 0..plan.num_components() {
            let want: Vec<u64> = vf
                .component(j)
                .iter()
                .zip(vg.component(j))
                .map(|(&x, &y)| c.add(x, y))
                .collect();
            assert_eq!(vsum.component(j), want);
        }
    }

    #[test]
    fn defining_relation_x_squared() {
        // x * x = -1 in F_q[x]/(x^2 + 1).
        let c = ctx(5);
        let plan = NttPlan::new(c, 2, 1).unwrap();
        let x = Poly::new(c, vec![0, 1]).unwrap();
        let sq = negacyclic_mul(&c, &plan, &x, &x, InnerMul::Schoolbook).unwrap();
        assert_eq!(sq.coeffs(), &[4, 0]);
    }

    #[test]
    fn multiplicative_identity() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for ell in [0u32, 1, 4, 7] {
            let plan = NttPlan::new(c, 256, ell).unwrap();
            let f = Poly::random(c, 256, &mut rng);
            let one = Poly::one(c, 256);
            for inner in [
                InnerMul::Schoolbook,
                InnerMul::Karatsuba,
                InnerMul::Toom4 { levels: 0 },
            ] {
                let prod = negacyclic_mul(&c, &plan, &f, &one, inner).unwrap();
                assert_eq!(prod.coeffs(), f.coeffs(), "ell={ell} inner={inner}");
            }
        }
    }

    #[test]
    fn pointwise_identity_components() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let plan = NttPlan::new(c, 64, 2).unwrap();
        let f = Poly::random(c, 64, &mut rng);
        let u = forward(&c, &plan, &f).unwrap();
        let one = forward(&c, &plan, &Poly::one(c, 64)).unwrap();
        let prod = pointwise_mul(&c, &plan, &u, &one, InnerMul::Karatsuba).unwrap();
        assert_eq!(prod, u);
    }

    #[test]
    fn strategies_agree_with_oracle() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for ell in [0u32, 1, 4] {
            let plan = NttPlan::new(c, 64, ell).unwrap();
            let d = plan.d();
            let f = Poly::random(c, 64, &mut rng);
            let g = Poly::random(c, 64, &mut rng);
            let want = negacyclic_oracle(&c, &f, &g).unwrap();
            let mut inners = vec![InnerMul::Schoolbook, InnerMul::Karatsuba];
            for levels in 0..=toom4::max_levels(d) {
                inners.push(InnerMul::Toom4 { levels });
            }
            for inner in inners {
                let got = negacyclic_mul(&c, &plan, &f, &g, inner).unwrap();
                assert_eq!(got.coeffs(), want.coeffs(), "ell={ell} inner={inner}");
            }
        }
    }

    #[test]
    fn parallel_pointwise_matches_serial() {
        let c = ctx(8380417);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let plan = NttPlan::new(c, 256, 4).unwrap();
        let f = Poly::random(c, 256, &mut rng);
        let g = Poly::random(c, 256, &mut rng);
        let u = forward(&c, &plan, &f).unwrap();
        let v = forward(&c, &plan, &g).unwrap();
        for inner in [
            InnerMul::Schoolbook,
            InnerMul::Karatsuba,
            InnerMul::Toom4 { levels: 2 },
        ] {
            let serial = pointwise_mul(&c, &plan, &u, &v, inner).unwrap();
            let parallel = pointwise_mul_parallel(&plan, &u, &v, inner).unwrap();
            assert_eq!(serial, parallel, "inner={inner}");
        }
    }

    #[test]
    fn toom_inner_depth_bound() {
        let c = ctx(3329);
        let plan = NttPlan::new(c, 64, 2).unwrap();
        let f = Poly::zeros(c, 64);
        let err = negacyclic_mul(&c, &plan, &f, &f, InnerMul::Toom4 { levels: 3 });
        assert!(matches!(
            err,
            Err(Error::ToomDepthTooLarge {
                d: 16,
                levels: 3,
                max: 2
            })
        ));
    }
}
