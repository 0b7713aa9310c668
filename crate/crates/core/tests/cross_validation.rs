//! Cross-strategy agreement on the negacyclic product: every resolved
//! parameter set over the same (q, n) must produce identical results, and
//! all of them must match the schoolbook-plus-reduction oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toomntt::costmodel;
use toomntt::field::max_ntt_depth;
use toomntt::hybrid::{self, HybridParams};
use toomntt::ntt::{self, InnerMul, NttPlan};
use toomntt::{toom4, FieldCtx, Poly};

fn ctx(q: u64) -> FieldCtx {
    FieldCtx::new(q).unwrap()
}

fn admissible_depths(c: FieldCtx, n: usize) -> Vec<u32> {
    let max = max_ntt_depth(c, n);
    let mut ells = vec![0];
    if max >= 1 {
        ells.push(1);
    }
    if max > 1 {
        ells.push(max);
    }
    ells
}

fn inner_set(d: usize) -> Vec<InnerMul> {
    let w = costmodel::parse_weight("0.2").unwrap();
    let max = toom4::max_levels(d);
    let mut levels = vec![0, 1, costmodel::optimal_levels(d as u64, &w).0, max];
    levels.retain(|&l| l <= max);
    levels.sort_unstable();
    levels.dedup();
    let mut inners = vec![InnerMul::Schoolbook, InnerMul::Karatsuba];
    inners.extend(levels.into_iter().map(|levels| InnerMul::Toom4 { levels }));
    inners
}

#[test]
fn all_strategies_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for q in [3329u64, 8380249] {
        let c = ctx(q);
        for n in [16usize, 64, 256] {
            for ell in admissible_depths(c, n) {
                let plan = NttPlan::new(c, n, ell).unwrap();
                for _ in 0..5 {
                    let f = Poly::random(c, n, &mut rng);
                    let g = Poly::random(c, n, &mut rng);
                    let want = ntt::negacyclic_oracle(&c, &f, &g).unwrap();
                    for inner in inner_set(plan.d()) {
                        let got = ntt::negacyclic_mul(&c, &plan, &f, &g, inner).unwrap();
                        assert_eq!(
                            got.coeffs(),
                            want.coeffs(),
                            "q={q} n={n} ell={ell} inner={inner}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn resolved_parameter_sets_agree_pairwise() {
    let w = costmodel::parse_weight("0.2").unwrap();
    let c = ctx(8380417);
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let f = Poly::random(c, n, &mut rng);
    let g = Poly::random(c, n, &mut rng);

    let mut parameter_sets = vec![
        HybridParams::schoolbook(),
        HybridParams::karatsuba(),
        HybridParams::pure_toom4(),
        HybridParams::auto(),
    ];
    for ell in 0..=max_ntt_depth(c, n) {
        parameter_sets.push(HybridParams::auto().with_ell(ell));
        parameter_sets.push(HybridParams::karatsuba().with_ell(ell));
    }

    let mut reference: Option<Poly> = None;
    for params in parameter_sets {
        let resolved = hybrid::resolve(c, n, &params, &w).unwrap();
        let out = hybrid::negacyclic_mul(&c, &resolved, &f, &g).unwrap();
        match &reference {
            None => reference = Some(out),
            Some(want) => assert_eq!(out.coeffs(), want.coeffs(), "params {params:?} disagree"),
        }
    }
}

#[test]
fn parallel_components_match_serial_pipeline() {
    let c = ctx(3329);
    let mut rng = ChaCha8Rng::seed_from_u64(512);
    let plan = NttPlan::new(c, 256, 4).unwrap();
    for inner in [InnerMul::Karatsuba, InnerMul::Toom4 { levels: 2 }] {
        let f = Poly::random(c, 256, &mut rng);
        let g = Poly::random(c, 256, &mut rng);
        let serial = ntt::negacyclic_mul(&c, &plan, &f, &g, inner).unwrap();
        let u = ntt::forward(&c, &plan, &f).unwrap();
        let v = ntt::forward(&c, &plan, &g).unwrap();
        let h = ntt::pointwise_mul_parallel(&plan, &u, &v, inner).unwrap();
        let parallel = ntt::inverse(&c, &plan, &h).unwrap();
        assert_eq!(serial.coeffs(), parallel.coeffs());
    }
}
