//! The selftest subcommand: a compact verification pass over every layer,
//! one PASS/FAIL line per check, exit 0 only when everything holds.

use std::process::ExitCode;

use anyhow::Result;
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toomntt::addchain;
use toomntt::costmodel;
use toomntt::field::max_ntt_depth;
use toomntt::ntt::{self, InnerMul, NttPlan};
use toomntt::opcounter::{self, MeasureTarget};
use toomntt::{toom4, FieldCtx, Poly};

#[derive(Args)]
pub struct SelftestArgs {
    /// Also print a JSON operation-count report per (strategy, size)
    #[arg(long)]
    counts: bool,
}

fn ctx(q: u64) -> FieldCtx {
    FieldCtx::new(q).expect("self-test moduli are valid")
}

/// Admissible depths {0, 1, ell_max} for the given pair, deduplicated.
fn depth_set(c: FieldCtx, n: usize) -> Vec<u32> {
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

/// Inner multipliers for subproblem size d: schoolbook, Karatsuba, and
/// Toom-4 at depths {0, 1, optimal, maximal} where admissible.
fn inner_set(d: usize) -> Vec<InnerMul> {
    let mut inners = vec![InnerMul::Schoolbook, InnerMul::Karatsuba];
    let max = toom4::max_levels(d);
    let w = costmodel::parse_weight("0.2").unwrap();
    let mut levels: Vec<u32> = vec![0, 1, costmodel::optimal_levels(d as u64, &w).0, max];
    levels.retain(|&l| l <= max);
    levels.sort_unstable();
    levels.dedup();
    inners.extend(levels.into_iter().map(|levels| InnerMul::Toom4 { levels }));
    inners
}

fn check_oracle_equivalence() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for q in [3329u64, 8380403, 8380369] {
        let c = ctx(q);
        for n in [16usize, 64] {
            for ell in depth_set(c, n) {
                let plan = NttPlan::new(c, n, ell).map_err(|e| e.to_string())?;
                for _ in 0..3 {
                    let f = Poly::random(c, n, &mut rng);
                    let g = Poly::random(c, n, &mut rng);
                    let want = ntt::negacyclic_oracle(&c, &f, &g).map_err(|e| e.to_string())?;
                    for inner in inner_set(plan.d()) {
                        let got = ntt::negacyclic_mul(&c, &plan, &f, &g, inner)
                            .map_err(|e| e.to_string())?;
                        if got.coeffs() != want.coeffs() {
                            return Err(format!(
                                "strategy {inner} disagrees with the oracle at q={q} n={n} ell={ell}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_round_trips() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(159);
    for q in [3329u64, 8380403, 8380381, 8380249, 8380369, 8380417] {
        let c = ctx(q);
        for n in [16usize, 64] {
            for ell in depth_set(c, n) {
                let plan = NttPlan::new(c, n, ell).map_err(|e| e.to_string())?;
                for _ in 0..10 {
                    let f = Poly::random(c, n, &mut rng);
                    let v = ntt::forward(&c, &plan, &f).map_err(|e| e.to_string())?;
                    let back = ntt::inverse(&c, &plan, &v).map_err(|e| e.to_string())?;
                    if back.coeffs() != f.coeffs() {
                        return Err(format!("round-trip failed at q={q} n={n} ell={ell}"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_toom_counts() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(265);
    let checks = opcounter::verify_toom_recursion(ctx(8380417), &[16, 64], &mut rng)
        .map_err(|e| e.to_string())?;
    for check in checks {
        if !check.pass {
            return Err(format!(
                "count recursion failed at d={} L={}: muls sevenfold={}, add increment {} (expected {}, bound {})",
                check.d,
                check.levels,
                check.muls_recursion_exact,
                check.add_increment,
                check.expected_increment,
                check.bound
            ));
        }
    }
    Ok(())
}

fn check_transform_costs() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(358);
    for (q, n, ell) in [(5u64, 2usize, 1u32), (3329, 256, 7), (8380417, 256, 8)] {
        let check = opcounter::verify_transform_cost(ctx(q), n, ell, &mut rng)
            .map_err(|e| e.to_string())?;
        if !check.pass {
            return Err(format!(
                "transform cost mismatch at q={q} n={n} ell={ell}: measured {:?}, expected {:?}",
                check.counts, check.expected
            ));
        }
    }
    Ok(())
}

fn check_cost_table() -> Result<(), String> {
    let mismatches = costmodel::diff_reference_table();
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(mismatches.join("; "))
    }
}

fn check_chains() -> Result<(), String> {
    let expected = [11usize, 10, 8, 7, 4, 3, 15];
    let mut total = 0;
    for (labeled, want) in addchain::toom4_chains().iter().zip(expected) {
        labeled
            .chain
            .validate()
            .map_err(|d| format!("chain for point {}: {d}", labeled.point))?;
        if labeled.chain.additions() != want {
            return Err(format!(
                "chain for point {} has length {}, expected {want}",
                labeled.point,
                labeled.chain.additions()
            ));
        }
        total += labeled.chain.additions();
    }
    if total != 58 {
        return Err(format!("chain lengths sum to {total}, expected 58"));
    }
    Ok(())
}

fn count_report() -> Vec<serde_json::Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(979);
    let c = ctx(8380417);
    let mut targets = vec![
        MeasureTarget::Schoolbook { d: 8 },
        MeasureTarget::Schoolbook { d: 64 },
        MeasureTarget::Karatsuba { d: 16 },
        MeasureTarget::Karatsuba { d: 256 },
        MeasureTarget::Toom4 { d: 16, levels: 1 },
        MeasureTarget::Toom4 { d: 256, levels: 1 },
        MeasureTarget::Toom4 { d: 256, levels: 4 },
    ];
    targets.push(MeasureTarget::Transform { n: 256, ell: 8 });
    let mut out = Vec::new();
    for target in targets {
        let counts = opcounter::measure(c, target, 2, &mut rng).expect("measurable target");
        out.push(serde_json::json!({
            "q": c.q(),
            "target": target.to_string(),
            "adds": counts.adds,
            "muls": counts.muls,
        }));
    }
    let kyber = ctx(3329);
    let counts = opcounter::measure(
        kyber,
        MeasureTarget::Transform { n: 256, ell: 7 },
        2,
        &mut rng,
    )
    .expect("measurable target");
    out.push(serde_json::json!({
        "q": kyber.q(),
        "target": "transform n=256 ell=7",
        "adds": counts.adds,
        "muls": counts.muls,
    }));
    out
}

type Check = fn() -> Result<(), String>;

pub fn run(args: &SelftestArgs, json: bool) -> Result<ExitCode> {
    let checks: [(&str, Check); 6] = [
        ("oracle-equivalence", check_oracle_equivalence),
        ("transform-round-trip", check_round_trips),
        ("toom-count-recursion", check_toom_counts),
        ("transform-cost", check_transform_costs),
        ("cost-table", check_cost_table),
        ("chains", check_chains),
    ];
    let mut all_ok = true;
    let mut results = Vec::new();
    for (name, check) in checks {
        let outcome = check();
        let ok = outcome.is_ok();
        all_ok &= ok;
        if json {
            results.push(serde_json::json!({
                "check": name,
                "pass": ok,
                "detail": outcome.err(),
            }));
        } else {
            match outcome {
                Ok(()) => println!("PASS {name}"),
                Err(detail) => println!("FAIL {name}: {detail}"),
            }
        }
    }
    if json {
        println!("{}", serde_json::json!({"checks": results, "pass": all_ok}));
    }
    if args.counts {
        println!("{}", serde_json::json!(count_report()));
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
