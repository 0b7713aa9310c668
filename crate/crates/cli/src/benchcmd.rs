//! The bench subcommand: wall-clock medians of the negacyclic
//! multiplication under each strategy, on shared seeded inputs.
//!
//! Absolute times are environment-specific; the only contract offered is
//! the ordering assertion, which mirrors what the cost model predicts.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Result};
use clap::Args;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toomntt::hybrid;
use toomntt::Poly;

use crate::{strategy_params, Common, StrategyArg};

#[derive(Args)]
pub struct BenchArgs {
    /// Timed trials per strategy; the median is reported
    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Strategies to time
    #[arg(long, value_delimiter = ',', num_args = 1..,
          default_values_t = [StrategyArg::Karatsuba, StrategyArg::Toom4, StrategyArg::Hybrid])]
    strategies: Vec<StrategyArg>,

    /// Exit nonzero unless hybrid <= toom4, and hybrid <= karatsuba
    /// whenever the resolved Toom depth is positive
    #[arg(long)]
    assert_ordering: bool,
}

struct BenchRecord {
    strategy: StrategyArg,
    ell: u32,
    levels: u32,
    median_ms: f64,
    trials: usize,
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

pub fn run(common: &Common, args: &BenchArgs, w: &BigRational, json: bool) -> Result<ExitCode> {
    assert!(args.trials >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let inputs: Vec<(Poly, Poly)> = (0..args.trials)
        .map(|_| {
            (
                Poly::random(common.ctx, common.n, &mut rng),
                Poly::random(common.ctx, common.n, &mut rng),
            )
        })
        .collect();

    let mut records = Vec::new();
    for &strategy in &args.strategies {
        let params = strategy_params(strategy, common.ell, common.levels)?;
        let resolved =
            hybrid::resolve(common.ctx, common.n, &params, w).map_err(|e| anyhow!("{e}"))?;
        // Two warm-up runs before the measured trials.
        for (f, g) in inputs.iter().cycle().take(2) {
            hybrid::negacyclic_mul(&common.ctx, &resolved, f, g)?;
        }
        let mut samples = Vec::with_capacity(args.trials);
        for (f, g) in &inputs {
            let start = Instant::now();
            let out = hybrid::negacyclic_mul(&common.ctx, &resolved, f, g)?;
            samples.push(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(out);
        }
        records.push(BenchRecord {
            strategy,
            ell: resolved.ell(),
            levels: resolved.toom_levels(),
            median_ms: median(samples),
            trials: args.trials,
        });
    }

    if json {
        let items: Vec<serde_json::Value> = records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": common.n,
                    "q": common.ctx.q(),
                    "ell": r.ell,
                    "strategy": r.strategy.to_string(),
                    "L": r.levels,
                    "median_ms": r.median_ms,
                    "trials": r.trials,
                })
            })
            .collect();
        println!("{}", serde_json::json!(items));
    } else {
        println!(
            "n = {}, q = {}, trials = {}",
            common.n,
            common.ctx.q(),
            args.trials
        );
        for r in &records {
            println!(
                "{:>10}  ell = {}, L = {}: median {:.3} ms",
                r.strategy.to_string(),
                r.ell,
                r.levels,
                r.median_ms
            );
        }
    }

    if args.assert_ordering {
        let find = |s: StrategyArg| records.iter().find(|r| r.strategy == s);
        let hybrid = find(StrategyArg::Hybrid)
            .ok_or_else(|| anyhow!("--assert-ordering needs the hybrid strategy"))?;
        let mut ok = true;
        if let Some(kara) = find(StrategyArg::Karatsuba) {
            if hybrid.levels > 0 && hybrid.median_ms > kara.median_ms {
                eprintln!(
                    "ordering violated: hybrid {:.3} ms > karatsuba {:.3} ms with L = {}",
                    hybrid.median_ms, kara.median_ms, hybrid.levels
                );
                ok = false;
            }
        }
        if let Some(toom) = find(StrategyArg::Toom4) {
            if hybrid.median_ms > toom.median_ms {
                eprintln!(
                    "ordering violated: hybrid {:.3} ms > toom4 {:.3} ms",
                    hybrid.median_ms, toom.median_ms
                );
                ok = false;
            }
        }
        if !ok {
            return Ok(ExitCode::FAILURE);
        }
        eprintln!("ordering: ok");
    }
    Ok(ExitCode::SUCCESS)
}
