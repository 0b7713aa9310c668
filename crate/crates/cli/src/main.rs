mod benchcmd;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toomntt::addchain::{self, SearchBudget, SearchOutcome};
use toomntt::costmodel::{self, format_one_decimal};
use toomntt::field::{max_ntt_depth, two_adic_valuation};
use toomntt::hybrid::{self, HybridParams};
use toomntt::{ntt, toom4, FieldCtx, OpTally, Poly};

#[derive(Parser)]
#[command(
    name = "toomntt",
    version,
    about = "Negacyclic polynomial multiplication over F_q[x]/(x^n+1): a depth-limited transform \
             with Toom-4/Karatsuba inner multipliers, plus the matching cost model and audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Modulus q (odd prime below 2^62)
    #[arg(long, global = true)]
    q: Option<u64>,

    /// Ring size n (power of two)
    #[arg(long, global = true)]
    n: Option<u64>,

    /// Transform depth; defaults to the maximal admissible depth
    #[arg(long, global = true)]
    ell: Option<u32>,

    /// Toom-4 recursion depth (strategy toom4 only)
    #[arg(long = "L", global = true)]
    levels: Option<u32>,

    /// Relative cost of one addition versus one multiplication
    #[arg(long, global = true, default_value = "0.2")]
    w: String,

    /// Seed for the deterministic input generator (ChaCha8)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report the admissible transform depth and suggested parameters
    Params,
    /// Multiply two polynomials in F_q[x]/(x^n + 1)
    Mul(MulArgs),
    /// Emit the strategy-comparison cost table
    CostTable(CostTableArgs),
    /// Pick the cheapest modeled (ell, strategy, L) for given q and n
    Optimize,
    /// Time the strategies on random inputs and report medians
    Bench(benchcmd::BenchArgs),
    /// Validate or search addition chains
    Chains(ChainsArgs),
    /// Run the built-in verification suite
    Selftest(selftest::SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Schoolbook,
    Karatsuba,
    /// Toom-4 as deep as possible, or at the explicit --L depth
    Toom4,
    /// Toom-4 at the cost-model-optimal depth for the weight w
    Hybrid,
}

impl std::fmt::Display for StrategyArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StrategyArg::Schoolbook => "schoolbook",
            StrategyArg::Karatsuba => "karatsuba",
            StrategyArg::Toom4 => "toom4",
            StrategyArg::Hybrid => "hybrid",
        };
        f.write_str(s)
    }
}

#[derive(Args)]
struct MulArgs {
    /// Input polynomial files (JSON); exactly two, or none with --random
    files: Vec<PathBuf>,

    /// Generate two seeded random inputs instead of reading files
    #[arg(long)]
    random: bool,

    #[arg(long, value_enum, default_value_t = StrategyArg::Hybrid)]
    strategy: StrategyArg,

    /// Cross-validate the product against the schoolbook oracle
    #[arg(long)]
    check: bool,

    /// Append an operation-count report
    #[arg(long)]
    counts: bool,

    /// Multiply the CRT components in parallel (plain runs only)
    #[arg(long)]
    parallel: bool,

    /// Output file for the product (stdout if omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostTableArgs {
    /// Ring sizes for the table
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sizes: Option<Vec<u64>>,

    /// Compare against the built-in reference table; exit nonzero on any
    /// mismatch
    #[arg(long)]
    diff_paper: bool,

    /// CSV output (header n,ell,d,karatsuba,toom4,hybrid,L_opt)
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ChainsArgs {
    #[command(subcommand)]
    command: ChainsCommand,
}

#[derive(Subcommand)]
enum ChainsCommand {
    /// Validate the seven stored interpolation chains
    Verify,
    /// Search a shortest chain for a target set
    Search {
        /// Comma-separated positive targets, e.g. 4,5
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        targets: Vec<u64>,
        /// Largest chain length to try
        #[arg(long, default_value_t = 12)]
        max_len: u32,
        /// Time budget in seconds
        #[arg(long)]
        budget_secs: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let w = costmodel::parse_weight(&cli.w).map_err(|e| anyhow!("{e}"))?;
    match &cli.command {
        Command::Params => cmd_params(&cli, &w),
        Command::Mul(args) => cmd_mul(&cli, args, &w),
        Command::CostTable(args) => cmd_cost_table(&cli, args, &w),
        Command::Optimize => cmd_optimize(&cli, &w),
        Command::Bench(args) => benchcmd::run(&cli_common(&cli)?, args, &w, cli.json),
        Command::Chains(args) => cmd_chains(&cli, args),
        Command::Selftest(args) => selftest::run(args, cli.json),
    }
}

/// The (q, n) pair most commands need, validated.
pub struct Common {
    pub ctx: FieldCtx,
    pub n: usize,
    pub ell: Option<u32>,
    pub levels: Option<u32>,
    pub seed: u64,
}

fn cli_common(cli: &Cli) -> Result<Common> {
    let q = cli.q.context("--q is required")?;
    let n = cli.n.context("--n is required")? as usize;
    let ctx = FieldCtx::new(q).map_err(|e| anyhow!("{e}"))?;
    if !n.is_power_of_two() {
        bail!("--n must be a power of two, got {n}");
    }
    Ok(Common {
        ctx,
        n,
        ell: cli.ell,
        levels: cli.levels,
        seed: cli.seed,
    })
}

fn cmd_params(cli: &Cli, w: &BigRational) -> Result<ExitCode> {
    let common = cli_common(cli)?;
    let q = common.ctx.q();
    let v2 = two_adic_valuation(q - 1);
    let ell_max = max_ntt_depth(common.ctx, common.n);
    let d = common.n >> ell_max;
    let (l_opt, cost) = costmodel::optimal_levels(d as u64, w);
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "q": q,
                "n": common.n,
                "v2_q_minus_1": v2,
                "ell_max": ell_max,
                "d": d,
                "L_opt": l_opt,
                "w": w.to_string(),
                "subproblem_cost": format_one_decimal(&cost),
            })
        );
    } else {
        println!("q = {q}");
        println!("n = {}", common.n);
        println!("v2(q-1) = {v2}");
        println!("ell_max = min(v2(q-1)-1, log2 n) = {ell_max}");
        println!("subproblem size d = n/2^ell_max = {d}");
        println!("optimal Toom depth at w={}: L = {l_opt}", cli.w);
        println!("modeled subproblem cost: {}", format_one_decimal(&cost));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn strategy_params(
    strategy: StrategyArg,
    ell: Option<u32>,
    levels: Option<u32>,
) -> Result<HybridParams> {
    let mut params = match strategy {
        StrategyArg::Schoolbook => HybridParams::schoolbook(),
        StrategyArg::Karatsuba => HybridParams::karatsuba(),
        StrategyArg::Toom4 => HybridParams::pure_toom4(),
        StrategyArg::Hybrid => HybridParams::auto(),
    };
    if let Some(levels) = levels {
        match strategy {
            StrategyArg::Toom4 | StrategyArg::Hybrid => {
                params = params.with_toom_levels(levels);
            }
            _ => bail!("--L only applies to the toom4 and hybrid strategies"),
        }
    }
    if let Some(ell) = ell {
        params = params.with_ell(ell);
    }
    Ok(params)
}

fn read_poly(path: &PathBuf) -> Result<(Poly, Option<usize>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Poly::from_json(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn cmd_mul(cli: &Cli, args: &MulArgs, w: &BigRational) -> Result<ExitCode> {
    // Load or generate the two operands.
    let (f, g, ctx, n) = if args.random {
        let common = cli_common(cli)?;
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        let f = Poly::random(common.ctx, common.n, &mut rng);
        let g = Poly::random(common.ctx, common.n, &mut rng);
        (f, g, common.ctx, common.n)
    } else {
        if args.files.len() != 2 {
            bail!("expected two polynomial files (or --random with --q and --n)");
        }
        let (f, nf) = read_poly(&args.files[0])?;
        let (g, ng) = read_poly(&args.files[1])?;
        if f.q() != g.q() {
            bail!("input moduli differ: {} vs {}", f.q(), g.q());
        }
        if let Some(q) = cli.q {
            if q != f.q() {
                bail!("--q {} does not match the input files (q = {})", q, f.q());
            }
        }
        if let (Some(a), Some(b)) = (nf, ng) {
            if a != b {
                bail!("input files declare different ring sizes: {a} vs {b}");
            }
        }
        let n = match (nf.or(ng), cli.n) {
            (Some(n), None) => n,
            (None, Some(n)) => n as usize,
            (Some(a), Some(b)) if a == b as usize => a,
            (Some(a), Some(b)) => bail!("ring size mismatch: files say {a}, --n says {b}"),
            (None, None) => f.len().max(g.len()).next_power_of_two(),
        };
        if !n.is_power_of_two() {
            bail!("ring size {n} is not a power of two");
        }
        if f.len() > n || g.len() > n {
            bail!("inputs longer than the ring size {n}");
        }
        let ctx = f.ctx();
        (f.padded(n), g.padded(n), ctx, n)
    };

    let params = strategy_params(args.strategy, cli.ell, cli.levels)?;
    let resolved = hybrid::resolve(ctx, n, &params, w).map_err(|e| anyhow!("{e}"))?;

    let tally = OpTally::new();
    let product = if args.parallel {
        let u = ntt::forward(&ctx, &resolved.plan, &f)?;
        let v = ntt::forward(&ctx, &resolved.plan, &g)?;
        let h = ntt::pointwise_mul_parallel(&resolved.plan, &u, &v, resolved.inner)?;
        ntt::inverse(&ctx, &resolved.plan, &h)?
    } else if args.counts {
        hybrid::negacyclic_mul(&tally.counting(ctx), &resolved, &f, &g)?
    } else {
        hybrid::negacyclic_mul(&ctx, &resolved, &f, &g)?
    };

    if args.check {
        let want = ntt::negacyclic_oracle(&ctx, &f, &g)?;
        if product.coeffs() != want.coeffs() {
            bail!("cross-check failed: strategy output differs from the schoolbook oracle");
        }
        eprintln!("check: ok ({})", resolved.describe());
    }

    let encoded = product.to_json(Some(n));
    match &args.out {
        Some(path) => std::fs::write(path, encoded + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{encoded}"),
    }

    if args.counts && !args.parallel {
        let counts = tally.snapshot();
        let report = serde_json::json!({
            "strategy": args.strategy.to_string(),
            "ell": resolved.ell(),
            "L": resolved.toom_levels(),
            "adds": counts.adds,
            "muls": counts.muls,
        });
        eprintln!("{report}");
    } else if args.counts {
        eprintln!("note: --counts is unavailable with --parallel");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_cost_table(cli: &Cli, args: &CostTableArgs, w: &BigRational) -> Result<ExitCode> {
    let sizes = match (&args.sizes, cli.n) {
        (Some(sizes), _) => sizes.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => vec![256, 512, 1024],
    };
    let mut rows = Vec::new();
    for &n in &sizes {
        rows.extend(costmodel::cost_table_rows(n, w).map_err(|e| anyhow!("{e}"))?);
    }

    if cli.json {
        let items: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                let exact = |x: &BigRational| {
                    serde_json::json!({
                        "display": format_one_decimal(x),
                        "num": x.numer().to_string(),
                        "den": x.denom().to_string(),
                    })
                };
                serde_json::json!({
                    "n": r.n,
                    "ell": r.ell,
                    "d": r.d,
                    "karatsuba": exact(&r.karatsuba),
                    "toom4": exact(&r.toom4),
                    "hybrid": exact(&r.hybrid),
                    "L_opt": r.optimal_toom_levels,
                })
            })
            .collect();
        println!("{}", serde_json::json!(items));
    } else if args.csv {
        println!("n,ell,d,karatsuba,toom4,hybrid,L_opt");
        for r in &rows {
            println!(
                "{},{},{},{},{},{},{}",
                r.n,
                r.ell,
                r.d,
                format_one_decimal(&r.karatsuba),
                format_one_decimal(&r.toom4),
                format_one_decimal(&r.hybrid),
                r.optimal_toom_levels
            );
        }
    } else {
        println!(
            "{:>6} {:>4} {:>6} {:>12} {:>12} {:>12}  {:>5}",
            "n", "ell", "d", "karatsuba", "toom4", "hybrid", "L_opt"
        );
        for r in &rows {
            println!(
                "{:>6} {:>4} {:>6} {:>12} {:>12} {:>12}  {:>5}",
                r.n,
                r.ell,
                r.d,
                format_one_decimal(&r.karatsuba),
                format_one_decimal(&r.toom4),
                format_one_decimal(&r.hybrid),
                r.optimal_toom_levels
            );
        }
    }

    if args.diff_paper {
        let mismatches = costmodel::diff_reference_table();
        if mismatches.is_empty() {
            eprintln!(
                "diff: all {} reference rows reproduced exactly",
                costmodel::REFERENCE_TABLE.len()
            );
        } else {
            for m in &mismatches {
                eprintln!("diff: {m}");
            }
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(cli: &Cli, w: &BigRational) -> Result<ExitCode> {
    let common = cli_common(cli)?;
    let n = common.n as u64;
    let ell_max = max_ntt_depth(common.ctx, common.n);
    let mut rows = Vec::new();
    let mut best: Option<(BigRational, u32, &'static str, u32)> = None;
    for ell in 0..=ell_max {
        let d = n >> ell;
        let (l_opt, _) = costmodel::optimal_levels(d, w);
        let entries: [(&'static str, u32); 3] = [
            ("karatsuba", 0),
            ("toom4", toom4::max_levels(d as usize)),
            ("hybrid", l_opt),
        ];
        for (name, levels) in entries {
            let cost = costmodel::total_cost(n, ell, levels, w).map_err(|e| anyhow!("{e}"))?;
            if best.as_ref().is_none_or(|(c, ..)| cost < *c) {
                best = Some((cost.clone(), ell, name, levels));
            }
            rows.push((ell, d, name, levels, cost));
        }
    }
    let (best_cost, best_ell, best_name, best_levels) = best.expect("at least one row");

    if cli.json {
        let items: Vec<serde_json::Value> = rows
            .iter()
            .map(|(ell, d, name, levels, cost)| {
                serde_json::json!({
                    "ell": ell,
                    "d": d,
                    "strategy": name,
                    "L": levels,
                    "cost": format_one_decimal(cost),
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::json!({
                "q": common.ctx.q(),
                "n": n,
                "ell_max": ell_max,
                "rows": items,
                "best": {
                    "ell": best_ell,
                    "strategy": best_name,
                    "L": best_levels,
                    "cost": format_one_decimal(&best_cost),
                },
            })
        );
    } else {
        println!(
            "q = {}, n = {n}, ell_max = {ell_max}, w = {}",
            common.ctx.q(),
            cli.w
        );
        println!(
            "{:>4} {:>6} {:>10} {:>4} {:>12}",
            "ell", "d", "strategy", "L", "cost"
        );
        for (ell, d, name, levels, cost) in &rows {
            println!(
                "{:>4} {:>6} {:>10} {:>4} {:>12}",
                ell,
                d,
                name,
                levels,
                format_one_decimal(cost)
            );
        }
        println!(
            "best: ell = {best_ell}, strategy = {best_name}, L = {best_levels}, cost = {}",
            format_one_decimal(&best_cost)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_chains(cli: &Cli, args: &ChainsArgs) -> Result<ExitCode> {
    match &args.command {
        ChainsCommand::Verify => {
            let chains = addchain::toom4_chains();
            let mut total = 0usize;
            let mut all_ok = true;
            let mut items = Vec::new();
            for labeled in chains {
                let verdict = labeled.chain.validate();
                let ok = verdict.is_ok();
                all_ok &= ok;
                total += labeled.chain.additions();
                if cli.json {
                    items.push(serde_json::json!({
                        "point": labeled.point.to_string(),
                        "elements": labeled.chain.elements(),
                        "targets": labeled.chain.targets().iter().collect::<Vec<_>>(),
                        "length": labeled.chain.additions(),
                        "valid": ok,
                        "defect": verdict.err().map(|d| d.to_string()),
                    }));
                } else {
                    match verdict {
                        Ok(()) => println!(
                            "PASS point {:>3}: length {:>2}, targets {:?}",
                            labeled.point.to_string(),
                            labeled.chain.additions(),
                            labeled.chain.targets()
                        ),
                        Err(defect) => println!("FAIL point {}: {defect}", labeled.point),
                    }
                }
            }
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({"chains": items, "total_additions": total, "valid": all_ok})
                );
            } else {
                println!("total additions: {total}");
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        ChainsCommand::Search {
            targets,
            max_len,
            budget_secs,
        } => {
            let budget = match budget_secs {
                Some(secs) => SearchBudget::timed(*max_len, Duration::from_secs(*secs)),
                None => SearchBudget::with_max_len(*max_len),
            };
            let outcome = addchain::search_optimal(targets, &budget).map_err(|e| anyhow!("{e}"))?;
            match outcome {
                SearchOutcome::Found { chain, minimal } => {
                    if cli.json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "outcome": "found",
                                "elements": chain.elements(),
                                "length": chain.additions(),
                                "minimal": minimal,
                            })
                        );
                    } else {
                        println!(
                            "found length-{} chain: {:?}{}",
                            chain.additions(),
                            chain.elements(),
                            if minimal { " (minimal)" } else { "" }
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                SearchOutcome::Exhausted { max_len } => {
                    if cli.json {
                        println!(
                            "{}",
                            serde_json::json!({"outcome": "exhausted", "max_len": max_len})
                        );
                    } else {
                        println!("no chain of length <= {max_len} exists (search exhausted)");
                    }
                    Ok(ExitCode::FAILURE)
                }
                SearchOutcome::TimedOut { exhausted_len } => {
                    if cli.json {
                        println!(
                            "{}",
                            serde_json::json!({"outcome": "timeout", "exhausted_len": exhausted_len})
                        );
                    } else {
                        match exhausted_len {
                            Some(len) => println!(
                                "time budget exhausted; lengths <= {len} ruled out, longer chains unresolved"
                            ),
                            None => println!("time budget exhausted before any length was ruled out"),
                        }
                    }
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}
