//! `gdm`: command-line front end for the demand matching solvers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use gdm_core::hardness::{sat_to_dm, verify_reduction, Cnf};
use gdm_core::iterated::bicriteria_base;
use gdm_core::oracle::{self, DEFAULT_CAP};
use gdm_core::pruning::{solve, Strategy};
use gdm_core::ptas::dp::DEFAULT_STATE_CAP;
use gdm_core::ptas::sparsify::sparsify_check;
use gdm_core::ptas::treedec::TreeDecomposition;
use gdm_core::ptas::{ptas, PtasOptions};
use gdm_core::rational::{fmt_q, parse_q, to_f64};
use gdm_core::{lp, Error, Instance, Matroid, MatroidSpec, Q};

#[derive(Parser)]
#[command(name = "gdm", version, about = "Demand matching over matroids, in exact arithmetic")]
struct Cli {
    /// Render fractional values as decimals (display only).
    #[arg(long, global = true)]
    decimal: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Instance JSON file.
    instance: PathBuf,
    /// Matroid JSON file; the free matroid when absent.
    #[arg(long)]
    matroid: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Iterated relaxation followed by pruning.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        /// Smallness parameter for the small-demand pruner.
        #[arg(long)]
        epsilon: Option<String>,
        /// Include the relaxation trace.
        #[arg(long)]
        trace: bool,
    },
    /// Minimum-cost base with bounded capacity violation.
    Base {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        trace: bool,
    },
    /// Approximation scheme for planar graphs.
    Ptas {
        instance: PathBuf,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Tree decomposition JSON (`bags`, `edges`) of the whole graph.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Accuracy of the inner relaxed DP; epsilon/3 when absent.
        #[arg(long)]
        dp_epsilon: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Compare against the exact optimum when the instance has at most this many edges.
        #[arg(long, default_value_t = 0)]
        exact_cap: usize,
    },
    /// Instance generators.
    #[command(subcommand)]
    Gen(Gen),
    /// Exact optimum by branch and bound, with the LP value.
    Exact {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Cheapest capacity-feasible base instead of the maximum-profit set.
        #[arg(long)]
        base: bool,
    },
    /// Solve every instance in a directory and print a ratio table.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        #[arg(long, default_value_t = 18)]
        exact_cap: usize,
    },
    /// Sample the sparsification of an optimal solution.
    Sparsify {
        instance: PathBuf,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// Demand matching instance from a DIMACS CNF file.
    Sat {
        cnf: PathBuf,
        /// Print the reduction check instead of the instance.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    Instance::from_json(&read(path)?)
}

fn load_matroid(path: Option<&Path>, inst: &Instance) -> Result<Matroid, Error> {
    match path {
        Some(p) => {
            let spec: MatroidSpec = serde_json::from_str(&read(p)?)?;
            Matroid::from_spec(&spec, inst)
        }
        None => Ok(Matroid::free(inst)),
    }
}

/// Validated instance, the ids of edges that fit nowhere, and the matroid with those deleted.
/// In base mode a deletion that lowers the rank leaves no capacity-feasible base.
fn prepare(input: &Input, base: bool) -> Result<(Instance, Vec<usize>, Matroid), Error> {
    let full = load_instance(&input.instance)?;
    let m = load_matroid(input.matroid.as_deref(), &full)?;
    let (inst, dropped) = full.validate();
    if !dropped.is_empty() {
        log::info!("dropped edges that exceed a capacity on their own: {dropped:?}");
    }
    let kept = m.restricted(&inst.edge_ids().collect());
    if base && kept.ground_rank() < m.ground_rank() {
        return Err(Error::Infeasible);
    }
    Ok((inst, dropped, kept))
}

fn decimalize(v: Value) -> Value {
    match v {
        Value::String(s) if s.contains('/') => match parse_q(&s) {
            Ok(x) => Value::String(format!("{:.12}", to_f64(&x))),
            Err(_) => Value::String(s),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(decimalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, decimalize(v))).collect()),
        other => other,
    }
}

fn ratio(num: &Q, den: &Q) -> String {
    if den.is_zero() {
        "-".into()
    } else {
        fmt_q(&(num / den))
    }
}

fn bench_row(path: &Path, strategy: Strategy, exact_cap: usize) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let matroid = {
        let stem = path.with_extension("");
        let side = stem.with_extension("matroid.json");
        side.exists().then_some(side)
    };
    let input = Input { instance: path.to_path_buf(), matroid };
    let row = (|| -> Result<String, Error> {
        let (inst, _, m) = prepare(&input, false)?;
        let out = solve(&inst, &m, strategy, None)?;
        let c = &out.certificate;
        let opt = if inst.edges().len() <= exact_cap {
            Some(oracle::exact_dm(&inst, &m, exact_cap)?.opt)
        } else {
            None
        };
        Ok(format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            inst.vertices().len(),
            inst.edges().len(),
            c.strategy,
            fmt_q(&c.lp),
            fmt_q(&c.p),
            opt.as_ref().map_or("-".into(), fmt_q),
            ratio(&c.lp, &c.p),
            opt.as_ref().map_or("-".into(), |o| ratio(o, &c.p)),
            fmt_q(&c.bound),
        ))
    })();
    match row {
        Ok(r) => format!("{name}\t{r}"),
        Err(e) => format!("{name}\terror: {e}"),
    }
}

fn run(cli: Cli) -> Result<Value, Error> {
    match cli.command {
        Command::Solve { input, strategy, epsilon, trace } => {
            let (inst, dropped, m) = prepare(&input, false)?;
            let eps = epsilon.as_deref().map(parse_q).transpose()?;
            let out = solve(&inst, &m, strategy, eps.as_ref())?;
            let mut v = json!({
                "dropped": dropped,
                "solution": out.solution,
                "certificate": out.certificate,
                "classification": out.classification,
                "prune": out.prune,
            });
            if trace {
                v["relaxed"] = serde_json::to_value(&out.relaxed)?;
            }
            Ok(v)
        }
        Command::Base { input, trace } => {
            let (inst, dropped, m) = prepare(&input, true)?;
            let out = bicriteria_base(&inst, &m)?;
            let mut v = json!({
                "dropped": dropped,
                "base": out.base,
                "cost": fmt_q(&out.cost),
                "lp": fmt_q(&out.lp),
                "loads": inst.loads(&out.base.edges).into_iter().map(|(k, q)| (k.to_string(), Value::String(fmt_q(&q)))).collect::<serde_json::Map<_, _>>(),
            });
            if trace {
                v["trace"] = serde_json::to_value(&out.trace)?;
            }
            Ok(v)
        }
        Command::Ptas { instance, epsilon, decomposition, dp_epsilon, state_cap, exact_cap } => {
            let inst = load_instance(&instance)?;
            let eps = parse_q(&epsilon)?;
            let decomposition: Option<TreeDecomposition> =
                decomposition.map(|p| read(&p).and_then(|s| Ok(serde_json::from_str(&s)?))).transpose()?;
            let opts = PtasOptions {
                dp_eps: dp_epsilon.as_deref().map(parse_q).transpose()?,
                decomposition,
                state_cap,
                oracle_cap: exact_cap,
            };
            Ok(serde_json::to_value(ptas(&inst, &eps, &opts)?)?)
        }
        Command::Gen(Gen::Sat { cnf, verify, cap }) => {
            let cnf = Cnf::parse_dimacs(&read(&cnf)?)?;
            if verify {
                Ok(serde_json::to_value(verify_reduction(&cnf, cap)?)?)
            } else {
                Ok(serde_json::from_str(&sat_to_dm(&cnf).instance.to_json())?)
            }
        }
        Command::Exact { input, cap, base } => {
            let (inst, dropped, m) = prepare(&input, base)?;
            if base {
                return match oracle::exact_base(&inst, &m, cap)? {
                    Some(r) => Ok(json!({ "dropped": dropped, "cost": fmt_q(&r.opt), "base": r.witness })),
                    None => Err(Error::Infeasible),
                };
            }
            let exact = oracle::exact_dm(&inst, &m, cap)?;
            let lpv = lp::lp_value(&inst, &m)?;
            let gap = exact.opt.is_positive().then(|| fmt_q(&(&lpv / &exact.opt)));
            Ok(json!({
                "dropped": dropped,
                "opt": fmt_q(&exact.opt),
                "witness": exact.witness,
                "lp": fmt_q(&lpv),
                "gap": gap,
            }))
        }
        Command::Bench { dir, strategy, exact_cap } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    let n = p.to_string_lossy();
                    n.ends_with(".json") && !n.ends_with(".matroid.json") && !n.ends_with(".td.json")
                })
                .collect();
            files.sort();
            let rows: Vec<String> = files.par_iter().map(|p| bench_row(p, strategy, exact_cap)).collect();
            let mut table = String::from("file\tvertices\tedges\tstrategy\tlp\tprofit\topt\tlp_ratio\topt_ratio\tbound\n");
            for r in rows {
                table.push_str(&r);
                table.push('\n');
            }
            Ok(Value::String(table))
        }
        Command::Sparsify { instance, epsilon, trials, seed, cap } => {
            let inst = load_instance(&instance)?;
            let eps = parse_q(&epsilon)?;
            let opt = oracle::exact_dm(&inst, &Matroid::free(&inst), cap)?;
            Ok(serde_json::to_value(sparsify_check(&inst, &opt.witness.edges, &eps, trials, seed)?)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let decimal = cli.decimal;
    match run(cli) {
        Ok(v) => {
            let text = match v {
                Value::String(table) => table,
                v => {
                    let v = if decimal { decimalize(v) } else { v };
                    serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n"
                }
            };
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e @ Error::Infeasible) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
