//! `agmi`: group mutual information rates from the command line.
//!
//! Exit codes: 0 success, 2 input validation, 3 solver failure, 4 a lemma
//! check failed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use abelian_gmi::ensemble::{
    mc_channel_error, verify_ensemble, JSpec, PairwiseRequest, VerifyOptions,
};
use abelian_gmi::group::parse_orders;
use abelian_gmi::io::{
    write_theta_csv, Bits, ClosedFormCheck, GridCheck, GroupInfoRecord, Problem, ProblemFile,
    ResultRecord, SimulateRecord, ThetaTableRecord, Unit, VerifyRecord,
};
use abelian_gmi::rate::{
    channel_terms, grid_search, icc_closed_form, isc_closed_form, solve_minimax, source_terms,
    Sense, SolverOptions, Support, ThetaTerms,
};
use abelian_gmi::{decompose, Error, Exact, GroupSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "agmi",
    version,
    about = "Group mutual information rates over finite Abelian groups"
)]
struct Cli {
    /// Print records as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bisection tolerance in bits.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical decomposition and index sets of a group given by cyclic orders, e.g. "4,3,9,9".
    GroupInfo { orders: String },
    /// Channel coding rate of a channel problem file.
    Capacity(RateArgs),
    /// Source coding rate of a source problem file.
    Rd(RateArgs),
    /// Theta set and omega formulas for a support pattern.
    ThetaTable {
        orders: String,
        /// Supported (q,s) pairs, e.g. "(2,2),(2,3)". Defaults to all of S(G).
        #[arg(long)]
        support: Option<String>,
        /// Weights over S(G) in group-info order, e.g. "0,0.5,0.5".
        #[arg(long)]
        weights: Option<String>,
    },
    /// Exhaustive checks of the random homomorphism ensemble.
    VerifyEnsemble {
        orders: String,
        #[command(flatten)]
        j: JArgs,
        /// Sampled homomorphism tables for the constraint and homomorphism checks.
        #[arg(long, default_value_t = 20)]
        tables: usize,
        /// Check the pairwise law by sampling this many tables instead of exactly.
        #[arg(long)]
        sampled: Option<u64>,
    },
    /// Monte Carlo block error rate of maximum-likelihood decoding.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        j: JArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
}

#[derive(Args)]
struct RateArgs {
    file: PathBuf,
    /// Use the closed form when one applies and report its gap to the solver.
    #[arg(long)]
    closed_form: bool,
    /// Also run a grid search over the weight simplex with this step.
    #[arg(long, value_name = "STEP")]
    grid_check: Option<f64>,
    /// Write the per-theta table as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Report rates in nats.
    #[arg(long)]
    nats: bool,
    /// Decide feasibility in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Include wall-clock time in the record (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct JArgs {
    /// Counts k_(q,s) over S(G) in group-info order, e.g. "0,1".
    #[arg(long)]
    k: String,
    /// Blocklength.
    #[arg(long, default_value_t = 1)]
    n: usize,
}

enum Failure {
    Input(String),
    Solver(String),
    Lemma(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '-'))
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::Input(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn group_of(orders: &str) -> Result<GroupSpec, Failure> {
    Ok(decompose(&parse_orders(orders)?)?.spec)
}

fn read_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(ProblemFile::parse(&text)?)
}

// a closed pipe downstream is not an error of ours
fn emit(json: bool, text: String, record: String) {
    let mut out = io::stdout().lock();
    let _ = if json {
        writeln!(out, "{record}")
    } else {
        write!(out, "{text}")
    };
}

fn run_rate(cli: &Cli, args: &RateArgs, sense: Sense) -> Result<(), Failure> {
    let start = Instant::now();
    let file = read_problem(&args.file)?;
    let (spec, terms, closed): (GroupSpec, ThetaTerms, Option<f64>) = match (file.problem()?, sense)
    {
        (Problem::Channel(c), Sense::Channel) => {
            let cf = if args.closed_form {
                icc_closed_form(&c)?
            } else {
                None
            };
            (c.group().clone(), channel_terms(&c)?, cf)
        }
        (Problem::Source(j), Sense::Source) => {
            let cf = if args.closed_form {
                isc_closed_form(&j)?
            } else {
                None
            };
            (j.group().clone(), source_terms(&j)?, cf)
        }
        (Problem::Channel(_), Sense::Source) => {
            return Err(Failure::Input("rd needs a source problem file".into()))
        }
        (Problem::Source(_), Sense::Channel) => {
            return Err(Failure::Input(
                "capacity needs a channel problem file".into(),
            ))
        }
    };
    let options = SolverOptions {
        tolerance: cli.tolerance,
        ..SolverOptions::default()
    };
    let unit = if args.nats { Unit::Nats } else { Unit::Bits };
    let command = match sense {
        Sense::Channel => "capacity",
        Sense::Source => "rd",
    };
    let input = args.file.display().to_string();
    let (mut record, solver_value) = if args.exact {
        let r = solve_minimax::<Exact>(&spec, &terms, sense, &options)?;
        (
            ResultRecord::from_rate(command, &input, &spec, &r, unit),
            r.value.to_f64(),
        )
    } else {
        let r = solve_minimax::<f64>(&spec, &terms, sense, &options)?;
        (
            ResultRecord::from_rate(command, &input, &spec, &r, unit),
            r.value.to_f64(),
        )
    };
    if args.closed_form {
        match closed {
            Some(v) => {
                record.rate = Bits(unit.scale(v));
                record.closed_form = Some(ClosedFormCheck {
                    value: Bits(unit.scale(v)),
                    difference: Bits(unit.scale(solver_value - v)),
                });
            }
            None => {
                let note = format!("no closed form for {}", spec.canonical_form());
                record.diagnostic = Some(match record.diagnostic.take() {
                    Some(d) => format!("{d}; {note}"),
                    None => note,
                });
            }
        }
    }
    if let Some(step) = args.grid_check {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Failure::Input("grid step must lie in (0, 1]".into()));
        }
        let steps = (1.0 / step).round() as usize;
        let g = grid_search(&spec, &terms, sense, steps)?;
        let gap = match sense {
            Sense::Channel => g.value - solver_value,
            Sense::Source => solver_value - g.value,
        };
        record.grid_check = Some(GridCheck {
            step: 1.0 / steps as f64,
            points: g.points,
            grid_value: Bits(unit.scale(g.value)),
            gap: Bits(unit.scale(gap)),
        });
    }
    if let Some(path) = &args.csv {
        let f = fs::File::create(path)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        write_theta_csv(&spec, &record.per_theta, f)?;
    }
    if args.timing {
        record.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(cli.json, record.to_text(), record.to_json());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::GroupInfo { orders } => {
            let rec = GroupInfoRecord::build(&parse_orders(orders)?)?;
            emit(cli.json, rec.to_text(), to_json(&rec));
        }
        Command::Capacity(args) => run_rate(cli, args, Sense::Channel)?,
        Command::Rd(args) => run_rate(cli, args, Sense::Source)?,
        Command::ThetaTable {
            orders,
            support,
            weights,
        } => {
            let spec = group_of(orders)?;
            let support = match support {
                Some(text) => {
                    let nums: Vec<u64> = parse_list(text, "support")?;
                    if !nums.len().is_multiple_of(2) {
                        return Err(Failure::Input("support needs (q,s) pairs".into()));
                    }
                    let pairs: Vec<(u64, u32)> =
                        nums.chunks(2).map(|c| (c[0], c[1] as u32)).collect();
                    Support::from_pairs(&spec, &pairs)?
                }
                None => Support::full(&spec),
            };
            let w: Option<Vec<f64>> = weights
                .as_deref()
                .map(|t| parse_list(t, "weight"))
                .transpose()?;
            let rec = ThetaTableRecord::build(&spec, support, w.as_deref())?;
            let mut text = format!("group: {}\n", rec.group);
            for row in &rec.rows {
                let theta: Vec<String> = row.theta.iter().map(|x| x.to_string()).collect();
                text.push_str(&format!(
                    "theta=({}) omega = {}",
                    theta.join(","),
                    row.omega_formula
                ));
                if let Some(o) = row.omega {
                    text.push_str(&format!(" = {o}"));
                }
                text.push('\n');
            }
            emit(cli.json, text, to_json(&rec));
        }
        Command::VerifyEnsemble {
            orders,
            j,
            tables,
            sampled,
        } => {
            let spec = group_of(orders)?;
            let js = JSpec::new(spec.clone(), parse_list(&j.k, "count")?)?;
            let options = VerifyOptions {
                tables: *tables,
                seed: cli.seed,
                pairwise: match sampled {
                    Some(samples) => PairwiseRequest::Sampled {
                        samples: *samples,
                        seed: cli.seed,
                    },
                    None => PairwiseRequest::Exact,
                },
            };
            let checks = verify_ensemble(&js, j.n, &options)?;
            let passed = checks.iter().all(|c| c.passed());
            let rec = VerifyRecord {
                command: "verify-ensemble".into(),
                group: spec.canonical_form(),
                counts: js.counts().to_vec(),
                n: j.n,
                seed: cli.seed,
                checks,
                passed,
            };
            emit(cli.json, rec.to_text(), to_json(&rec));
            if !passed {
                let failed: Vec<&str> = rec
                    .checks
                    .iter()
                    .filter(|c| !c.passed())
                    .map(|c| c.lemma.as_str())
                    .collect();
                return Err(Failure::Lemma(failed.join(", ")));
            }
        }
        Command::Simulate { file, j, trials } => {
            let channel = match read_problem(file)?.problem()? {
                Problem::Channel(c) => c,
                Problem::Source(_) => {
                    return Err(Failure::Input(
                        "simulate needs a channel problem file".into(),
                    ))
                }
            };
            let js = JSpec::new(channel.group().clone(), parse_list(&j.k, "count")?)?;
            let report = mc_channel_error(&js, j.n, &channel, *trials, cli.seed)?;
            let rec = SimulateRecord {
                command: "simulate".into(),
                input: file.display().to_string(),
                group: channel.group().canonical_form(),
                counts: js.counts().to_vec(),
                n: j.n,
                seed: cli.seed,
                trials: report.trials,
                errors: report.errors,
                error_rate: Bits(report.error_rate),
            };
            emit(cli.json, rec.to_text(), to_json(&rec));
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Lemma(msg)) => {
            eprintln!("lemma check failed: {msg}");
            ExitCode::from(4)
        }
    }
}
