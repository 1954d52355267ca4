//! Command-line front end: load a chain specification, run the entropy,
//! phi-table, radius, or cycle-oracle computations, and print the results
//! in a human-readable table or as JSON.
//!
//! Exit codes: 0 on success, 2 for specification problems, 3 for numerical
//! conditions (divergence, singularity), 4 for exhausted budgets.

use clap::{Args, Parser, Subcommand, ValueEnum};
use entroflow::genfun;
use entroflow::oracle::{self, TruncatedGraph};
use entroflow::report::{self, PhiRowDoc};
use entroflow::series;
use entroflow::solver::{solve_entropy, SolverConfig};
use entroflow::{build_quotient, parse_spec, Error, ErrorKind, EvalStatus, QuotientGraph, RftSpec};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "entroflow", version, about = "Entropy of suspension flows over countable-state Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Path to the chain specification file.
    spec: String,
    /// Root vertex; defaults to the `root` declared in the file.
    #[arg(long)]
    root: Option<String>,
    /// Series truncation tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the flow entropy and the maximal-entropy-measure verdict.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Grid points for the singularity scan.
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Evaluate the cycle generating function on a list of points.
    Phi {
        #[command(flatten)]
        common: Common,
        /// Comma-separated x values, e.g. 0.1,0.2,0.3.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Evaluation path to use.
        #[arg(long, value_enum, default_value_t = Path::Linear)]
        path: Path,
    },
    /// Report the radius of convergence of the vertex series.
    Radius {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate first-return cycles on a finite truncation and compare the
    /// truncated sum against the analytic evaluation.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Maximum cycle length.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Indices kept per infinite family.
        #[arg(long, default_value_t = 10)]
        depth: i64,
        /// Comma-separated x values for the comparison.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2])]
        x: Vec<f64>,
        /// Enumeration step budget.
        #[arg(long, default_value_t = 100_000_000)]
        budget: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Path {
    Linear,
    ClosedForm,
    Perturbation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Spec => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Budget => 4,
            })
        }
    }
}

fn load(common: &Common) -> Result<(RftSpec, QuotientGraph, String), Error> {
    let text = std::fs::read_to_string(&common.spec).map_err(|e| {
        Error::Parse(entroflow::ParseError::Syntax {
            line: 0,
            col: 0,
            msg: format!("cannot read `{}`: {e}", common.spec),
        })
    })?;
    let spec = parse_spec(&text)?;
    let root = common.root.clone().unwrap_or_else(|| spec.root.clone());
    let q = build_quotient(&spec, &root)?;
    Ok((spec, q, root))
}

fn banner() {
    println!("entroflow {}", env!("CARGO_PKG_VERSION"));
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Entropy { common, grid } => {
            let (_, q, root) = load(&common)?;
            let cfg = SolverConfig {
                series_tol: common.tol,
                grid,
                ..SolverConfig::default()
            };
            let rep = solve_entropy(&q, &cfg)?;
            match common.format {
                Format::Json => println!("{}", report::to_json(&rep)),
                Format::Text => {
                    banner();
                    println!("spec      : {}", common.spec);
                    println!("root      : {root}");
                    println!("x_hat     : {:.15}", rep.x_hat);
                    println!("entropy   : {:.15}", rep.entropy);
                    print!("r_F       : ");
                    match rep.r_f.exact {
                        Some(e) if e.is_finite() => println!("{e:.15}"),
                        Some(_) | None if rep.r_f.is_unconstrained() => {
                            println!("unconstrained")
                        }
                        _ => println!("[{:.15}, {:.15}]", rep.r_f.lower, rep.r_f.upper),
                    }
                    match rep.x_tilde0 {
                        Some(x0) => println!("x_tilde0  : {x0:.15}"),
                        None => println!("x_tilde0  : none below r_F"),
                    }
                    println!("phi(x_hat): {:.12}", rep.phi_at_xhat);
                    println!("bracket   : [{:.15}, {:.15}]", rep.bracket.0, rep.bracket.1);
                    println!("mme       : {}", mme_str(rep.mme));
                    println!("path      : {}", path_str(rep.path));
                }
            }
        }
        Command::Phi { common, x, path } => {
            let (spec, q, root) = load(&common)?;
            let rows: Vec<PhiRowDoc> = match path {
                Path::Linear => genfun::phi_grid(&q, &x, common.tol)
                    .into_iter()
                    .collect::<Result<Vec<_>, _>>()?
                    .iter()
                    .map(PhiRowDoc::from)
                    .collect(),
                Path::ClosedForm => x
                    .iter()
                    .map(|&xi| phi_row_alt(&q, xi, common.tol, |q, x, t| {
                        genfun::phi_closed_form(q, x, t)
                    }))
                    .collect(),
                Path::Perturbation => x
                    .iter()
                    .map(|&xi| {
                        let r = genfun::phi_local_perturbation(&spec, &root, xi, common.tol);
                        alt_to_row(xi, r)
                    })
                    .collect(),
            };
            match common.format {
                Format::Json => println!("{}", report::rows_to_json(&rows)),
                Format::Text => {
                    banner();
                    println!(
                        "{:>12} {:>20} {:>16}  {:22} A",
                        "x", "phi", "det M", "status"
                    );
                    for row in &rows {
                        let a = row
                            .a
                            .iter()
                            .map(|v| format!("{v:.6}"))
                            .collect::<Vec<_>>()
                            .join(" ");
                        println!(
                            "{:>12.6} {:>20.12} {:>16}  {:22} [{a}]",
                            row.x,
                            row.phi.unwrap_or(f64::NAN),
                            row.det_m
                                .map(|d| format!("{d:.9}"))
                                .unwrap_or_else(|| "-".into()),
                            status_str(row.status),
                        );
                    }
                }
            }
        }
        Command::Radius { common } => {
            let (spec, _, _) = load(&common)?;
            let r = series::radius_f(&spec);
            match common.format {
                Format::Json => println!("{}", report::radius_to_json(&r)),
                Format::Text => {
                    banner();
                    if r.is_unconstrained() {
                        println!("r_F: unconstrained (no infinite family)");
                    } else {
                        match r.exact {
                            Some(e) => println!("r_F: {e:.15} (exact)"),
                            None => println!("r_F: [{:.15}, {:.15}]", r.lower, r.upper),
                        }
                    }
                }
            }
        }
        Command::Oracle {
            common,
            max_len,
            depth,
            x,
            budget,
        } => {
            let (spec, q, root) = load(&common)?;
            let tg = TruncatedGraph::build(&spec, depth)?;
            let poly = oracle::enumerate_cycles(&tg, &root, max_len, budget)?;
            banner();
            println!(
                "truncation: {} vertices, max length {max_len}, {} cycles in {} weight buckets",
                tg.labels.len(),
                poly.total_cycles(),
                poly.terms.len()
            );
            if poly.is_empty() {
                println!("no cycles through `{root}` up to length {max_len}");
            }
            println!("{:>12} {:>20} {:>20} {:>14}", "x", "truncated", "analytic", "gap");
            for &xi in &x {
                let low = oracle::phi_truncated(&poly, xi);
                let full = genfun::solve_phi(&q, xi, common.tol)?;
                let (full_str, gap_str) = if full.status == EvalStatus::InDomain {
                    (
                        format!("{:.12}", full.phi),
                        format!("{:.3e}", full.phi - low),
                    )
                } else {
                    (status_str(full.status).to_string(), "-".into())
                };
                println!("{xi:>12.6} {low:>20.12} {full_str:>20} {gap_str:>14}");
            }
        }
    }
    Ok(())
}

fn phi_row_alt(
    q: &QuotientGraph,
    x: f64,
    tol: f64,
    f: impl Fn(&QuotientGraph, f64, f64) -> Result<f64, entroflow::GenFunError>,
) -> PhiRowDoc {
    alt_to_row(x, f(q, x, tol))
}

fn alt_to_row(x: f64, r: Result<f64, entroflow::GenFunError>) -> PhiRowDoc {
    match r {
        Ok(phi) => PhiRowDoc {
            x,
            status: EvalStatus::InDomain,
            phi: Some(phi),
            det_m: None,
            a: Vec::new(),
        },
        Err(_) => PhiRowDoc {
            x,
            status: EvalStatus::BeyondSeriesRadius,
            phi: None,
            det_m: None,
            a: Vec::new(),
        },
    }
}

fn mme_str(m: entroflow::Mme) -> &'static str {
    match m {
        entroflow::Mme::Exists => "exists",
        entroflow::Mme::DoesNotExist => "does_not_exist",
        entroflow::Mme::Undetermined => "undetermined",
    }
}

fn path_str(p: entroflow::EvalPath) -> &'static str {
    match p {
        entroflow::EvalPath::LinearSystem => "linear_system",
        entroflow::EvalPath::ClosedForm => "closed_form",
        entroflow::EvalPath::LocalPerturbation => "local_perturbation",
    }
}

fn status_str(s: EvalStatus) -> &'static str {
    match s {
        EvalStatus::InDomain => "in_domain",
        EvalStatus::SingularAtOrBefore => "singular_at_or_before",
        EvalStatus::BeyondSeriesRadius => "beyond_series_radius",
    }
}
