//! `minvset`: invariant sets of polynomial differential operators from the
//! command line.
//!
//! Exit codes: 0 success or Converged, 2 Unbounded, 3 Empty, 4 max_iter
//! reached, 5 unparsable input, 6 failed precondition, 1 anything else.

mod job;
mod output;
mod spec;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use minvset::{IterationConfig, Mode};

use job::{Job, Manifest};
use spec::{
    parse_complex, parse_err, parse_family_poly, parse_range, parse_size, read_json, read_operator,
    Coef, ParseError,
};

#[derive(Parser)]
#[command(
    name = "minvset",
    version,
    about = "Minimal invariant sets of polynomial differential operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuchs index, solvability, spectrum, existence hints, fundamental polygon
    Classify {
        spec: PathBuf,
        /// Degree for the spectrum slice and existence check (default: the order)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate the minimal invariant set in degree n
    Iterate {
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "hutchinson")]
        mode: ModeArg,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Julia set of the degree-one rational map, cross-checked against n = 1
    Julia {
        spec: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Full-mode sets for several degrees against the fundamental polygon
    Converge {
        spec: PathBuf,
        /// Degrees: `3..5` (inclusive) or `3,4,5`
        #[arg(long)]
        n: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        files: FileArgs,
    },
    /// Operator / bivariate polynomial correspondence
    #[command(subcommand)]
    Correspond(Correspond),
    /// Re-execute a manifest
    Rerun {
        manifest: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Correspond {
    /// T[(x - z)^n] as a coefficient matrix
    Psi {
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The operator of order at most k with the given T[(x - z)^k]
    Phi {
        bipoly: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-point invariant sets in degree n
    OnePoint {
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The family operator F_{m,n} built from Q_m
    Family {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// `a=1,b=0` (letters from x^m down) or a JSON list, ascending
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an operator from affine maps (--maps), or detect them in a spec
    Ifs {
        spec: Option<PathBuf>,
        /// JSON list of [a, b] pairs, entries real or [re, im]
        #[arg(long, allow_hyphen_values = true, conflicts_with = "spec")]
        maps: Option<String>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        scale: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hutchinson,
    Full,
}

#[derive(Args)]
struct ConfigArgs {
    /// Grid resolution
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Escape radius (default derived from the operator and seed)
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random polynomials per full-mode step
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    stall_window: usize,
    /// Points forwarded per grid cell
    #[arg(long, default_value_t = 32)]
    cell_visits: u32,
}

impl ConfigArgs {
    fn config(&self) -> IterationConfig {
        IterationConfig {
            max_iter: self.max_iter,
            r_max: self.rmax,
            eps: self.eps,
            stall_window: self.stall_window,
            tau_samples: self.samples,
            rng_seed: self.seed,
            cell_visits: self.cell_visits,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct FileArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also render a PNG of this size, e.g. 800x800
    #[arg(long)]
    png: Option<String>,
}

impl FileArgs {
    fn png(&self) -> anyhow::Result<Option<[u32; 2]>> {
        self.png.as_deref().map(parse_size).transpose()
    }
}

fn build(cmd: Command) -> anyhow::Result<(Job, Option<PathBuf>)> {
    Ok(match cmd {
        Command::Classify { spec, n, out } => {
            let operator = read_operator(&spec)?;
            let order = operator.operator()?.order().unwrap_or(0);
            (
                Job::Classify {
                    operator,
                    n: n.unwrap_or(order),
                },
                out,
            )
        }
        Command::Iterate {
            spec,
            n,
            mode,
            cfg,
            files,
        } => {
            let mode = match mode {
                ModeArg::Hutchinson => Mode::Hutchinson,
                ModeArg::Full => Mode::Full,
            };
            let job = Job::Iterate {
                operator: read_operator(&spec)?,
                n,
                mode,
                config: checked(cfg.config())?,
                png: files.png()?,
            };
            (job, Some(files.out))
        }
        Command::Julia { spec, cfg, files } => {
            let job = Job::Julia {
                operator: read_operator(&spec)?,
                config: checked(cfg.config())?,
                png: files.png()?,
            };
            (job, Some(files.out))
        }
        Command::Converge {
            spec,
            n,
            cfg,
            files,
        } => {
            let job = Job::Converge {
                operator: read_operator(&spec)?,
                degrees: parse_range(&n)?,
                config: checked(cfg.config())?,
                png: files.png()?,
            };
            (job, Some(files.out))
        }
        Command::Correspond(c) => match c {
            Correspond::Psi { spec, n, out } => (
                Job::Psi {
                    operator: read_operator(&spec)?,
                    n,
                },
                out,
            ),
            Correspond::Phi { bipoly, k, out } => {
                let bipoly: spec::BiPolySpec = read_json(&bipoly, "bivariate polynomial")?;
                bipoly.bipoly()?;
                (Job::Phi { bipoly, k }, out)
            }
            Correspond::OnePoint { spec, n, tol, out } => (
                Job::OnePoint {
                    operator: read_operator(&spec)?,
                    n,
                    tol,
                },
                out,
            ),
            Correspond::Family { m, n, q, out } => {
                let q = parse_family_poly(&q, m)?;
                let q = q
                    .coeffs()
                    .iter()
                    .map(|c| Coef::Pair([c.re, c.im]))
                    .collect();
                (Job::Family { m, n, q }, out)
            }
            Correspond::Ifs {
                spec,
                maps,
                scale,
                n,
                tol,
                out,
            } => match (spec, maps) {
                (_, Some(maps)) => {
                    let maps: Vec<[Coef; 2]> = serde_json::from_str(&maps.replace('\u{2212}', "-"))
                        .map_err(|e| parse_err(format!("--maps: {e}")))?;
                    let s = parse_complex(&scale)?;
                    (
                        Job::IfsBuild {
                            maps,
                            scale: Coef::Pair([s.re, s.im]),
                        },
                        out,
                    )
                }
                (Some(spec), None) => {
                    let operator = read_operator(&spec)?;
                    let n = n.unwrap_or(operator.operator()?.order().unwrap_or(0));
                    (Job::IfsDetect { operator, n, tol }, out)
                }
                (None, None) => return Err(parse_err("ifs needs --maps or an operator spec")),
            },
        },
        Command::Rerun { manifest, out } => {
            let m: Manifest = read_json(&manifest, "manifest")?;
            (m.job, Some(out))
        }
    })
}

fn checked(cfg: IterationConfig) -> anyhow::Result<IterationConfig> {
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<ParseError>().is_some() {
        return 5;
    }
    match e.downcast_ref::<minvset::Error>() {
        Some(minvset::Error::NonConvergence { .. }) => 1,
        Some(_) => 6,
        None => 1,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MINVSET_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            parse_err(format!(
                "MINVSET_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    init_threads()?;
    let (job, out) = build(cli.command)?;
    let outcome = job::run(&job, out.as_deref().map(Path::new))?;
    if let Some(text) = outcome.stdout {
        print!("{text}");
    }
    Ok(outcome.code)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            std::process::exit(if usage { 5 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
