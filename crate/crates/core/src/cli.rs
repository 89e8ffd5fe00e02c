//! The `implode` command line.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::io::{complex_to_json, matrix_to_json, parse_quiver, quiver_to_json};
use crate::kempf_ness::{solve_real_moment, Direction, GaugeSubgroup, SolveOptions};
use crate::linalg::{c, RankTol};
use crate::moment::{k_moment, moment, sample_complex_level};
use crate::quiver::{random_quiver, rng_from_seed, DimensionVector, GroupKind, Mode};
use crate::stability::{polystable_test, StabilityOptions, StabilityStatus};
use crate::strata::{classify_stratum, enumerate_strata, stratum_dimension};
use crate::toric::solve_chamber_levels;
use crate::verify;

pub const SEED_ENV: &str = "IMPLODE_SEED";

#[derive(Debug, Parser)]
#[command(name = "implode", version, about = "Quiver models of symplectic and hyperkähler implosion")]
struct Cli {
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Random seed; falls back to IMPLODE_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = positive, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupArg {
    Su,
    So,
    Sp,
}

impl GroupArg {
    fn tag(self) -> &'static str {
        match self {
            GroupArg::Su => "su",
            GroupArg::So => "so",
            GroupArg::Sp => "sp",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SubgroupArg {
    H,
    Ht,
    TildeH,
    TildeHt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Symplectic,
    Hk,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moment map of a quiver file.
    Eval { file: PathBuf },
    /// Move a quiver to the given real levels along its gauge orbit.
    Solve {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Vec<f64>,
        #[arg(long, value_enum, default_value = "tilde-h")]
        subgroup: SubgroupArg,
        #[arg(long)]
        gradient: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability status and stratum label.
    Classify { file: PathBuf },
    /// Strata of the implosion, largest first.
    Strata {
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
    },
    /// Squared moduli of the toric coordinates for chamber levels.
    Toric {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Vec<f64>,
    },
    /// Run a named check.
    Verify {
        name: String,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Random quiver document.
    Sample {
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        /// Defaults to the full flag.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "symplectic")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Hyperkähler only: sample on the zero complex level.
        #[arg(long)]
        complex_zero: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for a library error: 3 for solver failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MaxIters(_) | Error::SolverFailed(_) | Error::GenericityFailure(_) => 3,
        _ => 2,
    }
}

/// Runs `argv` (including the program name) and captures its output.
pub fn run_command<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CommandOutput { code, stdout: text, stderr: String::new() }
            } else {
                CommandOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match run(&cli) {
        Ok(stdout) => CommandOutput {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(Failure { code, message, stdout }) => CommandOutput {
            code,
            stdout: stdout.unwrap_or_default(),
            stderr: format!("error: {message}\n"),
        },
    }
}

struct Failure {
    code: i32,
    message: String,
    stdout: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
            stdout: None,
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
        stdout: None,
    })
}

fn write_or_return(out: &Option<PathBuf>, text: String) -> Result<String, Failure> {
    match out {
        None => Ok(text),
        Some(p) => std::fs::write(p, &text)
            .map(|_| format!("wrote {}\n", p.display()))
            .map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", p.display()),
                stdout: None,
            }),
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed
        .or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Result<String, Failure> {
    if cli.max_iter == Some(0) {
        return Err(Error::InvalidArgument("--max-iter must be at least 1".into()).into());
    }
    match &cli.command {
        Command::Eval { file } => {
            let q = parse_quiver(&read(file)?)?;
            let m = moment(&q);
            let flavor = k_moment(&q).ok();
            if cli.json {
                return Ok(pretty(&json!({
                    "levels_real": m.levels_real,
                    "levels_complex": m.levels_complex.as_ref().map(|l| l.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>()),
                    "residual_norm": m.residual_norm,
                    "real_part": m.real_part.iter().map(matrix_to_json).collect::<Vec<_>>(),
                    "complex_part": m.complex_part.as_ref().map(|c| c.iter().map(matrix_to_json).collect::<Vec<_>>()),
                    "k_moment": flavor.as_ref().map(|k| matrix_to_json(&k.x)),
                })));
            }
            let mut s = String::new();
            writeln!(s, "{:>4}  {:>14}  {:>28}", "node", "real level", "complex level").unwrap();
            for (i, l) in m.levels_real.iter().enumerate() {
                let cl = m
                    .levels_complex
                    .as_ref()
                    .map(|c| format!("{:.6e}{:+.6e}i", c[i].re, c[i].im))
                    .unwrap_or_else(|| "-".into());
                writeln!(s, "{i:>4}  {l:>14.6e}  {cl:>28}").unwrap();
            }
            writeln!(s, "residual {:.3e}", m.residual_norm).unwrap();
            Ok(s)
        }
        Command::Solve {
            file,
            levels,
            subgroup,
            gradient,
            out,
        } => {
            let q = parse_quiver(&read(file)?)?;
            let mut opts = SolveOptions {
                subgroup: match subgroup {
                    SubgroupArg::H => GaugeSubgroup::H,
                    SubgroupArg::Ht => GaugeSubgroup::HT,
                    SubgroupArg::TildeH => GaugeSubgroup::TildeH,
                    SubgroupArg::TildeHt => GaugeSubgroup::TildeHT,
                },
                seed: seed(cli),
                ..SolveOptions::default()
            };
            if *gradient {
                opts.direction = Direction::Gradient;
            }
            if let Some(t) = cli.tol {
                opts.tol = t;
            }
            if let Some(m) = cli.max_iter {
                opts.max_iters = m;
            }
            let sol = solve_real_moment(&q, levels, &opts)?;
            let doc = json!({
                "quiver": quiver_to_json(&sol.quiver, None),
                "report": sol.report,
            });
            if cli.json || out.is_some() {
                return write_or_return(out, pretty(&doc));
            }
            Ok(format!(
                "converged in {} iterations, residual {:.3e}\n",
                sol.report.iterations, sol.report.final_residual
            ))
        }
        Command::Classify { file } => {
            let q = parse_quiver(&read(file)?)?;
            let tol = cli.tol.map_or(RankTol::default(), |t| RankTol {
                relative: t,
                ..RankTol::default()
            });
            let opts = StabilityOptions {
                rank_tol: tol,
                seed: seed(cli),
                ..StabilityOptions::default()
            };
            let verdict = polystable_test(&q, &opts)?;
            let label = match (q.mode(), verdict.status) {
                (Mode::Symplectic, StabilityStatus::Stable | StabilityStatus::Polystable) => {
                    Some(classify_stratum(&q, tol)?)
                }
                _ => None,
            };
            if cli.json {
                return Ok(pretty(&json!({
                    "status": verdict.status,
                    "label": label.as_ref().map(|l| l.display_flag()),
                    "dimension": label.as_ref().map(stratum_dimension),
                    "certificate_node": verdict.certificate.as_ref().map(|c| c.node),
                })));
            }
            let status = serde_json::to_value(verdict.status).unwrap();
            let mut s = format!("status {}\n", status.as_str().unwrap_or_default());
            if let Some(l) = label {
                writeln!(s, "stratum {l} (dimension {})", stratum_dimension(&l)).unwrap();
            }
            if let Some(c) = verdict.certificate {
                writeln!(s, "destabilising subgroup at node {}", c.node).unwrap();
            }
            Ok(s)
        }
        Command::Strata { group, n } => {
            let kind = GroupKind::from_tag(group.tag(), *n)?;
            let labels = enumerate_strata(kind);
            if cli.json {
                let rows: Vec<Value> = labels
                    .iter()
                    .map(|l| json!({"flag": l.display_flag(), "blocks": l.block_sizes(), "dimension": stratum_dimension(l)}))
                    .collect();
                return Ok(pretty(&json!({"group": kind.to_string(), "strata": rows})));
            }
            let mut s = String::new();
            writeln!(s, "{:<24} {:>9}", "flag", "dimension").unwrap();
            for l in &labels {
                writeln!(s, "{:<24} {:>9}", l.to_string(), stratum_dimension(l)).unwrap();
            }
            Ok(s)
        }
        Command::Toric { levels } => {
            let moduli = solve_chamber_levels(levels, GroupKind::A(levels.len() + 1))?;
            if cli.json {
                return Ok(pretty(&json!({"nu_squared": moduli})));
            }
            let mut s = String::new();
            writeln!(s, "{:>4} {:>4} {:>14}", "j", "i", "|nu|^2").unwrap();
            for (j, row) in moduli.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    writeln!(s, "{:>4} {:>4} {:>14}", j + 1, i + 1, v).unwrap();
                }
            }
            Ok(s)
        }
        Command::Verify { name, samples } => {
            let report = verify::run_named(&name.replace('-', "_"), *samples, seed(cli))?;
            let text = if cli.json {
                pretty(&serde_json::to_value(&report).unwrap())
            } else {
                format!(
                    "{} {}: {} samples, max error {:.3e} (tolerance {:.1e})\n{}\n",
                    if report.pass { "PASS" } else { "FAIL" },
                    report.name,
                    report.samples,
                    report.max_error,
                    report.tolerance,
                    report.details
                )
            };
            if report.pass {
                Ok(text)
            } else {
                Err(Failure {
                    code: 3,
                    message: format!("check {} failed", report.name),
                    stdout: Some(text),
                })
            }
        }
        Command::Sample {
            group,
            n,
            dims,
            mode,
            scale,
            complex_zero,
            out,
        } => {
            let kind = GroupKind::from_tag(group.tag(), *n)?;
            let dv = match dims {
                Some(d) => DimensionVector::new(kind, d.clone())?,
                None => DimensionVector::full_flag(kind)?,
            };
            let mode = match mode {
                ModeArg::Symplectic => Mode::Symplectic,
                ModeArg::Hk => Mode::Hyperkahler,
            };
            let q = if *complex_zero {
                if mode != Mode::Hyperkahler {
                    return Err(Error::ModeError("--complex-zero needs --mode hk".into()).into());
                }
                let mut rng = rng_from_seed(seed(cli));
                sample_complex_level(&dv, &vec![c(0.0, 0.0); dv.edges()], &mut rng, *scale)?
            } else {
                random_quiver(&dv, mode, seed(cli), *scale)
            };
            let doc = quiver_to_json(&q, Some(json!({"seed": seed(cli), "scale": scale})));
            write_or_return(out, pretty(&doc))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strata_table() {
        let out = run_command(["implode", "strata", "--group", "su", "--n", "3"]);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout.lines().count(), 5);
    }

    #[test]
    fn toric_table() {
        let out = run_command(["implode", "toric", "--levels", "1,1", "--json"]);
        assert_eq!(out.code, 0);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["nu_squared"], json!([[1.0], [1.0, 2.0]]));
    }

    #[test]
    fn validation_exit_code() {
        assert_eq!(run_command(["implode", "strata", "--group", "sp", "--n", "3"]).code, 2);
        assert_eq!(run_command(["implode", "toric", "--levels", "1,-3"]).code, 2);
        assert_eq!(run_command(["implode", "bogus"]).code, 2);
    }
}
