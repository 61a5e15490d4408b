//! `ks3`: integrability, Stäckel systems and separation coordinates for
//! Killing tensors on S³, driven by JSON files.

use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Matrix3;
use serde::Serialize;
use serde_json::Value;

use killing_s3::coords::{classify, classify_line, eigenvalues_with_flag, Spectrum, SpherePoint, Stratum};
use killing_s3::corpus::{on_quadric, random_diagonal, random_frame, random_rotation_pair, rng};
use killing_s3::decomposition::{
    diagonalise, hodge_blocks, is_aligned, is_diagonalisable, ricci_decompose, so_action, DiagonalACT,
};
use killing_s3::error::Error;
use killing_s3::integrability::{is_integrable, IntegrabilityReport, Method};
use killing_s3::ksvariety::{
    canonical_form, is_singular, orbit, stabilizer_size, staeckel_line, KSMatrix, StaeckelLine,
};
use killing_s3::lambda2::AlgCurvTensor;
use killing_s3::oracle::{geodesic_conservation, nijenhuis_residual, tns_verdict, TorsionResidual, DEFAULT_STEP};
use killing_s3::staeckel::{
    benenti_eval, benenti_family, commutator_determinants, commute_general, multiplicities, spans_staeckel,
    staeckel_system,
};
use killing_s3::wire::{
    act_to_json, ks_to_json, parse_ks, parse_sym4, parse_tensor, sym4_to_json, to_json_string, ActJson, KsVectorJson,
};
use killing_s3::ToleranceConfig;

const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 64;
/// Killing-equation residual accepted by `verify`.
const KILLING_TOL: f64 = 1e-7;

#[derive(Parser, Debug)]
#[command(
    name = "ks3",
    version,
    about = "Integrability and separation of Killing tensors on S³"
)]
struct Cli {
    /// Equality tolerance for residuals, relative to the trace-free norm.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().eq)]
    tol: f64,
    /// Relative tolerance for grouping equal eigenvalues.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().grouping)]
    grouping: f64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().rank)]
    rank: f64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Brute,
    Invariants,
    Diagonal,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Brute => Method::BruteForce,
            MethodArg::Invariants => Method::Invariants,
            MethodArg::Diagonal => Method::DiagonalDet,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hodge blocks, Ricci decomposition and diagonal form of a tensor.
    Decompose {
        /// Tensor JSON file, or "-" for stdin.
        tensor: PathBuf,
    },
    /// Integrability verdict; exit 0 when integrable, 1 otherwise.
    Check {
        tensor: PathBuf,
        /// Decision procedure; defaults to the determinant test when the
        /// tensor is diagonalisable and the invariants otherwise.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Separation type of a spectrum `Λ`.
    Classify {
        /// Four comma-separated eigenvalues.
        #[arg(long, value_parser = list::<4>, allow_hyphen_values = true)]
        lambda: [f64; 4],
        /// Three comma-separated S² Ricci eigenvalues, needed for a triple eigenvalue.
        #[arg(long = "s2-ricci", value_parser = list::<3>, allow_hyphen_values = true)]
        s2_ricci: Option<[f64; 3]>,
    },
    /// Orbit of a KS-matrix under the octahedral group.
    Orbit { ks: PathBuf },
    /// Stäckel line through a variety point.
    Line { ks: PathBuf },
    /// Stäckel system of three commuting integrable Killing tensors.
    Staeckel {
        ks: PathBuf,
        /// Scalar curvature given to the two non-metric generators.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        scalar: f64,
    },
    /// Member `R(λ)` of the Benenti family of a symmetric form.
    Benenti {
        /// `{"sym4": ...}` file, or "-" for stdin.
        h: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Whether two Killing tensors commute; exit 0 when they do, 1 otherwise.
    Commute { a: PathBuf, b: PathBuf },
    /// Eigenvalues of the special conformal Killing tensor at a point.
    Coords {
        /// Four comma-separated eigenvalues.
        #[arg(long, value_parser = list::<4>, allow_hyphen_values = true)]
        lambda: [f64; 4],
        /// Point of ℝ⁴, projected to the unit sphere.
        #[arg(long, value_parser = list::<4>, allow_hyphen_values = true)]
        point: [f64; 4],
    },
    /// Numerical check on random frames; exit 0 when it agrees with the
    /// algebraic verdict.
    Verify {
        tensor: PathBuf,
        #[arg(long, default_value_t = 5)]
        frames: usize,
        #[arg(long)]
        seed: u64,
        /// Finite-difference step.
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Random diagonal tensors in `act-v1` form, one per line.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Solve for `t₃` so that the tensor is integrable.
        #[arg(long)]
        on_quadric: bool,
        /// Apply a random rotation.
        #[arg(long)]
        conjugate: bool,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

fn list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = values.len();
    values
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated numbers, got {n}"))
}

/// Result of a command: a JSON value to print and the exit code.
struct Output {
    value: Value,
    code: u8,
}

fn ok(value: impl Serialize) -> Result<Output, Error> {
    verdict(value, true)
}

fn verdict(value: impl Serialize, pass: bool) -> Result<Output, Error> {
    Ok(Output {
        value: to_value(&value),
        code: if pass { 0 } else { 1 },
    })
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::from_str(&to_json_string(v)).expect("our own JSON parses")
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    let io_err = |e: io::Error| Error::InvalidInput(format!("cannot read {}: {e}", path.display()));
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn tensor(path: &PathBuf) -> Result<AlgCurvTensor, Error> {
    parse_tensor(&read_input(path)?)
}

fn ks(path: &PathBuf) -> Result<KSMatrix, Error> {
    parse_ks(&read_input(path)?)
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

#[derive(Serialize)]
struct Blocks {
    w_plus: [[f64; 3]; 3],
    w_minus: [[f64; 3]; 3],
    t: [[f64; 3]; 3],
    s: f64,
}

#[derive(Serialize)]
struct Diagonal {
    form: DiagonalACT,
    rotation_plus: [[f64; 3]; 3],
    rotation_minus: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct Decomposition {
    blocks: Blocks,
    weyl: ActJson,
    ricci: killing_s3::wire::Sym4Json,
    scalar_curvature: f64,
    aligned: bool,
    diagonalisable: bool,
    diagonal: Option<Diagonal>,
}

fn decompose(r: &AlgCurvTensor, cfg: &ToleranceConfig) -> Result<Output, Error> {
    let b = hodge_blocks(r);
    let parts = ricci_decompose(r);
    let diagonal = match diagonalise(r, cfg) {
        Ok((form, pair)) => Some(Diagonal {
            form,
            rotation_plus: rows(pair.plus()),
            rotation_minus: rows(pair.minus()),
        }),
        Err(Error::NotDiagonalisable { .. }) => None,
        Err(e) => return Err(e),
    };
    ok(Decomposition {
        blocks: Blocks {
            w_plus: rows(b.w_plus()),
            w_minus: rows(b.w_minus()),
            t: rows(b.t()),
            s: b.s(),
        },
        weyl: act_to_json(&parts.weyl),
        ricci: sym4_to_json(&parts.ricci),
        scalar_curvature: parts.s,
        aligned: is_aligned(r, cfg),
        diagonalisable: is_diagonalisable(r, cfg),
        diagonal,
    })
}

#[derive(Serialize)]
struct Classification {
    #[serde(rename = "type")]
    kind: String,
    name: &'static str,
    label: &'static str,
    stratum: Stratum,
}

fn classification(t: killing_s3::coords::SeparationType) -> Classification {
    Classification {
        kind: t.to_string(),
        name: t.name(),
        label: t.label(),
        stratum: t.stratum(),
    }
}

#[derive(Serialize)]
struct OrbitReport {
    orbit_size: usize,
    stabilizer_size: usize,
    canonical_form: KsVectorJson,
    singular: bool,
    orbit: Vec<KsVectorJson>,
}

#[derive(Serialize)]
struct LineReport {
    line: StaeckelLine,
    separation: Option<Classification>,
}

#[derive(Serialize)]
struct BenentiReport {
    lambda: f64,
    tensor: ActJson,
    integrable: bool,
    eigenvalues: [f64; 4],
    multiplicities: Vec<usize>,
    spans_staeckel_system: bool,
}

#[derive(Serialize)]
struct CommuteReport {
    commute: bool,
    residual: f64,
    diagonal_determinants: Option<[f64; 4]>,
}

#[derive(Serialize)]
struct CoordsReport {
    point: [f64; 4],
    lambda: [f64; 3],
    on_coordinate_plane: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    algebraic_verdict: bool,
    oracle_verdict: Option<bool>,
    max_killing_residual: f64,
    max_conservation_residual: f64,
    consistent: bool,
    frames: Vec<TorsionResidual>,
}

fn verify(r: &AlgCurvTensor, frames: usize, seed: u64, step: f64, cfg: &ToleranceConfig) -> Result<Output, Error> {
    if frames == 0 {
        return Err(Error::InvalidInput("--frames must be positive".into()));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput("--step must be positive".into()));
    }
    let mut g = rng(seed);
    let algebraic = is_integrable(r, cfg, None).verdict;
    let mut residuals = Vec::with_capacity(frames);
    let mut conservation: f64 = 0.0;
    for _ in 0..frames {
        let f = random_frame(&mut g, 0.05);
        residuals.push(nijenhuis_residual(r, &f, step));
        let scale = r.norm().max(f64::MIN_POSITIVE);
        conservation = conservation.max(geodesic_conservation(r, f.point(), &f.basis()[0], 32) / scale);
    }
    let killing = residuals.iter().map(|t| t.killing_eq).fold(0.0, f64::max);
    let oracle = tns_verdict(&residuals);
    let consistent = killing < KILLING_TOL && conservation < KILLING_TOL && oracle == Some(algebraic);
    verdict(
        VerifyReport {
            algebraic_verdict: algebraic,
            oracle_verdict: oracle,
            max_killing_residual: killing,
            max_conservation_residual: conservation,
            consistent,
            frames: residuals,
        },
        consistent,
    )
}

fn generate(seed: u64, on: bool, conjugate: bool, count: usize) -> Vec<AlgCurvTensor> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            let d = if on {
                on_quadric(&mut g)
            } else {
                random_diagonal(&mut g)
            };
            if conjugate {
                so_action(&d.to_act(), &random_rotation_pair(&mut g))
            } else {
                d.to_act()
            }
        })
        .collect()
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let cfg = ToleranceConfig {
        eq: cli.tol,
        grouping: cli.grouping,
        rank: cli.rank,
    };
    match &cli.command {
        Command::Decompose { tensor: p } => decompose(&tensor(p)?, &cfg),
        Command::Check { tensor: p, method } => {
            let report: IntegrabilityReport = is_integrable(&tensor(p)?, &cfg, method.map(Method::from));
            verdict(report, report.verdict)
        }
        Command::Classify { lambda, s2_ricci } => {
            let spec = Spectrum::new(*lambda, cfg.grouping)?;
            ok(classification(classify(&spec, *s2_ricci, cfg.grouping)?))
        }
        Command::Orbit { ks: p } => {
            let m = ks(p)?;
            if m.norm() == 0.0 {
                return Err(Error::InvalidInput("zero KS-matrix".into()));
            }
            let o = orbit(&m);
            ok(OrbitReport {
                orbit_size: o.len(),
                stabilizer_size: stabilizer_size(&m),
                canonical_form: ks_to_json(&canonical_form(&m)),
                singular: is_singular(&m, cfg.rank),
                orbit: o.iter().map(ks_to_json).collect(),
            })
        }
        Command::Line { ks: p } => {
            let line = staeckel_line(&ks(p)?, &cfg)?;
            ok(LineReport {
                separation: classify_line(&line, None, &cfg).ok().map(classification),
                line,
            })
        }
        Command::Staeckel { ks: p, scalar } => ok(staeckel_system(&ks(p)?, *scalar, &cfg)?),
        Command::Benenti { h: p, lambda } => {
            let h = parse_sym4(&read_input(p)?)?;
            let f = benenti_family(&h);
            let r = benenti_eval(&f, *lambda);
            let eigenvalues = h.eigenvalues();
            ok(BenentiReport {
                lambda: *lambda,
                tensor: act_to_json(&r),
                integrable: is_integrable(&r, &cfg, None).verdict,
                eigenvalues,
                multiplicities: multiplicities(&eigenvalues, cfg.grouping),
                spans_staeckel_system: spans_staeckel(&f, cfg.grouping),
            })
        }
        Command::Commute { a, b } => {
            let (a, b) = (tensor(a)?, tensor(b)?);
            let residual = commute_general(&a, &b);
            let diagonal_determinants = match (
                DiagonalACT::try_from_act(&a, cfg.eq),
                DiagonalACT::try_from_act(&b, cfg.eq),
            ) {
                (Some(x), Some(y)) => Some(commutator_determinants(&x, &y)),
                _ => None,
            };
            let commute = residual < cfg.eq;
            verdict(
                CommuteReport {
                    commute,
                    residual,
                    diagonal_determinants,
                },
                commute,
            )
        }
        Command::Coords { lambda, point } => {
            let spec = Spectrum::new(*lambda, cfg.grouping)?;
            let x = SpherePoint::normalize(*point)?;
            let (lam, flag) = eigenvalues_with_flag(&spec, &x);
            ok(CoordsReport {
                point: x.coords(),
                lambda: lam,
                on_coordinate_plane: flag,
            })
        }
        Command::Verify {
            tensor: p,
            frames,
            seed,
            step,
        } => verify(&tensor(p)?, *frames, *seed, *step, &cfg),
        Command::Gen {
            seed,
            on_quadric,
            conjugate,
            count,
        } => {
            let items: Vec<Value> = generate(*seed, *on_quadric, *conjugate, *count)
                .iter()
                .map(|r| to_value(&act_to_json(r)))
                .collect();
            ok(items)
        }
    }
}

/// `path: value` lines, one per leaf.
fn render_text(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                render_text(x, &p, out);
            }
        }
        Value::Array(items) if items.iter().all(|x| x.is_number()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{path}: {}\n", parts.join(" ")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render_text(x, &format!("{path}[{i}]"), out);
            }
        }
        _ => out.push_str(&format!("{path}: {}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn print(cli: &Cli, value: &Value) {
    let gen = matches!(cli.command, Command::Gen { .. });
    match (cli.format, value) {
        (Format::Json, Value::Array(items)) if gen => {
            for item in items {
                println!("{}", to_json_string(item));
            }
        }
        (Format::Json, _) => println!("{}", to_json_string(value)),
        (Format::Text, Value::Object(map)) if map.contains_key("type") && map.contains_key("label") => {
            println!("{}", scalar(&map["type"]));
        }
        (Format::Text, _) => {
            let mut out = String::new();
            render_text(value, "", &mut out);
            print!("{out}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print(&cli, &out.value);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("ks3: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
