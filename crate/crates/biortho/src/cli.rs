//! Command-line front end: every experiment as a subcommand with
//! machine-readable output.
//!
//! Each run prints one JSON line to stdout with the fully resolved
//! configuration (including defaults and the seed), writes one output file
//! atomically (temp file in the same directory, then rename), and exits 0
//! on success, 1 on input or validation problems, 2 on numerical failure.
//! Angles are radians; CSV files start with a `#` comment carrying the same
//! configuration echo, then a header row; JSON matrices are nested
//! `[re, im]` pairs, row-major.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::composite::{no_signalling_report, tensor_frame};
use crate::dynamics::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::frame::{pairs_to_matrix, BiorthogonalFrame};
use crate::lindblad::{evolve_density, regime_scan, DensityMatrix, LindbladModel};
use crate::linalg::ComplexMatrix;
use crate::observable::{observable_from_array, outcome_probabilities, sample_outcomes};
use crate::two_level::{pauli, two_level_frame, PauliAxis, TwoLevelParams};

#[derive(Parser)]
#[command(
    name = "biortho",
    version,
    about = "Biorthogonal quantum mechanics experiments",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit an extended Pauli matrix of the (xi, eta) frame as JSON.
    Pauli(PauliArgs),
    /// Measurement statistics and seeded sampling for a configured
    /// observable and state.
    Measure(MeasureArgs),
    /// Closed-system evolution: coefficient trajectory and physical norm.
    Evolve(EvolveArgs),
    /// Sample one observable and state under several frames and compare
    /// counts and probabilities.
    Distinguish(DistinguishArgs),
    /// No-signalling test: B-side marginals under local evolution on A.
    Nosignal(NosignalArgs),
    /// Integrate the gain/loss master equation and emit Bloch components.
    Lindblad(LindbladArgs),
    /// Sweep the balanced gain/loss rate and classify each regime.
    Scan(ScanArgs),
}

#[derive(Args)]
struct PauliArgs {
    /// Frame angle xi in radians, interior of (0, 2pi).
    #[arg(long)]
    xi: f64,
    /// Frame angle eta in radians, [0, 2pi).
    #[arg(long)]
    eta: f64,
    /// Axis: x, y, or z.
    #[arg(long)]
    axis: String,
    #[arg(long, default_value = "pauli.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// JSON configuration path.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "measure.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "evolve.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long)]
    config: PathBuf,
    /// Generator seed shared by every frame.
    #[arg(long)]
    seed: u64,
    /// Number of measurement samples per frame.
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value = "distinguish.json")]
    out: PathBuf,
}

#[derive(Args)]
struct NosignalArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "nosignal.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct LindbladArgs {
    /// Coherent drive strength.
    #[arg(long)]
    kappa: f64,
    /// Balanced gain and loss rate.
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value = "lindblad.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long = "gamma-min")]
    gamma_min: f64,
    #[arg(long = "gamma-max")]
    gamma_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value = "scan.csv")]
    out: PathBuf,
}

/// Frame description inside config files: either two-level angles or an
/// explicit matrix pair in the frame-file schema.
#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum FrameSpec {
    TwoLevel {
        xi: f64,
        eta: f64,
    },
    Explicit {
        n: usize,
        u: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<Vec<[f64; 2]>>,
    },
}

impl FrameSpec {
    fn build(&self) -> Result<BiorthogonalFrame> {
        match self {
            FrameSpec::TwoLevel { xi, eta } => two_level_frame(&TwoLevelParams::new(*xi, *eta)?),
            FrameSpec::Explicit { n, u, v } => {
                let u = pairs_to_matrix(*n, u, "u")?;
                match v {
                    Some(pairs) => {
                        BiorthogonalFrame::from_u_v(u, pairs_to_matrix(*n, pairs, "v")?)
                    }
                    None => {
                        let phis: Vec<Vec<C64>> = (0..*n).map(|j| u.column(j)).collect();
                        BiorthogonalFrame::from_basis(&phis)
                    }
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureConfig {
    frame: FrameSpec,
    /// Hermitian coefficient array, rows of [re, im] pairs.
    f_array: Vec<Vec<[f64; 2]>>,
    /// Expansion coefficients as [re, im] pairs.
    state: Vec<[f64; 2]>,
    n_samples: u64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveConfig {
    frame: FrameSpec,
    energies: Vec<f64>,
    state: Vec<[f64; 2]>,
    t_max: f64,
    /// Number of output intervals; rows appear at t = k t_max / steps.
    steps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistinguishConfig {
    frames: Vec<FrameSpec>,
    f_array: Vec<Vec<[f64; 2]>>,
    state: Vec<[f64; 2]>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    xi_steps: usize,
    eta_steps: usize,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimesSpec {
    t_max: f64,
    steps: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NosignalConfig {
    /// Single A frame; exactly one of `frame_a` and `grid_a` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_a: Option<FrameSpec>,
    /// Sweep of two-level A frames over an interior (xi, eta) grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_a: Option<GridSpec>,
    frame_b: FrameSpec,
    energies_a: Vec<f64>,
    /// Joint coefficients, A as the slow index.
    state: Vec<[f64; 2]>,
    obs_b: Vec<Vec<[f64; 2]>>,
    times: TimesSpec,
}

/// Entry point behind the binary: parse, dispatch, map errors to exit
/// codes (0 success, 1 validation, 2 numerical).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Pauli(args) => run_pauli(args),
        Command::Measure(args) => run_measure(args),
        Command::Evolve(args) => run_evolve(args),
        Command::Distinguish(args) => run_distinguish(args),
        Command::Nosignal(args) => run_nosignal(args),
        Command::Lindblad(args) => run_lindblad(args),
        Command::Scan(args) => run_scan(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn run_pauli(args: PauliArgs) -> Result<()> {
    let axis: PauliAxis = args.axis.parse()?;
    let params = TwoLevelParams::new(args.xi, args.eta)?;
    let matrix = pauli(axis, &params);
    let config = json!({
        "command": "pauli",
        "xi": args.xi,
        "eta": args.eta,
        "axis": axis.label(),
        "out": args.out.display().to_string(),
    });
    println!("{config}");
    let doc = json!({
        "config": config,
        "matrix": matrix_rows_json(&matrix),
    });
    write_atomic(&args.out, format!("{doc}\n").as_bytes())
}

fn run_measure(args: MeasureArgs) -> Result<()> {
    let cfg: MeasureConfig = read_config(&args.config)?;
    let frame = cfg.frame.build()?;
    let f_array = rows_to_matrix(&cfg.f_array)?;
    let state = frame.state(pairs_to_vec(&cfg.state)?)?;
    let obs = observable_from_array(&frame, f_array)?;
    let (eigenvalues, probs) = outcome_probabilities(&obs, &state)?;
    let counts = sample_outcomes(&obs, &state, cfg.n_samples, cfg.seed)?;

    let config = echo_with_command("measure", &cfg, &args.out)?;
    println!("{config}");
    let mut body = String::new();
    let _ = writeln!(body, "# {config}");
    let _ = writeln!(body, "eigenvalue,probability,count");
    for ((value, p), count) in eigenvalues.iter().zip(probs.values()).zip(counts.iter()) {
        let _ = writeln!(body, "{value},{p},{count}");
    }
    write_atomic(&args.out, body.as_bytes())
}

fn run_evolve(args: EvolveArgs) -> Result<()> {
    let cfg: EvolveConfig = read_config(&args.config)?;
    if cfg.steps == 0 || !cfg.t_max.is_finite() || cfg.t_max < 0.0 {
        return Err(Error::InvalidInput("steps must be positive, t_max non-negative".into()));
    }
    let frame = cfg.frame.build()?;
    let state0 = frame.state(pairs_to_vec(&cfg.state)?)?;
    let h = HamiltonianSpec::new(frame.clone(), cfg.energies.clone())?;

    let config = echo_with_command("evolve", &cfg, &args.out)?;
    println!("{config}");
    let mut body = String::new();
    let _ = writeln!(body, "# {config}");
    let mut header = String::from("t");
    for n in 1..=frame.dim() {
        let _ = write!(header, ",re_c{n},im_c{n}");
    }
    let _ = writeln!(body, "{header},physical_norm");
    for k in 0..=cfg.steps {
        let t = cfg.t_max * k as f64 / cfg.steps as f64;
        let st = h.evolve(&state0, t)?;
        let norm = frame.physical_inner(&st, &st)?.re;
        let mut row = format!("{t}");
        for c in st.coeffs() {
            let _ = write!(row, ",{},{}", c.re, c.im);
        }
        let _ = writeln!(body, "{row},{norm}");
    }
    write_atomic(&args.out, body.as_bytes())
}

fn run_distinguish(args: DistinguishArgs) -> Result<()> {
    let cfg: DistinguishConfig = read_config(&args.config)?;
    if cfg.frames.len() < 2 {
        return Err(Error::InvalidInput("distinguish needs at least two frames".into()));
    }
    let f_array = rows_to_matrix(&cfg.f_array)?;
    let coeffs = pairs_to_vec(&cfg.state)?;

    let mut eigenvalues: Option<Vec<f64>> = None;
    let mut all_probs: Vec<Vec<f64>> = Vec::new();
    let mut all_counts: Vec<Vec<u64>> = Vec::new();
    for spec in &cfg.frames {
        let frame = spec.build()?;
        let state = frame.state(coeffs.clone())?;
        let obs = observable_from_array(&frame, f_array.clone())?;
        let (values, probs) = outcome_probabilities(&obs, &state)?;
        let counts = sample_outcomes(&obs, &state, args.samples, args.seed)?;
        if eigenvalues.is_none() {
            eigenvalues = Some(values);
        }
        all_probs.push(probs.values().to_vec());
        all_counts.push(counts);
    }
    let spread = max_column_spread(&all_probs);
    let counts_identical = all_counts.windows(2).all(|w| w[0] == w[1]);

    let config = json!({
        "command": "distinguish",
        "seed": args.seed,
        "samples": args.samples,
        "config": serde_json::to_value(&cfg).expect("config reserializes"),
        "out": args.out.display().to_string(),
    });
    println!("{config}");
    let doc = json!({
        "config": config,
        "eigenvalues": eigenvalues,
        "probabilities": all_probs,
        "counts": all_counts,
        "max_probability_spread": spread,
        "counts_identical": counts_identical,
    });
    write_atomic(&args.out, format!("{doc}\n").as_bytes())
}

fn run_nosignal(args: NosignalArgs) -> Result<()> {
    let cfg: NosignalConfig = read_config(&args.config)?;
    let frames_a: Vec<(f64, f64, BiorthogonalFrame)> = match (&cfg.frame_a, &cfg.grid_a) {
        (Some(spec), None) => {
            let frame = spec.build()?;
            let (xi, eta) = match spec {
                FrameSpec::TwoLevel { xi, eta } => (*xi, *eta),
                FrameSpec::Explicit { .. } => (f64::NAN, f64::NAN),
            };
            vec![(xi, eta, frame)]
        }
        (None, Some(grid)) => {
            if grid.xi_steps == 0 || grid.eta_steps == 0 {
                return Err(Error::InvalidInput("grid steps must be positive".into()));
            }
            crate::two_level::param_grid(grid.xi_steps, grid.eta_steps)
                .into_iter()
                .map(|p| Ok((p.xi(), p.eta(), two_level_frame(&p)?)))
                .collect::<Result<_>>()?
        }
        _ => {
            return Err(Error::InvalidInput(
                "provide exactly one of frame_a or grid_a".into(),
            ))
        }
    };
    let frame_b = cfg.frame_b.build()?;
    let obs_b = rows_to_matrix(&cfg.obs_b)?;
    let coeffs = pairs_to_vec(&cfg.state)?;
    if cfg.times.steps == 0 || !cfg.times.t_max.is_finite() || cfg.times.t_max <= 0.0 {
        return Err(Error::InvalidInput("times need positive steps and t_max".into()));
    }
    let times: Vec<f64> = (1..=cfg.times.steps)
        .map(|k| cfg.times.t_max * k as f64 / cfg.times.steps as f64)
        .collect();

    let config = echo_with_command("nosignal", &cfg, &args.out)?;
    println!("{config}");
    let mut body = String::new();
    let _ = writeln!(body, "# {config}");
    let _ = writeln!(body, "xi_a,eta_a,max_deviation");
    let mut worst = 0.0f64;
    for (xi, eta, frame_a) in &frames_a {
        let cf = tensor_frame(frame_a, &frame_b)?;
        let joint = cf.state(coeffs.clone())?;
        let h_a = HamiltonianSpec::new(frame_a.clone(), cfg.energies_a.clone())?;
        let deviation = no_signalling_report(&cf, &joint, &h_a, &obs_b, &times)?;
        worst = worst.max(deviation);
        let _ = writeln!(body, "{xi},{eta},{deviation}");
    }
    write_atomic(&args.out, body.as_bytes())?;
    if worst <= 1e-9 {
        println!("PASS max_deviation={worst:e}");
        Ok(())
    } else {
        println!("FAIL max_deviation={worst:e}");
        Err(Error::ConvergenceFailure(format!(
            "no-signalling deviation {worst:e} exceeds 1e-9"
        )))
    }
}

fn run_lindblad(args: LindbladArgs) -> Result<()> {
    let model = LindbladModel::balanced(args.kappa, args.gamma)?;
    let trajectory = evolve_density(&model, &DensityMatrix::excited(), args.tmax, args.dt)?;
    let config = json!({
        "command": "lindblad",
        "kappa": args.kappa,
        "gamma": args.gamma,
        "tmax": args.tmax,
        "dt": args.dt,
        "rho0": "excited",
        "out": args.out.display().to_string(),
    });
    println!("{config}");
    let mut body = String::new();
    let _ = writeln!(body, "# {config}");
    let _ = writeln!(body, "t,x,y,z,purity");
    for (t, rho) in &trajectory {
        let (x, y, z) = rho.bloch();
        let _ = writeln!(body, "{t},{x},{y},{z},{}", rho.purity());
    }
    write_atomic(&args.out, body.as_bytes())
}

fn run_scan(args: ScanArgs) -> Result<()> {
    if args.steps < 2 {
        return Err(Error::InvalidInput("scan needs at least two grid points".into()));
    }
    if !(args.gamma_min.is_finite() && args.gamma_max.is_finite())
        || args.gamma_min < 0.0
        || args.gamma_max <= args.gamma_min
    {
        return Err(Error::InvalidInput("need 0 <= gamma-min < gamma-max".into()));
    }
    let grid: Vec<f64> = (0..args.steps)
        .map(|k| {
            args.gamma_min
                + (args.gamma_max - args.gamma_min) * k as f64 / (args.steps - 1) as f64
        })
        .collect();
    // Slow enough rates need long horizons to settle; fast ones need small
    // steps. Both policies resolve against the whole grid.
    let slowest = grid.iter().copied().filter(|&g| g > 0.0).fold(args.kappa.min(1.0), f64::min);
    let t_max = 20.0 / slowest.max(1e-3);
    let dt = 0.01 / args.kappa.max(args.gamma_max).max(1.0);
    let rows = regime_scan(args.kappa, &grid, &DensityMatrix::excited(), t_max, dt)?;

    let config = json!({
        "command": "scan",
        "kappa": args.kappa,
        "gamma_min": args.gamma_min,
        "gamma_max": args.gamma_max,
        "steps": args.steps,
        "t_max": t_max,
        "dt": dt,
        "rho0": "excited",
        "out": args.out.display().to_string(),
    });
    println!("{config}");
    let mut body = String::new();
    let _ = writeln!(body, "# {config}");
    let _ = writeln!(body, "gamma,label,max_im_eig,osc_flag");
    for row in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{}",
            row.gamma,
            row.regime.label,
            row.max_im_eig,
            if row.trajectory_oscillation { 1 } else { 0 }
        );
    }
    write_atomic(&args.out, body.as_bytes())
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))
}

fn echo_with_command<T: Serialize>(command: &str, cfg: &T, out: &Path) -> Result<String> {
    let mut value = serde_json::to_value(cfg)
        .map_err(|e| Error::InvalidInput(format!("config reserialization: {e}")))?;
    let map = value.as_object_mut().expect("config objects");
    map.insert("command".into(), json!(command));
    map.insert("out".into(), json!(out.display().to_string()));
    Ok(value.to_string())
}

/// Write through a temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::InvalidInput(format!("cannot move into {}: {e}", path.display())))
}

fn pairs_to_vec(pairs: &[[f64; 2]]) -> Result<Vec<C64>> {
    if pairs.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidInput("non-finite state coefficients".into()));
    }
    Ok(pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix rows must be square".into()));
    }
    let flat: Vec<[f64; 2]> = rows.iter().flatten().copied().collect();
    pairs_to_matrix(n, &flat, "matrix")
}

fn matrix_rows_json(m: &ComplexMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn max_column_spread(rows: &[Vec<f64>]) -> f64 {
    let mut spread = 0.0f64;
    if let Some(first) = rows.first() {
        for col in 0..first.len() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for row in rows {
                lo = lo.min(row[col]);
                hi = hi.max(row[col]);
            }
            spread = spread.max(hi - lo);
        }
    }
    spread
}
