//! One binary, subcommand style: configuration files are canonical, flags
//! override. All outputs are plain CSV/JSON with fixed float formatting, so
//! identical config + seed gives byte-identical files.
//!
//! Exit codes: 0 success, 2 validation/config error, 3 numeric failure
//! (blow-up, degenerate system, domain exit), 4 I/O error.

use clap::{Args, Parser, Subcommand};
use elastowave::error::Error;
use elastowave::inversion::{
    c_identifiability_report, end_to_end_recovery, read_measurements_json, recover_ab,
    recover_ab_alt, recover_lame, Traversal,
};
use elastowave::kinematics::{classify_boundary, trace_ray, Covector, ModeTag, StepControl, WaveMode};
use elastowave::medium::{wave_speeds, MaterialPoint, MediumField};
use elastowave::resonance::{
    solve_pp_to_s, solve_ps, solve_ss_to_p, InteractionCase, InteractionConfig, ModeAmplitude,
    SsOutcome,
};
use elastowave::simulator::{
    experiment::write_report, run_interaction_experiment, ExperimentConfig,
};
use elastowave::symbols::{angle_sweep, table_rows, write_sweep_csv};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "elastowave", version, about = "Nonlinear elastic wave interaction toolkit")]
struct Cli {
    /// Output directory (default: $ELASTOWAVE_OUT_DIR or current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Validate the configuration and print the planned computation
    /// without running it.
    #[arg(long, global = true)]
    dry_run: bool,

    /// Seed recorded with outputs and used by randomized diagnostics.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for data-parallel work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the P and S wave speeds of a medium.
    Speeds(MediumArgs),
    /// Classify a boundary covector (elliptic/hyperbolic/glancing per mode).
    Classify(ClassifyArgs),
    /// Trace a bicharacteristic ray and export it as CSV.
    Trace(TraceArgs),
    /// Solve the two-wave resonance kinematics and export JSON records.
    Resonance(ResonanceArgs),
    /// Sweep interaction-symbol amplitudes over the output angle.
    Symbol(SymbolArgs),
    /// Evaluate the interaction table for a medium.
    Table(MediumArgs),
    /// Run a two-packet interaction experiment.
    Simulate(SimulateArgs),
    /// Parameter recovery from measurements or experiment reports.
    Invert(InvertArgs),
}

#[derive(Args, Clone)]
struct MediumArgs {
    /// Medium description file (TOML); flags override its constants.
    #[arg(long)]
    medium: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
}

impl MediumArgs {
    fn material(&self) -> Result<MaterialPoint, Error> {
        let base = match &self.medium {
            Some(path) => {
                let field = MediumField::from_file(path)?;
                field.sample_checked(&Vector3::zeros())?
            }
            None => MaterialPoint::lame(
                self.lambda
                    .ok_or_else(|| Error::validation("need --lambda or --medium"))?,
                self.mu
                    .ok_or_else(|| Error::validation("need --mu or --medium"))?,
            )?,
        };
        MaterialPoint::new(
            self.lambda.unwrap_or(base.lambda),
            self.mu.unwrap_or(base.mu),
            self.a.unwrap_or(base.a_landau),
            self.b.unwrap_or(base.b_landau),
            self.c.unwrap_or(base.c_landau),
        )
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    medium: MediumArgs,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    /// Tangential wavevector components "x,y,z".
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Boundary normal components "x,y,z".
    #[arg(long, value_delimiter = ',', default_value = "0,0,1", allow_negative_numbers = true)]
    normal: Vec<f64>,
    /// Write the full classification as JSON here (relative to --out-dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct TraceConfig {
    medium: toml::Value,
    start: TraceStart,
    t_span: [f64; 2],
    #[serde(default)]
    rel_tol: Option<f64>,
    #[serde(default)]
    abs_tol: Option<f64>,
}

#[derive(Deserialize)]
struct TraceStart {
    t: f64,
    x: [f64; 3],
    xi: [f64; 3],
    mode: String,
}

#[derive(Args)]
struct TraceArgs {
    /// Trace configuration (TOML: medium, start covector, t_span, tolerances).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV name.
    #[arg(long, default_value = "ray.csv")]
    out: PathBuf,
}

#[derive(Deserialize)]
struct ResonanceConfigFile {
    medium: toml::Value,
    /// Incoming modes, e.g. ["p", "p"], ["p", "s"], ["s", "s"].
    modes: [String; 2],
    cos_alpha: f64,
    #[serde(default = "one")]
    scale1: f64,
    #[serde(default = "one")]
    scale2: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Args)]
struct ResonanceArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "resonance.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SymbolArgs {
    #[command(flatten)]
    medium: MediumArgs,
    /// Interaction case (pp_to_sh, psh_to_p, psh_to_sh, psv_to_sv,
    /// shsh_to_p, shsv, svsv_to_p).
    #[arg(long)]
    case: String,
    /// Incoming angle α in radians.
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Number of ψ grid points.
    #[arg(long, default_value_t = 360)]
    n_psi: usize,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output file tag (produces <tag>.json and <tag>.csv).
    #[arg(long, default_value = "experiment")]
    tag: String,
    /// Also export the extracted u12 snapshots (flat binary + sidecar).
    #[arg(long)]
    export_snapshots: bool,
}

#[derive(Args)]
struct InvertArgs {
    /// Recovery mode: lame | ab | ab-alt | end-to-end | c-report.
    #[arg(long)]
    mode: String,
    /// Measurements JSON (for ab / ab-alt) or traversals JSON (for lame).
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Experiment report JSONs on the unknown medium (end-to-end).
    #[arg(long, num_args = 0..)]
    experiments: Vec<PathBuf>,
    /// Calibration experiment report JSONs (end-to-end).
    #[arg(long, num_args = 0..)]
    calibration: Vec<PathBuf>,
    #[command(flatten)]
    medium: MediumArgs,
    #[arg(long, default_value = "recovery.json")]
    out: PathBuf,
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os("ELASTOWAVE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parse_medium_value(v: &toml::Value) -> Result<MediumField, Error> {
    let text = toml::to_string(v).map_err(|e| Error::Parse(e.to_string()))?;
    MediumField::from_toml_str(&text, None)
}

fn parse_mode(s: &str) -> Result<WaveMode, Error> {
    match s.to_ascii_lowercase().as_str() {
        "p" => Ok(WaveMode::P),
        "s" => Ok(WaveMode::S),
        other => Err(Error::validation(format!("unknown mode '{other}'"))),
    }
}

fn write_out(dir: &Path, rel: &Path, contents: &[u8]) -> Result<PathBuf, Error> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn plan(dry_run: bool, description: &str) -> bool {
    if dry_run {
        println!("dry-run: {description}");
    }
    dry_run
}

fn run(cli: &Cli) -> Result<(), Error> {
    let dir = out_dir(cli);
    match &cli.cmd {
        Cmd::Speeds(margs) => {
            let p = margs.material()?;
            if plan(cli.dry_run, "compute wave speeds sqrt(lambda+2mu), sqrt(mu)") {
                return Ok(());
            }
            let (cp, cs) = wave_speeds(&p)?;
            println!("c_P={cp} c_S={cs}");
        }
        Cmd::Classify(args) => {
            let p = args.medium.material()?;
            if args.xi.len() != 3 || args.normal.len() != 3 {
                return Err(Error::validation("--xi and --normal need 3 components"));
            }
            let cv = Covector {
                t: 0.0,
                x: Vector3::zeros(),
                tau: args.tau,
                xi: Vector3::new(args.xi[0], args.xi[1], args.xi[2]),
                mode: ModeTag::Unclassified,
            };
            let normal = Vector3::new(args.normal[0], args.normal[1], args.normal[2]);
            if plan(cli.dry_run, "classify boundary covector for P and S modes") {
                return Ok(());
            }
            let class = classify_boundary(&cv, &normal, &p)?;
            println!("P: {}", class.p.tag());
            println!("S: {}", class.s.tag());
            if let Some(out) = &args.out {
                let json =
                    serde_json::to_string_pretty(&class).map_err(|e| Error::Parse(e.to_string()))?;
                let path = write_out(&dir, out, json.as_bytes())?;
                println!("wrote {}", path.display());
            }
        }
        Cmd::Trace(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let cfg: TraceConfig = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let medium = parse_medium_value(&cfg.medium)?;
            let mode = parse_mode(&cfg.start.mode)?;
            let p0 = medium.sample_checked(&Vector3::from(cfg.start.x))?;
            let start = Covector::on_variety(
                cfg.start.t,
                Vector3::from(cfg.start.x),
                Vector3::from(cfg.start.xi),
                mode,
                &p0,
            )?;
            let mut ctrl = StepControl::default();
            if let Some(rt) = cfg.rel_tol {
                ctrl.rel_tol = rt;
            }
            if let Some(at) = cfg.abs_tol {
                ctrl.abs_tol = at;
            }
            if plan(
                cli.dry_run,
                &format!(
                    "trace a {:?} ray over t in [{}, {}] at rel_tol {}",
                    mode, cfg.t_span[0], cfg.t_span[1], ctrl.rel_tol
                ),
            ) {
                return Ok(());
            }
            let path = trace_ray(&start, &medium, (cfg.t_span[0], cfg.t_span[1]), &ctrl)?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            let out = write_out(&dir, &args.out, &buf)?;
            println!(
                "wrote {} ({} samples, max Hamiltonian residual {:.3e})",
                out.display(),
                path.samples.len(),
                path.stats.max_hamiltonian_residual
            );
        }
        Cmd::Resonance(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let cfg: ResonanceConfigFile =
                toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let medium = parse_medium_value(&cfg.medium)?;
            let p = medium.sample_checked(&Vector3::zeros())?;
            let m1 = parse_mode(&cfg.modes[0])?;
            let m2 = parse_mode(&cfg.modes[1])?;
            if plan(
                cli.dry_run,
                &format!(
                    "solve {:?}+{:?} resonance at cos α = {}",
                    m1, m2, cfg.cos_alpha
                ),
            ) {
                return Ok(());
            }
            let sin_a = (1.0 - cfg.cos_alpha * cfg.cos_alpha).max(0.0).sqrt();
            let xi1 = cfg.scale1 * Vector3::new(cfg.cos_alpha, sin_a, 0.0);
            let xi2 = cfg.scale2 * Vector3::new(1.0, 0.0, 0.0);
            let z1 = Covector::on_variety(0.0, Vector3::zeros(), xi1, m1, &p)?;
            let z2 = Covector::on_variety(0.0, Vector3::zeros(), xi2, m2, &p)?;
            let amp = |m: WaveMode| match m {
                WaveMode::P => ModeAmplitude::P {
                    a: Complex64::new(1.0, 0.0),
                },
                WaveMode::S => ModeAmplitude::S {
                    b_h: Complex64::new(1.0, 0.0),
                    b_v: Complex64::new(0.0, 0.0),
                },
            };
            let icfg = InteractionConfig::new(z1, z2, amp(m1), amp(m2), &p)?;
            let mut buf = Vec::new();
            match (m1, m2) {
                (WaveMode::P, WaveMode::P) => {
                    solve_pp_to_s(&icfg, &p)?.write_json(&mut buf)?;
                }
                (WaveMode::S, WaveMode::S) => match solve_ss_to_p(&icfg, &p)? {
                    SsOutcome::Resonant(res) => res.write_json(&mut buf)?,
                    SsOutcome::NoInteraction {
                        cos_alpha,
                        threshold,
                    } => {
                        let rec = serde_json::json!({
                            "case": "SS",
                            "outcome": "no-interaction",
                            "cos_alpha": cos_alpha,
                            "threshold": threshold,
                        });
                        buf.extend_from_slice(
                            serde_json::to_string_pretty(&rec)
                                .map_err(|e| Error::Parse(e.to_string()))?
                                .as_bytes(),
                        );
                        buf.push(b'\n');
                        println!("no-interaction: cos α = {cos_alpha} ≥ {threshold}");
                    }
                },
                _ => {
                    let (pr, sr) = solve_ps(&icfg, &p)?;
                    pr.write_json(&mut buf)?;
                    sr.write_json(&mut buf)?;
                }
            }
            let out = write_out(&dir, &args.out, &buf)?;
            println!("wrote {}", out.display());
        }
        Cmd::Symbol(args) => {
            let p = args.medium.material()?;
            let case = InteractionCase::parse(&args.case)?;
            if plan(
                cli.dry_run,
                &format!(
                    "sweep {} amplitudes over {} ψ values at α = {}",
                    case.label(),
                    args.n_psi,
                    args.alpha
                ),
            ) {
                return Ok(());
            }
            let rows = angle_sweep(case, &p, args.alpha, args.n_psi)?;
            let worst = rows.iter().map(|r| r.rel_err).fold(0.0f64, f64::max);
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            let out = write_out(&dir, &args.out, &buf)?;
            println!(
                "wrote {} ({} rows, max closed-vs-tensor rel err {:.3e})",
                out.display(),
                rows.len(),
                worst
            );
        }
        Cmd::Table(margs) => {
            let p = margs.material()?;
            if plan(cli.dry_run, "evaluate the 7 interaction rows") {
                return Ok(());
            }
            println!(
                "medium: lambda={} mu={} A={} B={} C={}",
                p.lambda, p.mu, p.a_landau, p.b_landau, p.c_landau
            );
            println!("{:<12} {:<55} status", "interaction", "condition [values]");
            for row in table_rows(&p) {
                println!(
                    "{:<12} {:<55} {}",
                    row.interaction,
                    format!("{} {:?}", row.condition, row.condition_values),
                    row.class.label()
                );
            }
        }
        Cmd::Simulate(args) => {
            let cfg = ExperimentConfig::from_file(&args.config)?;
            let case = cfg.interaction_case()?;
            if plan(
                cli.dry_run,
                &format!(
                    "run a {} experiment on a {}² grid (packets k1={:?}, k2={:?}, 3 simulations{})",
                    case.label(),
                    cfg.grid.n,
                    cfg.packet1.k,
                    cfg.packet2.k,
                    if cfg.run.scaling_check {
                        " + scaling checks"
                    } else {
                        ""
                    }
                ),
            ) {
                return Ok(());
            }
            let report = if args.export_snapshots {
                elastowave::simulator::experiment::run_interaction_experiment_with_export(
                    &cfg,
                    Some((dir.as_path(), args.tag.as_str())),
                )?
            } else {
                run_interaction_experiment(&cfg)?
            };
            write_report(&report, &dir, &args.tag)?;
            let m = &report.measurements[0];
            println!(
                "wrote {}/{}.json: |out| = {:.6e}, snr {:.1} dB, peak {:?} (expected {:?}), dispersion err {:.3e}",
                dir.display(),
                args.tag,
                m.out_amplitude.norm(),
                m.snr_db,
                m.spectral_peak,
                report.k_out,
                report.dispersion_rel_err
            );
        }
        Cmd::Invert(args) => {
            let mode = args.mode.as_str();
            if plan(cli.dry_run, &format!("run {mode} recovery")) {
                return Ok(());
            }
            let result_json: String = match mode {
                "lame" => {
                    let path = args
                        .measurements
                        .as_ref()
                        .ok_or_else(|| Error::validation("--measurements required"))?;
                    let text = std::fs::read_to_string(path)?;
                    let ts: Vec<Traversal> =
                        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                    let (lambda, mu) = recover_lame(&ts)?;
                    println!("lambda={lambda} mu={mu}");
                    serde_json::to_string_pretty(&serde_json::json!({
                        "lambda": lambda, "mu": mu
                    }))
                    .unwrap()
                }
                "ab" | "ab-alt" => {
                    let path = args
                        .measurements
                        .as_ref()
                        .ok_or_else(|| Error::validation("--measurements required"))?;
                    let ms = read_measurements_json(&std::fs::read_to_string(path)?)?;
                    let p = args.medium.material()?;
                    let rec = if mode == "ab" {
                        recover_ab(&ms, p.lambda, p.mu)?
                    } else {
                        recover_ab_alt(&ms, p.lambda, p.mu)?
                    };
                    println!(
                        "A={} B={} (determinant {:.6e}{})",
                        rec.a_landau,
                        rec.b_landau,
                        rec.determinant,
                        if rec.rank_deficient {
                            ", rank-deficient"
                        } else {
                            ""
                        }
                    );
                    serde_json::to_string_pretty(&rec).unwrap()
                }
                "end-to-end" => {
                    let load = |paths: &[PathBuf]| -> Result<Vec<_>, Error> {
                        paths
                            .iter()
                            .map(|p| {
                                let text = std::fs::read_to_string(p)?;
                                serde_json::from_str(&text)
                                    .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
                            })
                            .collect()
                    };
                    let unknown = load(&args.experiments)?;
                    let cal = load(&args.calibration)?;
                    let rec = end_to_end_recovery(&unknown, &cal)?;
                    println!("A={} B={}", rec.a_landau, rec.b_landau);
                    for n in &rec.notes {
                        println!("note: {n}");
                    }
                    serde_json::to_string_pretty(&rec).unwrap()
                }
                "c-report" => {
                    let p = args.medium.material()?;
                    let rep = c_identifiability_report(&p, &[10.0, -3.0], cli.seed, 100)?;
                    println!("max |Δ symbol| over C perturbations: {:.3e}", rep.max_abs_change);
                    serde_json::to_string_pretty(&rep).unwrap()
                }
                other => {
                    return Err(Error::validation(format!(
                        "unknown invert mode '{other}' (lame | ab | ab-alt | end-to-end | c-report)"
                    )))
                }
            };
            let out = write_out(&dir, &args.out, result_json.as_bytes())?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Parse(_) => 2,
        Error::Degenerate(_) | Error::Numeric(_) | Error::ExitedDomain { .. } => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // machine-readable error record on stderr
            let record = serde_json::json!({
                "error": e.to_string(),
                "exit_code": exit_code_for(&e),
            });
            eprintln!("{record}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
