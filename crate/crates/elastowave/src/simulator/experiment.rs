//! Two-packet interaction experiments: aim two packets to overlap at a
//! target point/time, run the combined and single-packet simulations,
//! extract the bilinear response u⁽¹²⁾, and measure the generated mode at
//! the resonant wavevector.
//!
//! For real packets the quadratic source populates k¹ ± k²; the resonant
//! combination is found by testing both candidates against the output
//! variety, so configs only prescribe the two packet wavevectors.

use super::*;
use crate::kinematics::{group_velocity, Covector};
use crate::resonance::{build_frame, InteractionCase, InteractionConfig, ModeAmplitude};
use crate::symbols::{closed_form_amplitude, ClosedFormInputs, OutputMode};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
    /// Explicit step, or derive from `cfl_safety`.
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
}

fn default_cfl() -> f64 {
    0.6
}

#[derive(Debug, Clone, Deserialize)]
pub struct MediumConfig {
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
}

impl MediumConfig {
    pub fn material(&self) -> crate::error::Result<MaterialPoint> {
        MaterialPoint::new(self.lambda, self.mu, self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct PacketConfig {
    pub mode: PacketMode,
    pub k: [i64; 2],
    pub width_par: f64,
    pub width_perp: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RunConfig {
    /// Interaction point the packets are aimed at.
    pub target: [f64; 2],
    /// Time at which the packet centers cross the target.
    pub overlap_time: f64,
    /// Measurement happens at overlap_time + measure_delay.
    pub measure_delay: f64,
    /// Half-widths of the measurement window around the predicted output
    /// wavefront; omit to measure over the whole domain.
    pub window_halfwidth: Option<[f64; 2]>,
    /// Also run the ε₁-doubling scaling check.
    #[serde(default)]
    pub scaling_check: bool,
}

/// Experiment description (structured text, TOML).
#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    pub case: String,
    pub grid: GridConfig,
    pub medium: MediumConfig,
    pub packet1: PacketConfig,
    pub packet2: PacketConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn interaction_case(&self) -> Result<InteractionCase> {
        InteractionCase::parse(&self.case)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementBlock {
    pub time: f64,
    /// Generated-mode complex amplitude at k_out.
    pub out_amplitude: Complex64,
    /// The competing polarization at k_out (for the mode-purity check).
    pub other_amplitude: Complex64,
    pub snr_db: f64,
    pub spectral_peak: [i64; 2],
    pub peak_within_one: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingBlock {
    /// Raw generated-amplitude ratios on doubling ε₁ and ε₂ respectively;
    /// ε₁ε₂-bilinearity predicts 2 for both.
    pub ratio_eps1: f64,
    pub ratio_eps2: f64,
    pub max_rel_err_vs_2: f64,
}

/// Everything measured and predicted for one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub case: InteractionCase,
    pub medium: MaterialPoint,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub eps: [f64; 2],
    pub k1: [i64; 2],
    pub k2: [i64; 2],
    /// Resonant combination: k_out = k1 + combination_sign·k2.
    pub combination_sign: i32,
    pub k_out: [i64; 2],
    pub out_mode: OutputMode,
    /// Variety residual of the lattice output covector (detuning).
    pub detuning: f64,
    pub omega_expected: f64,
    pub omega_measured: f64,
    pub dispersion_rel_err: f64,
    pub measurements: Vec<MeasurementBlock>,
    /// Closed-form scalar inputs of the effective resonant configuration.
    pub alpha: f64,
    pub psi: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_out: f64,
    /// |closed-form amplitude| with the packet amplitudes mapped in.
    pub predicted_abs: f64,
    /// measured/predicted magnitude (the envelope-overlap geometric factor).
    pub measured_over_predicted: f64,
    pub scaling: Option<ScalingBlock>,
    pub wraparound_margin: f64,
    pub steps: u64,
}

fn mode_of(pm: PacketMode) -> WaveMode {
    pm.wave_mode()
}

fn output_packet_mode(m: OutputMode) -> PacketMode {
    match m {
        OutputMode::P => PacketMode::P,
        OutputMode::Sh => PacketMode::Sh,
        OutputMode::Sv => PacketMode::Sv,
    }
}

struct RunSetup {
    params: SimParams,
    material: MaterialPoint,
    medium: MediumField,
    sources: [PacketSource; 2],
    record_times: Vec<f64>,
    three_comp: bool,
}

fn one_run(setup: &RunSetup, eps: [f64; 2]) -> Result<WavefieldRecord> {
    let mut solver = Solver::new(&setup.params, &setup.medium, Nonlinearity::Full, setup.three_comp)?;
    let mut state = SimGrid::zeros(setup.params);
    let mut active = Vec::new();
    for (i, src) in setup.sources.iter().enumerate() {
        if eps[i] > 0.0 {
            let mut s = src.clone();
            s.amplitude = eps[i];
            add_packet(&mut state, &solver.spec, &setup.material, &s)?;
            active.push(s);
        }
    }
    run_recorded(
        &mut solver,
        state,
        setup.material,
        eps,
        &active,
        &setup.record_times,
    )
}

fn bilinear_out_amplitude(
    setup: &RunSetup,
    eps: [f64; 2],
    singles: (&WavefieldRecord, &WavefieldRecord),
    k_out: [i64; 2],
    out_pm: PacketMode,
    window: Option<&Window>,
) -> Result<Complex64> {
    let r12 = one_run(setup, eps)?;
    let u12 = extract_bilinear_response(&r12, singles.0, singles.1)?;
    let spec = Spectral::new([setup.params.n, setup.params.n], setup.params.length);
    measure_mode_amplitude(&u12.snapshots[0], &spec, k_out, out_pm, window)
}

/// Orchestrate one interaction experiment.
pub fn run_interaction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_interaction_experiment_with_export(cfg, None)
}

/// As [`run_interaction_experiment`], optionally exporting the extracted
/// u⁽¹²⁾ snapshots as flat binary + JSON sidecar under `(dir, tag)`.
pub fn run_interaction_experiment_with_export(
    cfg: &ExperimentConfig,
    export: Option<(&Path, &str)>,
) -> Result<ExperimentReport> {
    let case = cfg.interaction_case()?;
    let expected_modes = match case {
        InteractionCase::PpToSh => (PacketMode::P, PacketMode::P),
        InteractionCase::PShToP | InteractionCase::PShToSh => (PacketMode::P, PacketMode::Sh),
        InteractionCase::PSvToSv => (PacketMode::P, PacketMode::Sv),
        InteractionCase::ShShToP => (PacketMode::Sh, PacketMode::Sh),
        InteractionCase::ShSvNone => (PacketMode::Sh, PacketMode::Sv),
        InteractionCase::SvSvToP => (PacketMode::Sv, PacketMode::Sv),
    };
    if (cfg.packet1.mode, cfg.packet2.mode) != expected_modes {
        return Err(Error::validation(format!(
            "case {} expects packet modes {:?}, got ({:?}, {:?})",
            case.label(),
            expected_modes,
            cfg.packet1.mode,
            cfg.packet2.mode
        )));
    }
    let material = cfg.medium.material()?;
    let medium = MediumField::constant(material);
    let out_mode = crate::resonance::sample::output_mode(case);
    let out_pm = output_packet_mode(out_mode);
    let out_wave = mode_of(out_pm);

    let n = cfg.grid.n;
    let length = cfg.grid.length;
    let dt_max = max_stable_dt(n, length, material.c2_p());
    let dt = match cfg.grid.dt {
        Some(dt) => dt,
        None => cfg.grid.cfl_safety * dt_max,
    };
    let params = SimParams { n, length, dt };

    // physical covectors of the two packets (forward, τ < 0)
    let base = 2.0 * std::f64::consts::PI / length;
    let kv = |k: [i64; 2]| Vector3::new(base * k[0] as f64, base * k[1] as f64, 0.0);
    let z1 = Covector::on_variety(
        0.0,
        Vector3::zeros(),
        kv(cfg.packet1.k),
        mode_of(cfg.packet1.mode),
        &material,
    )?;
    let z2 = Covector::on_variety(
        0.0,
        Vector3::zeros(),
        kv(cfg.packet2.k),
        mode_of(cfg.packet2.mode),
        &material,
    )?;

    // resonant combination: k¹ + s·k² with the smaller variety residual
    let candidate = |s: f64| -> (f64, Covector) {
        let out = Covector {
            t: 0.0,
            x: Vector3::zeros(),
            tau: z1.tau + s * z2.tau,
            xi: z1.xi + s * z2.xi,
            mode: out_wave.into(),
        };
        (out.variety_residual(out_wave, &material), out)
    };
    let (res_plus, out_plus) = candidate(1.0);
    let (res_minus, out_minus) = candidate(-1.0);
    let (sign, detuning, out_cv) = if res_minus <= res_plus {
        (-1.0, res_minus, out_minus)
    } else {
        (1.0, res_plus, out_plus)
    };
    if detuning > 0.02 {
        return Err(Error::validation(format!(
            "neither k1+k2 nor k1-k2 is near the Σ_{out_wave:?} variety (best residual {detuning:.3e}); choose resonant packet wavevectors"
        )));
    }
    let k_out = [
        cfg.packet1.k[0] + sign as i64 * cfg.packet2.k[0],
        cfg.packet1.k[1] + sign as i64 * cfg.packet2.k[1],
    ];
    if k_out == [0, 0] {
        return Err(Error::degenerate("output wavevector is zero"));
    }
    let spec_probe = Spectral::new([n, n], length);
    let k_out_phys = out_cv.xi.norm();
    if k_out_phys > spec_probe.k_max_dealiased {
        return Err(Error::validation(
            "output wavevector outside the dealiased band",
        ));
    }

    // aim the packets with the kinematics group velocities
    let vg1 = group_velocity(&z1, &material)?;
    let vg2 = group_velocity(&z2, &material)?;
    let t_overlap = cfg.run.overlap_time;
    let center = |vg: &Vector3<f64>| -> [f64; 2] {
        [
            (cfg.run.target[0] - vg[0] * t_overlap).rem_euclid(length),
            (cfg.run.target[1] - vg[1] * t_overlap).rem_euclid(length),
        ]
    };
    let mk_src = |p: &PacketConfig, c: [f64; 2]| PacketSource {
        center: c,
        k: p.k,
        width_par: p.width_par,
        width_perp: p.width_perp,
        mode: p.mode,
        amplitude: p.epsilon,
    };
    let sources = [
        mk_src(&cfg.packet1, center(&vg1)),
        mk_src(&cfg.packet2, center(&vg2)),
    ];
    for s in &sources {
        s.validate(&spec_probe)?;
    }

    let t_meas = t_overlap + cfg.run.measure_delay;
    let omega_expected = out_cv.tau.abs();
    // phase-pair spacing for the frequency estimate: ω·Δt ≤ ~0.9
    let pair_steps = ((0.9 / (omega_expected * dt)).floor() as u64).max(1);
    let t_pair = t_meas + pair_steps as f64 * dt;
    let record_times = vec![t_meas, t_pair];

    let three_comp = cfg.packet1.mode == PacketMode::Sv
        || cfg.packet2.mode == PacketMode::Sv
        || out_pm == PacketMode::Sv;
    let setup = RunSetup {
        params,
        material,
        medium,
        sources,
        record_times,
        three_comp,
    };
    let eps = [cfg.packet1.epsilon, cfg.packet2.epsilon];

    let r12 = one_run(&setup, eps)?;
    let r1 = one_run(&setup, [eps[0], 0.0])?;
    let r2 = one_run(&setup, [0.0, eps[1]])?;
    let u12 = extract_bilinear_response(&r12, &r1, &r2)?;
    if let Some((dir, tag)) = export {
        for i in 0..u12.snapshots.len() {
            export_snapshot(dir, &u12, i, &format!("{tag}_u12_{i}"))?;
        }
    }

    // window follows the generated wavefront; the lattice covector is
    // detuned off the variety, so use the exact isotropic group velocity
    // c_mode·k̂ directly
    let v_out = material.c2(out_wave).sqrt() * out_cv.xi.normalize();
    let windows: Vec<Option<Window>> = u12
        .times
        .iter()
        .map(|t| {
            cfg.run.window_halfwidth.map(|hw| Window {
                center: [
                    (cfg.run.target[0] + v_out[0] * (t - t_overlap)).rem_euclid(length),
                    (cfg.run.target[1] + v_out[1] * (t - t_overlap)).rem_euclid(length),
                ],
                halfwidth: hw,
            })
        })
        .collect();

    let spec = Spectral::new([n, n], length);
    let other_pm = match out_pm {
        PacketMode::P => PacketMode::Sh,
        PacketMode::Sh | PacketMode::Sv => PacketMode::P,
    };
    let mut measurements = Vec::new();
    let mut amps = Vec::new();
    for (i, t) in u12.times.iter().enumerate() {
        let w = windows[i].as_ref();
        let out_amp = measure_mode_amplitude(&u12.snapshots[i], &spec, k_out, out_pm, w)?;
        let other_amp = measure_mode_amplitude(&u12.snapshots[i], &spec, k_out, other_pm, w)?;
        let peak = spectral_peak(
            &u12.snapshots[i],
            &spec,
            w,
            [k_out[0] as f64, k_out[1] as f64],
        )?;
        let within =
            (peak[0] - k_out[0]).abs() <= 1 && (peak[1] - k_out[1]).abs() <= 1;
        let snr = 20.0 * (out_amp.norm() / other_amp.norm().max(1e-300)).log10();
        amps.push(out_amp);
        measurements.push(MeasurementBlock {
            time: *t,
            out_amplitude: out_amp,
            other_amplitude: other_amp,
            snr_db: snr,
            spectral_peak: peak,
            peak_within_one: within,
        });
    }

    // temporal frequency from the phase advance between the pair
    let dt_pair = u12.times[1] - u12.times[0];
    let omega_measured = -(amps[1] / amps[0]).arg() / dt_pair;
    let dispersion_rel_err = (omega_measured - omega_expected).abs() / omega_expected;

    // closed-form prediction on the effective resonant configuration
    // (the resonant combination uses the conjugate branch when sign = −1)
    let z2_eff = z2.scaled(sign);
    let map_amp = |p: &PacketConfig, z: &Covector| -> ModeAmplitude {
        let e = Complex64::new(p.epsilon, 0.0);
        match p.mode {
            PacketMode::P => ModeAmplitude::P {
                a: e / z.xi.norm(),
            },
            PacketMode::Sh => ModeAmplitude::S {
                b_h: e,
                b_v: Complex64::new(0.0, 0.0),
            },
            PacketMode::Sv => ModeAmplitude::S {
                b_h: Complex64::new(0.0, 0.0),
                b_v: e,
            },
        }
    };
    let icfg = InteractionConfig::new(
        z1,
        z2_eff,
        map_amp(&cfg.packet1, &z1),
        map_amp(&cfg.packet2, &z2_eff),
        &material,
    )?;
    let frame = build_frame(&icfg.zeta1.xi, &icfg.zeta2.xi, &out_cv.xi)?;
    let inputs = ClosedFormInputs {
        r1: z1.xi.norm(),
        r2: z2_eff.xi.norm(),
        r_out: out_cv.xi.norm(),
        amp1: Complex64::new(eps[0] / z1.xi.norm(), 0.0),
        amp2: Complex64::new(eps[1], 0.0),
        alpha: icfg.alpha,
        psi: frame.psi,
    };
    // P amplitudes multiply the full wavevector; S amplitudes are the unit
    // frame components. Map ε accordingly on each slot.
    let inputs = ClosedFormInputs {
        amp1: match cfg.packet1.mode {
            PacketMode::P => Complex64::new(eps[0] / inputs.r1, 0.0),
            _ => Complex64::new(eps[0], 0.0),
        },
        amp2: match cfg.packet2.mode {
            PacketMode::P => Complex64::new(eps[1] / inputs.r2, 0.0),
            _ => Complex64::new(eps[1], 0.0),
        },
        ..inputs
    };
    let predicted = closed_form_amplitude(case, &material, &inputs);
    let predicted_abs = predicted.norm();
    let measured_abs = amps[0].norm();

    let scaling = if cfg.run.scaling_check {
        let base_amp = amps[0];
        let w0 = windows[0].as_ref();
        // the changed single must be rerun; the other one is reused (the
        // extraction divides by ε₁ε₂, so the raw ratio is 2 × normalized)
        let r1_doubled = one_run(&setup, [2.0 * eps[0], 0.0])?;
        let d1 = bilinear_out_amplitude(
            &setup,
            [2.0 * eps[0], eps[1]],
            (&r1_doubled, &r2),
            k_out,
            out_pm,
            w0,
        )?;
        let r2_doubled = one_run(&setup, [0.0, 2.0 * eps[1]])?;
        let d2 = bilinear_out_amplitude(
            &setup,
            [eps[0], 2.0 * eps[1]],
            (&r1, &r2_doubled),
            k_out,
            out_pm,
            w0,
        )?;
        let ratio_eps1 = 2.0 * d1.norm() / base_amp.norm();
        let ratio_eps2 = 2.0 * d2.norm() / base_amp.norm();
        let err = ((ratio_eps1 - 2.0).abs() / 2.0).max((ratio_eps2 - 2.0).abs() / 2.0);
        Some(ScalingBlock {
            ratio_eps1,
            ratio_eps2,
            max_rel_err_vs_2: err,
        })
    } else {
        None
    };

    let sigma_max = setup
        .sources
        .iter()
        .map(|s| s.width_par.max(s.width_perp))
        .fold(0.0f64, f64::max);
    let wraparound_margin =
        0.5 * length - material.c2_p().sqrt() * u12.times[1] - 4.0 * sigma_max;

    Ok(ExperimentReport {
        case,
        medium: material,
        n,
        length,
        dt,
        eps,
        k1: cfg.packet1.k,
        k2: cfg.packet2.k,
        combination_sign: sign as i32,
        k_out,
        out_mode,
        detuning,
        omega_expected,
        omega_measured,
        dispersion_rel_err,
        measurements,
        alpha: inputs.alpha,
        psi: inputs.psi,
        r1: inputs.r1,
        r2: inputs.r2,
        r_out: inputs.r_out,
        predicted_abs,
        measured_over_predicted: measured_abs / predicted_abs.max(1e-300),
        scaling,
        wraparound_margin,
        steps: (u12.times[1] / dt).round() as u64,
    })
}

/// Write the report as pretty JSON plus a one-line CSV summary.
pub fn write_report(report: &ExperimentReport, dir: &Path, tag: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(dir.join(format!("{tag}.json")), json)?;
    let f = crate::fmt_g17;
    let m = &report.measurements[0];
    let csv = format!(
        "case,k_out0,k_out1,out_abs,other_abs,snr_db,dispersion_rel_err,predicted_abs,measured_over_predicted\n{},{},{},{},{},{},{},{},{}\n",
        report.case.label(),
        report.k_out[0],
        report.k_out[1],
        f(m.out_amplitude.norm()),
        f(m.other_amplitude.norm()),
        f(m.snr_db),
        f(report.dispersion_rel_err),
        f(report.predicted_abs),
        f(report.measured_over_predicted),
    );
    std::fs::write(dir.join(format!("{tag}.csv")), csv)?;
    Ok(())
}
