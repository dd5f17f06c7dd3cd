//! Parameter recovery: λ, μ from P/S travel times (straight-ray speed
//! fitting in homogeneous media), A, B from interaction-symbol measurements
//! at multiple angle configurations, and the demonstration that C is
//! invisible at leading order.
//!
//! The well-posed route recovers (λ+B, 2μ+½A) from P+SV→SV amplitudes — two
//! independent combinations, hence A and B separately. The H-polarized
//! channels (P+P→SH, P+SH→SH) determine only the single combination ½A+B
//! once λ, μ are known: their constraint directions [1, 2] and [½, 1] in
//! (A, B)-space are parallel. `recover_ab_alt` therefore reports a
//! rank-deficient system, returns the minimum-norm (A, B), and exposes the
//! well-determined combination in its diagnostics.

use crate::error::{Error, Result};
use crate::kinematics::WaveMode;
use crate::medium::MaterialPoint;
use crate::resonance::InteractionCase;
use crate::simulator::ExperimentReport;
use crate::symbols::{
    closed_form_material_factor, closed_form_prefactor, cos2_system_det, interaction_symbol,
    ppsh_angle, pshsh_coeffs, psv_coeffs, ClosedFormInputs, OutputMode,
};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One straight-ray traversal with known chord length.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Traversal {
    pub chord: f64,
    pub mode: WaveMode,
    pub time: f64,
}

/// (λ, μ) from P/S travel times: least-squares speed fit through the origin
/// per mode, then λ = c_P² − 2c_S², μ = c_S².
pub fn recover_lame(traversals: &[Traversal]) -> Result<(f64, f64)> {
    let fit = |mode: WaveMode| -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut count = 0;
        for t in traversals.iter().filter(|t| t.mode == mode) {
            if t.time <= 0.0 || t.chord <= 0.0 {
                return Err(Error::validation("traversal needs chord > 0 and time > 0"));
            }
            num += t.chord * t.time;
            den += t.time * t.time;
            count += 1;
        }
        if count == 0 {
            return Err(Error::validation(format!("no {mode:?} traversal")));
        }
        Ok(num / den)
    };
    let c_p = fit(WaveMode::P)?;
    let c_s = fit(WaveMode::S)?;
    if c_s >= c_p {
        return Err(Error::numeric(format!(
            "inconsistent times: fitted c_S = {c_s} ≥ c_P = {c_p}"
        )));
    }
    let mu = c_s * c_s;
    let lambda = c_p * c_p - 2.0 * mu;
    MaterialPoint::lame(lambda, mu)?;
    Ok((lambda, mu))
}

/// One symbol measurement: the complex generated-mode amplitude for a known
/// interaction geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Measurement {
    pub case: InteractionCase,
    pub alpha: f64,
    pub psi: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_out: f64,
    pub amp1: Complex64,
    pub amp2: Complex64,
    pub measured: Complex64,
    #[serde(default)]
    pub noise_level: f64,
}

impl Measurement {
    pub fn validate(&self) -> Result<()> {
        let pi = std::f64::consts::PI;
        if !(0.0 < self.alpha && self.alpha < pi) || !(0.0 < self.psi && self.psi < pi) {
            return Err(Error::validation("angles must lie in (0, π)"));
        }
        if self.r1 <= 0.0 || self.r2 <= 0.0 || self.r_out <= 0.0 {
            return Err(Error::validation("wavevector magnitudes must be positive"));
        }
        Ok(())
    }

    fn inputs(&self) -> ClosedFormInputs {
        ClosedFormInputs {
            r1: self.r1,
            r2: self.r2,
            r_out: self.r_out,
            amp1: self.amp1,
            amp2: self.amp2,
            alpha: self.alpha,
            psi: self.psi,
        }
    }

    /// measured / prefactor: the material-and-angle factor, real up to
    /// noise and phase error.
    fn material_factor(&self) -> Result<f64> {
        let pre = closed_form_prefactor(self.case, &self.inputs());
        if pre.norm() == 0.0 {
            return Err(Error::degenerate("vanishing measurement prefactor"));
        }
        Ok((self.measured / pre).re)
    }
}

pub fn read_measurements_json(text: &str) -> Result<Vec<Measurement>> {
    let ms: Vec<Measurement> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for m in &ms {
        m.validate()?;
    }
    Ok(ms)
}

/// Recovered parameters with conditioning diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub lambda: f64,
    pub mu: f64,
    pub a_landau: f64,
    pub b_landau: f64,
    /// Determinant of the 2×2 angle system actually solved (the design
    /// determinant for two measurements, det of the normal matrix with
    /// more).
    pub determinant: f64,
    pub residual_norm: f64,
    pub ridge_used: bool,
    pub rank_deficient: bool,
    /// The combination ½A+B when it is the (only) well-determined quantity.
    pub combo_half_a_plus_b: Option<f64>,
    pub notes: Vec<String>,
}

const DEGENERACY_TOL: f64 = 1e-10;
const RIDGE_SCALE: f64 = 1e-12;

/// Least squares for a two-parameter linear system, with ridge fallback on
/// near-degeneracy when more than two rows are available.
fn solve_two_param(rows: &[[f64; 2]], rhs: &[f64]) -> Result<(Vector2<f64>, f64, f64, bool)> {
    if rows.len() < 2 {
        return Err(Error::validation("need at least two measurements"));
    }
    let scale: f64 = rows
        .iter()
        .map(|r| r[0] * r[0] + r[1] * r[1])
        .sum::<f64>()
        .max(1e-300)
        / rows.len() as f64;
    let mut n = Matrix2::zeros();
    let mut b = Vector2::zeros();
    for (r, y) in rows.iter().zip(rhs) {
        let v = Vector2::new(r[0], r[1]);
        n += v * v.transpose();
        b += v * *y;
    }
    let reported_det = if rows.len() == 2 {
        rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    } else {
        n.determinant()
    };
    let mut ridge_used = false;
    let det_n = n.determinant();
    if det_n.abs() < DEGENERACY_TOL * scale * scale {
        if rows.len() == 2 {
            return Err(Error::degenerate(format!(
                "angle system is rank-deficient (det = {reported_det:.3e})"
            )));
        }
        let r = RIDGE_SCALE * n.trace().max(1e-300);
        n[(0, 0)] += r;
        n[(1, 1)] += r;
        ridge_used = true;
    }
    let sol = n
        .try_inverse()
        .ok_or_else(|| Error::degenerate("angle system not invertible"))?
        * b;
    let mut res = 0.0;
    for (r, y) in rows.iter().zip(rhs) {
        let e = r[0] * sol[0] + r[1] * sol[1] - y;
        res += e * e;
    }
    Ok((
        sol,
        reported_det,
        (res / rows.len() as f64).sqrt(),
        ridge_used,
    ))
}

/// (A, B) from ≥2 P+SV→SV measurements with known λ, μ: the amplitude is
/// proportional to (λ+B)cosψ + (2μ+½A)cosα·cos(α−ψ), so two angle pairs
/// give a 2×2 system in s₁ = λ+B, s₂ = 2μ+½A.
pub fn recover_ab(measurements: &[Measurement], lambda: f64, mu: f64) -> Result<RecoveryResult> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for m in measurements {
        if m.case != InteractionCase::PSvToSv {
            continue;
        }
        m.validate()?;
        rows.push(psv_coeffs(m.alpha, m.psi));
        rhs.push(m.material_factor()?);
    }
    if rows.len() < 2 {
        return Err(Error::validation(
            "recover_ab needs at least two P+SV→SV measurements",
        ));
    }
    let (sol, det, residual, ridge_used) = solve_two_param(&rows, &rhs)?;
    let (s1, s2) = (sol[0], sol[1]);
    Ok(RecoveryResult {
        lambda,
        mu,
        a_landau: 2.0 * (s2 - 2.0 * mu),
        b_landau: s1 - lambda,
        determinant: det,
        residual_norm: residual,
        ridge_used,
        rank_deficient: false,
        combo_half_a_plus_b: None,
        notes: vec![],
    })
}

/// (A, B) from P+P→SH and P+SH→SH measurements with known λ, μ.
///
/// The cos²ψ/sin²ψ system for (λ+2μ+½A+B, μ+½A+B) is well-posed (its
/// determinant is det(v(ψ₁), v(ψ₂)) with v(ψ) = [cos²ψ, sin²ψ]), but every H-channel
/// constraint on (A, B) is a multiple of ½A+B, so the final extraction is
/// rank-one: the returned pair is the minimum-norm solution and
/// `combo_half_a_plus_b` carries the actual information.
pub fn recover_ab_alt(
    measurements: &[Measurement],
    lambda: f64,
    mu: f64,
) -> Result<RecoveryResult> {
    let mut notes = Vec::new();

    // P+P→SH rows: combo = λ+3μ+A+2B
    let mut combos = Vec::new();
    for m in measurements
        .iter()
        .filter(|m| m.case == InteractionCase::PpToSh)
    {
        m.validate()?;
        let ang = ppsh_angle(m.alpha, m.psi);
        if ang.abs() < 1e-8 {
            notes.push(format!(
                "P+P→SH measurement at (α={:.3}, ψ={:.3}) sits on a formula zero; skipped",
                m.alpha, m.psi
            ));
            continue;
        }
        combos.push(m.material_factor()? / ang);
    }

    // P+SH→SH rows: p cos²ψ − q sin²ψ with (p, q) = (λ+2μ+½A+B, μ+½A+B)
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut psis = Vec::new();
    for m in measurements
        .iter()
        .filter(|m| m.case == InteractionCase::PShToSh)
    {
        m.validate()?;
        rows.push(pshsh_coeffs(m.psi));
        rhs.push(m.material_factor()?);
        psis.push(m.psi);
    }

    let mut constraints: Vec<([f64; 2], f64)> = Vec::new();
    for c in &combos {
        constraints.push(([1.0, 2.0], c - lambda - 3.0 * mu));
    }
    let mut pq_det = f64::NAN;
    let mut pq_res = 0.0;
    if rows.len() >= 2 {
        let (pq, det, res, ridge) = solve_two_param(&rows, &rhs)?;
        pq_det = det;
        pq_res = res;
        if ridge {
            notes.push("ridge fallback used for the (p, q) system".into());
        }
        let (p, q) = (pq[0], pq[1]);
        let mismatch = (p - q) - (lambda + mu);
        if mismatch.abs() > 1e-6 * (lambda + mu).abs().max(1.0) {
            notes.push(format!(
                "consistency check p − q = λ + μ violated by {mismatch:.3e}"
            ));
        }
        constraints.push(([0.5, 1.0], p - lambda - 2.0 * mu));
        constraints.push(([0.5, 1.0], q - mu));
        if psis.len() == 2 {
            pq_det = cos2_system_det(psis[0], psis[1]);
        }
    } else if !rows.is_empty() {
        notes.push("only one P+SH→SH measurement; (p, q) system skipped".into());
    }
    if constraints.is_empty() {
        return Err(Error::validation(
            "recover_ab_alt needs P+P→SH and/or ≥2 P+SH→SH measurements",
        ));
    }

    // every constraint direction is parallel to [1, 2]: project onto the
    // combination γ = ½A+B, then return the minimum-norm (A, B)
    let mut gamma_num = 0.0;
    let mut gamma_den = 0.0;
    for (row, y) in &constraints {
        let c = 2.0 * row[0];
        gamma_num += c * y;
        gamma_den += c * c;
    }
    let gamma = gamma_num / gamma_den;
    // minimum-norm solution of ½A + B = γ: (A, B) = γ/1.25 · (½, 1)
    let a = gamma / 1.25 * 0.5;
    let b = gamma / 1.25;
    let mut residual = 0.0;
    for (row, y) in &constraints {
        let e = row[0] * a + row[1] * b - y;
        residual += e * e;
    }
    residual = (residual / constraints.len() as f64).sqrt().max(pq_res);
    notes.push(
        "H-polarized channels determine only ½A+B given λ, μ; returned (A, B) is minimum-norm"
            .into(),
    );

    Ok(RecoveryResult {
        lambda,
        mu,
        a_landau: a,
        b_landau: b,
        determinant: pq_det,
        residual_norm: residual,
        ridge_used: false,
        rank_deficient: true,
        combo_half_a_plus_b: Some(gamma),
        notes,
    })
}

/// Per-case maximum symbol change under C-perturbations.
#[derive(Debug, Clone, Serialize)]
pub struct CSensitivity {
    pub case: InteractionCase,
    pub max_abs_change: f64,
    pub symbol_scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CReport {
    pub perturbations: Vec<f64>,
    pub per_case: Vec<CSensitivity>,
    pub max_abs_change: f64,
}

/// Evaluate all interaction-channel symbols under C → C + δ and report the (zero)
/// sensitivity. For P+P inputs the C term is ∝ δ_mn ξ_out and dies under
/// the S projections (the only resonant outputs); S-carrying inputs never
/// see C at all.
pub fn c_identifiability_report(
    p: &MaterialPoint,
    perturbations: &[f64],
    seed: u64,
    configs_per_case: usize,
) -> Result<CReport> {
    use crate::resonance::sample::{output_mode, resonant_pair};
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut per_case = Vec::new();
    let mut overall: f64 = 0.0;
    for case in InteractionCase::ALL {
        let mut max_change: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut done = 0;
        let mut attempts = 0;
        while done < configs_per_case && attempts < configs_per_case * 50 {
            attempts += 1;
            let alpha = rng.random_range(0.15..2.95);
            let a1 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let a2 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let Ok((cfg, out, _)) =
                resonant_pair(case, p, alpha, rng.random_range(0..2), a1, a2, (1.0, 1.0))
            else {
                continue;
            };
            done += 1;
            // for P+P the resonant outputs are S, so test both S projections
            let modes: &[OutputMode] = match case {
                InteractionCase::PpToSh => &[OutputMode::Sh, OutputMode::Sv],
                _ => &[output_mode(case)],
            };
            for &m in modes {
                let base = interaction_symbol(p, &cfg, &out, m)?.amplitude(m);
                scale = scale.max(base.norm());
                for &d in perturbations {
                    let pp = MaterialPoint::from_raw(
                        p.lambda,
                        p.mu,
                        p.a_landau,
                        p.b_landau,
                        p.c_landau + d,
                    );
                    let pert = interaction_symbol(&pp, &cfg, &out, m)?.amplitude(m);
                    max_change = max_change.max((pert - base).norm());
                }
            }
        }
        overall = overall.max(max_change);
        per_case.push(CSensitivity {
            case,
            max_abs_change: max_change,
            symbol_scale: scale,
        });
    }
    Ok(CReport {
        perturbations: perturbations.to_vec(),
        per_case,
        max_abs_change: overall,
    })
}

/// Full pipeline recovery from simulator experiments: each unknown-medium
/// experiment is paired with an identical-geometry calibration experiment
/// on a reference medium with the same λ, μ and known A, B. The measured
/// amplitude ratio then equals the material-factor ratio — the
/// envelope-overlap geometry cancels — and the calibrated combinations feed
/// the angle systems.
pub fn end_to_end_recovery(
    unknown: &[ExperimentReport],
    calibration: &[ExperimentReport],
) -> Result<RecoveryResult> {
    if unknown.is_empty() {
        return Err(Error::validation("no experiments supplied"));
    }
    let lambda = unknown[0].medium.lambda;
    let mu = unknown[0].medium.mu;
    let mut sv_rows = Vec::new();
    let mut sv_rhs = Vec::new();
    let mut combo_constraints: Vec<([f64; 2], f64)> = Vec::new();
    let mut notes = Vec::new();

    for u in unknown {
        if (u.medium.lambda - lambda).abs() > 1e-12 || (u.medium.mu - mu).abs() > 1e-12 {
            return Err(Error::validation("experiments disagree on λ, μ"));
        }
        let cal = calibration
            .iter()
            .find(|c| {
                c.case == u.case
                    && c.k1 == u.k1
                    && c.k2 == u.k2
                    && c.n == u.n
                    && (c.eps[0] - u.eps[0]).abs() < 1e-15
                    && (c.eps[1] - u.eps[1]).abs() < 1e-15
            })
            .ok_or_else(|| {
                Error::validation(format!(
                    "no calibration partner for a {} experiment at k1={:?}, k2={:?}",
                    u.case.label(),
                    u.k1,
                    u.k2
                ))
            })?;
        if (cal.medium.lambda - lambda).abs() > 1e-12 || (cal.medium.mu - mu).abs() > 1e-12 {
            return Err(Error::validation(
                "calibration medium must share λ, μ with the unknown medium",
            ));
        }
        let m_u = u.measurements[0].out_amplitude;
        let m_c = cal.measurements[0].out_amplitude;
        if m_c.norm() == 0.0 {
            return Err(Error::degenerate("calibration amplitude vanishes"));
        }
        let ratio = (m_u / m_c).re;
        let combo_cal = closed_form_material_factor(cal.case, &cal.medium, cal.alpha, cal.psi);
        let combo_unknown = combo_cal * ratio;
        match u.case {
            InteractionCase::PSvToSv => {
                sv_rows.push(psv_coeffs(u.alpha, u.psi));
                sv_rhs.push(combo_unknown);
            }
            InteractionCase::PpToSh => {
                let ang = ppsh_angle(u.alpha, u.psi);
                if ang.abs() > 1e-8 {
                    combo_constraints.push(([1.0, 2.0], combo_unknown / ang - lambda - 3.0 * mu));
                }
            }
            InteractionCase::PShToSh => {
                // combo = (λ+2μ)cos²ψ − μ sin²ψ + (½A+B)(cos²ψ − sin²ψ)
                let c = pshsh_coeffs(u.psi);
                let known = (lambda + 2.0 * mu) * c[0] + mu * c[1];
                let coeff = c[0] + c[1]; // cos²ψ − sin²ψ
                if coeff.abs() > 1e-8 {
                    combo_constraints.push(([0.5, 1.0], (combo_unknown - known) / coeff));
                }
            }
            other => {
                notes.push(format!(
                    "experiment case {} not used by the recovery",
                    other.label()
                ));
            }
        }
    }

    if sv_rows.len() < 2 {
        return Err(Error::validation(
            "end-to-end recovery needs ≥2 P+SV→SV experiments at distinct angles (the H channels pin only ½A+B)",
        ));
    }
    let (sol, det, residual, ridge_used) = solve_two_param(&sv_rows, &sv_rhs)?;
    let a = 2.0 * (sol[1] - 2.0 * mu);
    let b = sol[0] - lambda;

    // cross-check the H-channel combination against the SV recovery
    let combo = if combo_constraints.is_empty() {
        None
    } else {
        let mut num = 0.0;
        let mut den = 0.0;
        for (row, y) in &combo_constraints {
            let c = 2.0 * row[0];
            num += c * y;
            den += c * c;
        }
        let gamma = num / den;
        let gamma_sv = 0.5 * a + b;
        notes.push(format!(
            "H-channel combination ½A+B = {gamma:.6} vs SV recovery {gamma_sv:.6} (rel diff {:.3e})",
            (gamma - gamma_sv).abs() / gamma_sv.abs().max(1e-12)
        ));
        Some(gamma)
    };

    Ok(RecoveryResult {
        lambda,
        mu,
        a_landau: a,
        b_landau: b,
        determinant: det,
        residual_norm: residual,
        ridge_used,
        rank_deficient: false,
        combo_half_a_plus_b: combo,
        notes,
    })
}
