//! Principal symbol of the quadratic source ∇·𝒢(u⁽¹⁾, u⁽²⁾) on resonant
//! covectors, computed two ways:
//!
//! * [`g_form`] — the general bilinear tensor contraction of the quadratic
//!   form G on rank-one symbol data (the ground truth), and
//! * [`closed_form_amplitude`] — per-case closed-form angle formulas.
//!
//! A rank-one datum represents σ(∂u_m/∂x_n) = i·pol_m·ξ_n. Writing
//! W = pol ⊗ ξ and U = sym(W), the symbol of G(u, w) is −Γ(W¹, W²) with
//!
//! Γ(W¹,W²)_mn = λ tr(U¹) W²_mn + ½λ (W¹:W²) δ_mn + 2μ U¹_nj W²_mj
//!             + μ W¹_km W²_kn + A U¹_mj U²_nj
//!             + B (2 tr(U¹) U²_mn + (U¹:U²) δ_mn) + C tr(U¹) tr(U²) δ_mn,
//!
//! so σ(𝒢) = 𝐠 = −(Γ(W¹,W²) + Γ(W²,W¹)) and 𝐡 = i 𝐠 ξ_out. Output
//! amplitudes are reported along unit mode directions (ξ̂_out, ξ^H, ξ^V);
//! the closed forms below absorb the matching |ξ|-normalizations and
//! constant phases (frame convention: ξ^V = unit(ξ²×ξ¹),
//! ξ^H(w) = ξ^V × ŵ, α = ∠(ξ̂²→ξ̂¹) ∈ (0,π), ψ = ∠(ξ̂²→ξ̂_out)).

use crate::error::{Error, Result};
use crate::kinematics::{Covector, ModeTag, WaveMode};
use crate::medium::{MaterialPoint, GEOM_TOL};
use crate::resonance::{build_frame, InteractionCase, InteractionConfig, ModeAmplitude};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

type CVec3 = Vector3<Complex64>;
type CMat3 = Matrix3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Accepted variety residual for the output covector handed to
/// [`interaction_symbol`]; loose enough for lattice-detuned simulator
/// covectors, tight enough to reject non-resonant input.
pub const RESONANCE_CHECK_TOL: f64 = 1e-3;

/// Rank-one principal-symbol datum: σ(∂u_m/∂x_n) = i·pol_m·ξ_n.
#[derive(Debug, Clone)]
pub struct RankOneSymbol {
    pub polarization: CVec3,
    pub wavevector: Vector3<f64>,
}

impl RankOneSymbol {
    pub fn new(polarization: CVec3, wavevector: Vector3<f64>) -> Self {
        RankOneSymbol {
            polarization,
            wavevector,
        }
    }

    /// Cosine between |pol| and ξ; 1 for P data, 0 for S data.
    pub fn alignment(&self) -> f64 {
        let n = self.polarization.map(|c| c.norm()).norm() * self.wavevector.norm();
        if n == 0.0 {
            return 0.0;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            dot += self.polarization[k] * self.wavevector[k];
        }
        dot.norm() / n
    }

    fn w_matrix(&self) -> CMat3 {
        let mut w = CMat3::zeros();
        for m in 0..3 {
            for n in 0..3 {
                w[(m, n)] = self.polarization[m] * self.wavevector[n];
            }
        }
        w
    }
}

/// Build the rank-one symbol of one incoming wave from its covector and
/// amplitude, in the interaction frame with plane normal `v`.
pub fn rank_one_from(
    zeta: &Covector,
    amp: &ModeAmplitude,
    v: &Vector3<f64>,
) -> Result<RankOneSymbol> {
    let xi = zeta.xi;
    let pol = match (amp, zeta.mode) {
        (ModeAmplitude::P { a }, ModeTag::P) => xi.map(|c| a * c),
        (ModeAmplitude::S { b_h, b_v }, ModeTag::S) => {
            let h = v.cross(&xi.normalize());
            CVec3::new(
                b_h * h[0] + b_v * v[0],
                b_h * h[1] + b_v * v[1],
                b_h * h[2] + b_v * v[2],
            )
        }
        _ => return Err(Error::validation("amplitude kind does not match mode")),
    };
    Ok(RankOneSymbol::new(pol, xi))
}

fn sym(w: &CMat3) -> CMat3 {
    (w + w.transpose()) * Complex64::new(0.5, 0.0)
}

fn ddot(a: &CMat3, b: &CMat3) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..3 {
        for j in 0..3 {
            s += a[(k, j)] * b[(k, j)];
        }
    }
    s
}

fn gamma(p: &MaterialPoint, w1: &CMat3, w2: &CMat3) -> CMat3 {
    let u1 = sym(w1);
    let u2 = sym(w2);
    let id = CMat3::identity();
    let (lam, mu) = (
        Complex64::new(p.lambda, 0.0),
        Complex64::new(p.mu, 0.0),
    );
    let (aa, bb, cc) = (
        Complex64::new(p.a_landau, 0.0),
        Complex64::new(p.b_landau, 0.0),
        Complex64::new(p.c_landau, 0.0),
    );
    let tr1 = u1.trace();
    let tr2 = u2.trace();

    let mut g = w2 * (lam * tr1);
    g += id * (lam * Complex64::new(0.5, 0.0) * ddot(w1, w2));
    g += w2 * u1 * (mu * 2.0);
    g += w1.transpose() * w2 * mu;
    g += u1 * u2 * aa;
    g += u2 * (bb * 2.0 * tr1);
    g += id * (bb * ddot(&u1, &u2));
    g += id * (cc * tr1 * tr2);
    g
}

/// Principal symbol 𝐠 = σ(𝒢(u¹, u²)) of the symmetrized quadratic form on
/// rank-one data. Bilinear in the two polarizations.
pub fn g_form(p: &MaterialPoint, s1: &RankOneSymbol, s2: &RankOneSymbol) -> CMat3 {
    let w1 = s1.w_matrix();
    let w2 = s2.w_matrix();
    -(gamma(p, &w1, &w2) + gamma(p, &w2, &w1))
}

/// Amplitudes of a symbol vector along the unit output directions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Decomposition {
    pub p: Complex64,
    pub h: Complex64,
    pub v: Complex64,
}

/// A complex 3-vector principal-symbol amplitude attached to an output
/// covector, with its decomposition along {ξ̂_out, ξ^H, ξ^V}.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolVector {
    pub value: [Complex64; 3],
    pub at: Covector,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    P,
    Sh,
    Sv,
}

impl SymbolVector {
    pub fn amplitude(&self, mode: OutputMode) -> Complex64 {
        match mode {
            OutputMode::P => self.decomposition.p,
            OutputMode::Sh => self.decomposition.h,
            OutputMode::Sv => self.decomposition.v,
        }
    }
}

fn project(dir: &Vector3<f64>, h: &CVec3) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..3 {
        s += h[k] * dir[k];
    }
    s
}

/// Evaluate 𝐡 = i 𝐠 ξ_out on a resonant output covector and decompose it
/// along the interaction frame. `out` must equal ζ¹ + ζ² of the
/// configuration and lie on the variety matching `out_mode` (P for
/// `OutputMode::P`, S otherwise) within [`RESONANCE_CHECK_TOL`].
pub fn interaction_symbol(
    p: &MaterialPoint,
    cfg: &InteractionConfig,
    out: &Covector,
    out_mode: OutputMode,
) -> Result<SymbolVector> {
    let sum_xi = cfg.zeta1.xi + cfg.zeta2.xi;
    let sum_tau = cfg.zeta1.tau + cfg.zeta2.tau;
    let scale = cfg.zeta1.xi.norm() + cfg.zeta2.xi.norm();
    if (out.xi - sum_xi).norm() > GEOM_TOL * scale
        || (out.tau - sum_tau).abs() > GEOM_TOL * scale.max(sum_tau.abs())
    {
        return Err(Error::validation("output covector is not ζ¹ + ζ²"));
    }
    let mode = match out_mode {
        OutputMode::P => WaveMode::P,
        _ => WaveMode::S,
    };
    if out.variety_residual(mode, p) > RESONANCE_CHECK_TOL {
        return Err(Error::validation(format!(
            "non-resonant output covector (Σ_{mode:?} residual {})",
            out.variety_residual(mode, p)
        )));
    }
    symbol_on(p, cfg, out)
}

/// The unchecked core of [`interaction_symbol`]: evaluate and decompose the
/// source symbol at ζ¹ + ζ² without resonance validation.
pub fn symbol_on(p: &MaterialPoint, cfg: &InteractionConfig, out: &Covector) -> Result<SymbolVector> {
    let frame = build_frame(&cfg.zeta1.xi, &cfg.zeta2.xi, &out.xi)?;
    let s1 = rank_one_from(&cfg.zeta1, &cfg.amp1, &frame.v)?;
    let s2 = rank_one_from(&cfg.zeta2, &cfg.amp2, &frame.v)?;
    let g = g_form(p, &s1, &s2);
    let xi_out = out.xi.map(|c| Complex64::new(c, 0.0));
    let h: CVec3 = g * xi_out * I;
    let uo = out.xi.normalize();
    let decomposition = Decomposition {
        p: project(&uo, &h),
        h: project(&frame.h_out, &h),
        v: project(&frame.v, &h),
    };
    Ok(SymbolVector {
        value: [h[0], h[1], h[2]],
        at: *out,
        decomposition,
    })
}

/// Scalar inputs for a closed-form evaluation. For mixed P/S cases the
/// first slot is the P wave; `amp1`/`amp2` are the case-relevant amplitude
/// components (a for P, b_H or b_V for S).
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormInputs {
    pub r1: f64,
    pub r2: f64,
    pub r_out: f64,
    pub amp1: Complex64,
    pub amp2: Complex64,
    pub alpha: f64,
    pub psi: f64,
}

/// Angle coefficients of the P+SV→SV (and SV+SV→P with α↔ψ roles kept)
/// material system: amplitude ∝ s₁·c[0] + s₂·c[1] with s₁ = λ+B,
/// s₂ = 2μ+½A.
pub fn psv_coeffs(alpha: f64, psi: f64) -> [f64; 2] {
    [psi.cos(), alpha.cos() * (alpha - psi).cos()]
}

pub fn svsv_coeffs(alpha: f64, psi: f64) -> [f64; 2] {
    [alpha.cos(), psi.cos() * (alpha - psi).cos()]
}

/// Angle factor of the P+P→SH amplitude: combo · cosα · sin(2ψ−α).
pub fn ppsh_angle(alpha: f64, psi: f64) -> f64 {
    alpha.cos() * (2.0 * psi - alpha).sin()
}

/// Angle coefficients of the P+SH→SH system: amplitude ∝ p·cos²ψ − q·sin²ψ
/// with p = λ+2μ+½A+B, q = μ+½A+B.
pub fn pshsh_coeffs(psi: f64) -> [f64; 2] {
    let (s, c) = psi.sin_cos();
    [c * c, -(s * s)]
}

/// det(v(ψ₁), v(ψ₂)) of the cos²/sin² system, = sin(ψ₂−ψ₁)·sin(ψ₂+ψ₁).
pub fn cos2_system_det(psi1: f64, psi2: f64) -> f64 {
    let a = pshsh_coeffs(psi1);
    let b = pshsh_coeffs(psi2);
    a[0] * (-b[1]) - (-a[1]) * b[0]
}

/// The non-material prefactor of the closed form (amplitudes, magnitudes
/// and the constant phase).
pub fn closed_form_prefactor(case: InteractionCase, inp: &ClosedFormInputs) -> Complex64 {
    let aa = inp.amp1 * inp.amp2;
    match case {
        InteractionCase::PpToSh => I * aa * inp.r1 * inp.r1 * inp.r2 * inp.r2 * inp.r_out,
        InteractionCase::PShToP | InteractionCase::PShToSh | InteractionCase::PSvToSv => {
            -I * aa * inp.r1 * inp.r1 * inp.r2 * inp.r_out
        }
        InteractionCase::ShShToP | InteractionCase::SvSvToP => -I * aa * inp.r1 * inp.r2 * inp.r_out,
        InteractionCase::ShSvNone => Complex64::new(0.0, 0.0),
    }
}

/// The material-and-angle factor of the closed form.
pub fn closed_form_material_factor(case: InteractionCase, p: &MaterialPoint, alpha: f64, psi: f64) -> f64 {
    let (lam, mu, a, b) = (p.lambda, p.mu, p.a_landau, p.b_landau);
    let combo = lam + 3.0 * mu + a + 2.0 * b;
    let pp = lam + 2.0 * mu + 0.5 * a + b;
    let qq = mu + 0.5 * a + b;
    match case {
        InteractionCase::PpToSh => combo * ppsh_angle(alpha, psi),
        InteractionCase::PShToP => combo * (alpha - psi).cos() * (alpha + psi).sin(),
        InteractionCase::PShToSh => {
            let c = pshsh_coeffs(psi);
            pp * c[0] - qq * (-c[1])
        }
        InteractionCase::PSvToSv => {
            let c = psv_coeffs(alpha, psi);
            (lam + b) * c[0] + (2.0 * mu + 0.5 * a) * c[1]
        }
        InteractionCase::ShShToP => {
            let c = pshsh_coeffs(alpha);
            pp * c[0] - qq * (-c[1])
        }
        InteractionCase::SvSvToP => {
            let c = svsv_coeffs(alpha, psi);
            (lam + b) * c[0] + (2.0 * mu + 0.5 * a) * c[1]
        }
        InteractionCase::ShSvNone => 0.0,
    }
}

/// Closed-form output amplitude (along the unit output-mode direction,
/// including the constant phase) for one interaction channel.
pub fn closed_form_amplitude(
    case: InteractionCase,
    p: &MaterialPoint,
    inp: &ClosedFormInputs,
) -> Complex64 {
    closed_form_prefactor(case, inp) * closed_form_material_factor(case, p, inp.alpha, inp.psi)
}

/// Three-way classification of one interaction-table row for a medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InteractionClass {
    Vanishing,
    GenericallyNonvanishing,
    RequiresInteractionCondition,
}

impl InteractionClass {
    pub fn label(&self) -> &'static str {
        match self {
            InteractionClass::Vanishing => "vanishing",
            InteractionClass::GenericallyNonvanishing => "generically-nonvanishing",
            InteractionClass::RequiresInteractionCondition => "requires-interaction-condition",
        }
    }
}

/// Evaluate the non-vanishing conditions of one interaction-table row.
pub fn classify_interaction(case: InteractionCase, p: &MaterialPoint) -> InteractionClass {
    let scale = (p.lambda.abs() + 2.0 * p.mu.abs() + p.a_landau.abs() + p.b_landau.abs()).max(1e-300);
    let tol = 1e-12 * scale;
    let nz = |v: f64| v.abs() > tol;
    let combo = p.lambda + 3.0 * p.mu + p.a_landau + 2.0 * p.b_landau;
    let pp = p.lambda + 2.0 * p.mu + 0.5 * p.a_landau + p.b_landau;
    let qq = p.mu + 0.5 * p.a_landau + p.b_landau;
    let sv1 = p.lambda + p.b_landau;
    let sv2 = 2.0 * p.mu + 0.5 * p.a_landau;
    let gate = |ok: bool| {
        if ok {
            InteractionClass::GenericallyNonvanishing
        } else {
            InteractionClass::Vanishing
        }
    };
    let gate_ss = |ok: bool| {
        if ok {
            InteractionClass::RequiresInteractionCondition
        } else {
            InteractionClass::Vanishing
        }
    };
    match case {
        InteractionCase::PpToSh | InteractionCase::PShToP => gate(nz(combo)),
        InteractionCase::PShToSh => gate(nz(pp) || nz(qq)),
        InteractionCase::PSvToSv => gate(nz(sv1) || nz(sv2)),
        InteractionCase::ShShToP => gate_ss(nz(pp) || nz(qq)),
        InteractionCase::SvSvToP => gate_ss(nz(sv1) || nz(sv2)),
        InteractionCase::ShSvNone => InteractionClass::Vanishing,
    }
}

/// One row of the rendered interaction table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub case: InteractionCase,
    pub interaction: &'static str,
    pub condition: &'static str,
    pub condition_values: Vec<f64>,
    pub class: InteractionClass,
}

/// Evaluate all seven interaction rows for a medium.
pub fn table_rows(p: &MaterialPoint) -> Vec<TableRow> {
    let combo = p.lambda + 3.0 * p.mu + p.a_landau + 2.0 * p.b_landau;
    let pp = p.lambda + 2.0 * p.mu + 0.5 * p.a_landau + p.b_landau;
    let qq = p.mu + 0.5 * p.a_landau + p.b_landau;
    let sv1 = p.lambda + p.b_landau;
    let sv2 = 2.0 * p.mu + 0.5 * p.a_landau;
    InteractionCase::ALL
        .iter()
        .map(|&case| {
            let (condition, condition_values): (&'static str, Vec<f64>) = match case {
                InteractionCase::PpToSh | InteractionCase::PShToP => {
                    ("lambda+3mu+A+2B != 0", vec![combo])
                }
                InteractionCase::PShToSh => (
                    "lambda+2mu+A/2+B != 0 or mu+A/2+B != 0",
                    vec![pp, qq],
                ),
                InteractionCase::PSvToSv => ("lambda+B != 0 or 2mu+A/2 != 0", vec![sv1, sv2]),
                InteractionCase::ShShToP => (
                    "interaction condition and (lambda+2mu+A/2+B != 0 or mu+A/2+B != 0)",
                    vec![pp, qq],
                ),
                InteractionCase::ShSvNone => ("none", vec![]),
                InteractionCase::SvSvToP => (
                    "interaction condition and (lambda+B != 0 or 2mu+A/2 != 0)",
                    vec![sv1, sv2],
                ),
            };
            TableRow {
                case,
                interaction: case.label(),
                condition,
                condition_values,
                class: classify_interaction(case, p),
            }
        })
        .collect()
}

/// One row of an angle sweep comparing the two evaluation routes.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub case: InteractionCase,
    pub alpha: f64,
    pub psi: f64,
    pub amplitude: Complex64,
    pub closed_form: f64,
    pub tensor_form: f64,
    pub rel_err: f64,
}

/// Sweep ψ at fixed α for one case, with unit magnitudes and amplitudes,
/// comparing the closed form against the tensor contraction.
pub fn angle_sweep(
    case: InteractionCase,
    p: &MaterialPoint,
    alpha: f64,
    n_psi: usize,
) -> Result<Vec<SweepRow>> {
    if !(0.0..std::f64::consts::PI).contains(&alpha) || alpha == 0.0 {
        return Err(Error::validation("alpha must lie in (0, pi)"));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut rows = Vec::with_capacity(n_psi);
    for k in 0..n_psi {
        let psi = std::f64::consts::PI * (k as f64 + 0.5) / n_psi as f64;
        let (tensor, closed) = sweep_point(case, p, alpha, psi, one, one)?;
        let denom = closed.norm().max(tensor.norm());
        let rel_err = if denom > 0.0 {
            (closed - tensor).norm() / denom
        } else {
            0.0
        };
        rows.push(SweepRow {
            case,
            alpha,
            psi,
            amplitude: closed,
            closed_form: closed.norm(),
            tensor_form: tensor.norm(),
            rel_err,
        });
    }
    Ok(rows)
}

/// Evaluate both routes at one (α, ψ) on the canonical unit-geometry plane
/// (ξ̂² = x̂, ξ̂¹ at angle α, output direction at angle ψ; this is a pure
/// angle-space evaluation, independent of resonance).
pub fn sweep_point(
    case: InteractionCase,
    p: &MaterialPoint,
    alpha: f64,
    psi: f64,
    amp1: Complex64,
    amp2: Complex64,
) -> Result<(Complex64, Complex64)> {
    let xi2 = Vector3::new(1.0, 0.0, 0.0);
    let xi1 = Vector3::new(alpha.cos(), alpha.sin(), 0.0);
    let out = Vector3::new(psi.cos(), psi.sin(), 0.0);
    let frame = build_frame(&xi1, &xi2, &out)?;
    let zero = Complex64::new(0.0, 0.0);
    let (m1, m2, a1, a2, out_dir): (WaveMode, WaveMode, ModeAmplitude, ModeAmplitude, OutputMode) =
        match case {
            InteractionCase::PpToSh => (
                WaveMode::P,
                WaveMode::P,
                ModeAmplitude::P { a: amp1 },
                ModeAmplitude::P { a: amp2 },
                OutputMode::Sh,
            ),
            InteractionCase::PShToP => (
                WaveMode::P,
                WaveMode::S,
                ModeAmplitude::P { a: amp1 },
                ModeAmplitude::S { b_h: amp2, b_v: zero },
                OutputMode::P,
            ),
            InteractionCase::PShToSh => (
                WaveMode::P,
                WaveMode::S,
                ModeAmplitude::P { a: amp1 },
                ModeAmplitude::S { b_h: amp2, b_v: zero },
                OutputMode::Sh,
            ),
            InteractionCase::PSvToSv => (
                WaveMode::P,
                WaveMode::S,
                ModeAmplitude::P { a: amp1 },
                ModeAmplitude::S { b_h: zero, b_v: amp2 },
                OutputMode::Sv,
            ),
            InteractionCase::ShShToP => (
                WaveMode::S,
                WaveMode::S,
                ModeAmplitude::S { b_h: amp1, b_v: zero },
                ModeAmplitude::S { b_h: amp2, b_v: zero },
                OutputMode::P,
            ),
            InteractionCase::ShSvNone => (
                WaveMode::S,
                WaveMode::S,
                ModeAmplitude::S { b_h: amp1, b_v: zero },
                ModeAmplitude::S { b_h: zero, b_v: amp2 },
                OutputMode::P,
            ),
            InteractionCase::SvSvToP => (
                WaveMode::S,
                WaveMode::S,
                ModeAmplitude::S { b_h: zero, b_v: amp1 },
                ModeAmplitude::S { b_h: zero, b_v: amp2 },
                OutputMode::P,
            ),
        };
    let z1 = Covector::on_variety(0.0, Vector3::zeros(), xi1, m1, p)?;
    let z2 = Covector::on_variety(0.0, Vector3::zeros(), xi2, m2, p)?;
    let cfg = InteractionConfig::new(z1, z2, a1, a2, p)?;
    let out_cv = Covector {
        t: 0.0,
        x: Vector3::zeros(),
        tau: z1.tau + z2.tau,
        xi: out,
        mode: ModeTag::Unclassified,
    };
    // pure angle-space evaluation: bypass the resonance check
    let sv = symbol_on(p, &cfg, &out_cv)?;
    let tensor = sv.amplitude(out_dir);
    let closed = closed_form_amplitude(
        case,
        p,
        &ClosedFormInputs {
            r1: 1.0,
            r2: 1.0,
            r_out: 1.0,
            amp1,
            amp2,
            alpha: frame.alpha,
            psi: frame.psi,
        },
    );
    Ok((tensor, closed))
}

/// CSV emitter for angle sweeps: case, alpha, psi, amplitude_re,
/// amplitude_im, closed_form, tensor_form, rel_err.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: &mut W) -> Result<()> {
    writeln!(
        w,
        "case,alpha,psi,amplitude_re,amplitude_im,closed_form,tensor_form,rel_err"
    )?;
    let f = crate::fmt_g17;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.case.label(),
            f(r.alpha),
            f(r.psi),
            f(r.amplitude.re),
            f(r.amplitude.im),
            f(r.closed_form),
            f(r.tensor_form),
            f(r.rel_err)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::sample::resonant_pair;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Independent oracle: the displayed P–P expansion of −𝐠.
    fn pp_g_oracle(p: &MaterialPoint, a1: f64, a2: f64, xi1: &Vector3<f64>, xi2: &Vector3<f64>) -> Matrix3<f64> {
        let (lam, mu, aa, bb, cc) = (p.lambda, p.mu, p.a_landau, p.b_landau, p.c_landau);
        let d = Matrix3::identity();
        let o = |u: &Vector3<f64>, v: &Vector3<f64>| u * v.transpose();
        let dot12 = xi1.dot(xi2);
        let minus_g = (lam + 2.0 * bb)
            * a1
            * a2
            * (xi1.norm_squared() * o(xi2, xi2) + xi2.norm_squared() * o(xi1, xi1) + dot12 * dot12 * d)
            + (aa + 3.0 * mu) * a1 * a2 * dot12 * (o(xi1, xi2) + o(xi2, xi1))
            + 2.0 * cc * a1 * a2 * xi1.norm_squared() * xi2.norm_squared() * d;
        -minus_g
    }

    #[test]
    fn pp_g_matches_displayed_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let p = MaterialPoint::new(
                rng.random_range(-0.3..2.0),
                rng.random_range(0.2..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let p = match p {
                Ok(p) => p,
                Err(_) => continue,
            };
            let rv = |rng: &mut ChaCha8Rng| {
                Vector3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                )
            };
            let (xi1, xi2) = (rv(&mut rng), rv(&mut rng));
            let (a1, a2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let s1 = RankOneSymbol::new(xi1.map(|v| c(a1 * v)), xi1);
            let s2 = RankOneSymbol::new(xi2.map(|v| c(a2 * v)), xi2);
            let g = g_form(&p, &s1, &s2);
            let oracle = pp_g_oracle(&p, a1, a2, &xi1, &xi2);
            for m in 0..3 {
                for n in 0..3 {
                    assert_relative_eq!(
                        g[(m, n)].re,
                        oracle[(m, n)],
                        max_relative = 1e-12,
                        epsilon = 1e-12
                    );
                    assert!(g[(m, n)].im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pp_g_specific_example() {
        // λ=1, μ=1, A=B=C=0, unit orthogonal wavevectors
        let p = MaterialPoint::lame(1.0, 1.0).unwrap();
        let xi1 = Vector3::new(1.0, 0.0, 0.0);
        let xi2 = Vector3::new(0.0, 1.0, 0.0);
        let s1 = RankOneSymbol::new(xi1.map(c), xi1);
        let s2 = RankOneSymbol::new(xi2.map(c), xi2);
        let g = g_form(&p, &s1, &s2);
        let oracle = pp_g_oracle(&p, 1.0, 1.0, &xi1, &xi2);
        assert_relative_eq!(oracle[(0, 0)], -1.0);
        assert_relative_eq!(oracle[(1, 1)], -1.0);
        assert_relative_eq!(oracle[(2, 2)], 0.0);
        for m in 0..3 {
            for n in 0..3 {
                assert_relative_eq!(g[(m, n)].re, oracle[(m, n)], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn g_form_bilinear() {
        let p = MaterialPoint::new(1.0, 1.0, 0.5, -0.3, 0.7).unwrap();
        let xi1 = Vector3::new(1.0, 0.2, 0.0);
        let xi2 = Vector3::new(-0.3, 1.0, 0.4);
        let zero = RankOneSymbol::new(CVec3::zeros(), xi1);
        let s2 = RankOneSymbol::new(xi2.map(c), xi2);
        let g = g_form(&p, &zero, &s2);
        assert!(g.iter().all(|v| v.norm() == 0.0));

        // scaling one polarization scales the form
        let s1 = RankOneSymbol::new(xi1.map(|v| c(0.7 * v)), xi1);
        let s1x2 = RankOneSymbol::new(xi1.map(|v| c(1.4 * v)), xi1);
        let g1 = g_form(&p, &s1, &s2);
        let g2 = g_form(&p, &s1x2, &s2);
        for m in 0..3 {
            for n in 0..3 {
                assert_relative_eq!(g2[(m, n)].re, 2.0 * g1[(m, n)].re, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn c_invisible_for_s_inputs() {
        // finite difference in C over random S-mode inputs is identically zero
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let lam = rng.random_range(-0.3..2.0);
            let mu = rng.random_range(0.2..2.0);
            let p0 = MaterialPoint::new(lam, mu, 0.4, 0.2, 1.0).unwrap();
            let p1 = MaterialPoint::new(lam, mu, 0.4, 0.2, 11.0).unwrap();
            let xi1 = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let xi2 = Vector3::new(1.0, 0.0, 0.3);
            if xi1.cross(&xi2).norm() < 1e-2 {
                continue;
            }
            // S-polarized rank-one datum on input 1 (pol ⟂ ξ)
            let perp = xi1.cross(&xi2).normalize();
            let s1 = RankOneSymbol::new(perp.map(c), xi1);
            let s2 = RankOneSymbol::new(xi2.map(c), xi2); // P-like
            let g0 = g_form(&p0, &s1, &s2);
            let g1 = g_form(&p1, &s1, &s2);
            for m in 0..3 {
                for n in 0..3 {
                    assert!((g1[(m, n)] - g0[(m, n)]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn s_rank_one_is_divergence_free() {
        // σ(ẽ_ii) ∝ pol·ξ = 0 for S data
        let xi = Vector3::new(0.3, -0.8, 0.5);
        let v = xi.cross(&Vector3::new(1.0, 0.0, 0.0)).normalize();
        let s = RankOneSymbol::new(v.map(c), xi);
        let w = s.w_matrix();
        assert!(sym(&w).trace().norm() < 1e-15);
        assert!(s.alignment() < 1e-12);
        let p = RankOneSymbol::new(xi.map(|v| c(0.7 * v)), xi);
        assert!((p.alignment() - 1.0).abs() < 1e-12);
    }

    fn random_material(rng: &mut ChaCha8Rng) -> MaterialPoint {
        loop {
            if let Ok(p) = MaterialPoint::new(
                rng.random_range(-0.4..2.5),
                rng.random_range(0.2..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ) {
                return p;
            }
        }
    }

    fn random_amp(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))
    }

    #[test]
    fn closed_form_matches_tensor_on_resonant_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in InteractionCase::ALL {
            let mut tested = 0;
            while tested < 200 {
                let p = random_material(&mut rng);
                let alpha = rng.random_range(0.15..2.95);
                let root_index = rng.random_range(0..2usize);
                let (a1, a2) = (random_amp(&mut rng), random_amp(&mut rng));
                let scales = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
                let pair = match resonant_pair(case, &p, alpha, root_index, a1, a2, scales) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let (cfg, out, inp) = pair;
                let out_mode = crate::resonance::sample::output_mode(case);
                let sv = interaction_symbol(&p, &cfg, &out, out_mode).unwrap();
                let tensor = sv.amplitude(out_mode);
                let closed = closed_form_amplitude(case, &p, &inp);
                let scale = tensor.norm().max(closed.norm()).max(
                    1e-12 * (inp.r1 * inp.r2 * inp.r_out).max(1.0),
                );
                assert!(
                    (tensor - closed).norm() <= 1e-10 * scale,
                    "{case:?}: tensor {tensor} vs closed {closed}"
                );
                tested += 1;
            }
        }
    }

    #[test]
    fn exact_zero_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let p = random_material(&mut rng);
            let alpha = rng.random_range(0.2..2.9);
            let (a1, a2) = (random_amp(&mut rng), random_amp(&mut rng));

            // PP inputs: SV projection vanishes
            if let Ok((cfg, out, inp)) = resonant_pair(
                InteractionCase::PpToSh,
                &p,
                alpha,
                rng.random_range(0..2),
                a1,
                a2,
                (1.0, 1.0),
            ) {
                let sv = interaction_symbol(&p, &cfg, &out, OutputMode::Sv).unwrap();
                let scale = inp.r1.powi(2) * inp.r2.powi(2) * inp.r_out;
                assert!(sv.amplitude(OutputMode::Sv).norm() < 1e-12 * scale.max(1.0));
            }

            // P+SV: P-output projection vanishes
            if let Ok((mut cfg, out, inp)) = resonant_pair(
                InteractionCase::PShToP,
                &p,
                alpha,
                0,
                a1,
                a2,
                (1.0, 1.0),
            ) {
                cfg.amp2 = ModeAmplitude::S {
                    b_h: Complex64::new(0.0, 0.0),
                    b_v: a2,
                };
                let sv = interaction_symbol(&p, &cfg, &out, OutputMode::P).unwrap();
                let scale = inp.r1.powi(2) * inp.r2 * inp.r_out;
                assert!(sv.amplitude(OutputMode::P).norm() < 1e-12 * scale.max(1.0));
            }

            // SS inputs, mixed H–V: resonant P output and in-plane S projection vanish
            if let Ok((cfg, out, inp)) = resonant_pair(
                InteractionCase::ShSvNone,
                &p,
                alpha,
                rng.random_range(0..2),
                a1,
                a2,
                (1.0, 1.0),
            ) {
                let sv = interaction_symbol(&p, &cfg, &out, OutputMode::P).unwrap();
                let scale = (inp.r1 * inp.r2 * inp.r_out).max(1.0);
                assert!(sv.amplitude(OutputMode::P).norm() < 1e-12 * scale);
                assert!(sv.amplitude(OutputMode::Sh).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn closed_form_zeros() {
        let p = MaterialPoint::lame(1.0, 1.0).unwrap();
        let inp = ClosedFormInputs {
            r1: 1.0,
            r2: 1.0,
            r_out: 1.0,
            amp1: c(1.0),
            amp2: c(1.0),
            alpha: std::f64::consts::FRAC_PI_2,
            psi: 0.7,
        };
        // cos α factor kills PP→SH at α = π/2
        assert!(closed_form_amplitude(InteractionCase::PpToSh, &p, &inp).norm() < 1e-16);
        // sin(2ψ−α) factor kills it at 2ψ = α
        let inp2 = ClosedFormInputs {
            alpha: 1.1,
            psi: 0.55,
            ..inp
        };
        assert!(closed_form_amplitude(InteractionCase::PpToSh, &p, &inp2).norm() < 1e-15);
    }

    #[test]
    fn frame_covariance_under_rotation() {
        use nalgebra::Rotation3;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let p = random_material(&mut rng);
            let alpha = rng.random_range(0.3..2.8);
            let (a1, a2) = (random_amp(&mut rng), random_amp(&mut rng));
            let case = InteractionCase::PShToSh;
            let Ok((cfg, out, _)) = resonant_pair(case, &p, alpha, 0, a1, a2, (1.0, 1.0)) else {
                continue;
            };
            let axis = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if axis.norm() < 1e-2 {
                continue;
            }
            let rot = Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(axis),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let rc = |z: &Covector| Covector {
                t: z.t,
                x: z.x,
                tau: z.tau,
                xi: rot * z.xi,
                mode: z.mode,
            };
            let cfg_r = InteractionConfig::new(rc(&cfg.zeta1), rc(&cfg.zeta2), cfg.amp1, cfg.amp2, &p)
                .unwrap();
            let out_r = rc(&out);
            let sv = symbol_on(&p, &cfg, &out).unwrap();
            let sv_r = symbol_on(&p, &cfg_r, &out_r).unwrap();
            // decomposition amplitudes are invariant
            for (a, b) in [
                (sv.decomposition.p, sv_r.decomposition.p),
                (sv.decomposition.h, sv_r.decomposition.h),
                (sv.decomposition.v, sv_r.decomposition.v),
            ] {
                assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
            }
            // the full vector rotates covariantly
            let val = Vector3::new(sv.value[0], sv.value[1], sv.value[2]);
            let rot_val = rot.matrix().map(c) * val;
            for k in 0..3 {
                assert!((rot_val[k] - sv_r.value[k]).norm() < 1e-10 * (1.0 + rot_val[k].norm()));
            }
        }
    }

    #[test]
    fn classify_examples() {
        // λ=1, μ=1, A=−6, B=1: 1+3−6+2 = 0 kills PP→SH
        let p = MaterialPoint::new(1.0, 1.0, -6.0, 1.0, 0.0).unwrap();
        assert_eq!(
            classify_interaction(InteractionCase::PpToSh, &p),
            InteractionClass::Vanishing
        );
        // SH+SV vanishes for every medium
        for p in [
            MaterialPoint::lame(1.0, 1.0).unwrap(),
            MaterialPoint::new(2.0, 0.5, 3.0, -1.0, 4.0).unwrap(),
        ] {
            assert_eq!(
                classify_interaction(InteractionCase::ShSvNone, &p),
                InteractionClass::Vanishing
            );
        }
        // λ=1, μ=1, A=0, B=0: everything else nonvanishing
        let p = MaterialPoint::lame(1.0, 1.0).unwrap();
        assert_eq!(
            classify_interaction(InteractionCase::PShToP, &p),
            InteractionClass::GenericallyNonvanishing
        );
        assert_eq!(
            classify_interaction(InteractionCase::PShToSh, &p),
            InteractionClass::GenericallyNonvanishing
        );
        assert_eq!(
            classify_interaction(InteractionCase::PSvToSv, &p),
            InteractionClass::GenericallyNonvanishing
        );
        assert_eq!(
            classify_interaction(InteractionCase::ShShToP, &p),
            InteractionClass::RequiresInteractionCondition
        );
        assert_eq!(
            classify_interaction(InteractionCase::SvSvToP, &p),
            InteractionClass::RequiresInteractionCondition
        );
        assert_eq!(table_rows(&p).len(), 7);
    }

    #[test]
    fn sweep_zeros_at_expected_angles() {
        let p = MaterialPoint::lame(1.0, 1.0).unwrap();
        let alpha = 1.2;
        let rows = angle_sweep(InteractionCase::PpToSh, &p, alpha, 720).unwrap();
        // zeros of sin(2ψ−α) on the ψ grid: ψ = α/2 and ψ = α/2 + π/2
        for z in [alpha / 2.0, alpha / 2.0 + std::f64::consts::FRAC_PI_2] {
            let nearest = rows
                .iter()
                .min_by(|a, b| {
                    (a.psi - z).abs().partial_cmp(&(b.psi - z).abs()).unwrap()
                })
                .unwrap();
            assert!(nearest.closed_form < 2e-2);
            assert!(nearest.rel_err < 1e-10 || nearest.tensor_form < 1e-12);
        }
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("case,alpha,psi,amplitude_re"));
    }
}
