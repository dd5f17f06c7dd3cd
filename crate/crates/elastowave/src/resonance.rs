//! Interaction kinematics: outgoing characteristic covectors ζ = ζ¹ + bζ²
//! produced by the quadratic nonlinearity, and the interaction-plane frame.
//!
//! With unit spatial wavevectors and both incoming waves forward in time
//! (τ < 0, so τ¹τ² = +c₁c₂), membership of ζ¹ + bζ² in a characteristic
//! variety reduces to a quadratic (or linear) equation in b:
//!
//! * P+P on Σ_S: (λ+μ)b² + 2((λ+2μ) − μ cosα)b + (λ+μ) = 0 — always two
//!   real roots for transversal inputs, and no Σ_P output besides b = 0;
//! * P+S on Σ_P: (λ+μ)b² + 2((λ+2μ)cosα − √(μ(λ+2μ)))b = 0 — one
//!   nontrivial root; on Σ_S: 2(√((λ+2μ)μ) − μ cosα)b + (λ+μ) = 0;
//! * S+S on Σ_P: (λ+μ)b² + 2((λ+2μ)cosα − μ)b + (λ+μ) = 0 — two real roots
//!   iff cosα < −λ/(λ+2μ) (the interaction condition), and no Σ_S output.
//!
//! Root solving normalizes |ξ¹| = |ξ²| = 1 and rescales back, so rescaling
//! ζ² by s rescales roots by 1/s and leaves the output rays unchanged.

use crate::error::{Error, Result};
use crate::kinematics::{Covector, ModeTag, WaveMode};
use crate::medium::{MaterialPoint, GEOM_TOL};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Residual tolerance for claiming an output covector lies on its variety.
pub const OUTPUT_RESIDUAL_TOL: f64 = 1e-10;

/// Discriminant band (relative to its natural scale) inside which a root
/// pair is reported as degenerate rather than silently resolved.
pub const DISCRIMINANT_TOL: f64 = 1e-9;

/// The seven interaction channels of the five-constants model (SH is the S
/// polarization inside the interaction plane, SV the one perpendicular).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionCase {
    PpToSh,
    PShToP,
    PShToSh,
    PSvToSv,
    ShShToP,
    ShSvNone,
    SvSvToP,
}

impl InteractionCase {
    pub const ALL: [InteractionCase; 7] = [
        InteractionCase::PpToSh,
        InteractionCase::PShToP,
        InteractionCase::PShToSh,
        InteractionCase::PSvToSv,
        InteractionCase::ShShToP,
        InteractionCase::ShSvNone,
        InteractionCase::SvSvToP,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            InteractionCase::PpToSh => "P+P->SH",
            InteractionCase::PShToP => "P+SH->P",
            InteractionCase::PShToSh => "P+SH->SH",
            InteractionCase::PSvToSv => "P+SV->SV",
            InteractionCase::ShShToP => "SH+SH->P",
            InteractionCase::ShSvNone => "SH+SV->none",
            InteractionCase::SvSvToP => "SV+SV->P",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "pp_to_sh" | "p+p->sh" => InteractionCase::PpToSh,
            "psh_to_p" | "p+sh->p" => InteractionCase::PShToP,
            "psh_to_sh" | "p+sh->sh" => InteractionCase::PShToSh,
            "psv_to_sv" | "p+sv->sv" => InteractionCase::PSvToSv,
            "shsh_to_p" | "sh+sh->p" => InteractionCase::ShShToP,
            "shsv" | "sh+sv" | "shsv_none" => InteractionCase::ShSvNone,
            "svsv_to_p" | "sv+sv->p" => InteractionCase::SvSvToP,
            other => return Err(Error::validation(format!("unknown case '{other}'"))),
        })
    }
}

/// Case tag of a kinematic resonance result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResonanceCase {
    PpToS,
    PsToP,
    PsToS,
    SpToP,
    SpToS,
    SsToP,
}

/// Polarization amplitude of one incoming wave. P amplitudes multiply the
/// full wavevector (σ(u) = a·ξ); S amplitudes multiply the unit frame
/// vectors ξ^H = ξ^V × ξ̂ and ξ^V of the covector's own interaction frame.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum ModeAmplitude {
    P { a: Complex64 },
    S { b_h: Complex64, b_v: Complex64 },
}

impl ModeAmplitude {
    pub fn matches(&self, mode: ModeTag) -> bool {
        matches!(
            (self, mode),
            (ModeAmplitude::P { .. }, ModeTag::P) | (ModeAmplitude::S { .. }, ModeTag::S)
        )
    }
}

/// Two incoming covectors at a point with polarization amplitudes and the
/// derived interaction-plane data.
///
/// The plane normal is ξ^V = unit(ξ² × ξ¹), which orients the plane so that
/// the angle α from ξ̂² to ξ̂¹ lies in (0, π). The output angle ψ (angle
/// from ξ̂² to the output wavevector) lives on the per-output [`Frame`].
#[derive(Debug, Clone, Serialize)]
pub struct InteractionConfig {
    pub t: f64,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub x: Vector3<f64>,
    pub zeta1: Covector,
    pub zeta2: Covector,
    pub amp1: ModeAmplitude,
    pub amp2: ModeAmplitude,
    /// Unit normal of the interaction plane, ξ^V.
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub v: Vector3<f64>,
    /// Angle between the incoming wavevectors, in (0, π).
    pub alpha: f64,
}

impl InteractionConfig {
    pub fn new(
        zeta1: Covector,
        zeta2: Covector,
        amp1: ModeAmplitude,
        amp2: ModeAmplitude,
        p: &MaterialPoint,
    ) -> Result<Self> {
        if (zeta1.t - zeta2.t).abs() > GEOM_TOL || (zeta1.x - zeta2.x).norm() > GEOM_TOL {
            return Err(Error::validation(
                "incoming covectors attach to different points",
            ));
        }
        for (z, a, name) in [(&zeta1, &amp1, "zeta1"), (&zeta2, &amp2, "zeta2")] {
            let mode = match z.mode {
                ModeTag::P => WaveMode::P,
                ModeTag::S => WaveMode::S,
                ModeTag::Unclassified => {
                    return Err(Error::validation(format!("{name} has no mode tag")))
                }
            };
            if z.variety_residual(mode, p) > GEOM_TOL {
                return Err(Error::validation(format!(
                    "{name} off Σ_{mode:?}: residual {}",
                    z.variety_residual(mode, p)
                )));
            }
            if !a.matches(z.mode) {
                return Err(Error::validation(format!(
                    "{name} amplitude kind does not match its mode"
                )));
            }
        }
        let (v, alpha) = plane_normal_and_alpha(&zeta1.xi, &zeta2.xi)?;
        Ok(InteractionConfig {
            t: zeta1.t,
            x: zeta1.x,
            zeta1,
            zeta2,
            amp1,
            amp2,
            v,
            alpha,
        })
    }
}

fn plane_normal_and_alpha(xi1: &Vector3<f64>, xi2: &Vector3<f64>) -> Result<(Vector3<f64>, f64)> {
    let u1 = xi1
        .try_normalize(0.0)
        .ok_or_else(|| Error::validation("zero wavevector"))?;
    let u2 = xi2
        .try_normalize(0.0)
        .ok_or_else(|| Error::validation("zero wavevector"))?;
    let n = u2.cross(&u1);
    let v = n
        .try_normalize(GEOM_TOL)
        .ok_or_else(|| Error::degenerate("non-transversal wavevectors"))?;
    let alpha = n.norm().atan2(u1.dot(&u2));
    Ok((v, alpha))
}

/// Orthonormal interaction-plane frame for one output covector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Frame {
    /// Plane normal ξ^V = unit(ξ² × ξ¹).
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub v: Vector3<f64>,
    /// In-plane unit vector perpendicular to the output wavevector
    /// (ξ^H of §4.3.1, ξ^{SH} of §4.3.2): ξ^V × ξ̂_out.
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub h_out: Vector3<f64>,
    /// In-plane unit vectors perpendicular to the incoming wavevectors
    /// (polarization bases for S-mode inputs).
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub h_in1: Vector3<f64>,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub h_in2: Vector3<f64>,
    /// Angle from ξ̂² to ξ̂¹, in (0, π).
    pub alpha: f64,
    /// Signed angle from ξ̂² to the output wavevector.
    pub psi: f64,
}

/// Build the interaction frame from the two incoming wavevectors and the
/// output wavevector. Angle conventions: cos α = ξ̂¹·ξ̂², cos ψ = ξ̂_out·ξ̂²,
/// both measured about ξ^V = unit(ξ² × ξ¹) so that α ∈ (0, π).
pub fn build_frame(
    xi1: &Vector3<f64>,
    xi2: &Vector3<f64>,
    output_xi: &Vector3<f64>,
) -> Result<Frame> {
    let (v, alpha) = plane_normal_and_alpha(xi1, xi2)?;
    let u1 = xi1.normalize();
    let u2 = xi2.normalize();
    let uo = output_xi
        .try_normalize(0.0)
        .ok_or_else(|| Error::validation("zero output wavevector"))?;
    if uo.dot(&v).abs() > GEOM_TOL {
        return Err(Error::validation("output wavevector leaves the plane"));
    }
    let psi = v.dot(&u2.cross(&uo)).atan2(u2.dot(&uo));
    Ok(Frame {
        v,
        h_out: v.cross(&uo),
        h_in1: v.cross(&u1),
        h_in2: v.cross(&u2),
        alpha,
        psi,
    })
}

/// One resonance root with its output covector and membership residual.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceRoot {
    pub b: f64,
    pub output: Covector,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceResult {
    pub case: ResonanceCase,
    pub out_mode: WaveMode,
    pub roots: Vec<ResonanceRoot>,
}

impl ResonanceResult {
    /// JSON record export (case, roots, output covectors, mode, residuals).
    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)
            .map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }
}

/// Outcome of the S–S solver: either two P outputs or a report that the
/// interaction condition fails.
#[derive(Debug, Clone, Serialize)]
pub enum SsOutcome {
    Resonant(ResonanceResult),
    NoInteraction { cos_alpha: f64, threshold: f64 },
}

fn make_root(
    cfg: &InteractionConfig,
    b: f64,
    out_mode: WaveMode,
    p: &MaterialPoint,
) -> Result<ResonanceRoot> {
    let mut output = Covector {
        t: cfg.t,
        x: cfg.x,
        tau: cfg.zeta1.tau + b * cfg.zeta2.tau,
        xi: cfg.zeta1.xi + b * cfg.zeta2.xi,
        mode: out_mode.into(),
    };
    output.mode = out_mode.into();
    let residual = output.variety_residual(out_mode, p);
    if residual > OUTPUT_RESIDUAL_TOL {
        return Err(Error::numeric(format!(
            "resonant output off Σ_{out_mode:?}: residual {residual}"
        )));
    }
    Ok(ResonanceRoot {
        b,
        output,
        residual,
    })
}

fn require_modes(cfg: &InteractionConfig, m1: ModeTag, m2: ModeTag) -> Result<()> {
    if cfg.zeta1.mode != m1 || cfg.zeta2.mode != m2 {
        return Err(Error::validation(format!(
            "expected modes ({m1:?}, {m2:?}), got ({:?}, {:?})",
            cfg.zeta1.mode, cfg.zeta2.mode
        )));
    }
    Ok(())
}

/// P+P → S kinematics: two outgoing S covectors ζ¹ + b±ζ² with
/// b₊b₋ = 1 in normalized units; there is no Σ_P output besides b = 0.
pub fn solve_pp_to_s(cfg: &InteractionConfig, p: &MaterialPoint) -> Result<ResonanceResult> {
    require_modes(cfg, ModeTag::P, ModeTag::P)?;
    let (lam, mu) = (p.lambda, p.mu);
    let cos_a = cfg.alpha.cos();
    let q = (lam + 2.0 * mu) - mu * cos_a;
    let a0 = lam + mu;
    let disc = q * q - a0 * a0;
    let scale = q * q + a0 * a0;
    if disc < DISCRIMINANT_TOL * scale {
        return Err(Error::degenerate(format!(
            "P+P->S root pair within discriminant tolerance (cos α = {cos_a})"
        )));
    }
    let sq = disc.sqrt();
    let r12 = cfg.zeta1.xi.norm() / cfg.zeta2.xi.norm();
    let roots_hat = [(-q + sq) / a0, (-q - sq) / a0];
    let roots = roots_hat
        .iter()
        .map(|bh| make_root(cfg, bh * r12, WaveMode::S, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceResult {
        case: ResonanceCase::PpToS,
        out_mode: WaveMode::S,
        roots,
    })
}

/// P+S (or S+P) kinematics → one new P covector and one S covector.
/// The returned roots b are always in the convention
/// output = ζ¹ + b ζ² of the configuration as given.
pub fn solve_ps(
    cfg: &InteractionConfig,
    p: &MaterialPoint,
) -> Result<(ResonanceResult, ResonanceResult)> {
    let swapped = match (cfg.zeta1.mode, cfg.zeta2.mode) {
        (ModeTag::P, ModeTag::S) => false,
        (ModeTag::S, ModeTag::P) => true,
        (m1, m2) => {
            return Err(Error::validation(format!(
                "expected one P and one S covector, got ({m1:?}, {m2:?})"
            )))
        }
    };
    let (lam, mu) = (p.lambda, p.mu);
    let cos_a = cfg.alpha.cos();
    let cpcs = (mu * (lam + 2.0 * mu)).sqrt();

    // normalized roots in the P-first convention (b attached to the S wave)
    let b_p_hat = 2.0 * (cpcs - (lam + 2.0 * mu) * cos_a) / (lam + mu);
    let s_lin = cpcs - mu * cos_a;
    if s_lin.abs() < DISCRIMINANT_TOL * (cpcs + mu) {
        return Err(Error::degenerate(
            "vanishing linear coefficient in the S-root equation",
        ));
    }
    let b_s_hat = -(lam + mu) / (2.0 * s_lin);
    if b_p_hat.abs() < DISCRIMINANT_TOL {
        return Err(Error::degenerate(
            "P-output root coincides with the trivial b = 0 root",
        ));
    }

    let (rp, rs) = if swapped {
        (cfg.zeta2.xi.norm(), cfg.zeta1.xi.norm())
    } else {
        (cfg.zeta1.xi.norm(), cfg.zeta2.xi.norm())
    };
    // physical roots in the P-first convention
    let b_p = b_p_hat * rp / rs;
    let b_s = b_s_hat * rp / rs;
    // translate to the configuration's own ordering: for a swapped (S, P)
    // configuration, ζ_S + bζ_P = b(ζ_P + (1/b)ζ_S)
    let to_cfg = |b_pfirst: f64| if swapped { 1.0 / b_pfirst } else { b_pfirst };

    let p_case = if swapped {
        ResonanceCase::SpToP
    } else {
        ResonanceCase::PsToP
    };
    let s_case = if swapped {
        ResonanceCase::SpToS
    } else {
        ResonanceCase::PsToS
    };
    let p_res = ResonanceResult {
        case: p_case,
        out_mode: WaveMode::P,
        roots: vec![make_root(cfg, to_cfg(b_p), WaveMode::P, p)?],
    };
    let s_res = ResonanceResult {
        case: s_case,
        out_mode: WaveMode::S,
        roots: vec![make_root(cfg, to_cfg(b_s), WaveMode::S, p)?],
    };
    Ok((p_res, s_res))
}

/// The S–S interaction condition threshold: two P outputs exist iff
/// cos α < −λ/(λ+2μ).
pub fn ss_threshold(p: &MaterialPoint) -> f64 {
    -p.lambda / (p.lambda + 2.0 * p.mu)
}

/// S+S → P kinematics: two outgoing P covectors when the
/// interaction condition holds, otherwise `NoInteraction`. There is no Σ_S
/// output besides b = 0.
pub fn solve_ss_to_p(cfg: &InteractionConfig, p: &MaterialPoint) -> Result<SsOutcome> {
    require_modes(cfg, ModeTag::S, ModeTag::S)?;
    let (lam, mu) = (p.lambda, p.mu);
    let cos_a = cfg.alpha.cos();
    let q = (lam + 2.0 * mu) * cos_a - mu;
    let a0 = lam + mu;
    let disc = q * q - a0 * a0;
    let scale = q * q + a0 * a0;
    if disc.abs() < DISCRIMINANT_TOL * scale {
        return Err(Error::degenerate(format!(
            "S+S->P root pair within discriminant tolerance (cos α = {cos_a})"
        )));
    }
    if disc < 0.0 || q > 0.0 {
        // q > 0 with positive discriminant cannot occur under the standing
        // assumptions; the real-root region is exactly cos α < −λ/(λ+2μ)
        return Ok(SsOutcome::NoInteraction {
            cos_alpha: cos_a,
            threshold: ss_threshold(p),
        });
    }
    let sq = disc.sqrt();
    let r12 = cfg.zeta1.xi.norm() / cfg.zeta2.xi.norm();
    let roots_hat = [(-q + sq) / a0, (-q - sq) / a0];
    let roots = roots_hat
        .iter()
        .map(|bh| make_root(cfg, bh * r12, WaveMode::P, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(SsOutcome::Resonant(ResonanceResult {
        case: ResonanceCase::SsToP,
        out_mode: WaveMode::P,
        roots,
    }))
}

/// Constructors for fully resonant interaction configurations: canonical
/// plane geometry, solved roots, scaled second covector, output covector and
/// the matching closed-form scalar inputs.
pub mod sample {
    use super::*;
    use crate::symbols::{ClosedFormInputs, OutputMode};

    /// The propagating output mode of each interaction channel (for the
    /// SH+SV channel the resonant output covectors are P, carrying zero
    /// amplitude).
    pub fn output_mode(case: InteractionCase) -> OutputMode {
        match case {
            InteractionCase::PpToSh | InteractionCase::PShToSh => OutputMode::Sh,
            InteractionCase::PSvToSv => OutputMode::Sv,
            InteractionCase::PShToP
            | InteractionCase::ShShToP
            | InteractionCase::ShSvNone
            | InteractionCase::SvSvToP => OutputMode::P,
        }
    }

    fn case_modes(case: InteractionCase) -> (WaveMode, WaveMode) {
        match case {
            InteractionCase::PpToSh => (WaveMode::P, WaveMode::P),
            InteractionCase::PShToP | InteractionCase::PShToSh | InteractionCase::PSvToSv => {
                (WaveMode::P, WaveMode::S)
            }
            InteractionCase::ShShToP | InteractionCase::ShSvNone | InteractionCase::SvSvToP => {
                (WaveMode::S, WaveMode::S)
            }
        }
    }

    fn case_amps(case: InteractionCase, a1: Complex64, a2: Complex64) -> (ModeAmplitude, ModeAmplitude) {
        let zero = Complex64::new(0.0, 0.0);
        let p = |a| ModeAmplitude::P { a };
        let sh = |b| ModeAmplitude::S { b_h: b, b_v: zero };
        let sv = |b| ModeAmplitude::S { b_h: zero, b_v: b };
        match case {
            InteractionCase::PpToSh => (p(a1), p(a2)),
            InteractionCase::PShToP | InteractionCase::PShToSh => (p(a1), sh(a2)),
            InteractionCase::PSvToSv => (p(a1), sv(a2)),
            InteractionCase::ShShToP => (sh(a1), sh(a2)),
            InteractionCase::ShSvNone => (sh(a1), sv(a2)),
            InteractionCase::SvSvToP => (sv(a1), sv(a2)),
        }
    }

    /// Build a resonant configuration for `case` at incoming angle `alpha`
    /// (between the pre-scaling wavevectors) with wavevector magnitudes
    /// `scales`. Returns the scaled configuration (so that the output is
    /// ζ¹ + ζ²), the output covector, and the matching closed-form inputs.
    ///
    /// `root_index` picks among the two roots for the P+P and S+S channels
    /// and is ignored for the single-root P+S channels.
    pub fn resonant_pair(
        case: InteractionCase,
        p: &MaterialPoint,
        alpha: f64,
        root_index: usize,
        amp1: Complex64,
        amp2: Complex64,
        scales: (f64, f64),
    ) -> Result<(InteractionConfig, Covector, ClosedFormInputs)> {
        if !(1e-6..std::f64::consts::PI - 1e-6).contains(&alpha) {
            return Err(Error::validation("alpha must lie inside (0, pi)"));
        }
        let (m1, m2) = case_modes(case);
        let (a1m, a2m) = case_amps(case, amp1, amp2);
        let xi1 = scales.0 * Vector3::new(alpha.cos(), alpha.sin(), 0.0);
        let xi2 = scales.1 * Vector3::new(1.0, 0.0, 0.0);
        let z1 = Covector::on_variety(0.0, Vector3::zeros(), xi1, m1, p)?;
        let z2 = Covector::on_variety(0.0, Vector3::zeros(), xi2, m2, p)?;
        let cfg0 = InteractionConfig::new(z1, z2, a1m, a2m, p)?;

        let (b, out_wave) = match case {
            InteractionCase::PpToSh => {
                let res = solve_pp_to_s(&cfg0, p)?;
                (res.roots[root_index.min(1)].b, WaveMode::S)
            }
            InteractionCase::PShToP => {
                let (pr, _) = solve_ps(&cfg0, p)?;
                (pr.roots[0].b, WaveMode::P)
            }
            InteractionCase::PShToSh | InteractionCase::PSvToSv => {
                let (_, sr) = solve_ps(&cfg0, p)?;
                (sr.roots[0].b, WaveMode::S)
            }
            InteractionCase::ShShToP | InteractionCase::ShSvNone | InteractionCase::SvSvToP => {
                match solve_ss_to_p(&cfg0, p)? {
                    SsOutcome::Resonant(res) => (res.roots[root_index.min(1)].b, WaveMode::P),
                    SsOutcome::NoInteraction { cos_alpha, threshold } => {
                        return Err(Error::degenerate(format!(
                            "no S+S interaction: cos α = {cos_alpha} ≥ {threshold}"
                        )))
                    }
                }
            }
        };

        let z2s = z2.scaled(b);
        let cfg = InteractionConfig::new(z1, z2s, a1m, a2m, p)?;
        let out = Covector {
            t: 0.0,
            x: Vector3::zeros(),
            tau: z1.tau + z2s.tau,
            xi: z1.xi + z2s.xi,
            mode: out_wave.into(),
        };
        let frame = build_frame(&cfg.zeta1.xi, &cfg.zeta2.xi, &out.xi)?;
        let inputs = ClosedFormInputs {
            r1: cfg.zeta1.xi.norm(),
            r2: cfg.zeta2.xi.norm(),
            r_out: out.xi.norm(),
            amp1,
            amp2,
            alpha: cfg.alpha,
            psi: frame.psi,
        };
        Ok((cfg, out, inputs))
    }
}
