//! Characteristic varieties, boundary covector classification, and
//! Hamiltonian bicharacteristic ray tracing for the P and S modes.
//!
//! The characteristic varieties are Σ_mode = {τ² = c²_mode(x)|ξ|²} with
//! c_P² = λ+2μ, c_S² = μ. Rays solve the Hamilton equations of
//! p = τ² − c²(x)|ξ|², parametrized here by time:
//!
//! dx/dt = −c²ξ/τ,   dξ/dt = |ξ|²∇c²/(2τ),   τ = const.

use crate::error::{Error, Result};
use crate::medium::{MaterialPoint, MediumField, GEOM_TOL};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveMode {
    P,
    S,
}

/// Mode tag carried by a covector; `Unclassified` covectors are only
/// accepted by operations that classify them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeTag {
    P,
    S,
    Unclassified,
}

impl From<WaveMode> for ModeTag {
    fn from(m: WaveMode) -> Self {
        match m {
            WaveMode::P => ModeTag::P,
            WaveMode::S => ModeTag::S,
        }
    }
}

/// A point-attached frequency/wavevector pair (t, x; τ, ξ) with a mode tag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Covector {
    pub t: f64,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub x: Vector3<f64>,
    pub tau: f64,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub xi: Vector3<f64>,
    pub mode: ModeTag,
}

pub(crate) mod vec3_serde {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v[0], v[1], v[2]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::from(a))
    }
}

impl Covector {
    /// Forward-in-time covector on Σ_mode: τ = −c_mode|ξ|.
    pub fn on_variety(
        t: f64,
        x: Vector3<f64>,
        xi: Vector3<f64>,
        mode: WaveMode,
        p: &MaterialPoint,
    ) -> Result<Self> {
        if xi.norm() == 0.0 {
            return Err(Error::validation("zero wavevector"));
        }
        p.validate()?;
        let tau = -p.c2(mode).sqrt() * xi.norm();
        Ok(Covector {
            t,
            x,
            tau,
            xi,
            mode: mode.into(),
        })
    }

    /// Value of the mode Hamiltonian p = τ² − c²|ξ|².
    pub fn hamiltonian(&self, mode: WaveMode, p: &MaterialPoint) -> f64 {
        self.tau * self.tau - p.c2(mode) * self.xi.norm_squared()
    }

    /// |τ² − c²|ξ|²| / (τ² + |ξ|²), the scale-free membership residual.
    pub fn variety_residual(&self, mode: WaveMode, p: &MaterialPoint) -> f64 {
        self.hamiltonian(mode, p).abs() / (self.tau * self.tau + self.xi.norm_squared())
    }

    pub fn is_zero(&self) -> bool {
        self.tau == 0.0 && self.xi.norm() == 0.0
    }

    /// The covector scaled by b (the resonance relabeling ζ ↦ bζ); negative b
    /// lands on the conjugate branch of the same variety.
    pub fn scaled(&self, b: f64) -> Covector {
        Covector {
            t: self.t,
            x: self.x,
            tau: b * self.tau,
            xi: b * self.xi,
            mode: self.mode,
        }
    }
}

/// Group velocity −c²ξ/τ of an on-variety covector. For the isotropic model
/// its magnitude is c_mode and its direction is ξ (forward time, τ < 0).
pub fn group_velocity(cv: &Covector, p: &MaterialPoint) -> Result<Vector3<f64>> {
    let mode = match cv.mode {
        ModeTag::P => WaveMode::P,
        ModeTag::S => WaveMode::S,
        ModeTag::Unclassified => return Err(Error::validation("unclassified covector")),
    };
    if cv.variety_residual(mode, p) > GEOM_TOL {
        return Err(Error::validation(format!(
            "covector off Σ_{mode:?}: residual {}",
            cv.variety_residual(mode, p)
        )));
    }
    Ok(-p.c2(mode) / cv.tau * cv.xi)
}

/// Classification of one boundary covector for one mode.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum ModeClass {
    /// No real roots: the mode carries no propagating wave from this covector.
    Elliptic,
    /// Two distinct real roots; `z` is the forward root and `xi` = ξ_∂ − zν.
    Hyperbolic {
        z: f64,
        #[serde(with = "crate::kinematics::vec3_serde")]
        xi: Vector3<f64>,
    },
    /// Double real root within tolerance.
    Glancing,
}

impl ModeClass {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, ModeClass::Hyperbolic { .. })
    }
    pub fn is_elliptic(&self) -> bool {
        matches!(self, ModeClass::Elliptic)
    }
    pub fn tag(&self) -> &'static str {
        match self {
            ModeClass::Elliptic => "elliptic",
            ModeClass::Hyperbolic { .. } => "hyperbolic",
            ModeClass::Glancing => "glancing",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryClass {
    pub p: ModeClass,
    pub s: ModeClass,
}

/// Discriminant band below which a double root is reported as glancing,
/// relative to the natural scale τ²/c² + |ξ_∂|².
pub const GLANCING_TOL: f64 = 1e-9;

/// Classify a boundary covector (t, x; τ, ξ_∂) with exterior unit normal ν by
/// solving p_mode(τ, ξ_∂ − zν) = 0 in z for each mode. ξ_∂ must be
/// tangential (ξ_∂ ⟂ ν). When hyperbolic, the forward root is the one whose
/// group velocity points inward (−ν side).
pub fn classify_boundary(
    cv: &Covector,
    normal: &Vector3<f64>,
    p: &MaterialPoint,
) -> Result<BoundaryClass> {
    if cv.is_zero() {
        return Err(Error::validation("zero boundary covector"));
    }
    p.validate()?;
    let nu = normal
        .try_normalize(0.0)
        .ok_or_else(|| Error::validation("zero normal"))?;
    let xi_t = cv.xi;
    if xi_t.dot(&nu).abs() > GEOM_TOL * (1.0 + xi_t.norm()) {
        return Err(Error::validation("boundary covector not tangential"));
    }

    let classify = |c2: f64| -> ModeClass {
        let disc = cv.tau * cv.tau / c2 - xi_t.norm_squared();
        let scale = cv.tau * cv.tau / c2 + xi_t.norm_squared();
        if disc.abs() < GLANCING_TOL * scale {
            ModeClass::Glancing
        } else if disc < 0.0 {
            ModeClass::Elliptic
        } else {
            let r = disc.sqrt();
            // forward = inward group velocity; v = −c²(ξ_∂ − zν)/τ
            let mut z_forward = r;
            for z in [r, -r] {
                let v = -(c2 / cv.tau) * (xi_t - z * nu);
                if v.dot(&-nu) > 0.0 {
                    z_forward = z;
                    break;
                }
            }
            ModeClass::Hyperbolic {
                z: z_forward,
                xi: xi_t - z_forward * nu,
            }
        }
    };

    let class = BoundaryClass {
        p: classify(p.c2_p()),
        s: classify(p.c2_s()),
    };
    // cross-check of the inclusions ℋ_P ⊂ ℋ_S and ℰ_S ⊂ ℰ_P; glancing tags
    // are compatible with either side of the band
    if class.p.is_hyperbolic() && class.s.is_elliptic() {
        return Err(Error::numeric("classification violates ℋ_P ⊂ ℋ_S"));
    }
    if class.s.is_elliptic() && class.p.is_hyperbolic() {
        return Err(Error::numeric("classification violates ℰ_S ⊂ ℰ_P"));
    }
    Ok(class)
}

/// One accepted sample along a ray.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RaySample {
    /// Curve parameter; equals t − t_start for the time-parametrized field.
    pub s: f64,
    pub t: f64,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub x: Vector3<f64>,
    pub tau: f64,
    #[serde(with = "crate::kinematics::vec3_serde")]
    pub xi: Vector3<f64>,
    pub hamiltonian_residual: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub max_hamiltonian_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayPath {
    pub mode: WaveMode,
    pub samples: Vec<RaySample>,
    pub stats: IntegratorStats,
}

impl RayPath {
    pub fn end(&self) -> &RaySample {
        self.samples.last().expect("ray path has samples")
    }

    /// CSV export: s, t, x1..x3, tau, xi1..xi3, hamiltonian_residual.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "s,t,x1,x2,x3,tau,xi1,xi2,xi3,hamiltonian_residual")?;
        for r in &self.samples {
            let f = crate::fmt_g17;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                f(r.s),
                f(r.t),
                f(r.x[0]),
                f(r.x[1]),
                f(r.x[2]),
                f(r.tau),
                f(r.xi[0]),
                f(r.xi[1]),
                f(r.xi[2]),
                f(r.hamiltonian_residual)
            )?;
        }
        Ok(())
    }
}

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 1e-3,
        }
    }
}

/// State for the ray ODE: position and wavevector.
#[derive(Clone, Copy)]
struct RayState {
    x: Vector3<f64>,
    xi: Vector3<f64>,
}

impl RayState {
    fn axpy(&self, h: f64, k: &[RayDeriv], w: &[f64]) -> RayState {
        let mut x = self.x;
        let mut xi = self.xi;
        for (ki, wi) in k.iter().zip(w) {
            x += h * *wi * ki.dx;
            xi += h * *wi * ki.dxi;
        }
        RayState { x, xi }
    }
}

#[derive(Clone, Copy, Default)]
struct RayDeriv {
    dx: Vector3<f64>,
    dxi: Vector3<f64>,
}

/// Trace the bicharacteristic from `start` over `t_span` through medium `m`
/// with a Dormand–Prince 5(4) adaptive step. τ is conserved exactly
/// (parameters are time-independent); the Hamiltonian residual is monitored
/// per accepted step.
pub fn trace_ray(
    start: &Covector,
    m: &MediumField,
    t_span: (f64, f64),
    ctrl: &StepControl,
) -> Result<RayPath> {
    let mode = match start.mode {
        ModeTag::P => WaveMode::P,
        ModeTag::S => WaveMode::S,
        ModeTag::Unclassified => return Err(Error::validation("unclassified start covector")),
    };
    let p0 = m.sample_checked(&start.x)?;
    if start.variety_residual(mode, &p0) > GEOM_TOL {
        return Err(Error::validation(format!(
            "start covector off Σ_{mode:?}: residual {}",
            start.variety_residual(mode, &p0)
        )));
    }
    if start.t != t_span.0 {
        return Err(Error::validation("t_span must begin at start.t"));
    }
    let tau = start.tau;
    let scale0 = tau * tau + start.xi.norm_squared();

    let rhs = |st: &RayState| -> RayDeriv {
        let (c2, gc2) = m.c2_and_grad(mode, &st.x);
        RayDeriv {
            dx: -(c2 / tau) * st.xi,
            dxi: (st.xi.norm_squared() / (2.0 * tau)) * gc2,
        }
    };

    // Dormand–Prince 5(4) tableau
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let (t0, t1) = t_span;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let total = (t1 - t0).abs();
    if total == 0.0 {
        return Err(Error::validation("empty t_span"));
    }

    let mut st = RayState {
        x: start.x,
        xi: start.xi,
    };
    let mut t = t0;
    let mut h = dir * ctrl.initial_step.min(ctrl.max_step).min(total);
    let mut stats = IntegratorStats::default();
    let mut samples = Vec::new();

    let residual_at = |st: &RayState| -> f64 {
        let p = m.sample(&st.x);
        (tau * tau - p.c2(mode) * st.xi.norm_squared()).abs() / scale0
    };
    samples.push(RaySample {
        s: 0.0,
        t,
        x: st.x,
        tau,
        xi: st.xi,
        hamiltonian_residual: residual_at(&st),
    });

    let inside = |x: &Vector3<f64>| m.domain().map(|d| d.contains(x)).unwrap_or(true);
    if !inside(&st.x) {
        return Err(Error::ExitedDomain {
            t,
            x: [st.x[0], st.x[1], st.x[2]],
        });
    }

    let max_steps = 1_000_000usize;
    while (t - t1).abs() > 1e-14 * total {
        if stats.accepted + stats.rejected > max_steps {
            return Err(Error::numeric("ray integrator exceeded step budget"));
        }
        if (t + h - t0).abs() > total {
            h = t1 - t;
        }
        let mut k = [RayDeriv::default(); 7];
        k[0] = rhs(&st);
        for i in 0..6 {
            let stage = st.axpy(h, &k[..=i], &A[i][..=i]);
            k[i + 1] = rhs(&stage);
        }
        let y5 = st.axpy(h, &k, &B5);
        let y4 = st.axpy(h, &k, &B4);

        let mut err: f64 = 0.0;
        for d in 0..3 {
            let sc_x = ctrl.abs_tol + ctrl.rel_tol * y5.x[d].abs().max(st.x[d].abs());
            let sc_xi = ctrl.abs_tol + ctrl.rel_tol * y5.xi[d].abs().max(st.xi[d].abs());
            err = err.max(((y5.x[d] - y4.x[d]) / sc_x).abs());
            err = err.max(((y5.xi[d] - y4.xi[d]) / sc_xi).abs());
        }
        if !err.is_finite() {
            return Err(Error::numeric("ray integrator produced non-finite state"));
        }

        if err <= 1.0 {
            st = y5;
            t += h;
            let res = residual_at(&st);
            stats.accepted += 1;
            stats.max_hamiltonian_residual = stats.max_hamiltonian_residual.max(res);
            samples.push(RaySample {
                s: t - t0,
                t,
                x: st.x,
                tau,
                xi: st.xi,
                hamiltonian_residual: res,
            });
            if !inside(&st.x) {
                return Err(Error::ExitedDomain {
                    t,
                    x: [st.x[0], st.x[1], st.x[2]],
                });
            }
        } else {
            stats.rejected += 1;
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).clamp(-ctrl.max_step, ctrl.max_step);
        if h.abs() < 1e-15 * total {
            return Err(Error::numeric("ray integrator step underflow (stiff region)"));
        }
    }

    Ok(RayPath {
        mode,
        samples,
        stats,
    })
}
