//! Desk-scale pseudospectral solver for the full quasilinear elastodynamic
//! system on a periodic square, used to observe the predicted two-wave
//! interactions.
//!
//! Fields carry three displacement components on the 2-D grid: the in-plane
//! pair hosts P and the in-plane S polarization, the out-of-plane component
//! hosts the SV polarization (the interaction plane is the grid plane).
//! Purely in-plane initial data keeps u₃ ≡ 0 exactly.
//!
//! One step is a velocity-Verlet (kick–drift–kick) update of
//! ∂²u/∂t² = ∇·S(x, u) with the stress-like tensor assembled pointwise from
//! spectrally evaluated gradients; products are protected by the 2/3-rule
//! dealias mask. The trailing force evaluation is reused as the next step's
//! leading kick, so a step costs one force evaluation.

pub mod experiment;
pub mod spectral;

use crate::error::{Error, Result};
use crate::kinematics::WaveMode;
use crate::medium::{MaterialPoint, MediumField};
use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spectral::Spectral;

pub use experiment::{run_interaction_experiment, ExperimentConfig, ExperimentReport};

/// Toggle between the full quasilinear system and its linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonlinearity {
    Full,
    LinearOnly,
}

/// Grid geometry and step size of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Cells per axis (square grid).
    pub n: usize,
    /// Domain edge length; dx = length/n.
    pub length: f64,
    pub dt: f64,
}

/// Displacement/velocity state on the grid.
#[derive(Debug, Clone)]
pub struct SimGrid {
    pub params: SimParams,
    pub t: f64,
    pub step: u64,
    pub u: [Vec<f64>; 3],
    pub v: [Vec<f64>; 3],
}

impl SimGrid {
    pub fn zeros(params: SimParams) -> Self {
        let nn = params.n * params.n;
        SimGrid {
            params,
            t: 0.0,
            step: 0,
            u: [vec![0.0; nn], vec![0.0; nn], vec![0.0; nn]],
            v: [vec![0.0; nn], vec![0.0; nn], vec![0.0; nn]],
        }
    }

    fn max_abs(&self) -> f64 {
        let m = |f: &Vec<f64>| f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.u.iter().chain(self.v.iter()).map(m).fold(0.0, f64::max)
    }
}

/// Medium parameters sampled on the grid (uniform fast path for
/// homogeneous media).
#[derive(Debug, Clone)]
enum MediumOnGrid {
    Uniform(MaterialPoint),
    Fields(Box<[Vec<f64>; 5]>),
}

impl MediumOnGrid {
    fn c2_p_max(&self) -> f64 {
        match self {
            MediumOnGrid::Uniform(p) => p.c2_p(),
            MediumOnGrid::Fields(ch) => ch[0]
                .iter()
                .zip(&ch[1])
                .fold(0.0f64, |a, (l, m)| a.max(l + 2.0 * m)),
        }
    }
}

/// Verlet stability bound dt·ω_max ≤ 2 with ω_max = c_P·k_max surviving the
/// dealias mask.
pub fn max_stable_dt(n: usize, length: f64, medium_c2p_max: f64) -> f64 {
    let spec = Spectral::new([n, n], length);
    2.0 / (medium_c2p_max.sqrt() * spec.k_max_dealiased)
}

pub struct Solver {
    pub spec: Spectral,
    med: MediumOnGrid,
    pub nonlinearity: Nonlinearity,
    /// When false, the out-of-plane component is skipped entirely
    /// (in-plane initial data keeps it zero).
    pub three_comp: bool,
    /// Blow-up guard on max |u|, |v|.
    pub blow_up_limit: f64,
    cached_force: Option<(u64, [Vec<f64>; 3])>,
    buf: Buffers,
}

#[derive(Default)]
struct Buffers {
    spec_u: [Vec<Complex64>; 3],
    sa: Vec<Complex64>,
    sb: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    d: [[Vec<f64>; 2]; 3],
    e: [Vec<f64>; 5], // e11 e12 e22 e13 e23
    tr: Vec<f64>,
    ee: Vec<f64>,
    s: [[Vec<f64>; 2]; 3],
    fhat: [Vec<Complex64>; 3],
}

impl Solver {
    pub fn new(
        params: &SimParams,
        medium: &MediumField,
        nonlinearity: Nonlinearity,
        three_comp: bool,
    ) -> Result<Self> {
        if params.n < 8 || !params.n.is_multiple_of(2) {
            return Err(Error::validation("grid n must be even and ≥ 8"));
        }
        let spec = Spectral::new([params.n, params.n], params.length);
        let med = if medium.is_homogeneous() {
            let p = medium.sample_checked(&Vector3::zeros())?;
            MediumOnGrid::Uniform(p)
        } else {
            let nn = params.n * params.n;
            let dx = params.length / params.n as f64;
            let mut ch: [Vec<f64>; 5] = Default::default();
            for c in ch.iter_mut() {
                c.reserve(nn);
            }
            for i0 in 0..params.n {
                for i1 in 0..params.n {
                    let x = Vector3::new(i0 as f64 * dx, i1 as f64 * dx, 0.0);
                    let p = medium.sample_checked(&x)?;
                    ch[0].push(p.lambda);
                    ch[1].push(p.mu);
                    ch[2].push(p.a_landau);
                    ch[3].push(p.b_landau);
                    ch[4].push(p.c_landau);
                }
            }
            MediumOnGrid::Fields(Box::new(ch))
        };
        let dt_max = 2.0 / (med.c2_p_max().sqrt() * spec.k_max_dealiased);
        if params.dt <= 0.0 || params.dt > dt_max {
            return Err(Error::validation(format!(
                "dt = {} violates the stability bound {dt_max:.6e}",
                params.dt
            )));
        }
        Ok(Solver {
            spec,
            med,
            nonlinearity,
            three_comp,
            blow_up_limit: 1e6,
            cached_force: None,
            buf: Buffers::default(),
        })
    }

    pub fn uniform_material(&self) -> Option<MaterialPoint> {
        match &self.med {
            MediumOnGrid::Uniform(p) => Some(*p),
            MediumOnGrid::Fields(_) => None,
        }
    }

    /// Spectrally evaluated gradients d[m][n] = ∂u_m/∂x_n of the (dealiased)
    /// displacement field.
    fn gradients(&mut self, u: &[Vec<f64>; 3]) {
        let nn = self.spec.cells();
        let b = &mut self.buf;
        {
            let (su0, rest) = b.spec_u.split_at_mut(1);
            self.spec.forward_pair(
                &u[0],
                &u[1],
                &mut su0[0],
                &mut rest[0],
                &mut b.work,
                &mut b.scratch,
            );
        }
        self.spec.apply_dealias(&mut b.spec_u[0]);
        self.spec.apply_dealias(&mut b.spec_u[1]);
        if self.three_comp {
            self.spec.forward_real(&u[2], &mut b.spec_u[2], &mut b.scratch);
            self.spec.apply_dealias(&mut b.spec_u[2]);
        }
        let mrange = if self.three_comp { 3 } else { 2 };
        for m in 0..mrange {
            self.spec.derivative_spectrum(&b.spec_u[m], 0, &mut b.sa);
            self.spec.derivative_spectrum(&b.spec_u[m], 1, &mut b.sb);
            b.d[m][0].resize(nn, 0.0);
            b.d[m][1].resize(nn, 0.0);
            let (d0, d1) = {
                let (l, r) = b.d[m].split_at_mut(1);
                (&mut l[0], &mut r[0])
            };
            self.spec
                .inverse_pair(&b.sa, &b.sb, d0, d1, &mut b.work, &mut b.scratch);
        }
        if !self.three_comp {
            b.d[2][0].resize(nn, 0.0);
            b.d[2][1].resize(nn, 0.0);
            b.d[2][0].fill(0.0);
            b.d[2][1].fill(0.0);
        }
    }

    /// Assemble the stress-like rows S_mn (n ∈ {1,2}) pointwise.
    fn stress(&mut self) {
        let nn = self.spec.cells();
        let full = self.nonlinearity == Nonlinearity::Full;
        let b = &mut self.buf;

        for e in b.e.iter_mut() {
            e.resize(nn, 0.0);
        }
        b.tr.resize(nn, 0.0);
        b.ee.resize(nn, 0.0);
        for m in 0..3 {
            for n in 0..2 {
                b.s[m][n].resize(nn, 0.0);
            }
        }

        let d00 = &b.d[0][0];
        let d01 = &b.d[0][1];
        let d10 = &b.d[1][0];
        let d11 = &b.d[1][1];
        let d20 = &b.d[2][0];
        let d21 = &b.d[2][1];

        macro_rules! pw {
            ($out:expr, $f:expr) => {
                $out.par_iter_mut().enumerate().for_each(|(i, o)| *o = $f(i))
            };
        }

        // strain (linear part or with the quadratic correction)
        {
            let (e_part, _) = b.e.split_at_mut(5);
            let (e11s, rest) = e_part.split_at_mut(1);
            let (e12s, rest) = rest.split_at_mut(1);
            let (e22s, rest) = rest.split_at_mut(1);
            let (e13s, e23s) = rest.split_at_mut(1);
            if full {
                pw!(e11s[0], |i: usize| d00[i]
                    + 0.5 * (d00[i] * d00[i] + d10[i] * d10[i] + d20[i] * d20[i]));
                pw!(e12s[0], |i: usize| 0.5
                    * (d01[i] + d10[i] + d00[i] * d01[i] + d10[i] * d11[i] + d20[i] * d21[i]));
                pw!(e22s[0], |i: usize| d11[i]
                    + 0.5 * (d01[i] * d01[i] + d11[i] * d11[i] + d21[i] * d21[i]));
            } else {
                pw!(e11s[0], |i: usize| d00[i]);
                pw!(e12s[0], |i: usize| 0.5 * (d01[i] + d10[i]));
                pw!(e22s[0], |i: usize| d11[i]);
            }
            pw!(e13s[0], |i: usize| 0.5 * d20[i]);
            pw!(e23s[0], |i: usize| 0.5 * d21[i]);
        }

        let e11 = &b.e[0];
        let e12 = &b.e[1];
        let e22 = &b.e[2];
        let e13 = &b.e[3];
        let e23 = &b.e[4];
        pw!(b.tr, |i: usize| e11[i] + e22[i]);
        let tr = &b.tr;
        pw!(b.ee, |i: usize| e11[i] * e11[i]
            + e22[i] * e22[i]
            + 2.0 * (e12[i] * e12[i] + e13[i] * e13[i] + e23[i] * e23[i]));
        let ee = &b.ee;

        let med = &self.med;
        let mat = |i: usize| -> (f64, f64, f64, f64, f64) {
            match med {
                MediumOnGrid::Uniform(p) => (p.lambda, p.mu, p.a_landau, p.b_landau, p.c_landau),
                MediumOnGrid::Fields(ch) => (ch[0][i], ch[1][i], ch[2][i], ch[3][i], ch[4][i]),
            }
        };

        let (s0, srest) = b.s.split_at_mut(1);
        let (s1, s2) = srest.split_at_mut(1);
        let (s00, s01) = {
            let (l, r) = s0[0].split_at_mut(1);
            (&mut l[0], &mut r[0])
        };
        let (s10, s11) = {
            let (l, r) = s1[0].split_at_mut(1);
            (&mut l[0], &mut r[0])
        };
        let (s20, s21) = {
            let (l, r) = s2[0].split_at_mut(1);
            (&mut l[0], &mut r[0])
        };

        if full {
            pw!(s00, |i: usize| {
                let (lam, mu, a, bb, c) = mat(i);
                lam * tr[i] * (1.0 + d00[i])
                    + 2.0 * mu * (e11[i] + e11[i] * d00[i] + e12[i] * d01[i])
                    + a * (e11[i] * e11[i] + e12[i] * e12[i] + e13[i] * e13[i])
                    + bb * (2.0 * tr[i] * e11[i] + ee[i])
                    + c * tr[i] * tr[i]
            });
            pw!(s01, |i: usize| {
                let (lam, mu, a, bb, _) = mat(i);
                lam * tr[i] * d01[i]
                    + 2.0 * mu * (e12[i] + e12[i] * d00[i] + e22[i] * d01[i])
                    + a * (e11[i] * e12[i] + e12[i] * e22[i] + e13[i] * e23[i])
                    + bb * 2.0 * tr[i] * e12[i]
            });
            pw!(s10, |i: usize| {
                let (lam, mu, a, bb, _) = mat(i);
                lam * tr[i] * d10[i]
                    + 2.0 * mu * (e12[i] + e11[i] * d10[i] + e12[i] * d11[i])
                    + a * (e11[i] * e12[i] + e12[i] * e22[i] + e13[i] * e23[i])
                    + bb * 2.0 * tr[i] * e12[i]
            });
            pw!(s11, |i: usize| {
                let (lam, mu, a, bb, c) = mat(i);
                lam * tr[i] * (1.0 + d11[i])
                    + 2.0 * mu * (e22[i] + e12[i] * d10[i] + e22[i] * d11[i])
                    + a * (e12[i] * e12[i] + e22[i] * e22[i] + e23[i] * e23[i])
                    + bb * (2.0 * tr[i] * e22[i] + ee[i])
                    + c * tr[i] * tr[i]
            });
            if self.three_comp {
                pw!(s20, |i: usize| {
                    let (lam, mu, a, bb, _) = mat(i);
                    lam * tr[i] * d20[i]
                        + 2.0 * mu * (e13[i] + e11[i] * d20[i] + e12[i] * d21[i])
                        + a * (e13[i] * e11[i] + e23[i] * e12[i])
                        + bb * 2.0 * tr[i] * e13[i]
                });
                pw!(s21, |i: usize| {
                    let (lam, mu, a, bb, _) = mat(i);
                    lam * tr[i] * d21[i]
                        + 2.0 * mu * (e23[i] + e12[i] * d20[i] + e22[i] * d21[i])
                        + a * (e13[i] * e12[i] + e23[i] * e22[i])
                        + bb * 2.0 * tr[i] * e23[i]
                });
            }
        } else {
            pw!(s00, |i: usize| {
                let (lam, mu, ..) = mat(i);
                lam * tr[i] + 2.0 * mu * e11[i]
            });
            pw!(s01, |i: usize| {
                let (_, mu, ..) = mat(i);
                2.0 * mu * e12[i]
            });
            pw!(s10, |i: usize| {
                let (_, mu, ..) = mat(i);
                2.0 * mu * e12[i]
            });
            pw!(s11, |i: usize| {
                let (lam, mu, ..) = mat(i);
                lam * tr[i] + 2.0 * mu * e22[i]
            });
            if self.three_comp {
                pw!(s20, |i: usize| {
                    let (_, mu, ..) = mat(i);
                    2.0 * mu * e13[i]
                });
                pw!(s21, |i: usize| {
                    let (_, mu, ..) = mat(i);
                    2.0 * mu * e23[i]
                });
            }
        }
    }

    /// ∇·S evaluated spectrally from the assembled stress rows.
    fn divergence(&mut self, out: &mut [Vec<f64>; 3]) {
        let nn = self.spec.cells();
        let b = &mut self.buf;
        let mrange = if self.three_comp { 3 } else { 2 };
        for m in 0..mrange {
            let (sm0, sm1) = {
                let (l, r) = b.s[m].split_at(1);
                (&l[0], &r[0])
            };
            self.spec
                .forward_pair(sm0, sm1, &mut b.sa, &mut b.sb, &mut b.work, &mut b.scratch);
            b.fhat[m].resize(nn, Complex64::new(0.0, 0.0));
            let n1 = self.spec.n[1];
            let k0 = &self.spec.k[0];
            let k1 = &self.spec.k[1];
            let (sa, sb) = (&b.sa, &b.sb);
            b.fhat[m]
                .par_chunks_mut(n1)
                .enumerate()
                .for_each(|(i0, row)| {
                    for (i1, o) in row.iter_mut().enumerate() {
                        let idx = i0 * n1 + i1;
                        *o = Complex64::new(0.0, k0[i0]) * sa[idx]
                            + Complex64::new(0.0, k1[i1]) * sb[idx];
                    }
                });
            self.spec.apply_dealias(&mut b.fhat[m]);
        }
        for f in out.iter_mut() {
            f.resize(nn, 0.0);
        }
        {
            let (f0, rest) = out.split_at_mut(1);
            self.spec.inverse_pair(
                &b.fhat[0],
                &b.fhat[1],
                &mut f0[0],
                &mut rest[0],
                &mut b.work,
                &mut b.scratch,
            );
        }
        if self.three_comp {
            self.spec
                .inverse_real(&b.fhat[2], &mut out[2], &mut b.work, &mut b.scratch);
        } else {
            out[2].fill(0.0);
        }
    }

    /// One force evaluation f = ∇·S(x, u).
    pub fn force(&mut self, u: &[Vec<f64>; 3], out: &mut [Vec<f64>; 3]) {
        self.gradients(u);
        self.stress();
        self.divergence(out);
    }

    /// Advance one velocity-Verlet step. Aborts with a diagnostic on
    /// blow-up (expected for amplitudes outside the small-data regime).
    pub fn step(&mut self, state: &mut SimGrid) -> Result<()> {
        let dt = state.params.dt;
        let nn = self.spec.cells();
        let mut f_old = match self.cached_force.take() {
            Some((step, f)) if step == state.step => f,
            _ => {
                let mut f: [Vec<f64>; 3] = Default::default();
                for c in f.iter_mut() {
                    c.resize(nn, 0.0);
                }
                self.force(&state.u, &mut f);
                f
            }
        };
        let half = 0.5 * dt;
        for (vc, (uc, fc)) in state.v.iter_mut().zip(state.u.iter_mut().zip(f_old.iter())) {
            vc.par_iter_mut()
                .zip(fc.par_iter())
                .for_each(|(v, f)| *v += half * f);
            uc.par_iter_mut()
                .zip(vc.par_iter())
                .for_each(|(u, v)| *u += dt * v);
        }
        {
            let u_now = state.u.clone();
            self.force(&u_now, &mut f_old);
        }
        for (vc, fc) in state.v.iter_mut().zip(f_old.iter()) {
            vc.par_iter_mut()
                .zip(fc.par_iter())
                .for_each(|(v, f)| *v += half * f);
        }
        state.t += dt;
        state.step += 1;
        self.cached_force = Some((state.step, f_old));

        let m = state.max_abs();
        if !m.is_finite() || m > self.blow_up_limit {
            return Err(Error::numeric(format!(
                "solution blow-up at t = {:.6} (max field {m:.3e}); amplitude outside the small-data regime",
                state.t
            )));
        }
        Ok(())
    }

    /// Discrete energy of the linearized system,
    /// ∑ [½|v|² + ½λ tr(ẽ)² + μ ẽ:ẽ] dA.
    pub fn linear_energy(&mut self, state: &SimGrid) -> f64 {
        self.gradients(&state.u);
        let b = &self.buf;
        let d = &b.d;
        let nn = self.spec.cells();
        let da = (state.params.length / state.params.n as f64).powi(2);
        let med = &self.med;
        (0..nn)
            .into_par_iter()
            .map(|i| {
                let (lam, mu) = match med {
                    MediumOnGrid::Uniform(p) => (p.lambda, p.mu),
                    MediumOnGrid::Fields(ch) => (ch[0][i], ch[1][i]),
                };
                let e11 = d[0][0][i];
                let e22 = d[1][1][i];
                let e12 = 0.5 * (d[0][1][i] + d[1][0][i]);
                let e13 = 0.5 * d[2][0][i];
                let e23 = 0.5 * d[2][1][i];
                let tr = e11 + e22;
                let kin = 0.5
                    * (state.v[0][i] * state.v[0][i]
                        + state.v[1][i] * state.v[1][i]
                        + state.v[2][i] * state.v[2][i]);
                let pot = 0.5 * lam * tr * tr
                    + mu * (e11 * e11 + e22 * e22 + 2.0 * (e12 * e12 + e13 * e13 + e23 * e23));
                (kin + pot) * da
            })
            .sum()
    }
}

/// Free-function form of the stepper (one step of the chosen system).
pub fn step_nonlinear(solver: &mut Solver, state: &mut SimGrid) -> Result<()> {
    solver.step(state)
}

/// Polarization of a wave-packet source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketMode {
    /// Compressional, in-plane, polarization ∥ k.
    P,
    /// In-plane shear (the interaction-plane SH), polarization ⟂ k in-plane.
    Sh,
    /// Out-of-plane shear (SV), polarization along ê₃.
    Sv,
}

impl PacketMode {
    pub fn wave_mode(&self) -> WaveMode {
        match self {
            PacketMode::P => WaveMode::P,
            _ => WaveMode::S,
        }
    }
}

/// A Gaussian-envelope narrow-band packet with prescribed lattice
/// wavevector, mode and displacement amplitude ε. Spectral projection makes
/// the polarization exact, and the one-sided initial velocity makes it
/// unidirectional in a homogeneous medium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketSource {
    pub center: [f64; 2],
    /// Integer lattice wavevector (units 2π/length).
    pub k: [i64; 2],
    /// Envelope width along the propagation direction.
    pub width_par: f64,
    /// Envelope width across it.
    pub width_perp: f64,
    pub mode: PacketMode,
    /// Displacement amplitude ε.
    pub amplitude: f64,
}

impl PacketSource {
    pub fn k_phys(&self, length: f64) -> [f64; 2] {
        let b = 2.0 * std::f64::consts::PI / length;
        [b * self.k[0] as f64, b * self.k[1] as f64]
    }

    pub fn direction(&self) -> [f64; 2] {
        let n = ((self.k[0] * self.k[0] + self.k[1] * self.k[1]) as f64).sqrt();
        [self.k[0] as f64 / n, self.k[1] as f64 / n]
    }

    /// Resolution and geometry checks against a grid.
    pub fn validate(&self, spec: &Spectral) -> Result<()> {
        if self.k == [0, 0] {
            return Err(Error::validation("packet wavevector must be nonzero"));
        }
        if self.width_par <= 0.0 || self.width_perp <= 0.0 {
            return Err(Error::validation("packet widths must be positive"));
        }
        if !self.width_par.is_finite() && !self.width_perp.is_finite() {
            return Err(Error::validation("at least one packet width must be finite"));
        }
        if self.amplitude < 0.0 {
            return Err(Error::validation("packet amplitude must be ≥ 0"));
        }
        let kp = self.k_phys(spec.length);
        let k0 = (kp[0] * kp[0] + kp[1] * kp[1]).sqrt();
        if k0 * spec.dx() >= std::f64::consts::FRAC_PI_4 {
            return Err(Error::validation(format!(
                "under-resolved packet: k0·dx = {:.3} ≥ π/4",
                k0 * spec.dx()
            )));
        }
        let w_min = self.width_par.min(self.width_perp);
        if k0 + 3.0 / w_min > spec.k_max_dealiased {
            return Err(Error::validation(
                "packet spectrum reaches the dealiasing cutoff",
            ));
        }
        // an infinite width means a slab (plane-wave extent across the
        // domain), exempt from the envelope-support check
        let w_max = self.width_par.max(self.width_perp);
        if w_max.is_finite() && 4.0 * w_max > 0.5 * spec.length {
            return Err(Error::validation(
                "packet envelope not well inside the domain",
            ));
        }
        Ok(())
    }
}

fn wrap_half(d: f64, length: f64) -> f64 {
    let mut r = d % length;
    if r > 0.5 * length {
        r -= length;
    }
    if r < -0.5 * length {
        r += length;
    }
    r
}

/// Superpose a packet onto the state. The medium point at the packet center
/// sets the mode speed for the one-sided velocity (exact for homogeneous
/// media, where all experiments run).
pub fn add_packet(
    state: &mut SimGrid,
    spec: &Spectral,
    p: &MaterialPoint,
    src: &PacketSource,
) -> Result<()> {
    src.validate(spec)?;
    let n = state.params.n;
    let length = state.params.length;
    let dx = spec.dx();
    let kp = src.k_phys(length);
    let dir = src.direction();
    let perp = [-dir[1], dir[0]];
    let c_mode = p.c2(src.mode.wave_mode()).sqrt();

    // scalar carrier × envelope
    let mut zeta = vec![0.0; n * n];
    zeta.par_chunks_mut(n).enumerate().for_each(|(i0, row)| {
        let x0 = i0 as f64 * dx;
        for (i1, z) in row.iter_mut().enumerate() {
            let x1 = i1 as f64 * dx;
            let r0 = wrap_half(x0 - src.center[0], length);
            let r1 = wrap_half(x1 - src.center[1], length);
            let rp = r0 * dir[0] + r1 * dir[1];
            let rq = r0 * perp[0] + r1 * perp[1];
            let env = (-0.5
                * (rp * rp / (src.width_par * src.width_par)
                    + rq * rq / (src.width_perp * src.width_perp)))
                .exp();
            let phase = kp[0] * r0 + kp[1] * r1;
            *z = src.amplitude * env * phase.cos();
        }
    });

    let mut scratch = Vec::new();
    let mut work = Vec::new();
    match src.mode {
        PacketMode::Sv => {
            let mut zh = Vec::new();
            spec.forward_real(&zeta, &mut zh, &mut scratch);
            spec.apply_dealias(&mut zh);
            let mut vh = one_sided_velocity(spec, &zh, c_mode, dir);
            spec.apply_dealias(&mut vh);
            let mut tmp = vec![0.0; n * n];
            spec.inverse_real(&zh, &mut tmp, &mut work, &mut scratch);
            state.u[2]
                .par_iter_mut()
                .zip(tmp.par_iter())
                .for_each(|(a, b)| *a += b);
            spec.inverse_real(&vh, &mut tmp, &mut work, &mut scratch);
            state.v[2]
                .par_iter_mut()
                .zip(tmp.par_iter())
                .for_each(|(a, b)| *a += b);
        }
        PacketMode::P | PacketMode::Sh => {
            // seed polarization, then project onto the exact mode subspace
            let pol = if src.mode == PacketMode::P { dir } else { perp };
            let w0: Vec<f64> = zeta.par_iter().map(|z| z * pol[0]).collect();
            let w1: Vec<f64> = zeta.par_iter().map(|z| z * pol[1]).collect();
            let (mut s0, mut s1) = (Vec::new(), Vec::new());
            spec.forward_pair(&w0, &w1, &mut s0, &mut s1, &mut work, &mut scratch);
            spec.apply_dealias(&mut s0);
            spec.apply_dealias(&mut s1);
            let n1 = spec.n[1];
            let (k0t, k1t) = (&spec.k[0], &spec.k[1]);
            let want_p = src.mode == PacketMode::P;
            s0.par_chunks_mut(n1)
                .zip(s1.par_chunks_mut(n1))
                .enumerate()
                .for_each(|(i0, (r0, r1))| {
                    for i1 in 0..n1 {
                        let (ka, kb) = (k0t[i0], k1t[i1]);
                        let kk = ka * ka + kb * kb;
                        if kk == 0.0 {
                            r0[i1] = Complex64::new(0.0, 0.0);
                            r1[i1] = Complex64::new(0.0, 0.0);
                            continue;
                        }
                        let dotp = (r0[i1] * ka + r1[i1] * kb) / kk;
                        let (p0, p1) = (dotp * ka, dotp * kb);
                        if want_p {
                            r0[i1] = p0;
                            r1[i1] = p1;
                        } else {
                            r0[i1] -= p0;
                            r1[i1] -= p1;
                        }
                    }
                });
            let v0h = one_sided_velocity(spec, &s0, c_mode, dir);
            let v1h = one_sided_velocity(spec, &s1, c_mode, dir);
            let mut t0 = vec![0.0; n * n];
            let mut t1 = vec![0.0; n * n];
            spec.inverse_pair(&s0, &s1, &mut t0, &mut t1, &mut work, &mut scratch);
            state.u[0]
                .par_iter_mut()
                .zip(t0.par_iter())
                .for_each(|(a, b)| *a += b);
            state.u[1]
                .par_iter_mut()
                .zip(t1.par_iter())
                .for_each(|(a, b)| *a += b);
            spec.inverse_pair(&v0h, &v1h, &mut t0, &mut t1, &mut work, &mut scratch);
            state.v[0]
                .par_iter_mut()
                .zip(t0.par_iter())
                .for_each(|(a, b)| *a += b);
            state.v[1]
                .par_iter_mut()
                .zip(t1.par_iter())
                .for_each(|(a, b)| *a += b);
        }
    }
    Ok(())
}

/// v̂(k) = −i·c|k|·sgn(k·dir)·û(k): forward-propagating single-sided wave.
fn one_sided_velocity(spec: &Spectral, uh: &[Complex64], c: f64, dir: [f64; 2]) -> Vec<Complex64> {
    let n1 = spec.n[1];
    let mut out = vec![Complex64::new(0.0, 0.0); uh.len()];
    out.par_chunks_mut(n1).enumerate().for_each(|(i0, row)| {
        for (i1, o) in row.iter_mut().enumerate() {
            let (ka, kb) = (spec.k[0][i0], spec.k[1][i1]);
            let kn = (ka * ka + kb * kb).sqrt();
            let sgn = (ka * dir[0] + kb * dir[1]).signum();
            if kn > 0.0 {
                *o = Complex64::new(0.0, -c * kn * sgn) * uh[i0 * n1 + i1];
            }
        }
    });
    out
}

/// Box window with periodic wrap used to isolate a wavefront before
/// measuring.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    pub center: [f64; 2],
    pub halfwidth: [f64; 2],
}

impl Window {
    fn mask(&self, spec: &Spectral) -> Result<Vec<f64>> {
        if self.halfwidth[0] <= 0.0 || self.halfwidth[1] <= 0.0 {
            return Err(Error::validation("empty window"));
        }
        let n = spec.n[0];
        let dx = spec.dx();
        let mut m = vec![0.0; spec.cells()];
        let mut count = 0usize;
        for i0 in 0..n {
            for i1 in 0..n {
                let r0 = wrap_half(i0 as f64 * dx - self.center[0], spec.length);
                let r1 = wrap_half(i1 as f64 * dx - self.center[1], spec.length);
                if r0.abs() <= self.halfwidth[0] && r1.abs() <= self.halfwidth[1] {
                    m[i0 * n + i1] = 1.0;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::validation("empty window"));
        }
        Ok(m)
    }
}

fn windowed<'a>(
    fields: &'a [Vec<f64>; 3],
    spec: &Spectral,
    window: Option<&Window>,
    storage: &'a mut Option<[Vec<f64>; 3]>,
) -> Result<&'a [Vec<f64>; 3]> {
    match window {
        None => Ok(fields),
        Some(w) => {
            let m = w.mask(spec)?;
            let apply = |f: &Vec<f64>| -> Vec<f64> {
                f.par_iter().zip(m.par_iter()).map(|(v, mm)| v * mm).collect()
            };
            *storage = Some([apply(&fields[0]), apply(&fields[1]), apply(&fields[2])]);
            Ok(storage.as_ref().unwrap())
        }
    }
}

/// Complex one-sided amplitude of the requested polarization at a lattice
/// wavevector: a real plane wave a·p̂·cos(k·x + φ) reports a·e^{iφ}.
pub fn measure_mode_amplitude(
    fields: &[Vec<f64>; 3],
    spec: &Spectral,
    k: [i64; 2],
    mode: PacketMode,
    window: Option<&Window>,
) -> Result<Complex64> {
    let mut storage = None;
    let use_fields = windowed(fields, spec, window, &mut storage)?;
    let mut scratch = Vec::new();
    let idx = spec.index_of_lattice(k);
    let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
    if kn == 0.0 {
        return Err(Error::validation("zero wavevector"));
    }
    let dir = [k[0] as f64 / kn, k[1] as f64 / kn];
    let amp = match mode {
        PacketMode::Sv => {
            let mut s = Vec::new();
            spec.forward_real(&use_fields[2], &mut s, &mut scratch);
            s[idx]
        }
        PacketMode::P | PacketMode::Sh => {
            let (mut s0, mut s1, mut work) = (Vec::new(), Vec::new(), Vec::new());
            spec.forward_pair(
                &use_fields[0],
                &use_fields[1],
                &mut s0,
                &mut s1,
                &mut work,
                &mut scratch,
            );
            if mode == PacketMode::P {
                s0[idx] * dir[0] + s1[idx] * dir[1]
            } else {
                s0[idx] * (-dir[1]) + s1[idx] * dir[0]
            }
        }
    };
    Ok(amp * 2.0)
}

/// Lattice location of the strongest spectral content, searched over the
/// dealiased band; ±k pairs fold to the representative with k·hint ≥ 0.
pub fn spectral_peak(
    fields: &[Vec<f64>; 3],
    spec: &Spectral,
    window: Option<&Window>,
    hint: [f64; 2],
) -> Result<[i64; 2]> {
    let mut storage = None;
    let use_fields = windowed(fields, spec, window, &mut storage)?;
    let (mut s0, mut s1, mut s2, mut work, mut scratch) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    spec.forward_pair(
        &use_fields[0],
        &use_fields[1],
        &mut s0,
        &mut s1,
        &mut work,
        &mut scratch,
    );
    spec.forward_real(&use_fields[2], &mut s2, &mut scratch);
    let n = spec.n[0];
    let mut best = (0.0f64, [0i64; 2]);
    for i0 in 0..n {
        let v0 = if i0 <= n / 2 { i0 as i64 } else { i0 as i64 - n as i64 };
        for i1 in 0..n {
            let v1 = if i1 <= n / 2 { i1 as i64 } else { i1 as i64 - n as i64 };
            let idx = i0 * n + i1;
            if spec.dealias[idx] == 0.0 || (v0 == 0 && v1 == 0) {
                continue;
            }
            let mag = s0[idx].norm_sqr() + s1[idx].norm_sqr() + s2[idx].norm_sqr();
            if mag > best.0 {
                let dot = v0 as f64 * hint[0] + v1 as f64 * hint[1];
                let kk = if dot >= 0.0 { [v0, v1] } else { [-v0, -v1] };
                best = (mag, kk);
            }
        }
    }
    Ok(best.1)
}

/// Time-sampled displacement snapshots with run metadata.
#[derive(Debug, Clone)]
pub struct WavefieldRecord {
    pub params: SimParams,
    pub medium: MaterialPoint,
    pub nonlinearity: Nonlinearity,
    pub eps: [f64; 2],
    pub sources: Vec<PacketSource>,
    pub times: Vec<f64>,
    pub snapshots: Vec<[Vec<f64>; 3]>,
}

impl WavefieldRecord {
    fn compatible(&self, other: &WavefieldRecord) -> bool {
        self.params == other.params
            && self.medium == other.medium
            && self.nonlinearity == other.nonlinearity
            && self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() < 1e-12)
    }
}

/// Run one simulation from the given initial state, snapshotting at the
/// requested times (snapped to whole steps).
pub fn run_recorded(
    solver: &mut Solver,
    mut state: SimGrid,
    medium: MaterialPoint,
    eps: [f64; 2],
    sources: &[PacketSource],
    record_times: &[f64],
) -> Result<WavefieldRecord> {
    if record_times.is_empty() {
        return Err(Error::validation("no record times"));
    }
    let dt = state.params.dt;
    let mut record_steps: Vec<u64> = record_times
        .iter()
        .map(|t| (t / dt).round().max(0.0) as u64)
        .collect();
    record_steps.sort_unstable();
    record_steps.dedup();
    let mut rec = WavefieldRecord {
        params: state.params,
        medium,
        nonlinearity: solver.nonlinearity,
        eps,
        sources: sources.to_vec(),
        times: Vec::new(),
        snapshots: Vec::new(),
    };
    solver.cached_force = None;
    for s in record_steps {
        while state.step < s {
            solver.step(&mut state)?;
        }
        rec.times.push(state.t);
        rec.snapshots.push(state.u.clone());
    }
    Ok(rec)
}

/// The second-order bilinear response
/// u⁽¹²⁾ ≈ (u_{ε₁f₁+ε₂f₂} − u_{ε₁f₁} − u_{ε₂f₂})/(ε₁ε₂); the
/// self-interaction terms cancel in this combination and the residual is
/// O(ε).
pub fn extract_bilinear_response(
    run12: &WavefieldRecord,
    run1: &WavefieldRecord,
    run2: &WavefieldRecord,
) -> Result<WavefieldRecord> {
    if !run12.compatible(run1) || !run12.compatible(run2) {
        return Err(Error::validation(
            "bilinear extraction needs runs with identical grid, medium and times",
        ));
    }
    let (e1, e2) = (run12.eps[0], run12.eps[1]);
    if e1 == 0.0 || e2 == 0.0 {
        return Err(Error::validation("bilinear extraction needs ε₁, ε₂ > 0"));
    }
    let inv = 1.0 / (e1 * e2);
    let mut out = WavefieldRecord {
        params: run12.params,
        medium: run12.medium,
        nonlinearity: run12.nonlinearity,
        eps: run12.eps,
        sources: run12.sources.clone(),
        times: run12.times.clone(),
        snapshots: Vec::with_capacity(run12.snapshots.len()),
    };
    for ((s12, s1), s2) in run12
        .snapshots
        .iter()
        .zip(&run1.snapshots)
        .zip(&run2.snapshots)
    {
        let mut snap: [Vec<f64>; 3] = Default::default();
        for c in 0..3 {
            snap[c] = s12[c]
                .par_iter()
                .zip(s1[c].par_iter().zip(s2[c].par_iter()))
                .map(|(a, (b, d))| (a - b - d) * inv)
                .collect();
        }
        out.snapshots.push(snap);
    }
    Ok(out)
}

/// L2 norm over all components of one snapshot.
pub fn snapshot_norm(snap: &[Vec<f64>; 3], params: &SimParams) -> f64 {
    let da = (params.length / params.n as f64).powi(2);
    let s: f64 = snap
        .iter()
        .map(|f| f.par_iter().map(|v| v * v).sum::<f64>())
        .sum();
    (s * da).sqrt()
}

/// Export one snapshot as flat binary component files plus a JSON sidecar.
pub fn export_snapshot(
    dir: &std::path::Path,
    rec: &WavefieldRecord,
    index: usize,
    tag: &str,
) -> Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let snap = rec
        .snapshots
        .get(index)
        .ok_or_else(|| Error::validation("snapshot index out of range"))?;
    let comps = ["u1", "u2", "u3"];
    for (c, name) in comps.iter().enumerate() {
        let path = dir.join(format!("{tag}_{name}.f64"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in &snap[c] {
            f.write_all(&v.to_le_bytes())?;
        }
    }
    let sidecar = serde_json::json!({
        "n": rec.params.n,
        "length": rec.params.length,
        "dt": rec.params.dt,
        "time": rec.times[index],
        "components": comps,
        "layout": "row-major, axis 0 slow, f64 little-endian",
        "eps": rec.eps,
        "sources": rec.sources,
    });
    let path = dir.join(format!("{tag}_meta.json"));
    std::fs::write(path, serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn homog(lambda: f64, mu: f64) -> (MediumField, MaterialPoint) {
        let p = MaterialPoint::lame(lambda, mu).unwrap();
        (MediumField::constant(p), p)
    }

    fn small_params(n: usize, medium: &MediumField, safety: f64) -> SimParams {
        let p = medium.sample(&Vector3::zeros());
        let dt = safety * max_stable_dt(n, 2.0 * std::f64::consts::PI, p.c2_p());
        SimParams {
            n,
            length: 2.0 * std::f64::consts::PI,
            dt,
        }
    }

    #[test]
    fn zero_fields_stay_zero() {
        let (m, _) = homog(1.0, 1.0);
        let params = small_params(16, &m, 0.5);
        let mut solver = Solver::new(&params, &m, Nonlinearity::Full, true).unwrap();
        let mut state = SimGrid::zeros(params);
        for _ in 0..20 {
            solver.step(&mut state).unwrap();
        }
        assert_eq!(state.max_abs(), 0.0);
    }

    fn translation_error(
        n: usize,
        dt_scale: f64,
        mode: PacketMode,
        k: [i64; 2],
        c: f64,
        steps: Option<u64>,
    ) -> f64 {
        let (m, p) = homog(2.0, 1.0);
        let dt0 = 0.4 * max_stable_dt(n, 2.0 * std::f64::consts::PI, p.c2_p());
        let params = SimParams {
            n,
            length: 2.0 * std::f64::consts::PI,
            dt: dt0 * dt_scale,
        };
        let mut solver = Solver::new(&params, &m, Nonlinearity::LinearOnly, false).unwrap();
        let mut state = SimGrid::zeros(params);
        // slab packet: no transverse envelope, so the linear evolution is a
        // rigid translation (no diffraction) and the oracle is exact
        let src = PacketSource {
            center: [std::f64::consts::PI, std::f64::consts::PI],
            k,
            width_par: 0.45,
            width_perp: f64::INFINITY,
            mode,
            amplitude: 1e-3,
        };
        add_packet(&mut state, &solver.spec, &p, &src).unwrap();
        let u0 = state.u.clone();
        let steps = steps.unwrap_or((0.5 / params.dt).round() as u64);
        for _ in 0..steps {
            solver.step(&mut state).unwrap();
        }
        let t = state.t;
        // oracle: rigid translation via Fourier phase shift
        let dirn = src.direction();
        let shift = [c * t * dirn[0], c * t * dirn[1]];
        let spec = &solver.spec;
        let (mut s0, mut s1, mut work, mut scratch) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        spec.forward_pair(&u0[0], &u0[1], &mut s0, &mut s1, &mut work, &mut scratch);
        let n1 = spec.n[1];
        for i0 in 0..spec.n[0] {
            for i1 in 0..n1 {
                let ph = -(spec.k[0][i0] * shift[0] + spec.k[1][i1] * shift[1]);
                let rot = Complex64::new(0.0, ph).exp();
                s0[i0 * n1 + i1] *= rot;
                s1[i0 * n1 + i1] *= rot;
            }
        }
        let mut e0 = vec![0.0; spec.cells()];
        let mut e1 = vec![0.0; spec.cells()];
        spec.inverse_pair(&s0, &s1, &mut e0, &mut e1, &mut work, &mut scratch);
        let num: f64 = e0
            .iter()
            .zip(&state.u[0])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            + e1.iter()
                .zip(&state.u[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        let den: f64 =
            e0.iter().map(|a| a * a).sum::<f64>() + e1.iter().map(|a| a * a).sum::<f64>();
        (num / den).sqrt()
    }

    #[test]
    fn linear_packet_translates_at_mode_speed() {
        // P packet at c_P = 2: < 1% error against the Fourier-shift oracle
        let rel = translation_error(64, 0.5, PacketMode::P, [7, 0], 2.0, Some(100));
        assert!(rel < 0.01, "translation error {rel}");
    }

    #[test]
    fn temporal_convergence_is_second_order() {
        let e1 = translation_error(48, 1.0, PacketMode::Sh, [5, 0], 1.0, None);
        let e2 = translation_error(48, 0.5, PacketMode::Sh, [5, 0], 1.0, None);
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "measured temporal order {order} (e {e1} -> {e2})");
    }

    #[test]
    fn nonlinear_deviation_scales_as_eps_squared() {
        let (m, p) = homog(1.0, 1.0);
        let params = small_params(48, &m, 0.45);
        let run = |eps: f64, nl: Nonlinearity| -> Vec<f64> {
            let mut solver = Solver::new(&params, &m, nl, false).unwrap();
            let mut state = SimGrid::zeros(params);
            let src = PacketSource {
                center: [std::f64::consts::PI, std::f64::consts::PI],
                k: [5, 0],
                width_par: 0.5,
                width_perp: 0.6,
                mode: PacketMode::P,
                amplitude: eps,
            };
            add_packet(&mut state, &solver.spec, &p, &src).unwrap();
            for _ in 0..60 {
                solver.step(&mut state).unwrap();
            }
            state.u[0].clone()
        };
        let mut devs = Vec::new();
        for eps in [1e-3, 5e-4, 2.5e-4] {
            let nl = run(eps, Nonlinearity::Full);
            let lin = run(eps, Nonlinearity::LinearOnly);
            let d: f64 = nl
                .iter()
                .zip(&lin)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            devs.push(d);
        }
        let o1 = (devs[0] / devs[1]).log2();
        let o2 = (devs[1] / devs[2]).log2();
        assert!((1.8..2.2).contains(&o1), "order {o1}");
        assert!((1.8..2.2).contains(&o2), "order {o2}");
    }

    #[test]
    fn linear_energy_conserved() {
        let (m, p) = homog(1.0, 1.0);
        let params = small_params(48, &m, 0.45);
        let mut solver = Solver::new(&params, &m, Nonlinearity::LinearOnly, false).unwrap();
        let mut state = SimGrid::zeros(params);
        let src = PacketSource {
            center: [3.0, 3.0],
            k: [5, 3],
            width_par: 0.5,
            width_perp: 0.5,
            mode: PacketMode::P,
            amplitude: 1e-3,
        };
        add_packet(&mut state, &solver.spec, &p, &src).unwrap();
        let e0 = solver.linear_energy(&state);
        for _ in 0..200 {
            solver.step(&mut state).unwrap();
        }
        let e1 = solver.linear_energy(&state);
        assert!(
            ((e1 - e0) / e0).abs() < 0.01,
            "energy drift {}",
            (e1 - e0) / e0
        );
    }

    #[test]
    fn cfl_violation_rejected() {
        let (m, p) = homog(2.0, 1.0);
        let n = 32;
        let dt_max = max_stable_dt(n, 2.0 * std::f64::consts::PI, p.c2_p());
        let params = SimParams {
            n,
            length: 2.0 * std::f64::consts::PI,
            dt: dt_max * 1.5,
        };
        assert!(Solver::new(&params, &m, Nonlinearity::Full, false).is_err());
    }

    #[test]
    fn measure_plane_wave_amplitudes() {
        let spec = Spectral::new([32, 32], 2.0 * std::f64::consts::PI);
        let n = 32;
        let mut fields: [Vec<f64>; 3] = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
        // P- and S-polarized plane waves at k = (3, 4), SV at (2, 0)
        let kk = [3.0, 4.0];
        let kn = 5.0;
        let dir = [kk[0] / kn, kk[1] / kn];
        let perp = [-dir[1], dir[0]];
        for i0 in 0..n {
            for i1 in 0..n {
                let x = i0 as f64 * spec.dx();
                let y = i1 as f64 * spec.dx();
                let ph = kk[0] * x + kk[1] * y;
                fields[0][i0 * n + i1] = 0.8 * dir[0] * ph.cos() + 0.3 * perp[0] * ph.cos();
                fields[1][i0 * n + i1] = 0.8 * dir[1] * ph.cos() + 0.3 * perp[1] * ph.cos();
                fields[2][i0 * n + i1] = 0.5 * (2.0 * x).cos();
            }
        }
        let ap = measure_mode_amplitude(&fields, &spec, [3, 4], PacketMode::P, None).unwrap();
        let ash = measure_mode_amplitude(&fields, &spec, [3, 4], PacketMode::Sh, None).unwrap();
        let asv = measure_mode_amplitude(&fields, &spec, [2, 0], PacketMode::Sv, None).unwrap();
        assert_relative_eq!(ap.re, 0.8, epsilon = 1e-12);
        assert!(ap.im.abs() < 1e-12);
        assert_relative_eq!(ash.re, 0.3, epsilon = 1e-12);
        assert_relative_eq!(asv.re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn windowed_measurement_close_to_unwindowed() {
        let (m, p) = homog(1.0, 1.0);
        let params = small_params(64, &m, 0.5);
        let mut state = SimGrid::zeros(params);
        let solver = Solver::new(&params, &m, Nonlinearity::Full, false).unwrap();
        let src = PacketSource {
            center: [3.0, 3.0],
            k: [7, 0],
            width_par: 0.35,
            width_perp: 0.35,
            mode: PacketMode::P,
            amplitude: 1e-3,
        };
        add_packet(&mut state, &solver.spec, &p, &src).unwrap();
        let full =
            measure_mode_amplitude(&state.u, &solver.spec, [7, 0], PacketMode::P, None).unwrap();
        let win = Window {
            center: [3.0, 3.0],
            halfwidth: [4.0 * 0.35, 4.0 * 0.35],
        };
        let windowed =
            measure_mode_amplitude(&state.u, &solver.spec, [7, 0], PacketMode::P, Some(&win))
                .unwrap();
        assert!(
            (windowed.norm() - full.norm()).abs() / full.norm() < 0.02,
            "windowed {} vs {}",
            windowed.norm(),
            full.norm()
        );
        let bad = Window {
            center: [0.0, 0.0],
            halfwidth: [0.0, 0.0],
        };
        assert!(
            measure_mode_amplitude(&state.u, &solver.spec, [7, 0], PacketMode::P, Some(&bad))
                .is_err()
        );
    }

    #[test]
    fn linear_runs_give_zero_bilinear_response() {
        let (m, p) = homog(1.0, 1.0);
        let params = small_params(32, &m, 0.5);
        let eps = [1e-3, 1e-3];
        let mk = |which: u8| -> WavefieldRecord {
            let mut solver = Solver::new(&params, &m, Nonlinearity::LinearOnly, false).unwrap();
            let mut state = SimGrid::zeros(params);
            let s1 = PacketSource {
                center: [2.0, 3.0],
                k: [3, 0],
                width_par: 0.5,
                width_perp: 0.5,
                mode: PacketMode::P,
                amplitude: eps[0],
            };
            let s2 = PacketSource {
                center: [4.0, 3.0],
                k: [0, 3],
                width_par: 0.5,
                width_perp: 0.5,
                mode: PacketMode::P,
                amplitude: eps[1],
            };
            if which != 2 {
                add_packet(&mut state, &solver.spec, &p, &s1).unwrap();
            }
            if which != 1 {
                add_packet(&mut state, &solver.spec, &p, &s2).unwrap();
            }
            run_recorded(&mut solver, state, p, eps, &[], &[0.3]).unwrap()
        };
        let r12 = mk(0);
        let r1 = mk(1);
        let r2 = mk(2);
        let u12 = extract_bilinear_response(&r12, &r1, &r2).unwrap();
        let norm = snapshot_norm(&u12.snapshots[0], &params);
        let scale = snapshot_norm(&r1.snapshots[0], &params) / (eps[0] * eps[1]);
        assert!(norm < 1e-10 * scale, "u12 {norm} vs scale {scale}");
    }
}
