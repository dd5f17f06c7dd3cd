//! The elastic material model: the five parameters (λ, μ, A, B, C) at a
//! point, and parameter fields over the domain.
//!
//! Density is fixed to 1; the standing assumption μ > 0, λ + μ > 0 is
//! enforced at construction. Fields are either closed-form (constant or
//! affine in x) or regular grids with cubic interpolation, and are immutable
//! after construction so they can be shared across parallel ray traces and
//! sweeps.

use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Relative tolerance for variety-membership and orthogonality checks.
pub const GEOM_TOL: f64 = 1e-9;

/// The five elastic parameters at a spatial point. `lambda`/`mu` are the
/// Lamé coefficients, `a_landau`/`b_landau`/`c_landau` the third-order
/// moduli A, B, C of the cubic energy expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPoint {
    pub lambda: f64,
    pub mu: f64,
    pub a_landau: f64,
    pub b_landau: f64,
    pub c_landau: f64,
}

impl MaterialPoint {
    /// Checked constructor; rejects μ ≤ 0 and λ + μ ≤ 0.
    pub fn new(lambda: f64, mu: f64, a_landau: f64, b_landau: f64, c_landau: f64) -> Result<Self> {
        let p = MaterialPoint {
            lambda,
            mu,
            a_landau,
            b_landau,
            c_landau,
        };
        p.validate()?;
        Ok(p)
    }

    /// Lamé-only constructor with A = B = C = 0.
    pub fn lame(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(lambda, mu, 0.0, 0.0, 0.0)
    }

    /// Unchecked constructor, for interpolated values that are validated by
    /// the caller.
    pub fn from_raw(lambda: f64, mu: f64, a_landau: f64, b_landau: f64, c_landau: f64) -> Self {
        MaterialPoint {
            lambda,
            mu,
            a_landau,
            b_landau,
            c_landau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::validation("non-finite Lamé parameters"));
        }
        if self.mu <= 0.0 {
            return Err(Error::validation(format!("mu = {} must be > 0", self.mu)));
        }
        if self.lambda + self.mu <= 0.0 {
            return Err(Error::validation(format!(
                "lambda + mu = {} must be > 0",
                self.lambda + self.mu
            )));
        }
        Ok(())
    }

    /// Squared P speed λ + 2μ.
    pub fn c2_p(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Squared S speed μ.
    pub fn c2_s(&self) -> f64 {
        self.mu
    }

    pub fn c2(&self, mode: crate::kinematics::WaveMode) -> f64 {
        match mode {
            crate::kinematics::WaveMode::P => self.c2_p(),
            crate::kinematics::WaveMode::S => self.c2_s(),
        }
    }
}

/// Wave speeds (c_P, c_S) = (√(λ+2μ), √μ). Errors if the invariants fail.
pub fn wave_speeds(p: &MaterialPoint) -> Result<(f64, f64)> {
    p.validate()?;
    Ok((p.c2_p().sqrt(), p.c2_s().sqrt()))
}

/// Axis-aligned bounding box used as the medium's domain for ray tracing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        (0..3).all(|d| x[d] >= self.min[d] && x[d] <= self.max[d])
    }
}

/// A regular grid of the five parameter channels with cubic (Catmull-Rom)
/// interpolation. 2-D grids have `dims[2] == 1`. Node `i` of axis `d` sits at
/// coordinate `i * spacing`.
#[derive(Debug, Clone)]
pub struct GridMedium {
    pub dims: [usize; 3],
    pub spacing: f64,
    /// Channel order λ, μ, A, B, C; row-major with the last axis fastest.
    pub channels: [Vec<f64>; 5],
}

const GRID_MAGIC: &[u8; 4] = b"EMG1";

impl GridMedium {
    pub fn new(dims: [usize; 3], spacing: f64, channels: [Vec<f64>; 5]) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if n == 0 || spacing <= 0.0 {
            return Err(Error::validation("grid dims must be nonzero, spacing > 0"));
        }
        for ch in &channels {
            if ch.len() != n {
                return Err(Error::validation(format!(
                    "channel length {} does not match dims {:?}",
                    ch.len(),
                    dims
                )));
            }
        }
        Ok(GridMedium {
            dims,
            spacing,
            channels,
        })
    }

    fn idx(&self, i: [usize; 3]) -> usize {
        (i[0] * self.dims[1] + i[1]) * self.dims[2] + i[2]
    }

    pub fn node_position(&self, i: [usize; 3]) -> Vector3<f64> {
        Vector3::new(
            i[0] as f64 * self.spacing,
            i[1] as f64 * self.spacing,
            i[2] as f64 * self.spacing,
        )
    }

    pub fn node_material(&self, i: [usize; 3]) -> MaterialPoint {
        let k = self.idx(i);
        MaterialPoint::from_raw(
            self.channels[0][k],
            self.channels[1][k],
            self.channels[2][k],
            self.channels[3][k],
            self.channels[4][k],
        )
    }

    pub fn bbox(&self) -> Aabb {
        Aabb {
            min: [0.0; 3],
            max: [
                (self.dims[0].saturating_sub(1)) as f64 * self.spacing,
                (self.dims[1].saturating_sub(1)) as f64 * self.spacing,
                (self.dims[2].saturating_sub(1)) as f64 * self.spacing,
            ],
        }
    }

    /// Catmull-Rom weights and their parameter derivatives at fraction t.
    fn catrom(t: f64) -> ([f64; 4], [f64; 4]) {
        let t2 = t * t;
        let t3 = t2 * t;
        let w = [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ];
        let dw = [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ];
        (w, dw)
    }

    /// Per-axis stencil base index, interpolation weights and derivative
    /// weights; degenerate axes (one node) collapse to a constant.
    fn axis_weights(&self, d: usize, x: f64) -> ([isize; 4], [f64; 4], [f64; 4]) {
        let n = self.dims[d];
        if n == 1 {
            return ([0; 4], [1.0, 0.0, 0.0, 0.0], [0.0; 4]);
        }
        let s = x / self.spacing;
        let j = s.floor().clamp(0.0, (n - 2) as f64);
        let t = s - j;
        let j = j as isize;
        let (w, dw) = Self::catrom(t);
        ([j - 1, j, j + 1, j + 2], w, dw)
    }

    fn clamp_i(&self, d: usize, i: isize) -> usize {
        i.clamp(0, self.dims[d] as isize - 1) as usize
    }

    /// Interpolated channel value and spatial gradient.
    pub fn sample_channel(&self, ch: usize, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let (i0, w0, d0) = self.axis_weights(0, x[0]);
        let (i1, w1, d1) = self.axis_weights(1, x[1]);
        let (i2, w2, d2) = self.axis_weights(2, x[2]);
        let data = &self.channels[ch];
        let mut v = 0.0;
        let mut g = Vector3::zeros();
        for a in 0..4 {
            let ia = self.clamp_i(0, i0[a]);
            for b in 0..4 {
                let ib = self.clamp_i(1, i1[b]);
                for c in 0..4 {
                    let ic = self.clamp_i(2, i2[c]);
                    let f = data[self.idx([ia, ib, ic])];
                    v += w0[a] * w1[b] * w2[c] * f;
                    g[0] += d0[a] * w1[b] * w2[c] * f;
                    g[1] += w0[a] * d1[b] * w2[c] * f;
                    g[2] += w0[a] * w1[b] * d2[c] * f;
                }
            }
        }
        (v, g / self.spacing)
    }

    /// Flat binary layout: magic "EMG1", u32 ndim, u32 dims[ndim],
    /// f64 spacing, then the five channels (λ, μ, A, B, C) as f64 LE.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(GRID_MAGIC)?;
        let ndim: u32 = if self.dims[2] == 1 { 2 } else { 3 };
        w.write_all(&ndim.to_le_bytes())?;
        for d in 0..ndim as usize {
            w.write_all(&(self.dims[d] as u32).to_le_bytes())?;
        }
        w.write_all(&self.spacing.to_le_bytes())?;
        for ch in &self.channels {
            for v in ch {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != GRID_MAGIC {
            return Err(Error::Parse("bad medium grid magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let ndim = u32::from_le_bytes(b4) as usize;
        if !(2..=3).contains(&ndim) {
            return Err(Error::Parse(format!("unsupported grid ndim {ndim}")));
        }
        let mut dims = [1usize; 3];
        for d in dims.iter_mut().take(ndim) {
            r.read_exact(&mut b4)?;
            *d = u32::from_le_bytes(b4) as usize;
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let spacing = f64::from_le_bytes(b8);
        let n = dims[0] * dims[1] * dims[2];
        let mut channels: [Vec<f64>; 5] = Default::default();
        for ch in channels.iter_mut() {
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                r.read_exact(&mut b8)?;
                data.push(f64::from_le_bytes(b8));
            }
            *ch = data;
        }
        GridMedium::new(dims, spacing, channels)
    }
}

/// A parameter field over the domain. Homogeneous media report
/// [`MediumField::is_homogeneous`] so closed-form oracles apply.
#[derive(Debug, Clone)]
pub enum MediumField {
    Constant {
        point: MaterialPoint,
        domain: Option<Aabb>,
    },
    /// parameters(x) = base + grad·x per channel (order λ, μ, A, B, C).
    Affine {
        base: MaterialPoint,
        grad: [Vector3<f64>; 5],
        domain: Option<Aabb>,
    },
    Grid(GridMedium),
}

impl MediumField {
    pub fn constant(point: MaterialPoint) -> Self {
        MediumField::Constant {
            point,
            domain: None,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            MediumField::Constant { .. } => true,
            MediumField::Affine { grad, .. } => grad.iter().all(|g| g.norm() == 0.0),
            MediumField::Grid(_) => false,
        }
    }

    pub fn domain(&self) -> Option<Aabb> {
        match self {
            MediumField::Constant { domain, .. } | MediumField::Affine { domain, .. } => *domain,
            MediumField::Grid(g) => Some(g.bbox()),
        }
    }

    /// Raw (unvalidated) parameters at x.
    pub fn sample(&self, x: &Vector3<f64>) -> MaterialPoint {
        match self {
            MediumField::Constant { point, .. } => *point,
            MediumField::Affine { base, grad, .. } => MaterialPoint::from_raw(
                base.lambda + grad[0].dot(x),
                base.mu + grad[1].dot(x),
                base.a_landau + grad[2].dot(x),
                base.b_landau + grad[3].dot(x),
                base.c_landau + grad[4].dot(x),
            ),
            MediumField::Grid(g) => MaterialPoint::from_raw(
                g.sample_channel(0, x).0,
                g.sample_channel(1, x).0,
                g.sample_channel(2, x).0,
                g.sample_channel(3, x).0,
                g.sample_channel(4, x).0,
            ),
        }
    }

    pub fn sample_checked(&self, x: &Vector3<f64>) -> Result<MaterialPoint> {
        let p = self.sample(x);
        p.validate()?;
        Ok(p)
    }

    /// Squared mode speed and its spatial gradient at x (the ray ODE
    /// right-hand side data).
    pub fn c2_and_grad(
        &self,
        mode: crate::kinematics::WaveMode,
        x: &Vector3<f64>,
    ) -> (f64, Vector3<f64>) {
        use crate::kinematics::WaveMode;
        match self {
            MediumField::Constant { point, .. } => (point.c2(mode), Vector3::zeros()),
            MediumField::Affine { base, grad, .. } => {
                let p = self.sample(x);
                let _ = base;
                match mode {
                    WaveMode::P => (p.c2_p(), grad[0] + 2.0 * grad[1]),
                    WaveMode::S => (p.c2_s(), grad[1]),
                }
            }
            MediumField::Grid(g) => {
                let (lam, glam) = g.sample_channel(0, x);
                let (mu, gmu) = g.sample_channel(1, x);
                match mode {
                    WaveMode::P => (lam + 2.0 * mu, glam + 2.0 * gmu),
                    WaveMode::S => (mu, gmu),
                }
            }
        }
    }
}

/// One invariant violation found by [`validate_medium`].
#[derive(Debug, Clone, Serialize)]
pub struct MediumViolation {
    pub position: [f64; 3],
    /// Grid node index when the field is a grid.
    pub node: Option<[usize; 3]>,
    pub lambda: f64,
    pub mu: f64,
    pub reason: String,
}

/// Report-style medium validation: every violating sample point is listed;
/// an empty report means the field is valid there. Grid media are also
/// checked at every node (which names the offending cell).
pub fn validate_medium(m: &MediumField, sample_points: &[Vector3<f64>]) -> Vec<MediumViolation> {
    let mut report = Vec::new();
    let mut check = |x: Vector3<f64>, node: Option<[usize; 3]>, p: MaterialPoint| {
        if let Err(e) = p.validate() {
            report.push(MediumViolation {
                position: [x[0], x[1], x[2]],
                node,
                lambda: p.lambda,
                mu: p.mu,
                reason: e.to_string(),
            });
        }
    };
    if let MediumField::Grid(g) = m {
        for i in 0..g.dims[0] {
            for j in 0..g.dims[1] {
                for k in 0..g.dims[2] {
                    let idx = [i, j, k];
                    check(g.node_position(idx), Some(idx), g.node_material(idx));
                }
            }
        }
    }
    for x in sample_points {
        check(*x, None, m.sample(x));
    }
    report
}

/// Structured-text medium description (TOML key-value):
/// either the five constants with optional per-parameter affine `[gradient]`
/// terms and an optional `[domain]`, or a `grid_file` reference.
#[derive(Debug, Deserialize)]
struct MediumSpec {
    lambda: Option<f64>,
    mu: Option<f64>,
    #[serde(default)]
    a: f64,
    #[serde(default)]
    b: f64,
    #[serde(default)]
    c: f64,
    gradient: Option<GradientSpec>,
    domain: Option<DomainSpec>,
    grid_file: Option<String>,
    #[serde(default = "default_interp")]
    interpolation: String,
}

fn default_interp() -> String {
    "cubic".into()
}

#[derive(Debug, Default, Deserialize)]
struct GradientSpec {
    lambda: Option<[f64; 3]>,
    mu: Option<[f64; 3]>,
    a: Option<[f64; 3]>,
    b: Option<[f64; 3]>,
    c: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
struct DomainSpec {
    min: [f64; 3],
    max: [f64; 3],
}

impl MediumField {
    /// Parse a structured-text medium description. `base_dir` resolves a
    /// relative `grid_file` reference.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let spec: MediumSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(file) = &spec.grid_file {
            if spec.interpolation != "cubic" {
                return Err(Error::Parse(format!(
                    "unsupported interpolation '{}'",
                    spec.interpolation
                )));
            }
            let path = match base_dir {
                Some(d) => d.join(file),
                None => Path::new(file).to_path_buf(),
            };
            let mut f = std::fs::File::open(&path)?;
            return Ok(MediumField::Grid(GridMedium::read_binary(&mut f)?));
        }
        let (lambda, mu) = match (spec.lambda, spec.mu) {
            (Some(l), Some(m)) => (l, m),
            _ => {
                return Err(Error::Parse(
                    "medium needs lambda and mu (or a grid_file)".into(),
                ))
            }
        };
        let base = MaterialPoint::new(lambda, mu, spec.a, spec.b, spec.c)?;
        let domain = spec.domain.map(|d| Aabb {
            min: d.min,
            max: d.max,
        });
        match spec.gradient {
            None => Ok(MediumField::Constant {
                point: base,
                domain,
            }),
            Some(g) => {
                let v = |o: Option<[f64; 3]>| Vector3::from(o.unwrap_or([0.0; 3]));
                Ok(MediumField::Affine {
                    base,
                    grad: [v(g.lambda), v(g.mu), v(g.a), v(g.b), v(g.c)],
                    domain,
                })
            }
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path.parent())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wave_speeds_examples() {
        let p = MaterialPoint::lame(2.0, 1.0).unwrap();
        assert_eq!(wave_speeds(&p).unwrap(), (2.0, 1.0));
        let p = MaterialPoint::lame(0.0, 1.0).unwrap();
        let (cp, cs) = wave_speeds(&p).unwrap();
        assert_relative_eq!(cp, 2.0_f64.sqrt());
        assert_eq!(cs, 1.0);
        // boundary-adjacent legal case: lambda + mu = 0.5 > 0
        let p = MaterialPoint::lame(-0.5, 1.0).unwrap();
        let (cp, cs) = wave_speeds(&p).unwrap();
        assert_relative_eq!(cp, 1.5_f64.sqrt());
        assert_eq!(cs, 1.0);
    }

    #[test]
    fn invalid_materials_rejected() {
        assert!(MaterialPoint::lame(-2.0, 1.0).is_err());
        assert!(MaterialPoint::lame(0.0, 0.0).is_err());
        assert!(MaterialPoint::lame(0.0, -1.0).is_err());
        assert!(MaterialPoint::lame(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn speed_ordering_and_identity() {
        // c_P² − c_S² = λ + μ > 0
        for (l, m) in [(2.0, 1.0), (-0.4, 0.5), (10.0, 0.1)] {
            let p = MaterialPoint::lame(l, m).unwrap();
            let (cp, cs) = wave_speeds(&p).unwrap();
            assert!(cp > cs && cs > 0.0);
            assert_relative_eq!(cp * cp - cs * cs, l + m, max_relative = 1e-14);
        }
    }

    #[test]
    fn validate_medium_constant() {
        let ok = MediumField::constant(MaterialPoint::lame(2.0, 1.0).unwrap());
        let pts = vec![Vector3::zeros(), Vector3::new(1.0, 2.0, 3.0)];
        assert!(validate_medium(&ok, &pts).is_empty());

        let bad = MediumField::Constant {
            point: MaterialPoint::from_raw(-2.0, 1.0, 0.0, 0.0, 0.0),
            domain: None,
        };
        let report = validate_medium(&bad, &pts);
        assert_eq!(report.len(), pts.len());
    }

    #[test]
    fn validate_medium_grid_names_bad_cell() {
        let n = 4usize;
        let mut channels: [Vec<f64>; 5] = Default::default();
        channels[0] = vec![2.0; n * n];
        channels[1] = vec![1.0; n * n];
        for ch in channels.iter_mut().skip(2) {
            *ch = vec![0.0; n * n];
        }
        // poison one cell: mu <= 0 at node (2, 1)
        channels[1][2 * n + 1] = -1.0;
        let g = GridMedium::new([n, n, 1], 0.5, channels).unwrap();
        let report = validate_medium(&MediumField::Grid(g), &[]);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].node, Some([2, 1, 0]));
    }

    #[test]
    fn grid_binary_roundtrip_and_interpolation() {
        let n = 8usize;
        let spacing = 0.25;
        let mut channels: [Vec<f64>; 5] = Default::default();
        let mut lam = Vec::new();
        let mut mu = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 * spacing, j as f64 * spacing);
                lam.push(2.0 + 0.3 * x + 0.1 * y);
                mu.push(1.0 + 0.2 * x);
            }
        }
        channels[0] = lam;
        channels[1] = mu;
        for ch in channels.iter_mut().skip(2) {
            *ch = vec![0.0; n * n];
        }
        let g = GridMedium::new([n, n, 1], spacing, channels).unwrap();

        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        let g2 = GridMedium::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(g2.dims, g.dims);
        assert_eq!(g2.channels[0], g.channels[0]);

        // cubic interpolation reproduces affine data and its gradient exactly
        // (away from the clamped border)
        let m = MediumField::Grid(g2);
        let x = Vector3::new(0.9, 0.7, 0.0);
        let p = m.sample(&x);
        assert_relative_eq!(p.lambda, 2.0 + 0.3 * 0.9 + 0.1 * 0.7, epsilon = 1e-12);
        let (c2, grad) = m.c2_and_grad(crate::kinematics::WaveMode::S, &x);
        assert_relative_eq!(c2, 1.0 + 0.2 * 0.9, epsilon = 1e-12);
        assert_relative_eq!(grad[0], 0.2, epsilon = 1e-12);
        assert_relative_eq!(grad[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn medium_from_toml() {
        let m = MediumField::from_toml_str("lambda = 2.0\nmu = 1.0\n", None).unwrap();
        assert!(m.is_homogeneous());
        let p = m.sample(&Vector3::zeros());
        assert_eq!((p.lambda, p.mu), (2.0, 1.0));

        let m = MediumField::from_toml_str(
            "lambda = 1.0\nmu = 1.0\na = 0.5\nb = 0.25\nc = 2.0\n[gradient]\nmu = [0.1, 0.0, 0.0]\n",
            None,
        )
        .unwrap();
        assert!(!m.is_homogeneous());
        let p = m.sample(&Vector3::new(2.0, 5.0, 0.0));
        assert_relative_eq!(p.mu, 1.2);
        assert_eq!(p.c_landau, 2.0);

        assert!(MediumField::from_toml_str("mu = 1.0", None).is_err());
    }

    proptest::proptest! {
        #[test]
        fn speed_identity_holds(lam in -0.9f64..4.0, mu in 0.05f64..4.0) {
            proptest::prop_assume!(lam + mu > 1e-6);
            let p = MaterialPoint::lame(lam, mu).unwrap();
            let (cp, cs) = wave_speeds(&p).unwrap();
            proptest::prop_assert!(cp > cs && cs > 0.0);
            proptest::prop_assert!((cp * cp - cs * cs - (lam + mu)).abs() < 1e-12 * (1.0 + lam.abs() + mu));
        }

        #[test]
        fn speeds_increase_with_mu(lam in -0.4f64..3.0, mu in 0.05f64..3.0, dmu in 0.01f64..1.0) {
            proptest::prop_assume!(lam + mu > 1e-6);
            let p1 = MaterialPoint::lame(lam, mu).unwrap();
            let p2 = MaterialPoint::lame(lam, mu + dmu).unwrap();
            let (cp1, cs1) = wave_speeds(&p1).unwrap();
            let (cp2, cs2) = wave_speeds(&p2).unwrap();
            proptest::prop_assert!(cp2 > cp1 && cs2 > cs1);
        }
    }

    #[test]
    fn monotone_speeds_in_mu() {
        let p1 = MaterialPoint::lame(2.0, 1.0).unwrap();
        let p2 = MaterialPoint::lame(2.0, 1.5).unwrap();
        let (cp1, cs1) = wave_speeds(&p1).unwrap();
        let (cp2, cs2) = wave_speeds(&p2).unwrap();
        assert!(cp2 > cp1 && cs2 > cs1);
    }
}
