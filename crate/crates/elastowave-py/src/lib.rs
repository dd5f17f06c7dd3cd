//! Python bindings exposing the main types and operations: material
//! construction and wave speeds, boundary classification, resonance
//! kinematics, interaction-symbol evaluation (both routes), the
//! interaction table, and A/B recovery from measurement JSON.

use elastowave::inversion::{read_measurements_json, recover_ab, recover_ab_alt, recover_lame, Traversal};
use elastowave::kinematics::{classify_boundary, Covector, ModeTag, WaveMode};
use elastowave::medium::{wave_speeds, MaterialPoint};
use elastowave::resonance::{
    sample::{output_mode, resonant_pair},
    solve_pp_to_s, solve_ps, solve_ss_to_p, InteractionCase, InteractionConfig, ModeAmplitude,
    SsOutcome,
};
use elastowave::symbols::{classify_interaction, closed_form_amplitude, interaction_symbol, table_rows, ClosedFormInputs};
use nalgebra::Vector3;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: elastowave::Error) -> PyErr {
    match e {
        elastowave::Error::Validation(_) | elastowave::Error::Parse(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// The five elastic parameters at a point.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Material {
    inner: MaterialPoint,
}

#[pymethods]
impl Material {
    #[new]
    #[pyo3(signature = (lambda_, mu, a=0.0, b=0.0, c=0.0))]
    fn new(lambda_: f64, mu: f64, a: f64, b: f64, c: f64) -> PyResult<Self> {
        Ok(Material {
            inner: MaterialPoint::new(lambda_, mu, a, b, c).map_err(err)?,
        })
    }

    /// (c_P, c_S) = (sqrt(lambda+2mu), sqrt(mu)).
    fn wave_speeds(&self) -> PyResult<(f64, f64)> {
        wave_speeds(&self.inner).map_err(err)
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a_landau
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b_landau
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c_landau
    }

    fn __repr__(&self) -> String {
        format!(
            "Material(lambda={}, mu={}, a={}, b={}, c={})",
            self.inner.lambda,
            self.inner.mu,
            self.inner.a_landau,
            self.inner.b_landau,
            self.inner.c_landau
        )
    }
}

fn parse_case(s: &str) -> PyResult<InteractionCase> {
    InteractionCase::parse(s).map_err(err)
}

fn parse_wave_mode(s: &str) -> PyResult<WaveMode> {
    match s.to_ascii_lowercase().as_str() {
        "p" => Ok(WaveMode::P),
        "s" => Ok(WaveMode::S),
        other => Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
    }
}

/// Classify a boundary covector; returns {"p": tag, "s": tag}.
#[pyfunction]
#[pyo3(signature = (material, tau, xi, normal=(0.0, 0.0, 1.0)))]
fn boundary_classification(
    py: Python<'_>,
    material: &Material,
    tau: f64,
    xi: (f64, f64, f64),
    normal: (f64, f64, f64),
) -> PyResult<Py<PyDict>> {
    let cv = Covector {
        t: 0.0,
        x: Vector3::zeros(),
        tau,
        xi: Vector3::new(xi.0, xi.1, xi.2),
        mode: ModeTag::Unclassified,
    };
    let class = classify_boundary(&cv, &Vector3::new(normal.0, normal.1, normal.2), &material.inner)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p", class.p.tag())?;
    d.set_item("s", class.s.tag())?;
    Ok(d.into())
}

/// Roots b of the resonance ζ¹ + bζ² for incoming unit wavevectors at
/// cos α; returns a list of {"case", "b", "out_mode", "residual"}.
#[pyfunction]
fn resonance_roots(
    py: Python<'_>,
    material: &Material,
    mode1: &str,
    mode2: &str,
    cos_alpha: f64,
) -> PyResult<Vec<Py<PyDict>>> {
    let p = material.inner;
    let (m1, m2) = (parse_wave_mode(mode1)?, parse_wave_mode(mode2)?);
    let sin_a = (1.0 - cos_alpha * cos_alpha).max(0.0).sqrt();
    let xi1 = Vector3::new(cos_alpha, sin_a, 0.0);
    let xi2 = Vector3::new(1.0, 0.0, 0.0);
    let z1 = Covector::on_variety(0.0, Vector3::zeros(), xi1, m1, &p).map_err(err)?;
    let z2 = Covector::on_variety(0.0, Vector3::zeros(), xi2, m2, &p).map_err(err)?;
    let one = Complex64::new(1.0, 0.0);
    let amp = |m: WaveMode| match m {
        WaveMode::P => ModeAmplitude::P { a: one },
        WaveMode::S => ModeAmplitude::S {
            b_h: one,
            b_v: Complex64::new(0.0, 0.0),
        },
    };
    let cfg = InteractionConfig::new(z1, z2, amp(m1), amp(m2), &p).map_err(err)?;
    let mut results = Vec::new();
    let mut push = |res: elastowave::resonance::ResonanceResult| -> PyResult<()> {
        for r in &res.roots {
            let d = PyDict::new(py);
            d.set_item("case", format!("{:?}", res.case))?;
            d.set_item("b", r.b)?;
            d.set_item("out_mode", format!("{:?}", res.out_mode))?;
            d.set_item("residual", r.residual)?;
            results.push(d.into());
        }
        Ok(())
    };
    match (m1, m2) {
        (WaveMode::P, WaveMode::P) => push(solve_pp_to_s(&cfg, &p).map_err(err)?)?,
        (WaveMode::S, WaveMode::S) => match solve_ss_to_p(&cfg, &p).map_err(err)? {
            SsOutcome::Resonant(res) => push(res)?,
            SsOutcome::NoInteraction {
                cos_alpha,
                threshold,
            } => {
                let d = PyDict::new(py);
                d.set_item("case", "SsToP")?;
                d.set_item("outcome", "no-interaction")?;
                d.set_item("cos_alpha", cos_alpha)?;
                d.set_item("threshold", threshold)?;
                results.push(d.into());
            }
        },
        _ => {
            let (pr, sr) = solve_ps(&cfg, &p).map_err(err)?;
            push(pr)?;
            push(sr)?;
        }
    }
    Ok(results)
}

/// Closed-form interaction amplitude for one Table row.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn closed_form(
    case: &str,
    material: &Material,
    r1: f64,
    r2: f64,
    r_out: f64,
    amp1: Complex64,
    amp2: Complex64,
    alpha: f64,
    psi: f64,
) -> PyResult<Complex64> {
    let inputs = ClosedFormInputs {
        r1,
        r2,
        r_out,
        amp1,
        amp2,
        alpha,
        psi,
    };
    Ok(closed_form_amplitude(
        parse_case(case)?,
        &material.inner,
        &inputs,
    ))
}

/// Build a fully resonant configuration and evaluate the output amplitude
/// both ways; returns {"tensor", "closed_form", "alpha", "psi", "b"}.
#[pyfunction]
#[pyo3(signature = (case, material, alpha, root_index=0, amp1=Complex64::new(1.0, 0.0), amp2=Complex64::new(1.0, 0.0)))]
fn resonant_amplitudes(
    py: Python<'_>,
    case: &str,
    material: &Material,
    alpha: f64,
    root_index: usize,
    amp1: Complex64,
    amp2: Complex64,
) -> PyResult<Py<PyDict>> {
    let case = parse_case(case)?;
    let p = material.inner;
    let (cfg, out, inp) =
        resonant_pair(case, &p, alpha, root_index, amp1, amp2, (1.0, 1.0)).map_err(err)?;
    let mode = output_mode(case);
    let tensor = interaction_symbol(&p, &cfg, &out, mode)
        .map_err(err)?
        .amplitude(mode);
    let closed = closed_form_amplitude(case, &p, &inp);
    let d = PyDict::new(py);
    d.set_item("tensor", tensor)?;
    d.set_item("closed_form", closed)?;
    d.set_item("alpha", inp.alpha)?;
    d.set_item("psi", inp.psi)?;
    Ok(d.into())
}

/// The seven interaction rows for a medium:
/// [(interaction, condition, status), ...].
#[pyfunction]
fn interaction_table(material: &Material) -> Vec<(String, String, String)> {
    table_rows(&material.inner)
        .into_iter()
        .map(|r| {
            (
                r.interaction.to_string(),
                r.condition.to_string(),
                r.class.label().to_string(),
            )
        })
        .collect()
}

/// Non-vanishing classification of one row for a medium.
#[pyfunction]
fn classify(case: &str, material: &Material) -> PyResult<String> {
    Ok(classify_interaction(parse_case(case)?, &material.inner)
        .label()
        .to_string())
}

/// Recover (A, B) from measurement records (JSON array, the toolkit's
/// measurement schema); returns the RecoveryResult as a JSON string.
#[pyfunction]
#[pyo3(signature = (measurements_json, lambda_, mu, alt=false))]
fn recover_ab_json(measurements_json: &str, lambda_: f64, mu: f64, alt: bool) -> PyResult<String> {
    let ms = read_measurements_json(measurements_json).map_err(err)?;
    let rec = if alt {
        recover_ab_alt(&ms, lambda_, mu).map_err(err)?
    } else {
        recover_ab(&ms, lambda_, mu).map_err(err)?
    };
    serde_json::to_string_pretty(&rec).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Recover (lambda, mu) from straight-ray traversals
/// [(chord, "p"|"s", time), ...].
#[pyfunction]
fn recover_lame_py(traversals: Vec<(f64, String, f64)>) -> PyResult<(f64, f64)> {
    let ts: Vec<Traversal> = traversals
        .into_iter()
        .map(|(chord, mode, time)| {
            Ok(Traversal {
                chord,
                mode: parse_wave_mode(&mode)?,
                time,
            })
        })
        .collect::<PyResult<_>>()?;
    recover_lame(&ts).map_err(err)
}

#[pymodule]
#[pyo3(name = "elastowave")]
fn elastowave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Material>()?;
    m.add_function(wrap_pyfunction!(boundary_classification, m)?)?;
    m.add_function(wrap_pyfunction!(resonance_roots, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(resonant_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_table, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(recover_ab_json, m)?)?;
    m.add_function(wrap_pyfunction!(recover_lame_py, m)?)?;
    Ok(())
}
