//! Python bindings: the `Angle` class plus the main operations (convergent
//! ladders, Birkhoff sums and Θ ratios, regime certificates and verdicts,
//! and the two simulators). Exact rationals cross the boundary as "p/q"
//! strings; everything numeric is f64.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use num_traits::ToPrimitive;
use toruslab_core::birkhoff::{
    birkhoff_total, build_e, e_measure, j_involution as j_inv, psi_eval, sample_e_points,
    sector_sum_bounds, theta as theta_ratio, SumMode,
};
use toruslab_core::cf::{
    beta0_partial, convergents, ell_sequence, expand_cf, not_on_orbit_margin, AngleJson,
    CirclePoint,
};
use toruslab_core::classify::{
    construct_rapid_growth_angle, construct_w_angle, growth_check, khinchin_levy_partial,
    liouville_witnesses, regime_verdict, sum_inv_log_a, w_membership,
};
use toruslab_core::flow::{
    euler_torus_simulate, mu_infinity as mu_inf, preset_config, section_setup,
    special_flow_simulate, FlowParams, Preset, SpecialFlowSpec, SpeedModel,
};
use toruslab_core::numeric::{mod1, rat_to_f64};
use toruslab_core::{Angle as CoreAngle, Int, Rat};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rat(s: &str) -> PyResult<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().map_err(err)?;
        let d: Int = d.trim().parse().map_err(err)?;
        if d == Int::from(0) {
            return Err(PyValueError::new_err("zero denominator"));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: Int = s.parse().map_err(err)?;
        Ok(Rat::from(n))
    }
}

fn rat_str(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_mode(mode: &str) -> PyResult<SumMode> {
    match mode {
        "exact" => Ok(SumMode::Exact),
        "double" => Ok(SumMode::Double),
        other => Err(PyValueError::new_err(format!(
            "mode must be exact|double, got {other}"
        ))),
    }
}

/// An irrational angle as a finite partial-quotient program with a
/// validity horizon.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Angle {
    inner: CoreAngle,
}

#[pymethods]
impl Angle {
    /// Angle from partial quotients (arbitrary-precision ints accepted).
    #[new]
    fn new(quotients: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let qs: Vec<Int> = quotients
            .iter()
            .map(|q| q.str()?.to_string().parse::<Int>().map_err(err))
            .collect::<PyResult<_>>()?;
        Ok(Angle {
            inner: CoreAngle::from_quotients(&qs).map_err(err)?,
        })
    }

    /// Canonical expansion of a rational p/q in [0, 1), truncated at depth.
    #[staticmethod]
    fn from_rational(value: &str, depth: usize) -> PyResult<Self> {
        let v = parse_rat(value)?;
        let qs = expand_cf(&v, depth);
        Ok(Angle {
            inner: CoreAngle::from_quotients(&qs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn sqrt2(len: usize) -> Self {
        Angle {
            inner: toruslab_core::sqrt2_minus_one_prefix(len),
        }
    }

    #[staticmethod]
    fn golden(ones: usize) -> Self {
        Angle {
            inner: toruslab_core::golden_prefix(ones),
        }
    }

    /// Extend a seed so the angle has `levels` witnessed (ν, k) levels.
    #[staticmethod]
    fn construct_w(nu: &str, k: u64, levels: usize) -> PyResult<Self> {
        let nu = parse_rat(nu)?;
        let seed = [Int::from(0), Int::from(2)];
        Ok(Angle {
            inner: construct_w_angle(&nu, k, &seed, levels).map_err(err)?,
        })
    }

    /// Angle with q_n ≥ C·exp(n^(2+γ)) at every constructed level.
    #[staticmethod]
    fn construct_rapid(c: f64, gamma: f64, levels: usize) -> PyResult<Self> {
        Ok(Angle {
            inner: construct_rapid_growth_angle(c, gamma, levels, None).map_err(err)?,
        })
    }

    fn quotients(&self) -> Vec<String> {
        self.inner
            .quotients()
            .iter()
            .map(|a| a.to_string())
            .collect()
    }

    fn value(&self) -> String {
        rat_str(self.inner.value())
    }

    fn value_f64(&self) -> f64 {
        self.inner.to_f64()
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    /// q_n as a decimal string.
    fn q(&self, n: usize) -> PyResult<String> {
        let table = convergents(&self.inner);
        if n >= table.rows().len() {
            return Err(PyValueError::new_err("level out of range"));
        }
        Ok(table.q(n).to_string())
    }

    fn lambda_f64(&self, n: usize) -> PyResult<f64> {
        let table = convergents(&self.inner);
        if n >= table.rows().len() {
            return Err(PyValueError::new_err("level out of range"));
        }
        Ok(rat_to_f64(table.lambda(n)))
    }

    /// The full ladder as a JSON string (decimal-string rationals).
    fn convergents_json(&self) -> String {
        convergents(&self.inner).to_json().to_string()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&AngleJson::of(&self.inner)).unwrap()
    }

    /// (Σ_{n≤N} ρ_n as "p/q", tail bound λ^(N+1) as f64).
    fn beta0_partial(&self, level: usize) -> PyResult<(String, f64)> {
        let (v, tail) = beta0_partial(&self.inner, level).map_err(err)?;
        Ok((rat_str(v.value()), rat_to_f64(&tail)))
    }

    fn ell(&self, level: usize) -> PyResult<Vec<String>> {
        Ok(ell_sequence(&self.inner, level)
            .map_err(err)?
            .iter()
            .map(|e| e.to_string())
            .collect())
    }

    /// (min distance over |k| ≤ K of ‖kα − β‖, index attaining 0 if any).
    fn not_on_orbit_margin(&self, beta: &str, k_max: u64) -> PyResult<(f64, Option<i64>)> {
        let beta = CirclePoint::new(parse_rat(beta)?);
        let (margin, at) = not_on_orbit_margin(&self.inner, &beta, k_max).map_err(err)?;
        Ok((rat_to_f64(&margin), at))
    }

    fn __repr__(&self) -> String {
        format!(
            "Angle([{}...], value={:.12}, horizon={})",
            self.inner
                .quotients()
                .iter()
                .take(6)
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.inner.to_f64(),
            self.inner.horizon()
        )
    }
}

/// ‖x‖: distance to the nearest integer, x given as "p/q".
#[pyfunction]
fn circle_norm(x: &str) -> PyResult<f64> {
    Ok(rat_to_f64(&CirclePoint::new(parse_rat(x)?).norm()))
}

/// (ψ₁, ψ₂, ψ) at y.
#[pyfunction]
fn psi(y: &str) -> PyResult<(f64, f64, f64)> {
    let t = psi_eval(&CirclePoint::new(parse_rat(y)?)).map_err(err)?;
    Ok((rat_to_f64(&t.psi1), rat_to_f64(&t.psi2), rat_to_f64(&t.psi)))
}

/// Birkhoff sum S_n(x) of 1/‖x + iα‖: dict with total, exact "p/q" when in
/// exact mode, the condition flag and the double-mode error bound.
#[pyfunction]
#[pyo3(signature = (angle, x, n, mode = "exact"))]
fn birkhoff_sum<'py>(
    py: Python<'py>,
    angle: &Angle,
    x: &str,
    n: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let x = CirclePoint::new(parse_rat(x)?);
    let series = birkhoff_total(&angle.inner, &x, n, parse_mode(mode)?).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("total", series.total)?;
    out.set_item(
        "exact",
        series.exact_total.as_ref().and_then(|e| {
            // skip the reduction once the unreduced denominator is huge
            (e.den.bits() < 200_000).then(|| rat_str(&e.to_rat()))
        }),
    )?;
    out.set_item("condition_flagged", series.condition_flagged)?;
    out.set_item("rel_error_bound", series.rel_error_bound)?;
    Ok(out)
}

/// Θ_n^β(x) = S_n(x)/S_n(x−β): (float value, exact "p/q" in exact mode).
#[pyfunction]
#[pyo3(signature = (angle, x, beta, n, mode = "exact"))]
fn theta(
    angle: &Angle,
    x: &str,
    beta: &str,
    n: u64,
    mode: &str,
) -> PyResult<(f64, Option<String>)> {
    let x = CirclePoint::new(parse_rat(x)?);
    let beta = CirclePoint::new(parse_rat(beta)?);
    let t = theta_ratio(&angle.inner, &x, &beta, n, parse_mode(mode)?).map_err(err)?;
    Ok((t.value, t.exact.as_ref().map(rat_str)))
}

/// J_n^β(x) = β − (n−1)α − x mod 1, as "p/q".
#[pyfunction]
fn j_involution(angle: &Angle, n: u64, beta: &str, x: &str) -> PyResult<String> {
    let beta = CirclePoint::new(parse_rat(beta)?);
    let x = CirclePoint::new(parse_rat(x)?);
    Ok(rat_str(j_inv(&angle.inner, n, &beta, &x).value()))
}

/// Physical-measure weights (weight_p, weight_q) from the Hessian
/// determinants.
#[pyfunction]
fn mu_infinity(d_p: f64, d_q: f64) -> PyResult<(f64, f64)> {
    mu_inf(d_p, d_q).map_err(err)
}

/// Sector-sum bounds at level n: dict with sum, lower, upper, holds.
#[pyfunction]
fn sector_bounds<'py>(
    py: Python<'py>,
    angle: &Angle,
    y: &str,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let y = CirclePoint::new(parse_rat(y)?);
    let r = sector_sum_bounds(&angle.inner, &y, n).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("sum", r.sum)?;
    out.set_item("lower", r.lower)?;
    out.set_item("upper", r.upper)?;
    out.set_item("holds", r.holds)?;
    Ok(out)
}

/// Exact measure of E_{n,ℓ} as ("p/q", matches ℓ·q_n·λ^(n)).
#[pyfunction]
fn e_set_measure(angle: &Angle, n: usize, ell: u64) -> PyResult<(String, bool)> {
    let union = build_e(&angle.inner, n, ell).map_err(err)?;
    let table = convergents(&angle.inner);
    let closed = e_measure(&table, n, ell);
    Ok((rat_str(union.measure()), union.measure() == &closed))
}

/// Measure-uniform sample points of E_{n,ℓ} as "p/q" strings.
#[pyfunction]
fn e_set_samples(
    angle: &Angle,
    n: usize,
    ell: u64,
    count: usize,
    seed: u64,
) -> PyResult<Vec<String>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_e_points(&angle.inner, n, ell, count, &mut rng)
        .map_err(err)?
        .iter()
        .map(|(x, _)| rat_str(x.value()))
        .collect())
}

/// Diophantine certificates as a JSON string.
#[pyfunction]
#[pyo3(signature = (angle, depth, nu = "1", k = 3))]
fn certificates_json(angle: &Angle, depth: usize, nu: &str, k: u64) -> PyResult<String> {
    let nu = parse_rat(nu)?;
    let depth = depth.min(angle.inner.horizon());
    let value = serde_json::json!({
        "w_membership": w_membership(&angle.inner, &nu, k, depth),
        "liouville": liouville_witnesses(&angle.inner, 2, depth),
        "growth": growth_check(&angle.inner, 1e-6, 0.5, depth),
        "khinchin_levy_partials": khinchin_levy_partial(&angle.inner, depth),
        "sum_inv_log_a": sum_inv_log_a(&angle.inner, depth),
    });
    Ok(value.to_string())
}

fn flow_params(
    angle: &Angle,
    p: (&str, &str),
    q: (&str, &str),
    d_p: f64,
    d_q: f64,
    x0: &str,
) -> PyResult<FlowParams> {
    Ok(FlowParams {
        angle: angle.inner.clone(),
        p: (parse_rat(p.0)?, parse_rat(p.1)?),
        q: (parse_rat(q.0)?, parse_rat(q.1)?),
        d_p,
        d_q,
        section_x0: parse_rat(x0)?,
        speed_model: SpeedModel::MinDistance,
    })
}

/// Regime verdict for (α, p, q) as a JSON string.
#[pyfunction]
#[pyo3(signature = (angle, p, q, d_p = 1.0, d_q = 1.0, x0 = "1/4", depth = 12))]
#[allow(clippy::too_many_arguments)]
fn verdict_json(
    angle: &Angle,
    p: (String, String),
    q: (String, String),
    d_p: f64,
    d_q: f64,
    x0: &str,
    depth: usize,
) -> PyResult<String> {
    let params = flow_params(angle, (&p.0, &p.1), (&q.0, &q.1), d_p, d_q, x0)?;
    let v = regime_verdict(&angle.inner, &params, depth.min(angle.inner.horizon())).map_err(err)?;
    serde_json::to_string(&v).map_err(err)
}

/// Special-flow run over the section: dict with final occupancies, the
/// Θ-proxy tail extrema and the ledger residual.
#[pyfunction]
#[pyo3(signature = (angle, p, q, d_p, d_q, x0, start, returns, tail_start = None))]
#[allow(clippy::too_many_arguments)]
fn special_flow<'py>(
    py: Python<'py>,
    angle: &Angle,
    p: (String, String),
    q: (String, String),
    d_p: f64,
    d_q: f64,
    x0: &str,
    start: &str,
    returns: u64,
    tail_start: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let params = flow_params(angle, (&p.0, &p.1), (&q.0, &q.1), d_p, d_q, x0)?;
    let section = section_setup(&params).map_err(err)?;
    let spec = SpecialFlowSpec {
        returns,
        record_points: 200,
        tail_start: tail_start.unwrap_or(returns / 2),
    };
    let start = CirclePoint::new(parse_rat(start)?);
    let s = special_flow_simulate(&params, &section, &start, &spec).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("beta", rat_str(section.beta.value()))?;
    out.set_item("final_occ_p", s.final_row.occ_p)?;
    out.set_item("final_occ_q", s.final_row.occ_q)?;
    out.set_item("final_theta_proxy", s.final_row.theta_proxy)?;
    out.set_item("theta_tail_min", s.theta_tail.min)?;
    out.set_item("theta_tail_max", s.theta_tail.max)?;
    out.set_item("occ_q_tail_min", s.occ_q_tail.min)?;
    out.set_item("occ_q_tail_max", s.occ_q_tail.max)?;
    out.set_item("ledger_residual", s.ledger_residual)?;
    Ok(out)
}

/// Euler torus integration of a named figure preset; returns the final
/// occupancy fractions and the occupancy curve on the log grid.
#[pyfunction]
#[pyo3(signature = (preset, steps = None))]
fn euler_preset<'py>(
    py: Python<'py>,
    preset: &str,
    steps: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let preset = Preset::by_name(preset)
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset '{preset}'")))?;
    let mut cfg = preset_config(preset);
    if let Some(steps) = steps {
        cfg.euler.steps = steps;
    }
    let series = euler_torus_simulate(&cfg.params, &cfg.euler).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("final_occ_p", series.final_occ_p)?;
    out.set_item("final_occ_q", series.final_occ_q)?;
    out.set_item("stagnated_at", series.stagnated_at)?;
    let curve = PyList::new(py, series.occupancy.iter().map(|(t, p, q)| (*t, *p, *q)))?;
    out.set_item("occupancy", curve)?;
    Ok(out)
}

/// mod-1 sum of rationals, handy for building orbit-related test points.
#[pyfunction]
fn mod1_sum(terms: Vec<String>) -> PyResult<String> {
    let mut acc = Rat::from(Int::from(0));
    for t in terms {
        acc += parse_rat(&t)?;
    }
    Ok(rat_str(&mod1(&acc)))
}

/// q_n·α − p_n data as f64 for quick plots: list of (n, q_n as float,
/// lambda_n).
#[pyfunction]
fn ladder_f64(angle: &Angle) -> Vec<(usize, f64, f64)> {
    let table = convergents(&angle.inner);
    table
        .rows()
        .iter()
        .map(|r| {
            (
                r.n,
                r.q.to_f64().unwrap_or(f64::INFINITY),
                rat_to_f64(&r.lambda),
            )
        })
        .collect()
}

#[pymodule]
fn toruslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Angle>()?;
    m.add_function(wrap_pyfunction!(circle_norm, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(birkhoff_sum, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(j_involution, m)?)?;
    m.add_function(wrap_pyfunction!(mu_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(sector_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(e_set_measure, m)?)?;
    m.add_function(wrap_pyfunction!(e_set_samples, m)?)?;
    m.add_function(wrap_pyfunction!(certificates_json, m)?)?;
    m.add_function(wrap_pyfunction!(verdict_json, m)?)?;
    m.add_function(wrap_pyfunction!(special_flow, m)?)?;
    m.add_function(wrap_pyfunction!(euler_preset, m)?)?;
    m.add_function(wrap_pyfunction!(mod1_sum, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_f64, m)?)?;
    Ok(())
}
