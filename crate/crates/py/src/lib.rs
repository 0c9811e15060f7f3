//! Python module `minfact_py`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use minfact::bijection::{phi, psi, psi_inverse};
use minfact::perm::{enumerate_minimal_factorizations, Cycle, Factorization as CoreFactorization, ENUMERATION_BOUND};
use minfact::sampling::{critical_equivalent, rng_from_seed, FactorizationSampler, WeightSequence};
use minfact::stats;
use minfact::svg::{render_lamination, SvgOptions};
use minfact::trees::LabelledBiTypeTree;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn weights(spec: &str) -> PyResult<WeightSequence> {
    if spec.trim_start().starts_with('{') {
        serde_json::from_str(spec).map_err(err)
    } else {
        WeightSequence::preset(spec).map_err(err)
    }
}

#[pyclass(name = "Factorization", from_py_object)]
#[derive(Clone)]
struct PyFactorization {
    inner: CoreFactorization,
}

#[pymethods]
impl PyFactorization {
    #[new]
    fn new(n: u32, cycles: Vec<Vec<u32>>) -> PyResult<Self> {
        let cycles = cycles.into_iter().map(Cycle::new).collect::<Result<Vec<_>, _>>().map_err(err)?;
        Ok(PyFactorization { inner: CoreFactorization::new(n, cycles) })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(err)?;
        Ok(PyFactorization { inner: CoreFactorization::from_json(&v).map_err(err)? })
    }

    #[staticmethod]
    fn from_tree_json(s: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(err)?;
        let t = LabelledBiTypeTree::from_json(&v).map_err(err)?;
        Ok(PyFactorization { inner: psi_inverse(&t).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn cycles(&self) -> Vec<Vec<u32>> {
        self.inner.cycles.iter().map(|c| c.elems().to_vec()).collect()
    }

    fn k(&self) -> usize {
        self.inner.k()
    }

    fn largest_cycle(&self) -> usize {
        self.inner.largest_cycle()
    }

    fn is_minimal(&self) -> bool {
        self.inner.is_minimal()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn tree_json(&self) -> PyResult<String> {
        Ok(psi(&self.inner).map_err(err)?.to_json().to_string())
    }

    #[pyo3(signature = (size=None))]
    fn svg(&self, size: Option<f64>) -> PyResult<String> {
        let lam = phi(&self.inner).map_err(err)?;
        let o = SvgOptions { size: size.unwrap_or(512.0), ..SvgOptions::default() };
        Ok(render_lamination(&lam, &o))
    }

    fn __repr__(&self) -> String {
        format!("Factorization({}, {})", self.inner.n, self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyfunction]
#[pyo3(signature = (n, class_=None))]
fn enumerate(n: u32, class_: Option<Vec<usize>>) -> PyResult<Vec<PyFactorization>> {
    let all = enumerate_minimal_factorizations(n, class_.as_deref(), ENUMERATION_BOUND).map_err(err)?;
    Ok(all.into_iter().map(|inner| PyFactorization { inner }).collect())
}

#[pyfunction]
fn sample(n: usize, weights_spec: &str, seed: u64) -> PyResult<PyFactorization> {
    let mut s = FactorizationSampler::new(&weights(weights_spec)?).map_err(err)?;
    let f = s.sample(n, &mut rng_from_seed(seed, 0)).map_err(err)?;
    Ok(PyFactorization { inner: f })
}

/// `(s, nu_0, sigma^2 or None)`.
#[pyfunction]
fn critical(weights_spec: &str) -> PyResult<(f64, f64, Option<f64>)> {
    let ce = critical_equivalent(&weights(weights_spec)?).map_err(err)?;
    Ok((ce.s, ce.nu0, ce.sigma2))
}

#[pyfunction]
fn p_nu(weights_spec: &str) -> PyResult<f64> {
    let ce = critical_equivalent(&weights(weights_spec)?).map_err(err)?;
    Ok(stats::exact_p_nu(&ce).value)
}

/// Report JSON for `cycle_count`, `largest_cycle` or `black_fraction`.
#[pyfunction]
#[pyo3(signature = (estimator, weights_spec, n, trials, seed, eps=0.05))]
fn estimate(estimator: &str, weights_spec: &str, n: usize, trials: usize, seed: u64, eps: f64) -> PyResult<String> {
    let w = weights(weights_spec)?;
    let r = match estimator {
        "cycle_count" => stats::estimate_cycle_count(&w, n, trials, seed),
        "largest_cycle" => stats::estimate_largest_cycle(&w, n, trials, seed),
        "black_fraction" => stats::estimate_black_fraction(&w, n, trials, eps, seed),
        other => return Err(err(format!("unknown estimator {other:?}"))),
    }
    .map_err(err)?;
    Ok(r.to_json().to_string())
}

#[pyfunction]
fn counting_suite(n_max: u32) -> PyResult<bool> {
    Ok(stats::counting_suite(n_max).map_err(err)?.pass)
}

#[pymodule]
fn minfact_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFactorization>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(critical, m)?)?;
    m.add_function(wrap_pyfunction!(p_nu, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(counting_suite, m)?)?;
    Ok(())
}
