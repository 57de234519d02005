//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! inputs may be `Fraction`, `int`, or `"p/q"` strings. Structured results
//! (reports, certificates, witnesses) come back as plain dicts.

use ltumatch::model::ValidateOptions;
use ltumatch::oracle::OracleCaps;
use ltumatch::rational::{self, Rational};
use ltumatch::support::EnumerationOptions;
use ltumatch::{
    build_counterexample, check_tu, enumerate_equilibria, enumerate_stable, equilibrium_to_outcome,
    equilibrium_to_outcome_n, exchange_test, lemke_howson, normalize_outputs,
    outcome_to_equilibrium, to_game, to_game_n, verify_stable, verify_stable_m2o, BimatrixGame,
    Error, LtuProblem, ManyToOneOutcome, ManyToOneProblem, MixedProfile, Outcome, TuWitness,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;

create_exception!(pyltumatch, LtuError, PyValueError);

fn err(e: Error) -> PyErr {
    LtuError::new_err(e.to_string())
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?.to_string();
    rational::parse(&text).map_err(err)
}

fn to_vector(obj: &Bound<'_, PyAny>) -> PyResult<Vec<Rational>> {
    obj.try_iter()?.map(|item| to_rational(&item?)).collect()
}

fn to_matrix(obj: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<Rational>>> {
    obj.try_iter()?.map(|row| to_vector(&row?)).collect()
}

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((rational::format(value),))
}

fn vector<'py>(py: Python<'py>, values: &[Rational]) -> PyResult<Bound<'py, PyList>> {
    let items = values
        .iter()
        .map(|v| fraction(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn matrix<'py>(py: Python<'py>, rows: &[Vec<Rational>]) -> PyResult<Bound<'py, PyList>> {
    let items = rows
        .iter()
        .map(|r| vector(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

/// Serializable result as a Python object, via the `json` module.
fn plain<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| LtuError::new_err(e.to_string()))?;
    py.import("json")?.getattr("loads")?.call1((text,))
}

/// A one-to-one matching problem with linearly transferable utility.
#[pyclass(name = "Problem", frozen, from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: LtuProblem,
}

#[pymethods]
impl PyProblem {
    /// Parses the JSON problem format (pairs, linear constraints, or tax blocks).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = LtuProblem::from_json(text, ValidateOptions::default()).map_err(err)?;
        Ok(PyProblem { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LtuError::new_err(e.to_string()))?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn workers(&self) -> Vec<String> {
        self.inner.workers().to_vec()
    }

    #[getter]
    fn jobs(&self) -> Vec<String> {
        self.inner.jobs().to_vec()
    }

    #[getter]
    fn lambda_<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        matrix(py, self.inner.lambda())
    }

    #[getter]
    fn phi<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        matrix(py, self.inner.phi())
    }

    fn to_game(&self) -> PyResult<PyGame> {
        Ok(PyGame {
            inner: to_game(&self.inner).map_err(err)?,
        })
    }

    /// Lemke-Howson from `label`, mapped back to a verified outcome.
    #[pyo3(signature = (label = 0))]
    fn solve(&self, label: usize) -> PyResult<PyOutcome> {
        let game = to_game(&self.inner).map_err(err)?;
        let cert = lemke_howson(&game, label).map_err(err)?;
        let inner = equilibrium_to_outcome(&self.inner, &cert.profile).map_err(err)?;
        Ok(PyOutcome { inner })
    }

    /// Stability report as a dict with `stable` and `violations`.
    fn verify<'py>(&self, py: Python<'py>, outcome: &PyOutcome) -> PyResult<Bound<'py, PyAny>> {
        plain(
            py,
            &verify_stable(&self.inner, &outcome.inner).map_err(err)?,
        )
    }

    fn is_stable(&self, outcome: &PyOutcome) -> PyResult<bool> {
        Ok(verify_stable(&self.inner, &outcome.inner)
            .map_err(err)?
            .stable)
    }

    /// `(p, q)` profile of an outcome in the hide-and-seek game.
    fn equilibrium_of<'py>(
        &self,
        py: Python<'py>,
        outcome: &PyOutcome,
    ) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyList>)> {
        let profile = outcome_to_equilibrium(&self.inner, &outcome.inner).map_err(err)?;
        Ok((vector(py, &profile.p)?, vector(py, &profile.q)?))
    }

    fn outcome_at(&self, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<PyOutcome> {
        let profile = MixedProfile::new(to_vector(p)?, to_vector(q)?).map_err(err)?;
        let inner = equilibrium_to_outcome(&self.inner, &profile).map_err(err)?;
        Ok(PyOutcome { inner })
    }

    /// TU witness: scalings when TU, otherwise the offending quadruple and cross ratio.
    fn check_tu<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        plain(py, &check_tu(&self.inner))
    }

    fn exchangeable(&self, first: &PyOutcome, second: &PyOutcome) -> PyResult<bool> {
        Ok(exchange_test(&self.inner, &first.inner, &second.inner)
            .map_err(err)?
            .exchangeable())
    }

    /// Two stable, non-exchangeable outcomes of a folded 2x2 subproblem, as
    /// `(subproblem, black, white)`.
    fn counterexample(&self) -> PyResult<(PyProblem, PyOutcome, PyOutcome)> {
        let TuWitness::NotTu { quadruple, .. } = check_tu(&self.inner) else {
            return Err(err(Error::NotTu));
        };
        let ce = build_counterexample(&self.inner, quadruple).map_err(err)?;
        Ok((
            PyProblem {
                inner: ce.subproblem.folded,
            },
            PyOutcome { inner: ce.black },
            PyOutcome { inner: ce.white },
        ))
    }

    /// One stable outcome per feasible complementarity pattern.
    #[pyo3(signature = (max_pairs = 9, max_types = 8))]
    fn stable_outcomes(&self, max_pairs: usize, max_types: usize) -> PyResult<Vec<PyOutcome>> {
        let caps = OracleCaps {
            max_pairs,
            max_types,
        };
        let reps = enumerate_stable(&self.inner, caps).map_err(err)?;
        Ok(reps
            .into_iter()
            .map(|r| PyOutcome { inner: r.outcome })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem({} workers, {} jobs)",
            self.inner.num_workers(),
            self.inner.num_jobs()
        )
    }
}

/// Matching `mu` with utilities `u` (workers) and `v` (jobs).
#[pyclass(name = "Outcome", frozen, from_py_object)]
#[derive(Clone)]
struct PyOutcome {
    inner: Outcome,
}

#[pymethods]
impl PyOutcome {
    #[new]
    fn new(mu: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>, v: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyOutcome {
            inner: Outcome {
                mu: to_matrix(mu)?,
                u: to_vector(u)?,
                v: to_vector(v)?,
            },
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| LtuError::new_err(e.to_string()))?;
        Ok(PyOutcome { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("outcomes serialize")
    }

    #[getter]
    fn mu<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        matrix(py, &self.inner.mu)
    }

    #[getter]
    fn u<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        vector(py, &self.inner.u)
    }

    #[getter]
    fn v<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        vector(py, &self.inner.v)
    }

    fn __eq__(&self, other: &PyOutcome) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Outcome({})", self.to_json())
    }
}

/// A bimatrix game: the hider minimizes `loss`, the seeker maximizes `payoff`.
#[pyclass(name = "Game", frozen)]
struct PyGame {
    inner: BimatrixGame,
}

#[pymethods]
impl PyGame {
    #[getter]
    fn rows(&self) -> Vec<String> {
        self.inner.rows.clone()
    }

    #[getter]
    fn cols(&self) -> Vec<String> {
        self.inner.cols.clone()
    }

    #[getter]
    fn loss<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        matrix(py, &self.inner.loss)
    }

    #[getter]
    fn payoff<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        matrix(py, &self.inner.payoff)
    }

    /// Equilibrium certificate (profile, values, supports) as a dict.
    #[pyo3(signature = (label = 0))]
    fn lemke_howson<'py>(&self, py: Python<'py>, label: usize) -> PyResult<Bound<'py, PyAny>> {
        plain(py, &lemke_howson(&self.inner, label).map_err(err)?)
    }

    /// All extreme equilibria, as certificate dicts.
    fn equilibria<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let certs = enumerate_equilibria(&self.inner, EnumerationOptions::full(&self.inner))
            .map_err(err)?;
        plain(py, &certs)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// A many-to-one problem over arrangements of up to `N` members.
#[pyclass(name = "ManyToOneProblem", frozen)]
struct PyManyToOne {
    inner: ManyToOneProblem,
}

#[pymethods]
impl PyManyToOne {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyManyToOne {
            inner: ManyToOneProblem::from_json(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LtuError::new_err(e.to_string()))?;
        Self::from_json(&text)
    }

    /// Solves through the output-shifted game; returns `(mu, u)` in original units.
    #[pyo3(signature = (label = 0))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        label: usize,
    ) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyList>)> {
        let (shifted, shift) = normalize_outputs(&self.inner);
        let game = to_game_n(&shifted).map_err(err)?;
        let cert = lemke_howson(&game, label).map_err(err)?;
        let moved = equilibrium_to_outcome_n(&shifted, &cert.profile).map_err(err)?;
        let u: Vec<Rational> = moved.u.iter().map(|u| u - &shift).collect();
        Ok((vector(py, &moved.mu)?, vector(py, &u)?))
    }

    fn is_stable(&self, mu: &Bound<'_, PyAny>, u: &Bound<'_, PyAny>) -> PyResult<bool> {
        let outcome = ManyToOneOutcome {
            mu: to_vector(mu)?,
            u: to_vector(u)?,
        };
        Ok(verify_stable_m2o(&self.inner, &outcome)
            .map_err(err)?
            .stable)
    }
}

#[pymodule]
fn pyltumatch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyOutcome>()?;
    m.add_class::<PyGame>()?;
    m.add_class::<PyManyToOne>()?;
    m.add("LtuError", m.py().get_type::<LtuError>())?;
    Ok(())
}
