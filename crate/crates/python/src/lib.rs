//! Python bindings: `import pydilogkit`.

use std::collections::HashMap;
use std::path::Path;

use dilogkit::algebra::{roots_all, IntPolynomial};
use dilogkit::expr::{self, Binding};
use dilogkit::harness::{self, CorpusItem, VerifyConfig, DEFAULT_SEED};
use dilogkit::ladder::{check_ladder, LadderSpec};
use dilogkit::numerics::{format_real, format_sci, parse_float};
use dilogkit::relation::{find_integer_relation, RelationProblem};
use dilogkit::{Error, PrecisionContext, C};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyComplex;

fn to_py(e: Error) -> PyErr {
    match e.root_cause() {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Syntax { .. } | Error::Unbound(_) | Error::Invalid(_) | Error::EmptyDomain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn context(digits: u32) -> PyResult<PrecisionContext> {
    if digits == 0 {
        return Err(PyValueError::new_err("digits must be positive"));
    }
    Ok(PrecisionContext::new(digits))
}

/// A complex value printed to the working precision.
#[pyclass(frozen, skip_from_py_object, module = "pydilogkit")]
#[derive(Clone)]
struct Value {
    #[pyo3(get)]
    re: String,
    #[pyo3(get)]
    im: String,
    #[pyo3(get)]
    digits: u32,
}

impl Value {
    fn new(z: &C, digits: u32) -> Value {
        Value { re: format_real(z.real(), digits), im: format_real(z.imag(), digits), digits }
    }
}

#[pymethods]
impl Value {
    fn __complex__<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyComplex>> {
        let re: f64 = self.re.parse().map_err(|_| PyValueError::new_err("bad real part"))?;
        let im: f64 = self.im.parse().map_err(|_| PyValueError::new_err("bad imaginary part"))?;
        Ok(PyComplex::from_doubles(py, re, im))
    }

    fn __float__(&self) -> PyResult<f64> {
        if self.im != "0" {
            return Err(PyValueError::new_err("value is not real"));
        }
        self.re.parse().map_err(|_| PyValueError::new_err("bad real part"))
    }

    fn is_real(&self) -> bool {
        self.im == "0"
    }

    fn __repr__(&self) -> String {
        if self.im == "0" {
            format!("Value({})", self.re)
        } else {
            format!("Value({} + {}*i)", self.re, self.im)
        }
    }
}

/// Outcome of one corpus file.
#[pyclass(frozen, skip_from_py_object, module = "pydilogkit")]
#[derive(Clone)]
struct Report {
    #[pyo3(get)]
    id: String,
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    outcome: String,
    #[pyo3(get)]
    residual: String,
    #[pyo3(get)]
    tol_exp: i64,
    #[pyo3(get)]
    passed: bool,
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!("Report({} {} residual {})", self.id, self.outcome, self.residual)
    }
}

#[pyclass(frozen, module = "pydilogkit")]
struct Summary {
    #[pyo3(get)]
    reports: Vec<Report>,
    #[pyo3(get)]
    passed: usize,
    #[pyo3(get)]
    failed: usize,
    #[pyo3(get)]
    quarantined: usize,
    #[pyo3(get)]
    errors: usize,
    #[pyo3(get)]
    success: bool,
    line: String,
}

#[pymethods]
impl Summary {
    fn __str__(&self) -> String {
        self.line.clone()
    }

    fn __repr__(&self) -> String {
        format!("Summary({})", self.line)
    }
}

/// Evaluate an expression; `bind` maps parameter names to expression strings.
#[pyfunction]
#[pyo3(signature = (text, digits = 60, bind = None))]
fn eval(text: &str, digits: u32, bind: Option<HashMap<String, String>>) -> PyResult<Value> {
    let ctx = context(digits)?;
    let mut b = Binding::new();
    for (name, e) in bind.unwrap_or_default() {
        let v = expr::eval_str(&e, &Binding::new(), &ctx).map_err(to_py)?;
        b.insert(name, v);
    }
    let v = expr::eval_str(text, &b, &ctx).map_err(to_py)?;
    Ok(Value::new(&v, digits))
}

/// Li2 at an expression argument.
#[pyfunction]
#[pyo3(signature = (z, digits = 60))]
fn li2(z: &str, digits: u32) -> PyResult<Value> {
    eval(&format!("Li2({z})"), digits, None)
}

/// All complex roots of an integer polynomial, in canonical order.
#[pyfunction]
#[pyo3(signature = (poly, digits = 30))]
fn roots(poly: &str, digits: u32) -> PyResult<Vec<Value>> {
    let ctx = context(digits)?;
    let p = IntPolynomial::parse(poly).map_err(to_py)?;
    Ok(roots_all(&p, &ctx).map_err(to_py)?.iter().map(|z| Value::new(z, digits)).collect())
}

/// Integer relation among decimal strings, or None when every relation exceeds `max_norm`.
#[pyfunction]
#[pyo3(signature = (values, max_norm = 1000, digits = 60))]
fn pslq(values: Vec<String>, max_norm: u64, digits: u32) -> PyResult<Option<Vec<i64>>> {
    let ctx = context(digits)?;
    let xs = values
        .iter()
        .map(|s| parse_float(s, ctx.prec()))
        .collect::<dilogkit::Result<Vec<_>>>()
        .map_err(to_py)?;
    let res = find_integer_relation(&RelationProblem::new(xs, max_norm, digits), &ctx).map_err(to_py)?;
    match res.coeffs {
        None => Ok(None),
        Some(cs) => cs
            .iter()
            .map(|c| c.to_i64().ok_or_else(|| PyArithmeticError::new_err("coefficient overflow")))
            .collect::<PyResult<Vec<_>>>()
            .map(Some),
    }
}

/// Verify a corpus file or directory.
#[pyfunction]
#[pyo3(signature = (path, digits = 60, seed = DEFAULT_SEED, tol_exp = None, jobs = 0))]
fn verify(path: &str, digits: u32, seed: u64, tol_exp: Option<i64>, jobs: usize) -> PyResult<Summary> {
    let ctx = context(digits)?;
    let cfg = VerifyConfig { seed, tol_exp, jobs };
    let p = Path::new(path);
    let s = if p.is_dir() {
        harness::verify_corpus(p, &ctx, &cfg).map_err(to_py)?
    } else {
        let item = CorpusItem::load(p).map_err(to_py)?;
        harness::Summary::from_reports(vec![item.verify(&ctx, &cfg)], &ctx, &cfg)
    };
    let reports = s
        .reports
        .iter()
        .map(|r| Report {
            id: r.id.clone(),
            kind: r.kind.to_string(),
            outcome: r.outcome.label().to_string(),
            residual: r.max_residual_text.clone(),
            tol_exp: r.tol_exp,
            passed: r.pass,
        })
        .collect();
    Ok(Summary {
        reports,
        passed: s.passed,
        failed: s.failed,
        quarantined: s.quarantined,
        errors: s.errors,
        success: s.success,
        line: s.line(),
    })
}

/// Check a ladder file; returns (passed, residual).
#[pyfunction]
#[pyo3(signature = (path, digits = 60, tol_exp = None))]
fn ladder(path: &str, digits: u32, tol_exp: Option<i64>) -> PyResult<(bool, String)> {
    let ctx = context(digits)?;
    let spec = LadderSpec::load(Path::new(path)).map_err(to_py)?;
    let r = check_ladder(&spec, &ctx, tol_exp);
    if let Some(e) = r.error {
        return Err(PyArithmeticError::new_err(e));
    }
    Ok((r.pass, r.residual_text))
}

/// |Re residual| of an integer relation on the given values.
#[pyfunction]
#[pyo3(signature = (coeffs, values, digits = 60))]
fn relation_residual(coeffs: Vec<i64>, values: Vec<String>, digits: u32) -> PyResult<String> {
    let ctx = context(digits)?;
    let xs = values
        .iter()
        .map(|s| parse_float(s, ctx.prec()))
        .collect::<dilogkit::Result<Vec<_>>>()
        .map_err(to_py)?;
    let cs: Vec<rug::Integer> = coeffs.into_iter().map(rug::Integer::from).collect();
    let r = dilogkit::relation::verify_relation(&cs, &xs, &ctx).map_err(to_py)?;
    Ok(format_sci(&r, 4))
}

#[pymodule]
fn pydilogkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Value>()?;
    m.add_class::<Report>()?;
    m.add_class::<Summary>()?;
    m.add_function(wrap_pyfunction!(eval, m)?)?;
    m.add_function(wrap_pyfunction!(li2, m)?)?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    m.add_function(wrap_pyfunction!(pslq, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(ladder, m)?)?;
    m.add_function(wrap_pyfunction!(relation_residual, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    Ok(())
}
