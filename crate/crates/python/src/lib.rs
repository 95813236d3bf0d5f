//! Python bindings. Every call goes through the same front end as the CLI
//! and returns its JSON report as a string.

// pyo3 0.22's function macros trip this lint
#![allow(clippy::useless_conversion)]

use clap::Parser;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use statesum::cli::{execute, Cli, CliError};

fn run(args: Vec<String>) -> PyResult<String> {
    let cli = Cli::try_parse_from(std::iter::once("statesum".to_string()).chain(args)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    match execute(&cli) {
        Ok(v) => Ok(v.to_string()),
        Err(e @ CliError::Parse(_)) => Err(PyValueError::new_err(e.to_string())),
        Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
    }
}

/// Run any CLI subcommand, e.g. `run_json(["tv", "--manifold", "builtin:rp3"])`.
#[pyfunction]
fn run_json(args: Vec<String>) -> PyResult<String> {
    run(args)
}

/// Turaev-Viro invariant as a JSON report.
#[pyfunction]
#[pyo3(signature = (manifold, group = "cyclic:2", cocycle = "trivial"))]
fn tv(manifold: &str, group: &str, cocycle: &str) -> PyResult<String> {
    run(["tv", "--manifold", manifold, "--group", group, "--cocycle", cocycle].map(String::from).to_vec())
}

/// Bicategorical state sum as a JSON report.
#[pyfunction]
#[pyo3(signature = (manifold, group = "cyclic:2", cocycle = "trivial", per_phi3 = false))]
fn st(manifold: &str, group: &str, cocycle: &str, per_phi3: bool) -> PyResult<String> {
    let mut args: Vec<String> = ["st", "--manifold", manifold, "--group", group, "--cocycle", cocycle].map(String::from).to_vec();
    if per_phi3 {
        args.push("--per-phi3".into());
    }
    run(args)
}

/// Add the module's functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_json, m)?)?;
    m.add_function(wrap_pyfunction!(tv, m)?)?;
    m.add_function(wrap_pyfunction!(st, m)?)?;
    Ok(())
}

#[pymodule]
fn statesum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
