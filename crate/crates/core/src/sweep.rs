//! One-parameter sweeps over a model.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{is_valid, validate, ModelSpec};
use crate::propagator::{auto_window, propagate, IntegratorConfig, StateVector};
use crate::scattering::scattering_matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("cannot parse parameter path `{0}`; expected alpha[i], beta[i], coupling[i][j].re or coupling[i][j].im")]
    BadPath(String),
    #[error("parameter path `{path}` does not resolve in a {n}-state model")]
    Unresolved { path: String, n: usize },
    #[error("sweep needs at least one value")]
    Empty,
    #[error("invalid grid `{0}`; expected start:stop:count")]
    BadGrid(String),
    #[error("initial state {state} out of range for a {n}-state model")]
    BadInitial { state: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Alpha(usize),
    Beta(usize),
    CouplingRe(usize, usize),
    CouplingIm(usize, usize),
}

/// Model parameter addressed by a sweep. Indices are 0-based; the textual
/// form uses 1-based indices, and a leading `-` sets the parameter to the
/// negated sweep value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamPath {
    pub target: Target,
    pub negate: bool,
}

impl ParamPath {
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let bad = || SweepError::BadPath(text.to_string());
        let trimmed = text.trim();
        let (negate, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed),
        };
        let (name, rest) = body.split_once('[').ok_or_else(bad)?;
        let mut indices = Vec::new();
        let mut rest = format!("[{rest}");
        while let Some(stripped) = rest.strip_prefix('[') {
            let (idx, tail) = stripped.split_once(']').ok_or_else(bad)?;
            let i: usize = idx.trim().parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            indices.push(i - 1);
            rest = tail.to_string();
        }
        let target = match (name.trim(), indices.as_slice(), rest.as_str()) {
            ("alpha", [i], "") => Target::Alpha(*i),
            ("beta", [i], "") => Target::Beta(*i),
            ("coupling", [i, j], ".re") if i != j => Target::CouplingRe(*i, *j),
            ("coupling", [i, j], ".im") if i != j => Target::CouplingIm(*i, *j),
            _ => return Err(bad()),
        };
        Ok(ParamPath { target, negate })
    }

    fn max_index(&self) -> usize {
        match self.target {
            Target::Alpha(i) | Target::Beta(i) => i,
            Target::CouplingRe(i, j) | Target::CouplingIm(i, j) => i.max(j),
        }
    }

    pub fn check(&self, spec: &ModelSpec) -> Result<(), SweepError> {
        if self.max_index() < spec.n {
            Ok(())
        } else {
            Err(SweepError::Unresolved {
                path: self.to_string(),
                n: spec.n,
            })
        }
    }

    /// Copy of `spec` with the addressed parameter set from `value`.
    /// Coupling edits keep the matrix Hermitian.
    pub fn apply(&self, spec: &ModelSpec, value: f64) -> Result<ModelSpec, SweepError> {
        self.check(spec)?;
        let v = if self.negate { -value } else { value };
        let mut out = spec.clone();
        match self.target {
            Target::Alpha(i) => out.alpha[i] = v,
            Target::Beta(i) => out.beta[i] = v,
            Target::CouplingRe(i, j) => {
                let c = out.coupling[(i, j)];
                out.set_coupling(i, j, Complex64::new(v, c.im));
            }
            Target::CouplingIm(i, j) => {
                let c = out.coupling[(i, j)];
                out.set_coupling(i, j, Complex64::new(c.re, v));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negate {
            f.write_str("-")?;
        }
        match self.target {
            Target::Alpha(i) => write!(f, "alpha[{}]", i + 1),
            Target::Beta(i) => write!(f, "beta[{}]", i + 1),
            Target::CouplingRe(i, j) => write!(f, "coupling[{}][{}].re", i + 1, j + 1),
            Target::CouplingIm(i, j) => write!(f, "coupling[{}][{}].im", i + 1, j + 1),
        }
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Parses `start:stop:count`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, SweepError> {
    let bad = || SweepError::BadGrid(text.to_string());
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(SweepError::Empty);
    }
    Ok(linear_grid(start, stop, count))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutput {
    /// Final probabilities after starting in this (0-based) state.
    Column(usize),
    /// Every entry of the probability matrix, column-major.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub path: ParamPath,
    pub values: Vec<f64>,
    pub output: SweepOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    /// NaN-filled when the point failed.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Window half-width for each sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Fixed(f64),
    /// [`auto_window`] evaluated for every point separately.
    Auto,
}

impl SweepSpec {
    pub fn check(&self, spec: &ModelSpec) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Empty);
        }
        self.path.check(spec)?;
        if let SweepOutput::Column(k) = self.output {
            if k >= spec.n {
                return Err(SweepError::BadInitial { state: k, n: spec.n });
            }
        }
        Ok(())
    }

    fn width(&self, n: usize) -> usize {
        match self.output {
            SweepOutput::Column(_) => n,
            SweepOutput::Full => n * n,
        }
    }

    fn point(&self, spec: &ModelSpec, value: f64, window: Window, config: &IntegratorConfig) -> SweepRow {
        let width = self.width(spec.n);
        let fail = |msg: String| SweepRow {
            param: value,
            values: vec![f64::NAN; width],
            error: Some(msg),
        };
        let model = match self.path.apply(spec, value) {
            Ok(m) => m,
            Err(e) => return fail(e.to_string()),
        };
        let violations = validate(&model);
        if !is_valid(&violations) {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return fail(msgs.join("; "));
        }
        let t = match window {
            Window::Fixed(t) => t,
            Window::Auto => match auto_window(&model) {
                Ok(t) => t,
                Err(e) => return fail(e.to_string()),
            },
        };
        let values = match self.output {
            SweepOutput::Column(k) => {
                propagate(&model, &StateVector::basis(model.n, k, -t), t, config)
                    .map(|r| r.final_state.probabilities())
                    .map_err(|e| e.to_string())
            }
            SweepOutput::Full => scattering_matrix(&model, t, config)
                .map(|s| s.probabilities.iter().copied().collect())
                .map_err(|e| e.to_string()),
        };
        match values {
            Ok(values) => SweepRow {
                param: value,
                values,
                error: None,
            },
            Err(msg) => fail(msg),
        }
    }

    /// Runs all points in parallel. Rows come back in the order of
    /// `values`.
    pub fn run(
        &self,
        spec: &ModelSpec,
        window: Window,
        config: &IntegratorConfig,
    ) -> Result<Vec<SweepRow>, SweepError> {
        self.check(spec)?;
        Ok(self
            .values
            .par_iter()
            .map(|&v| self.point(spec, v, window, config))
            .collect())
    }

    /// Same as [`SweepSpec::run`] on the calling thread.
    pub fn run_sequential(
        &self,
        spec: &ModelSpec,
        window: Window,
        config: &IntegratorConfig,
    ) -> Result<Vec<SweepRow>, SweepError> {
        self.check(spec)?;
        Ok(self
            .values
            .iter()
            .map(|&v| self.point(spec, v, window, config))
            .collect())
    }
}
