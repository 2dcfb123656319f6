//! Finite-window scattering matrices built column by column.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::ModelSpec;
use crate::propagator::{propagate, IntegratorConfig, PropagationError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("column {column}: {source}")]
pub struct ScatteringError {
    /// 0-based initial state of the failing column.
    pub column: usize,
    #[source]
    pub source: PropagationError,
}

/// Probabilities below this count as saturated regardless of relative change.
pub const SATURATION_ABS: f64 = 1e-6;
pub const SATURATION_REL: f64 = 1e-3;

/// Interaction-frame scattering matrix over `[-window, window]`.
///
/// Column `j` holds the final amplitudes after starting in state `j`.
/// Magnitudes do not depend on the frame; phases do.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub amplitudes: DMatrix<Complex64>,
    pub probabilities: DMatrix<f64>,
    pub window: f64,
    /// Norm drift reported by each column's propagation.
    pub column_drift: Vec<f64>,
    /// Saturation flags, filled by [`scattering_matrix_with_saturation`].
    pub saturation: Option<DMatrix<bool>>,
}

impl ScatteringMatrix {
    pub fn n(&self) -> usize {
        self.amplitudes.nrows()
    }

    /// `max |(S^† S - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n();
        let g = self.amplitudes.adjoint() * &self.amplitudes - DMatrix::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_drift(&self) -> f64 {
        self.column_drift.iter().copied().fold(0.0, f64::max)
    }

    /// Probability to end in `target` after starting in `source`.
    pub fn probability(&self, target: usize, source: usize) -> f64 {
        self.probabilities[(target, source)]
    }

    /// Lab-frame amplitudes `D(T)^† S D(-T)` with
    /// `D(t) = diag(exp(i(beta t^2/2 + alpha t)))`.
    pub fn lab_frame(&self, spec: &ModelSpec) -> DMatrix<Complex64> {
        let t = self.window;
        let phase = |i: usize, t: f64| crate::propagator::frame_phase(spec, i, t);
        DMatrix::from_fn(self.n(), self.n(), |i, j| {
            self.amplitudes[(i, j)] * Complex64::cis(-phase(i, t) + phase(j, -t))
        })
    }
}

fn column(
    spec: &ModelSpec,
    j: usize,
    window: f64,
    config: &IntegratorConfig,
) -> Result<(Vec<Complex64>, f64), ScatteringError> {
    let start = StateVector::basis(spec.n, j, -window);
    propagate(spec, &start, window, config)
        .map(|r| (r.final_state.amps, r.norm_drift))
        .map_err(|source| ScatteringError { column: j, source })
}

fn assemble(n: usize, window: f64, columns: Vec<(Vec<Complex64>, f64)>) -> ScatteringMatrix {
    let amplitudes = DMatrix::from_fn(n, n, |i, j| columns[j].0[i]);
    let probabilities = amplitudes.map(|a| a.norm_sqr());
    ScatteringMatrix {
        amplitudes,
        probabilities,
        window,
        column_drift: columns.iter().map(|c| c.1).collect(),
        saturation: None,
    }
}

/// Propagates every basis state from `-window` to `window`, columns in
/// parallel. The first failing column (lowest index) is reported.
pub fn scattering_matrix(
    spec: &ModelSpec,
    window: f64,
    config: &IntegratorConfig,
) -> Result<ScatteringMatrix, ScatteringError> {
    let columns = (0..spec.n)
        .into_par_iter()
        .map(|j| column(spec, j, window, config))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(spec.n, window, columns))
}

/// Like [`scattering_matrix`], then reruns every column at `2 * window` and
/// fills [`ScatteringMatrix::saturation`].
pub fn scattering_matrix_with_saturation(
    spec: &ModelSpec,
    window: f64,
    config: &IntegratorConfig,
) -> Result<ScatteringMatrix, ScatteringError> {
    let mut s = scattering_matrix(spec, window, config)?;
    let wide = scattering_matrix(spec, 2.0 * window, config)?;
    s.saturation = Some(DMatrix::from_fn(spec.n, spec.n, |i, j| {
        is_saturated(s.probabilities[(i, j)], wide.probabilities[(i, j)])
    }));
    Ok(s)
}

fn is_saturated(p_window: f64, p_double: f64) -> bool {
    (p_window - p_double).abs() < SATURATION_ABS.max(SATURATION_REL * p_double)
}

/// Comparison of one column at `window` and `2 * window`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationCheck {
    pub column: usize,
    pub window: f64,
    pub at_window: Vec<f64>,
    pub at_double: Vec<f64>,
    /// `at_window - at_double` per entry.
    pub deltas: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl SaturationCheck {
    pub fn all_saturated(&self) -> bool {
        self.saturated.iter().all(|&s| s)
    }
}

pub fn saturation_check(
    spec: &ModelSpec,
    column_index: usize,
    window: f64,
    config: &IntegratorConfig,
) -> Result<SaturationCheck, ScatteringError> {
    let (short, long) = rayon::join(
        || column(spec, column_index, window, config),
        || column(spec, column_index, 2.0 * window, config),
    );
    let at_window: Vec<f64> = short?.0.iter().map(|a| a.norm_sqr()).collect();
    let at_double: Vec<f64> = long?.0.iter().map(|a| a.norm_sqr()).collect();
    let deltas = at_window
        .iter()
        .zip(&at_double)
        .map(|(a, b)| a - b)
        .collect();
    let saturated = at_window
        .iter()
        .zip(&at_double)
        .map(|(&a, &b)| is_saturated(a, b))
        .collect();
    Ok(SaturationCheck {
        column: column_index,
        window,
        at_window,
        at_double,
        deltas,
        saturated,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdiabaticError {
    #[error("adiabatic states at t = {t} cannot be matched one-to-one to diabatic levels")]
    Unmatched { t: f64 },
    #[error(transparent)]
    Propagation(#[from] ScatteringError),
}

/// Eigenvectors of `H(t)`, column `j` being the one dominated by diabatic
/// state `j`. Fails when some eigenvector has no component above one half,
/// which happens near crossings and for degenerate parallel levels.
pub fn adiabatic_basis(spec: &ModelSpec, t: f64) -> Result<DMatrix<Complex64>, AdiabaticError> {
    let n = spec.n;
    let vectors = spec.hamiltonian(t).symmetric_eigen().eigenvectors;
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let (best, weight) = (0..n)
            .map(|c| (c, vectors[(j, c)].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(weight > 0.5) {
            return Err(AdiabaticError::Unmatched { t });
        }
        out.set_column(j, &vectors.column(best));
    }
    Ok(out)
}

/// Transition probabilities out of adiabatic state `j` at `-window` into
/// each adiabatic state at `+window`.
///
/// Adiabatic and diabatic states coincide as `|t| -> inf`, so this has the
/// same limit as a [`scattering_matrix`] column. The finite-window error
/// falls off like `1/T^2` instead of the `1/T` residual oscillation of the
/// diabatic populations, which matters for small probabilities.
pub fn adiabatic_column(
    spec: &ModelSpec,
    j: usize,
    window: f64,
    config: &IntegratorConfig,
) -> Result<Vec<f64>, AdiabaticError> {
    let start = adiabatic_basis(spec, -window)?;
    let end = adiabatic_basis(spec, window)?;
    let psi0: Vec<Complex64> = start.column(j).iter().copied().collect();
    let initial = StateVector::from_lab(spec, -window, &psi0);
    let res = propagate(spec, &initial, window, config)
        .map_err(|source| ScatteringError { column: j, source })?;
    let psi = DVector::from_vec(res.final_state.to_lab(spec));
    Ok((0..spec.n).map(|i| end.column(i).dotc(&psi).norm_sqr()).collect())
}

/// [`adiabatic_column`] for every initial state, columns in parallel.
pub fn adiabatic_probabilities(
    spec: &ModelSpec,
    window: f64,
    config: &IntegratorConfig,
) -> Result<DMatrix<f64>, AdiabaticError> {
    let columns = (0..spec.n)
        .into_par_iter()
        .map(|j| adiabatic_column(spec, j, window, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DMatrix::from_fn(spec.n, spec.n, |i, j| columns[j][i]))
}
