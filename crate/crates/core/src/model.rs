//! Multistate Landau-Zener models `H(t) = A + B t`.
//!
//! A model is described by the diabatic slopes `beta` (the diagonal of `B`),
//! the diabatic offsets `alpha` (the diagonal of `A`) and the off-diagonal
//! part of `A`, stored as a Hermitian matrix with a zero diagonal. State
//! indices are 0-based throughout the library; the model file format and the
//! CLI use 1-based indices.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Slopes closer than this without being equal trigger a lint warning.
pub const NEAR_PARALLEL_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state index {index} out of range for a {n}-state model")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("a transition needs two distinct states, got ({0}, {0})")]
    SameState(usize),
    #[error("all states share the slope {0}; there is no extreme band to classify against")]
    SingleSlope(f64),
}

/// Complete definition of a multistate Landau-Zener model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub n: usize,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Off-diagonal part of `A`. The diagonal is zero; `alpha` carries it.
    pub coupling: DMatrix<Complex64>,
}

impl ModelSpec {
    /// Model with the given slopes and offsets and no couplings.
    pub fn uncoupled(beta: Vec<f64>, alpha: Vec<f64>) -> Self {
        let n = beta.len();
        ModelSpec {
            n,
            beta,
            alpha,
            coupling: DMatrix::zeros(n, n),
        }
    }

    /// Sets `coupling[i][j] = value` and the conjugate entry `coupling[j][i]`.
    pub fn set_coupling(&mut self, i: usize, j: usize, value: Complex64) {
        self.coupling[(i, j)] = value;
        self.coupling[(j, i)] = value.conj();
    }

    pub fn with_coupling(mut self, i: usize, j: usize, value: Complex64) -> Self {
        self.set_coupling(i, j, value);
        self
    }

    /// Diabatic energy `beta_i t + alpha_i`.
    pub fn diabatic_energy(&self, i: usize, t: f64) -> f64 {
        self.beta[i] * t + self.alpha[i]
    }

    /// Full Hamiltonian `A + B t` at a real time.
    pub fn hamiltonian(&self, t: f64) -> DMatrix<Complex64> {
        let mut h = self.coupling.clone();
        for i in 0..self.n {
            h[(i, i)] += Complex64::new(self.diabatic_energy(i, t), 0.0);
        }
        h
    }

    /// Distinct slopes in order of first appearance.
    pub fn distinct_slopes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &b in &self.beta {
            if !out.contains(&b) {
                out.push(b);
            }
        }
        out
    }

    pub fn max_slope(&self) -> f64 {
        self.beta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_slope(&self) -> f64 {
        self.beta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when no two states with exactly equal slopes are coupled.
    pub fn is_canonical(&self) -> bool {
        non_canonical_pairs(self).is_empty()
    }

    fn check_index(&self, index: usize) -> Result<(), ModelError> {
        if index < self.n {
            Ok(())
        } else {
            Err(ModelError::IndexOutOfRange { index, n: self.n })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A single structural problem found by [`validate`]. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyModel,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    CouplingShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    NonFinite {
        field: &'static str,
        index: (usize, usize),
    },
    NonzeroCouplingDiagonal {
        index: usize,
    },
    NonHermitian {
        i: usize,
        j: usize,
    },
    NonCanonicalBandCoupling {
        i: usize,
        j: usize,
    },
}

impl Violation {
    pub fn severity(&self) -> Severity {
        match self {
            Violation::NonCanonicalBandCoupling { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyModel => write!(f, "error: model has no states"),
            Violation::LengthMismatch {
                field,
                expected,
                found,
            } => write!(
                f,
                "error: {field} has {found} entries, expected {expected}"
            ),
            Violation::CouplingShape {
                rows,
                cols,
                expected,
            } => write!(
                f,
                "error: coupling matrix is {rows}x{cols}, expected {expected}x{expected}"
            ),
            Violation::NonFinite { field, index } => write!(
                f,
                "error: non-finite value in {field} at ({}, {})",
                index.0 + 1,
                index.1 + 1
            ),
            Violation::NonzeroCouplingDiagonal { index } => write!(
                f,
                "error: coupling diagonal ({0},{0}) is nonzero; alpha carries the diagonal",
                index + 1
            ),
            Violation::NonHermitian { i, j } => write!(
                f,
                "error: coupling is not Hermitian at ({},{})/({},{})",
                i + 1,
                j + 1,
                j + 1,
                i + 1
            ),
            Violation::NonCanonicalBandCoupling { i, j } => write!(
                f,
                "warning: non-canonical band coupling at ({},{})",
                i + 1,
                j + 1
            ),
        }
    }
}

/// Lists every invariant violation of `spec`; an empty list means the model
/// is valid and canonical. Non-canonical band couplings are reported with
/// [`Severity::Warning`].
pub fn validate(spec: &ModelSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = spec.n;
    if n == 0 {
        out.push(Violation::EmptyModel);
    }
    if spec.beta.len() != n {
        out.push(Violation::LengthMismatch {
            field: "beta",
            expected: n,
            found: spec.beta.len(),
        });
    }
    if spec.alpha.len() != n {
        out.push(Violation::LengthMismatch {
            field: "alpha",
            expected: n,
            found: spec.alpha.len(),
        });
    }
    let (rows, cols) = spec.coupling.shape();
    if rows != n || cols != n {
        out.push(Violation::CouplingShape {
            rows,
            cols,
            expected: n,
        });
    }
    for (k, b) in spec.beta.iter().enumerate() {
        if !b.is_finite() {
            out.push(Violation::NonFinite {
                field: "beta",
                index: (k, k),
            });
        }
    }
    for (k, a) in spec.alpha.iter().enumerate() {
        if !a.is_finite() {
            out.push(Violation::NonFinite {
                field: "alpha",
                index: (k, k),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    for i in 0..n {
        for j in 0..n {
            let c = spec.coupling[(i, j)];
            if !(c.re.is_finite() && c.im.is_finite()) {
                out.push(Violation::NonFinite {
                    field: "coupling",
                    index: (i, j),
                });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    for i in 0..n {
        if spec.coupling[(i, i)] != Complex64::new(0.0, 0.0) {
            out.push(Violation::NonzeroCouplingDiagonal { index: i });
        }
        for j in (i + 1)..n {
            if spec.coupling[(i, j)] != spec.coupling[(j, i)].conj() {
                out.push(Violation::NonHermitian { i, j });
            }
        }
    }
    for (i, j) in non_canonical_pairs(spec) {
        out.push(Violation::NonCanonicalBandCoupling { i, j });
    }
    out
}

/// True when `validate` found nothing of error severity.
pub fn is_valid(violations: &[Violation]) -> bool {
    violations.iter().all(|v| v.severity() != Severity::Error)
}

fn non_canonical_pairs(spec: &ModelSpec) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            if spec.beta[i] == spec.beta[j] && spec.coupling[(i, j)].norm_sqr() > 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// Pairs whose slopes differ by less than [`NEAR_PARALLEL_THRESHOLD`] without
/// being exactly equal. Such pairs are treated as crossing levels.
pub fn near_parallel_pairs(spec: &ModelSpec) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let d = (spec.beta[i] - spec.beta[j]).abs();
            if d > 0.0 && d < NEAR_PARALLEL_THRESHOLD {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandKind {
    MaxSlope,
    MinSlope,
    Interior,
    /// Every state has this slope.
    UniqueSlopeAll,
}

/// A maximal set of parallel diabatic levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub slope: f64,
    /// State indices sorted by ascending `alpha`, ties by index.
    pub members: Vec<usize>,
    pub kind: BandKind,
}

/// Partitions the states by exact slope equality. Bands appear in order of
/// the first state carrying each slope.
pub fn bands(spec: &ModelSpec) -> Vec<Band> {
    let slopes = spec.distinct_slopes();
    let max = spec.max_slope();
    let min = spec.min_slope();
    slopes
        .into_iter()
        .map(|slope| {
            let mut members: Vec<usize> = (0..spec.n).filter(|&i| spec.beta[i] == slope).collect();
            members.sort_by(|&a, &b| {
                spec.alpha[a]
                    .total_cmp(&spec.alpha[b])
                    .then(a.cmp(&b))
            });
            let kind = if max == min {
                BandKind::UniqueSlopeAll
            } else if slope == max {
                BandKind::MaxSlope
            } else if slope == min {
                BandKind::MinSlope
            } else {
                BandKind::Interior
            };
            Band {
                slope,
                members,
                kind,
            }
        })
        .collect()
}

/// Band containing state `k`.
pub fn band_of(spec: &ModelSpec, k: usize) -> Option<Band> {
    bands(spec).into_iter().find(|b| b.members.contains(&k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    RegularCrossing,
    Counterintuitive,
    WithinBandIntuitive,
    Degenerate,
    InteriorBand,
}

impl TransitionClass {
    pub fn label(self) -> &'static str {
        match self {
            TransitionClass::RegularCrossing => "regular-crossing",
            TransitionClass::Counterintuitive => "counterintuitive",
            TransitionClass::WithinBandIntuitive => "within-band-intuitive",
            TransitionClass::Degenerate => "degenerate",
            TransitionClass::InteriorBand => "interior-band",
        }
    }
}

impl fmt::Display for TransitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Classifies the transition from state `m` to state `n`.
///
/// Within the max-slope band a transition towards a higher offset is
/// counterintuitive; within the min-slope band a transition towards a lower
/// offset is.
pub fn classify_transition(
    spec: &ModelSpec,
    m: usize,
    n: usize,
) -> Result<TransitionClass, ModelError> {
    spec.check_index(m)?;
    spec.check_index(n)?;
    if m == n {
        return Err(ModelError::SameState(m));
    }
    let max = spec.max_slope();
    let min = spec.min_slope();
    if max == min {
        return Err(ModelError::SingleSlope(max));
    }
    let (bm, bn) = (spec.beta[m], spec.beta[n]);
    if bm != bn {
        return Ok(TransitionClass::RegularCrossing);
    }
    let (am, an) = (spec.alpha[m], spec.alpha[n]);
    if am == an {
        return Ok(TransitionClass::Degenerate);
    }
    let counterintuitive = if bm == max {
        am < an
    } else if bm == min {
        am > an
    } else {
        return Ok(TransitionClass::InteriorBand);
    };
    Ok(if counterintuitive {
        TransitionClass::Counterintuitive
    } else {
        TransitionClass::WithinBandIntuitive
    })
}

/// Unitary that diagonalized one band's block of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTransform {
    /// State indices of the band in ascending index order.
    pub members: Vec<usize>,
    /// Column `c` is the new basis state placed at `members[c]`, written in
    /// the old basis of the band.
    pub unitary: DMatrix<Complex64>,
}

impl BandTransform {
    pub fn is_identity(&self) -> bool {
        self.unitary == DMatrix::identity(self.members.len(), self.members.len())
    }
}

/// Embeds per-band transforms into one `n x n` unitary `W` such that the
/// canonical Hamiltonian is `W^† H W`.
pub fn basis_change(n: usize, transforms: &[BandTransform]) -> DMatrix<Complex64> {
    let mut w = DMatrix::identity(n, n);
    for tr in transforms {
        for (r, &i) in tr.members.iter().enumerate() {
            for (c, &j) in tr.members.iter().enumerate() {
                w[(i, j)] = tr.unitary[(r, c)];
            }
        }
    }
    w
}

/// Removes couplings between parallel levels by diagonalizing `A` inside
/// each band.
///
/// Bands that are already uncoupled get an identity transform and keep their
/// offsets bit for bit. Otherwise the band's new offsets are the eigenvalues
/// of its block, assigned in ascending order to the band's state indices in
/// ascending order.
pub fn canonicalize_bands(spec: &ModelSpec) -> (ModelSpec, Vec<BandTransform>) {
    let mut transforms = Vec::new();
    for band in bands(spec) {
        let mut members = band.members.clone();
        members.sort_unstable();
        let size = members.len();
        let coupled = members.iter().enumerate().any(|(r, &i)| {
            members[r + 1..]
                .iter()
                .any(|&j| spec.coupling[(i, j)].norm_sqr() > 0.0)
        });
        let unitary = if coupled {
            band_eigenbasis(spec, &members)
        } else {
            DMatrix::identity(size, size)
        };
        transforms.push(BandTransform { members, unitary });
    }

    let w = basis_change(spec.n, &transforms);
    if transforms.iter().all(BandTransform::is_identity) {
        return (spec.clone(), transforms);
    }
    let mut a = spec.coupling.clone();
    for i in 0..spec.n {
        a[(i, i)] = Complex64::new(spec.alpha[i], 0.0);
    }
    let a_new = w.adjoint() * a * &w;

    let mut out = ModelSpec::uncoupled(spec.beta.clone(), (0..spec.n).map(|i| a_new[(i, i)].re).collect());
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            if spec.beta[i] != spec.beta[j] {
                out.set_coupling(i, j, a_new[(i, j)]);
            }
        }
    }
    (out, transforms)
}

fn band_eigenbasis(spec: &ModelSpec, members: &[usize]) -> DMatrix<Complex64> {
    let size = members.len();
    let block = DMatrix::from_fn(size, size, |r, c| {
        if r == c {
            Complex64::new(spec.alpha[members[r]], 0.0)
        } else {
            spec.coupling[(members[r], members[c])]
        }
    });
    let eig = block.symmetric_eigen();
    // Ascending eigenvalues; equal eigenvalues ordered by the member each
    // eigenvector is mostly made of.
    let dominant = |c: usize| {
        (0..size)
            .max_by(|&a, &b| {
                eig.eigenvectors[(a, c)]
                    .norm_sqr()
                    .total_cmp(&eig.eigenvectors[(b, c)].norm_sqr())
                    .then(b.cmp(&a))
            })
            .unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(dominant(a).cmp(&dominant(b)))
    });
    let mut u = DMatrix::zeros(size, size);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Fix the phase so the largest component is real and positive.
        let col = eig.eigenvectors.column(old_col);
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for r in 0..size {
            u[(r, new_col)] = col[r] * phase;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lz2() -> ModelSpec {
        ModelSpec::uncoupled(vec![1.0, -1.0], vec![0.0, 0.0]).with_coupling(0, 1, c(0.5, 0.0))
    }

    fn fig1_slopes() -> ModelSpec {
        ModelSpec::uncoupled(
            vec![1.0, 1.0, 1.0, 0.0, -0.8],
            vec![0.0, 0.3, 0.5, 0.0, 0.4],
        )
    }

    #[test]
    fn symmetric_real_coupling_is_valid() {
        assert!(validate(&lz2()).is_empty());
    }

    #[test]
    fn broken_hermiticity_is_reported_once() {
        let mut spec = lz2();
        spec.coupling[(1, 0)] = c(0.4, 0.0);
        let v = validate(&spec);
        assert_eq!(v, vec![Violation::NonHermitian { i: 0, j: 1 }]);
        assert!(!is_valid(&v));
    }

    #[test]
    fn band_coupling_is_a_warning() {
        let spec = fig1_slopes().with_coupling(0, 1, c(0.1, 0.0));
        let v = validate(&spec);
        assert_eq!(v, vec![Violation::NonCanonicalBandCoupling { i: 0, j: 1 }]);
        assert!(is_valid(&v));
        assert_eq!(v[0].to_string(), "warning: non-canonical band coupling at (1,2)");
    }

    #[test]
    fn length_and_diagonal_violations() {
        let mut spec = lz2();
        spec.alpha.push(1.0);
        assert!(matches!(
            validate(&spec)[0],
            Violation::LengthMismatch { field: "alpha", .. }
        ));
        let mut spec = lz2();
        spec.coupling[(1, 1)] = c(0.2, 0.0);
        assert_eq!(
            validate(&spec),
            vec![Violation::NonzeroCouplingDiagonal { index: 1 }]
        );
        let spec = ModelSpec::uncoupled(vec![], vec![]);
        assert_eq!(validate(&spec), vec![Violation::EmptyModel]);
    }

    #[test]
    fn fig1_band_decomposition() {
        let b = bands(&fig1_slopes());
        assert_eq!(b.len(), 3);
        assert_eq!((b[0].slope, b[0].members.clone(), b[0].kind), (1.0, vec![0, 1, 2], BandKind::MaxSlope));
        assert_eq!((b[1].slope, b[1].members.clone(), b[1].kind), (0.0, vec![3], BandKind::Interior));
        assert_eq!((b[2].slope, b[2].members.clone(), b[2].kind), (-0.8, vec![4], BandKind::MinSlope));
    }

    #[test]
    fn fig4_band_decomposition_orders_members_by_offset() {
        let eps = 0.5;
        let spec = ModelSpec::uncoupled(vec![-1.0, -1.0, 1.0, 0.5], vec![0.0, -eps, 0.0, -0.5]);
        let b = bands(&spec);
        assert_eq!(b[0].members, vec![1, 0]);
        assert_eq!(b[0].kind, BandKind::MinSlope);
        assert_eq!((b[1].members.clone(), b[1].kind), (vec![2], BandKind::MaxSlope));
        assert_eq!((b[2].members.clone(), b[2].kind), (vec![3], BandKind::Interior));
    }

    #[test]
    fn single_slope_is_unique_slope_all() {
        let spec = ModelSpec::uncoupled(vec![2.0; 3], vec![0.0, 1.0, 2.0]);
        let b = bands(&spec);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].kind, BandKind::UniqueSlopeAll);
        assert_eq!(
            classify_transition(&spec, 0, 1),
            Err(ModelError::SingleSlope(2.0))
        );
    }

    #[test]
    fn fig1_classification() {
        let spec = fig1_slopes();
        use TransitionClass::*;
        assert_eq!(classify_transition(&spec, 0, 1).unwrap(), Counterintuitive);
        assert_eq!(classify_transition(&spec, 0, 2).unwrap(), Counterintuitive);
        assert_eq!(classify_transition(&spec, 1, 2).unwrap(), Counterintuitive);
        assert_eq!(classify_transition(&spec, 1, 0).unwrap(), WithinBandIntuitive);
        assert_eq!(classify_transition(&spec, 0, 3).unwrap(), RegularCrossing);
        assert_eq!(classify_transition(&spec, 0, 0), Err(ModelError::SameState(0)));
        assert!(classify_transition(&spec, 0, 7).is_err());
    }

    #[test]
    fn fig4_classification_flips_with_epsilon() {
        for (eps, expected) in [
            (0.5, TransitionClass::Counterintuitive),
            (-0.5, TransitionClass::WithinBandIntuitive),
            (0.0, TransitionClass::Degenerate),
        ] {
            let spec = ModelSpec::uncoupled(vec![-1.0, -1.0, 1.0, 0.5], vec![0.0, -eps, 0.0, -0.5]);
            assert_eq!(classify_transition(&spec, 0, 1).unwrap(), expected, "eps = {eps}");
        }
    }

    #[test]
    fn interior_band_pairs_are_labelled() {
        let spec = ModelSpec::uncoupled(vec![1.0, 0.0, 0.0, -1.0], vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            classify_transition(&spec, 1, 2).unwrap(),
            TransitionClass::InteriorBand
        );
    }

    #[test]
    fn canonical_input_is_unchanged() {
        let spec = fig1_slopes().with_coupling(0, 3, c(0.4, 0.12));
        let (out, tr) = canonicalize_bands(&spec);
        assert_eq!(out, spec);
        assert!(tr.iter().all(BandTransform::is_identity));
    }

    #[test]
    fn two_state_band_splits_symmetrically() {
        let g = 0.3;
        let spec = ModelSpec::uncoupled(vec![1.0, 1.0, -1.0], vec![0.0, 0.0, 0.0])
            .with_coupling(0, 1, c(g, 0.0))
            .with_coupling(0, 2, c(0.2, 0.0));
        let (out, tr) = canonicalize_bands(&spec);
        assert!((out.alpha[0] + g).abs() < 1e-14);
        assert!((out.alpha[1] - g).abs() < 1e-14);
        assert_eq!(out.coupling[(0, 1)], c(0.0, 0.0));
        assert!(out.is_canonical());
        assert!(validate(&out).is_empty());

        let w = basis_change(3, &tr);
        let unitarity = (w.adjoint() * &w - DMatrix::identity(3, 3)).map(|z| z.norm()).max();
        assert!(unitarity < 1e-14);
        for t in [-2.0, 0.0, 1.5] {
            let lhs = out.hamiltonian(t);
            let rhs = w.adjoint() * spec.hamiltonian(t) * &w;
            assert!((lhs - rhs).map(|z| z.norm()).max() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let spec = fig1_slopes()
            .with_coupling(0, 3, c(0.4, 0.12))
            .with_coupling(3, 4, c(0.6, 0.9));
        for t in [-100.0, -0.3, 0.0, 7.0] {
            let h = spec.hamiltonian(t);
            assert_eq!(h, h.adjoint());
        }
    }
}
