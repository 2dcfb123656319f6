//! Closed-form predictions: Brundobler-Elser survival, the vanishing of
//! counterintuitive transitions, the Demkov-Osherov solution and the
//! asymptotic adiabatic energies.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{bands, classify_transition, BandKind, ModelError, ModelSpec, TransitionClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("state {state} has slope {slope}, which is neither the largest nor the smallest")]
    NotExtreme { state: usize, slope: f64 },
    #[error("state index {index} out of range for a {n}-state model")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("band offsets must be strictly increasing (offset {index} is {value})")]
    BandOffsets { index: usize, value: f64 },
    #[error("Demkov-Osherov geometry is invalid: {0}")]
    Geometry(String),
    #[error("|t| = {t} is below the perturbative threshold {threshold}")]
    TimeTooSmall { t: f64, threshold: f64 },
}

/// Two-state Landau-Zener survival probability for coupling `g` and slope
/// difference `dbeta`.
pub fn lz_survival(g: f64, dbeta: f64) -> f64 {
    (-2.0 * PI * g * g / dbeta.abs()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BePrediction {
    pub state: usize,
    pub survival_amplitude: f64,
    /// `pi sum_{i: beta_i != beta_k} |A_ki|^2 / |beta_k - beta_i|`.
    pub exponent: f64,
}

impl BePrediction {
    pub fn survival_probability(&self) -> f64 {
        self.survival_amplitude * self.survival_amplitude
    }
}

/// Brundobler-Elser survival amplitude for a state on the largest or the
/// smallest slope. Other states are refused.
pub fn be_survival(spec: &ModelSpec, k: usize) -> Result<BePrediction, TheoryError> {
    if k >= spec.n {
        return Err(TheoryError::IndexOutOfRange { index: k, n: spec.n });
    }
    let bk = spec.beta[k];
    if bk != spec.max_slope() && bk != spec.min_slope() {
        return Err(TheoryError::NotExtreme { state: k, slope: bk });
    }
    let exponent = PI
        * (0..spec.n)
            .filter(|&i| spec.beta[i] != bk)
            .map(|i| spec.coupling[(k, i)].norm_sqr() / (bk - spec.beta[i]).abs())
            .sum::<f64>();
    Ok(BePrediction {
        state: k,
        survival_amplitude: (-exponent).exp(),
        exponent,
    })
}

/// A transition predicted to have exactly zero probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoGoPair {
    pub source: usize,
    pub target: usize,
}

/// Every counterintuitive transition of `spec`, ordered by source then target.
pub fn nogo_prediction(spec: &ModelSpec) -> Result<Vec<NoGoPair>, TheoryError> {
    let mut out = Vec::new();
    for band in bands(spec) {
        if band.kind == BandKind::UniqueSlopeAll {
            return Err(ModelError::SingleSlope(band.slope).into());
        }
        if !matches!(band.kind, BandKind::MaxSlope | BandKind::MinSlope) {
            continue;
        }
        for &m in &band.members {
            for &n in &band.members {
                if m != n
                    && classify_transition(spec, m, n)? == TransitionClass::Counterintuitive
                {
                    out.push(NoGoPair { source: m, target: n });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// One sloped level crossing a band of parallel levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DoGeometry {
    pub sloped_slope: f64,
    pub sloped_offset: f64,
    pub band_slope: f64,
    /// Strictly increasing.
    pub band_offsets: Vec<f64>,
    /// Coupling of the sloped level to each band level.
    pub couplings: Vec<Complex64>,
}

/// Initial state for [`do_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoStart {
    Sloped,
    /// Index into `band_offsets`.
    Band(usize),
}

impl DoGeometry {
    pub fn validate(&self) -> Result<(), TheoryError> {
        if self.band_offsets.is_empty() {
            return Err(TheoryError::Geometry("empty band".into()));
        }
        if self.couplings.len() != self.band_offsets.len() {
            return Err(TheoryError::Geometry(format!(
                "{} couplings for {} band levels",
                self.couplings.len(),
                self.band_offsets.len()
            )));
        }
        if self.sloped_slope == self.band_slope {
            return Err(TheoryError::Geometry("sloped level is parallel to the band".into()));
        }
        let finite = [self.sloped_slope, self.sloped_offset, self.band_slope]
            .iter()
            .chain(&self.band_offsets)
            .all(|x| x.is_finite())
            && self.couplings.iter().all(|g| g.re.is_finite() && g.im.is_finite());
        if !finite {
            return Err(TheoryError::Geometry("non-finite parameter".into()));
        }
        for (index, w) in self.band_offsets.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(TheoryError::BandOffsets {
                    index: index + 1,
                    value: w[1],
                });
            }
        }
        Ok(())
    }

    /// Equivalent model: state 0 is the sloped level, state `m + 1` is band
    /// level `m`.
    pub fn to_model(&self) -> ModelSpec {
        let mut beta = vec![self.sloped_slope];
        let mut alpha = vec![self.sloped_offset];
        beta.extend(std::iter::repeat_n(self.band_slope, self.band_offsets.len()));
        alpha.extend(&self.band_offsets);
        let mut spec = ModelSpec::uncoupled(beta, alpha);
        for (m, g) in self.couplings.iter().enumerate() {
            spec.set_coupling(0, m + 1, *g);
        }
        spec
    }

    /// Band indices in the order the sloped level crosses them.
    pub fn crossing_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.band_offsets.len()).collect();
        // Crossing time (alpha_m - alpha_s)/(beta_s - beta_b) grows with
        // alpha_m when the sloped level is steeper.
        if self.sloped_slope < self.band_slope {
            order.reverse();
        }
        order
    }
}

/// Exact final probabilities of the Demkov-Osherov model, indexed like
/// [`DoGeometry::to_model`].
pub fn do_oracle(geom: &DoGeometry, start: DoStart) -> Result<Vec<f64>, TheoryError> {
    geom.validate()?;
    let nb = geom.band_offsets.len();
    let dbeta = geom.sloped_slope - geom.band_slope;
    let survival: Vec<f64> = geom
        .couplings
        .iter()
        .map(|g| lz_survival(g.norm(), dbeta))
        .collect();
    let order = geom.crossing_order();
    let mut probs = vec![0.0; nb + 1];

    // Population carried by the sloped level through the crossings that
    // follow `from` in time order.
    let carry = |mut on_sloped: f64, from: usize, probs: &mut [f64]| {
        for &m in &order[from..] {
            probs[m + 1] += on_sloped * (1.0 - survival[m]);
            on_sloped *= survival[m];
        }
        probs[0] += on_sloped;
    };

    match start {
        DoStart::Sloped => carry(1.0, 0, &mut probs),
        DoStart::Band(m) => {
            if m >= nb {
                return Err(TheoryError::IndexOutOfRange { index: m, n: nb });
            }
            let pos = order.iter().position(|&x| x == m).unwrap_or(0);
            probs[m + 1] += survival[m];
            carry(1.0 - survival[m], pos + 1, &mut probs);
        }
    }
    Ok(probs)
}

/// Perturbative validity threshold for [`asymptotic_eigenenergy`]:
/// `10 max (|alpha_i - alpha_j| + 2|A_ij|) / |beta_i - beta_j|` over
/// non-parallel pairs.
pub fn asymptotic_threshold(spec: &ModelSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let db = (spec.beta[i] - spec.beta[j]).abs();
            if db > 0.0 {
                let num = (spec.alpha[i] - spec.alpha[j]).abs() + 2.0 * spec.coupling[(i, j)].norm();
                worst = worst.max(num / db);
            }
        }
    }
    10.0 * worst
}

/// Adiabatic energy of the level that follows diabatic state `k` at large
/// `|t|`, to first order in `1/t`:
/// `beta_k t + alpha_k + sum_i |A_ki|^2 / ((beta_k - beta_i) t)`.
pub fn asymptotic_eigenenergy(spec: &ModelSpec, k: usize, t: f64) -> Result<f64, TheoryError> {
    if k >= spec.n {
        return Err(TheoryError::IndexOutOfRange { index: k, n: spec.n });
    }
    let threshold = asymptotic_threshold(spec);
    if !(t.abs() > threshold) {
        return Err(TheoryError::TimeTooSmall { t, threshold });
    }
    let bk = spec.beta[k];
    let correction: f64 = (0..spec.n)
        .filter(|&i| spec.beta[i] != bk)
        .map(|i| spec.coupling[(k, i)].norm_sqr() / ((bk - spec.beta[i]) * t))
        .sum();
    Ok(spec.diabatic_energy(k, t) + correction)
}
