//! Time propagation of `i dpsi/dt = (A + B t) psi` in the interaction frame.
//!
//! The amplitudes `a_i(t) = exp(+i(beta_i t^2/2 + alpha_i t)) psi_i(t)` carry
//! no diagonal dynamics, so they obey
//!
//! ```text
//! da_i/dt = -i sum_j coupling[i][j] exp(i[(beta_i - beta_j) t^2/2 + (alpha_i - alpha_j) t]) a_j
//! ```
//!
//! and `|a_i| = |psi_i|` at every time. The system is integrated with an
//! adaptive DOP853 scheme whose step is additionally capped so that the
//! fastest coupled phase is resolved.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::dop853;
use crate::model::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("step size {h:e} at t = {t} fell below the underflow limit {limit:e}")]
    StepSizeUnderflow { t: f64, h: f64, limit: f64 },
    #[error("non-finite amplitude at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("state has {found} amplitudes but the model has {expected} states")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

/// Interaction-frame amplitudes at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// Unit population in `state` at time `t`.
    pub fn basis(n: usize, state: usize, t: f64) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[state] = Complex64::new(1.0, 0.0);
        StateVector { t, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Lab-frame amplitudes `psi_i = exp(-i(beta_i t^2/2 + alpha_i t)) a_i`.
    pub fn to_lab(&self, spec: &ModelSpec) -> Vec<Complex64> {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::cis(-frame_phase(spec, i, self.t)))
            .collect()
    }

    /// Inverse of [`StateVector::to_lab`].
    pub fn from_lab(spec: &ModelSpec, t: f64, psi: &[Complex64]) -> Self {
        let amps = psi
            .iter()
            .enumerate()
            .map(|(i, p)| p * Complex64::cis(frame_phase(spec, i, t)))
            .collect();
        StateVector { t, amps }
    }
}

/// Dynamic phase `beta_i t^2/2 + alpha_i t` removed by the frame change.
pub fn frame_phase(spec: &ModelSpec, i: usize, t: f64) -> f64 {
    0.5 * spec.beta[i] * t * t + spec.alpha[i] * t
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// `None` selects the phase-resolving cap evaluated at the current time.
    pub max_step: Option<f64>,
    /// `None` selects an automatic starting step.
    pub initial_step: Option<f64>,
    /// Number of evenly spaced output samples, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: None,
            initial_step: None,
            sample_count: 2000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn validate(&self) -> Result<(), PropagationError> {
        let bad = |msg: &str| Err(PropagationError::InvalidConfig(msg.to_string()));
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad("rtol must be positive");
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad("atol must be positive");
        }
        if self.sample_count < 2 {
            return bad("sample_count must be at least 2");
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return bad("max_step must be positive");
            }
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) {
                return bad("initial_step must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub samples: Vec<Sample>,
    pub final_state: StateVector,
    /// Largest `|‖a‖² - ‖a₀‖²|` seen at any accepted step.
    pub norm_drift: f64,
    pub rhs_evals: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

/// Interaction-frame right-hand side with the model flattened for speed.
#[derive(Debug, Clone)]
pub struct FrameRhs {
    n: usize,
    half_beta: Vec<f64>,
    alpha: Vec<f64>,
    coupling: Vec<Complex64>,
    /// `(|beta_i - beta_j|, |alpha_i - alpha_j|)` for every coupled pair.
    coupled: Vec<(f64, f64)>,
}

const RATE_FLOOR: f64 = 1e-12;

impl FrameRhs {
    pub fn new(spec: &ModelSpec) -> Self {
        let n = spec.n;
        let mut coupling = Vec::with_capacity(n * n);
        let mut coupled = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = if i == j {
                    Complex64::new(0.0, 0.0)
                } else {
                    spec.coupling[(i, j)]
                };
                coupling.push(c);
                if j > i && c.norm_sqr() > 0.0 {
                    coupled.push((
                        (spec.beta[i] - spec.beta[j]).abs(),
                        (spec.alpha[i] - spec.alpha[j]).abs(),
                    ));
                }
            }
        }
        FrameRhs {
            n,
            half_beta: spec.beta.iter().map(|b| 0.5 * b).collect(),
            alpha: spec.alpha.clone(),
            coupling,
            coupled,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Writes `da/dt` at time `t` into `out`, using `work` (length `2n`) as
    /// scratch.
    pub fn eval(&self, t: f64, a: &[Complex64], out: &mut [Complex64], work: &mut [Complex64]) {
        let n = self.n;
        let tt = t * t;
        let (phase, rotated) = work.split_at_mut(n);
        for j in 0..n {
            let (s, c) = (self.half_beta[j] * tt + self.alpha[j] * t).sin_cos();
            phase[j] = Complex64::new(c, s);
            rotated[j] = phase[j].conj() * a[j];
        }
        for i in 0..n {
            let row = &self.coupling[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, w) in row.iter().zip(rotated.iter()) {
                acc += c * w;
            }
            // -i exp(+i phase_i) acc
            let rot = phase[i] * acc;
            out[i] = Complex64::new(rot.im, -rot.re);
        }
    }

    /// Quarter period of the fastest coupled phase at time `t`; infinite when
    /// nothing is coupled.
    pub fn phase_step_cap(&self, t: f64) -> f64 {
        let rate = self
            .coupled
            .iter()
            .map(|&(db, da)| db * t.abs() + da)
            .fold(0.0, f64::max);
        if self.coupled.is_empty() {
            f64::INFINITY
        } else {
            0.25 * 2.0 * PI / (rate + RATE_FLOOR)
        }
    }
}

/// Interaction-frame derivative `da/dt` for `state`.
pub fn rhs(spec: &ModelSpec, state: &StateVector) -> Vec<Complex64> {
    let f = FrameRhs::new(spec);
    let mut out = vec![Complex64::new(0.0, 0.0); spec.n];
    let mut work = vec![Complex64::new(0.0, 0.0); 2 * spec.n];
    f.eval(state.t, &state.amps, &mut out, &mut work);
    out
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

const SAFE: f64 = 0.9;
/// Bounds on `h_old / h_new`.
const SHRINK_LIMIT: f64 = 1.0 / 0.333;
const GROW_LIMIT: f64 = 1.0 / 6.0;
const EXPO: f64 = 1.0 / 8.0;
const UNDERFLOW_FACTOR: f64 = 1e-14;

struct Stepper<'a> {
    f: &'a FrameRhs,
    rtol: f64,
    atol: f64,
    k: Vec<Vec<Complex64>>,
    y_stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    work: Vec<Complex64>,
    evals: u64,
}

impl<'a> Stepper<'a> {
    fn new(f: &'a FrameRhs, config: &IntegratorConfig) -> Self {
        let n = f.dim();
        let zero = Complex64::new(0.0, 0.0);
        Stepper {
            f,
            rtol: config.rtol,
            atol: config.atol,
            k: vec![vec![zero; n]; 12],
            y_stage: vec![zero; n],
            y_new: vec![zero; n],
            work: vec![zero; 2 * n],
            evals: 0,
        }
    }

    fn scale(&self, y_norm: f64) -> f64 {
        self.atol + self.rtol * y_norm
    }

    /// FSAL derivative at the start of the step goes into `k[0]`.
    fn prime(&mut self, t: f64, y: &[Complex64]) {
        let (head, _) = self.k.split_at_mut(1);
        self.f.eval(t, y, &mut head[0], &mut self.work);
        self.evals += 1;
    }

    /// Hairer's starting step heuristic.
    fn initial_step(&mut self, t: f64, y: &[Complex64], dir: f64, h_max: f64) -> f64 {
        let n2 = (2 * y.len()) as f64;
        let sk = self.scale(norm_sqr(y).sqrt());
        let dnf = norm_sqr(&self.k[0]) / (sk * sk * n2);
        let dny = norm_sqr(y) / (sk * sk * n2);
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(h_max);
        for (ys, (yi, ki)) in self.y_stage.iter_mut().zip(y.iter().zip(&self.k[0])) {
            *ys = yi + ki * (h * dir);
        }
        let mut f1 = vec![Complex64::new(0.0, 0.0); y.len()];
        self.f.eval(t + h * dir, &self.y_stage, &mut f1, &mut self.work);
        self.evals += 1;
        let diff: f64 = f1
            .iter()
            .zip(&self.k[0])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let der2 = (diff / (sk * sk * n2)).sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(EXPO)
        };
        (100.0 * h).min(h1).min(h_max)
    }

    /// One trial step of signed size `h`. On return `y_new` holds the
    /// eighth-order solution and the result is the scaled error norm.
    fn attempt(&mut self, t: f64, y: &[Complex64], h: f64) -> f64 {
        let n = y.len();
        for (s, (c, row)) in dop853::STAGES.iter().enumerate() {
            let stage = s + 1;
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(j, a) in row.iter() {
                    acc += self.k[j][i] * a;
                }
                self.y_stage[i] = y[i] + acc * h;
            }
            let (_, tail) = self.k.split_at_mut(stage);
            self.f
                .eval(t + c * h, &self.y_stage, &mut tail[0], &mut self.work);
            self.evals += 1;
        }

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let mut incr = Complex64::new(0.0, 0.0);
            for &(j, b) in dop853::WEIGHTS.iter() {
                incr += self.k[j][i] * b;
            }
            self.y_new[i] = y[i] + incr * h;
        }
        let sk = self.scale(norm_sqr(y).sqrt().max(norm_sqr(&self.y_new).sqrt()));
        for i in 0..n {
            let mut incr = Complex64::new(0.0, 0.0);
            for &(j, b) in dop853::WEIGHTS.iter() {
                incr += self.k[j][i] * b;
            }
            let mut e5 = Complex64::new(0.0, 0.0);
            for &(j, e) in dop853::ERR5.iter() {
                e5 += self.k[j][i] * e;
            }
            let mut e3 = incr;
            for &(j, e) in dop853::ERR3.iter() {
                e3 -= self.k[j][i] * e;
            }
            err5 += e5.norm_sqr() / (sk * sk);
            err3 += e3.norm_sqr() / (sk * sk);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err5 * (1.0 / (deno * (2 * n) as f64)).sqrt()
    }
}

/// Integrates from `initial.t` to `t_final` (either direction).
pub fn propagate(
    spec: &ModelSpec,
    initial: &StateVector,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<PropagationResult, PropagationError> {
    config.validate()?;
    if initial.amps.len() != spec.n {
        return Err(PropagationError::DimensionMismatch {
            expected: spec.n,
            found: initial.amps.len(),
        });
    }
    let t0 = initial.t;
    if !(t0.is_finite() && t_final.is_finite()) || t0 == t_final {
        return Err(PropagationError::InvalidConfig(format!(
            "cannot integrate from {t0} to {t_final}"
        )));
    }
    if initial.amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
        return Err(PropagationError::NonFiniteState { t: t0 });
    }

    let f = FrameRhs::new(spec);
    let mut stepper = Stepper::new(&f, config);
    let dir = (t_final - t0).signum();
    let span = (t_final - t0).abs();
    let underflow = UNDERFLOW_FACTOR * t0.abs().max(t_final.abs()).max(span);
    let cap = |t: f64| -> f64 {
        match config.max_step {
            Some(h) => h,
            None => f.phase_step_cap(t),
        }
        .min(span)
    };

    let sample_times: Vec<f64> = (0..config.sample_count)
        .map(|k| {
            if k + 1 == config.sample_count {
                t_final
            } else {
                t0 + (t_final - t0) * (k as f64) / ((config.sample_count - 1) as f64)
            }
        })
        .collect();

    let mut t = t0;
    let mut y = initial.amps.clone();
    let norm0 = norm_sqr(&y);
    let mut norm_drift: f64 = 0.0;
    let mut samples = Vec::with_capacity(config.sample_count);
    samples.push(Sample {
        t,
        probabilities: y.iter().map(|a| a.norm_sqr()).collect(),
    });
    let mut next_sample = 1;

    stepper.prime(t, &y);
    let mut h = match config.initial_step {
        Some(h0) => h0.min(cap(t)),
        None => stepper.initial_step(t, &y, dir, cap(t)),
    };
    let mut last_rejected = false;
    let mut accepted: u64 = 0;
    let mut rejected: u64 = 0;

    while next_sample < sample_times.len() {
        let target = sample_times[next_sample];
        h = h.min(cap(t));
        let remaining = (target - t).abs();
        let lands = h >= remaining * (1.0 - 1e-12);
        let h_step = if lands { remaining } else { h };
        if h_step < underflow && !lands {
            return Err(PropagationError::StepSizeUnderflow {
                t,
                h: h_step,
                limit: underflow,
            });
        }

        let err = stepper.attempt(t, &y, h_step * dir);
        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            t = if lands { target } else { t + h_step * dir };
            std::mem::swap(&mut y, &mut stepper.y_new);
            if y.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                return Err(PropagationError::NonFiniteState { t });
            }
            accepted += 1;
            norm_drift = norm_drift.max((norm_sqr(&y) - norm0).abs());
            stepper.prime(t, &y);

            let fac = GROW_LIMIT.max(SHRINK_LIMIT.min(fac11 / SAFE));
            let mut h_new = h_step / fac;
            if last_rejected {
                h_new = h_new.min(h_step);
            }
            // A step shortened to hit a sample should not shrink the next one.
            if lands {
                h_new = h_new.max(h);
            }
            h = h_new;
            last_rejected = false;
            if lands {
                samples.push(Sample {
                    t,
                    probabilities: y.iter().map(|a| a.norm_sqr()).collect(),
                });
                next_sample += 1;
            }
        } else {
            rejected += 1;
            last_rejected = true;
            h = h_step / SHRINK_LIMIT.min(fac11 / SAFE);
            if h < underflow {
                return Err(PropagationError::StepSizeUnderflow {
                    t,
                    h,
                    limit: underflow,
                });
            }
        }
    }

    Ok(PropagationResult {
        samples,
        final_state: StateVector { t, amps: y },
        norm_drift,
        rhs_evals: stepper.evals,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// Latest diabatic crossing time `max |(alpha_j - alpha_i)/(beta_i - beta_j)|`
/// over pairs with different slopes, or `None` when all slopes are equal.
pub fn latest_crossing(spec: &ModelSpec) -> Option<f64> {
    let mut latest: Option<f64> = None;
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let db = spec.beta[i] - spec.beta[j];
            if db != 0.0 {
                let tc = ((spec.alpha[j] - spec.alpha[i]) / db).abs();
                latest = Some(latest.map_or(tc, |l: f64| l.max(tc)));
            }
        }
    }
    latest
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("all levels are parallel; there are no crossings to enclose")]
pub struct NoCrossings;

/// Half-width `T` of a window `[-T, T]` that contains every diabatic
/// crossing plus `margin`.
pub fn choose_window(spec: &ModelSpec, margin: f64) -> Result<f64, NoCrossings> {
    latest_crossing(spec).map(|tc| tc + margin).ok_or(NoCrossings)
}

/// Residual cycles that the slowest coupled phase must complete after the
/// last crossing.
pub const RESIDUAL_CYCLES: f64 = 50.0;

/// Margin after which the slowest coupled crossing pair has rotated its
/// relative phase by at least [`RESIDUAL_CYCLES`] cycles:
/// `|dbeta| m^2 / 2 >= 2 pi cycles`.
pub fn default_margin(spec: &ModelSpec) -> f64 {
    let mut slowest = f64::INFINITY;
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let db = (spec.beta[i] - spec.beta[j]).abs();
            if db > 0.0 && spec.coupling[(i, j)].norm_sqr() > 0.0 {
                slowest = slowest.min(db);
            }
        }
    }
    if !slowest.is_finite() {
        let max = spec.max_slope();
        let min = spec.min_slope();
        slowest = (max - min).max(f64::MIN_POSITIVE);
    }
    (4.0 * PI * RESIDUAL_CYCLES / slowest).sqrt()
}

/// `choose_window` with [`default_margin`].
pub fn auto_window(spec: &ModelSpec) -> Result<f64, NoCrossings> {
    choose_window(spec, default_margin(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lz2(g: f64) -> ModelSpec {
        ModelSpec::uncoupled(vec![1.0, -1.0], vec![0.0, 0.0]).with_coupling(0, 1, c(g, 0.0))
    }

    #[test]
    fn uncoupled_rhs_vanishes() {
        let spec = ModelSpec::uncoupled(vec![1.0, 0.0, -2.0], vec![0.1, 0.0, 3.0]);
        let state = StateVector {
            t: 3.7,
            amps: vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 0.7)],
        };
        assert!(rhs(&spec, &state).iter().all(|d| d.norm() == 0.0));
    }

    #[test]
    fn two_state_rhs_at_origin() {
        let d = rhs(&lz2(0.5), &StateVector::basis(2, 0, 0.0));
        assert_eq!(d, vec![c(0.0, 0.0), c(0.0, -0.5)]);
    }

    #[test]
    fn single_state_is_trivial() {
        let spec = ModelSpec::uncoupled(vec![0.7], vec![-1.2]);
        let res = propagate(
            &spec,
            &StateVector::basis(1, 0, -50.0),
            50.0,
            &IntegratorConfig::default().with_samples(5),
        )
        .unwrap();
        assert_eq!(res.samples.len(), 5);
        assert!((res.final_state.amps[0].norm() - 1.0).abs() < 1e-12);
        assert!(res.norm_drift < 1e-12);
        assert_eq!(res.final_state.t, 50.0);
    }

    #[test]
    fn samples_are_evenly_spaced_and_end_exactly() {
        let res = propagate(
            &lz2(0.3),
            &StateVector::basis(2, 0, -10.0),
            10.0,
            &IntegratorConfig::default().with_samples(11),
        )
        .unwrap();
        let times: Vec<f64> = res.samples.iter().map(|s| s.t).collect();
        for (k, t) in times.iter().enumerate() {
            assert!((t - (-10.0 + 2.0 * k as f64)).abs() < 1e-12);
        }
        assert_eq!(*times.last().unwrap(), 10.0);
    }

    #[test]
    fn backward_run_reverses_forward_run() {
        let spec = lz2(0.4);
        let cfg = IntegratorConfig::default().with_samples(3);
        let fwd = propagate(&spec, &StateVector::basis(2, 0, -20.0), 20.0, &cfg).unwrap();
        let back = propagate(&spec, &fwd.final_state, -20.0, &cfg).unwrap();
        assert_eq!(back.final_state.t, -20.0);
        assert!((back.final_state.amps[0] - c(1.0, 0.0)).norm() < 1e-8);
        assert!(back.final_state.amps[1].norm() < 1e-8);
    }

    #[test]
    fn config_errors() {
        let spec = lz2(0.5);
        let s = StateVector::basis(2, 0, 0.0);
        let mut cfg = IntegratorConfig::default();
        cfg.sample_count = 1;
        assert!(matches!(
            propagate(&spec, &s, 1.0, &cfg),
            Err(PropagationError::InvalidConfig(_))
        ));
        let cfg = IntegratorConfig::default().with_tolerances(0.0, 1e-12);
        assert!(propagate(&spec, &s, 1.0, &cfg).is_err());
        assert!(propagate(&spec, &s, 0.0, &IntegratorConfig::default()).is_err());
        let short = StateVector::basis(1, 0, 0.0);
        assert!(matches!(
            propagate(&spec, &short, 1.0, &IntegratorConfig::default()),
            Err(PropagationError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let spec = lz2(0.5);
        let s = StateVector {
            t: 0.0,
            amps: vec![c(f64::NAN, 0.0), c(0.0, 0.0)],
        };
        assert!(matches!(
            propagate(&spec, &s, 1.0, &IntegratorConfig::default()),
            Err(PropagationError::NonFiniteState { .. })
        ));
    }

    #[test]
    fn tiny_fixed_step_underflows() {
        let spec = lz2(0.5);
        let cfg = IntegratorConfig {
            max_step: Some(1e-13),
            ..IntegratorConfig::default()
        };
        assert!(matches!(
            propagate(&spec, &StateVector::basis(2, 0, -10.0), 10.0, &cfg),
            Err(PropagationError::StepSizeUnderflow { .. })
        ));
    }

    #[test]
    fn phase_cap_follows_fastest_pair() {
        let f = FrameRhs::new(&lz2(0.5));
        let expected = 0.25 * 2.0 * PI / (2.0 * 100.0 + RATE_FLOOR);
        assert!((f.phase_step_cap(-100.0) - expected).abs() < 1e-15);
        let free = FrameRhs::new(&ModelSpec::uncoupled(vec![1.0, 0.0], vec![0.0, 0.0]));
        assert!(free.phase_step_cap(5.0).is_infinite());
    }

    #[test]
    fn lab_frame_round_trip() {
        let spec = lz2(0.5);
        let s = StateVector {
            t: 12.5,
            amps: vec![c(0.6, 0.0), c(0.0, 0.8)],
        };
        let back = StateVector::from_lab(&spec, s.t, &s.to_lab(&spec));
        for (a, b) in s.amps.iter().zip(&back.amps) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn windows() {
        assert_eq!(choose_window(&lz2(0.5), 40.0), Ok(40.0));
        let fig1 = ModelSpec::uncoupled(
            vec![1.0, 1.0, 1.0, 0.0, -0.8],
            vec![0.0, 0.3, 0.5, 0.0, 0.4],
        );
        assert!((choose_window(&fig1, 10.0).unwrap() - 10.5).abs() < 1e-12);
        let flat = ModelSpec::uncoupled(vec![1.0, 1.0], vec![0.0, 1.0]);
        assert_eq!(choose_window(&flat, 10.0), Err(NoCrossings));
    }

    #[test]
    fn default_margin_gives_fifty_cycles() {
        let spec = lz2(0.5);
        let m = default_margin(&spec);
        let cycles = 2.0 * m * m / 2.0 / (2.0 * PI);
        assert!((cycles - RESIDUAL_CYCLES).abs() < 1e-9);
    }
}
