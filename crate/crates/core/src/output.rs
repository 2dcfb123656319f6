//! CSV writers. Every float is printed with 17 significant digits so runs
//! are byte-for-byte reproducible.

use std::fmt::Write;

use crate::propagator::PropagationResult;
use crate::scattering::ScatteringMatrix;
use crate::sweep::{SweepOutput, SweepRow};

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn row(cells: impl IntoIterator<Item = String>) -> String {
    let mut line = cells.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// `t,P1,...,PN`, one row per sample.
pub fn time_series_csv(result: &PropagationResult) -> String {
    let n = result.final_state.amps.len();
    let mut out = row(std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("P{i}"))));
    for s in &result.samples {
        out.push_str(&row(
            std::iter::once(fmt17(s.t)).chain(s.probabilities.iter().map(|&p| fmt17(p))),
        ));
    }
    out
}

/// Probability block: header `S_ij_prob,1..N` (columns are initial states),
/// then one row per final state `i`.
pub fn probability_csv(s: &ScatteringMatrix) -> String {
    let n = s.n();
    let mut out = row(std::iter::once("S_ij_prob".to_string()).chain((1..=n).map(|j| j.to_string())));
    for i in 0..n {
        out.push_str(&row(
            std::iter::once((i + 1).to_string()).chain((0..n).map(|j| fmt17(s.probabilities[(i, j)]))),
        ));
    }
    out
}

/// Amplitude block with a `(re, im)` column pair per initial state.
pub fn amplitude_csv(s: &ScatteringMatrix) -> String {
    let n = s.n();
    let mut out = row(
        std::iter::once("S_ij_amp".to_string())
            .chain((1..=n).flat_map(|j| [format!("{j}_re"), format!("{j}_im")])),
    );
    for i in 0..n {
        out.push_str(&row(std::iter::once((i + 1).to_string()).chain((0..n).flat_map(|j| {
            let a = s.amplitudes[(i, j)];
            [fmt17(a.re), fmt17(a.im)]
        }))));
    }
    out
}

/// `param,P1,...,PN` for a column sweep; `param,P_i_j,...` (column-major)
/// for a full-matrix sweep.
pub fn sweep_csv(rows: &[SweepRow], n: usize, output: SweepOutput) -> String {
    let header: Vec<String> = match output {
        SweepOutput::Column(_) => (1..=n).map(|i| format!("P{i}")).collect(),
        SweepOutput::Full => (1..=n)
            .flat_map(|j| (1..=n).map(move |i| format!("P_{i}_{j}")))
            .collect(),
    };
    let mut out = row(std::iter::once("param".to_string()).chain(header));
    for r in rows {
        out.push_str(&row(
            std::iter::once(fmt17(r.param)).chain(r.values.iter().map(|&v| fmt17(v))),
        ));
    }
    out
}

/// Plain-text table of final probabilities.
pub fn probability_line(probs: &[f64]) -> String {
    let mut s = String::new();
    for (i, p) in probs.iter().enumerate() {
        let _ = write!(s, "{}P{}={:.6e}", if i == 0 { "" } else { " " }, i + 1, p);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{Sample, StateVector};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(-500.0), "-5.0000000000000000e2");
        assert_eq!(fmt17(f64::NAN), "NaN");
        let x = 0.234_567_890_123_456_78;
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn time_series_layout() {
        let res = PropagationResult {
            samples: vec![
                Sample { t: -1.0, probabilities: vec![1.0, 0.0] },
                Sample { t: 1.0, probabilities: vec![0.25, 0.75] },
            ],
            final_state: StateVector::basis(2, 0, 1.0),
            norm_drift: 0.0,
            rhs_evals: 0,
            accepted_steps: 0,
            rejected_steps: 0,
        };
        let csv = time_series_csv(&res);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,P1,P2");
        assert_eq!(lines[2], "1.0000000000000000e0,2.5000000000000000e-1,7.5000000000000000e-1");
    }

    #[test]
    fn matrix_layout() {
        let amps = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.6, 0.0),
        ]);
        let s = ScatteringMatrix {
            probabilities: amps.map(|a| a.norm_sqr()),
            amplitudes: amps,
            window: 1.0,
            column_drift: vec![0.0; 2],
            saturation: None,
        };
        let p = probability_csv(&s);
        assert!(p.starts_with("S_ij_prob,1,2\n1,"));
        assert_eq!(p.lines().count(), 3);
        let a = amplitude_csv(&s);
        assert!(a.starts_with("S_ij_amp,1_re,1_im,2_re,2_im\n"));
    }
}
