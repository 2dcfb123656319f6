#![allow(dead_code)]

use std::f64::consts::PI;

use mlz::model::ModelSpec;
use mlz::theory::DoGeometry;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Slopes available to levels outside the extreme band. The band itself
/// sits at +1 (or -1 after mirroring), so every other slope is at least
/// 0.5 away from it.
const OTHER_SLOPES: [f64; 5] = [-1.5, -1.0, -0.5, 0.0, 0.5];

fn spaced_offsets(rng: &mut ChaCha8Rng, count: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.random_range(-2.0..2.0)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.windows(2).all(|w| w[1] - w[0] >= gap) {
            return v;
        }
    }
}

pub fn random_coupling(rng: &mut ChaCha8Rng, max_abs: f64) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.05..max_abs), rng.random_range(0.0..2.0 * PI))
}

/// Canonical model with `n` levels, the first `band` of which form an
/// extreme band. `distinct_rest` forces every other level onto its own
/// slope. Cross-slope pairs are coupled with probability 0.7, and every
/// level has at least one coupling.
pub fn random_canonical(rng: &mut ChaCha8Rng, n: usize, band: usize, distinct_rest: bool) -> ModelSpec {
    assert!(band >= 1 && band < n);
    let mut beta = vec![1.0; band];
    if distinct_rest {
        let mut pool = OTHER_SLOPES.to_vec();
        for _ in band..n {
            let k = rng.random_range(0..pool.len());
            beta.push(pool.swap_remove(k));
        }
    } else {
        for _ in band..n {
            beta.push(OTHER_SLOPES[rng.random_range(0..OTHER_SLOPES.len())]);
        }
    }
    let mut alpha = spaced_offsets(rng, band, 0.3);
    alpha.extend((band..n).map(|_| 0.0));
    // Levels sharing a slope outside the band also need distinct offsets.
    for slope in OTHER_SLOPES {
        let members: Vec<usize> = (band..n).filter(|&i| beta[i] == slope).collect();
        for (i, a) in members.iter().zip(spaced_offsets(rng, members.len(), 0.3)) {
            alpha[*i] = a;
        }
    }
    if rng.random_bool(0.5) {
        for b in &mut beta {
            *b = -*b;
        }
    }
    let mut spec = ModelSpec::uncoupled(beta, alpha);
    for i in 0..n {
        for j in (i + 1)..n {
            if spec.beta[i] != spec.beta[j] && rng.random_bool(0.7) {
                let c = random_coupling(rng, 0.8);
                spec.set_coupling(i, j, c);
            }
        }
    }
    // No level is left isolated.
    for i in 0..n {
        if (0..n).all(|j| spec.coupling[(i, j)].norm() == 0.0) {
            let others: Vec<usize> = (0..n).filter(|&j| spec.beta[j] != spec.beta[i]).collect();
            let j = others[rng.random_range(0..others.len())];
            let c = random_coupling(rng, 0.8);
            spec.set_coupling(i, j, c);
        }
    }
    spec
}

/// Random canonical model with `3 <= n <= max_n` levels and an extreme
/// band of one to three members (states `0..band`).
pub fn random_small(rng: &mut ChaCha8Rng, max_n: usize) -> (ModelSpec, usize) {
    let n = rng.random_range(3..=max_n);
    let band = rng.random_range(1..=3.min(n - 1));
    (random_canonical(rng, n, band, false), band)
}

pub fn random_do(rng: &mut ChaCha8Rng) -> DoGeometry {
    let levels = rng.random_range(1..=4);
    let band_slope: f64 = rng.random_range(-1.0..1.0);
    let mut sloped_slope: f64 = band_slope;
    while (sloped_slope - band_slope).abs() < 0.5 {
        sloped_slope = rng.random_range(-2.0..2.0);
    }
    DoGeometry {
        sloped_slope,
        sloped_offset: rng.random_range(-1.0..1.0),
        band_slope,
        band_offsets: spaced_offsets(rng, levels, 0.4),
        couplings: (0..levels).map(|_| random_coupling(rng, 0.6)).collect(),
    }
}

/// Random Hermitian coupling on arbitrary slopes, band couplings included.
pub fn random_general(rng: &mut ChaCha8Rng, n: usize) -> ModelSpec {
    let beta: Vec<f64> = (0..n).map(|_| OTHER_SLOPES[rng.random_range(0..OTHER_SLOPES.len())] + 0.5).collect();
    let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut spec = ModelSpec::uncoupled(beta, alpha);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = random_coupling(rng, 0.8);
            spec.set_coupling(i, j, c);
        }
    }
    spec
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
