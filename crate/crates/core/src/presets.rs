//! Built-in models.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelSpec;
use crate::modelfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresetError {
    #[error("unknown preset `{0}`; available: {names}", names = PRESET_NAMES.join(", "))]
    Unknown(String),
    #[error("preset `{0}` needs a numeric argument")]
    MissingArgument(&'static str),
    #[error("invalid argument `{1}` for preset `{0}`")]
    BadArgument(&'static str, String),
}

pub const PRESET_NAMES: [&str; 5] = ["fig1", "fig1-decoupled", "fig1-alt", "fig4", "lz2"];

/// Couplings of the five-state model, `(i, j, re, im)` with 1-based indices.
const FIG1_COUPLINGS: [(usize, usize, f64, f64); 10] = [
    (1, 2, 0.0, 0.0),
    (1, 3, 0.0, 0.0),
    (2, 3, 0.0, 0.0),
    (3, 4, 0.8, 0.0),
    (3, 5, 0.3, 0.24),
    (2, 4, 0.1, 0.7),
    (2, 5, 0.5, 0.1),
    (1, 4, 0.4, 0.12),
    (1, 5, 0.25, 0.2),
    (4, 5, 0.6, 0.9),
];

const FIG1_BETA: [f64; 5] = [1.0, 1.0, 1.0, 0.0, -0.8];
/// The fifth offset is -0.4. Flipping its sign (`fig1-alt`) changes the
/// final probabilities of column 1 to roughly (0.23, 0, 0, 0.17, 0.60).
const FIG1_ALPHA: [f64; 5] = [0.0, 0.3, 0.5, 0.0, -0.4];
const FIG1_ALT_ALPHA: [f64; 5] = [0.0, 0.3, 0.5, 0.0, 0.4];

fn five_state(alpha: [f64; 5], decouple_band: bool) -> ModelSpec {
    let mut spec = ModelSpec::uncoupled(FIG1_BETA.to_vec(), alpha.to_vec());
    for (i, j, re, im) in FIG1_COUPLINGS {
        if decouple_band && [i, j].iter().any(|k| *k == 2 || *k == 3) {
            continue;
        }
        spec.set_coupling(i - 1, j - 1, Complex64::new(re, im));
    }
    spec
}

/// Five-state model with a three-level max-slope band.
pub fn fig1() -> ModelSpec {
    five_state(FIG1_ALPHA, false)
}

/// [`fig1`] with every coupling of states 2 and 3 removed.
pub fn fig1_decoupled() -> ModelSpec {
    five_state(FIG1_ALPHA, true)
}

/// [`fig1`] with the fifth offset at +0.4.
pub fn fig1_alt() -> ModelSpec {
    five_state(FIG1_ALT_ALPHA, false)
}

/// Four-state model with a two-level min-slope band whose spacing is
/// `epsilon`: `H11 = -t`, `H22 = -t - epsilon`, `H33 = t`, `H44 = 0.5 t - 0.5`.
pub fn fig4(epsilon: f64) -> ModelSpec {
    let mut spec = ModelSpec::uncoupled(vec![-1.0, -1.0, 1.0, 0.5], vec![0.0, -epsilon, 0.0, -0.5]);
    for (i, j, re, im) in [
        (1, 3, 0.4, -0.1),
        (1, 4, 0.6, 0.0),
        (2, 3, 0.4, 0.5),
        (2, 4, 0.2, 0.3),
    ] {
        spec.set_coupling(i - 1, j - 1, Complex64::new(re, im));
    }
    spec
}

/// Two crossing levels, slopes `+1` and `-1`, coupling 0.5.
pub fn lz2() -> ModelSpec {
    ModelSpec::uncoupled(vec![1.0, -1.0], vec![0.0, 0.0]).with_coupling(0, 1, Complex64::new(0.5, 0.0))
}

/// A preset resolved from its name and optional argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub spec: ModelSpec,
    /// Window half-width used by default, if any.
    pub default_window: Option<f64>,
    pub header: String,
}

impl Preset {
    /// Model file text: a comment header followed by the model.
    pub fn model_file(&self) -> String {
        let mut out = String::new();
        for line in self.header.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&modelfile::format(&self.spec));
        out
    }
}

/// Looks up a preset. `fig4` takes the level spacing epsilon as argument.
pub fn preset(name: &str, arg: Option<&str>) -> Result<Preset, PresetError> {
    let p = match name {
        "fig1" => Preset {
            name: "fig1",
            spec: fig1(),
            default_window: Some(500.0),
            header: "five-state model, max-slope band {1,2,3}".into(),
        },
        "fig1-decoupled" => Preset {
            name: "fig1-decoupled",
            spec: fig1_decoupled(),
            default_window: Some(500.0),
            header: "five-state model, states 2 and 3 decoupled".into(),
        },
        "fig1-alt" => Preset {
            name: "fig1-alt",
            spec: fig1_alt(),
            default_window: Some(500.0),
            header: "five-state model with alpha_5 = +0.4".into(),
        },
        "fig4" => {
            let raw = arg.ok_or(PresetError::MissingArgument("fig4"))?;
            let epsilon: f64 = raw
                .parse()
                .ok()
                .filter(|e: &f64| e.is_finite())
                .ok_or_else(|| PresetError::BadArgument("fig4", raw.to_string()))?;
            Preset {
                name: "fig4",
                spec: fig4(epsilon),
                default_window: Some(600.0),
                header: format!("four-state model, min-slope band {{1,2}}, epsilon = {epsilon}"),
            }
        }
        "lz2" => Preset {
            name: "lz2",
            spec: lz2(),
            default_window: None,
            header: "two-state Landau-Zener model".into(),
        },
        other => return Err(PresetError::Unknown(other.to_string())),
    };
    Ok(p)
}
