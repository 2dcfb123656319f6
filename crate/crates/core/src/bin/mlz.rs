use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlz::model::{
    self, bands, canonicalize_bands, classify_transition, is_valid, near_parallel_pairs, validate, ModelSpec,
    Severity,
};
use mlz::output::{self, fmt17};
use mlz::presets::{self, Preset};
use mlz::propagator::{auto_window, propagate, IntegratorConfig, StateVector};
use mlz::scattering::{adiabatic_column, saturation_check, scattering_matrix};
use mlz::sweep::{parse_grid, ParamPath, SweepOutput, SweepSpec, Window};
use mlz::theory::{be_survival, nogo_prediction};
use mlz::modelfile;

/// Unitarity defects above this mark a scattering matrix as untrusted.
const UNITARITY_LIMIT: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "mlz", version, about = "Multistate Landau-Zener propagation and scattering")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Relative tolerance of the integrator.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rtol: f64,
    /// Absolute tolerance of the integrator.
    #[arg(long, global = true, default_value_t = 1e-12)]
    atol: f64,
    /// Window half-width T (integrate from -T to T), or `auto`.
    #[arg(long = "T", global = true)]
    window: Option<String>,
    /// Output file. Defaults to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress warnings and progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time series of populations for one initial state.
    Simulate {
        /// Model file, or `preset:NAME[:ARG]`.
        model: String,
        /// Initial state (1-based).
        #[arg(long, default_value_t = 1)]
        initial: usize,
        /// Number of evenly spaced output samples.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Full probability matrix and unitarity report.
    Scatter {
        model: String,
    },
    /// Compare numerics with the survival formula and the zero-probability
    /// prediction for counterintuitive transitions.
    Check {
        model: String,
        #[arg(long, default_value_t = 1)]
        initial: usize,
    },
    /// Final probabilities as a function of one model parameter.
    Sweep {
        model: String,
        /// alpha[i], beta[i], coupling[i][j].re or coupling[i][j].im, with an
        /// optional leading `-` to negate the swept value.
        #[arg(long, allow_hyphen_values = true)]
        param: String,
        /// Linear grid `start:stop:count`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "values")]
        grid: Option<String>,
        /// Explicit comma-separated values.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1, conflicts_with = "full")]
        initial: usize,
        /// Emit the whole probability matrix per point.
        #[arg(long)]
        full: bool,
    },
    /// Print a built-in model file.
    Preset {
        name: String,
        #[arg(allow_hyphen_values = true)]
        arg: Option<String>,
    },
    /// Table of transition classes for every ordered pair.
    Classify {
        model: String,
    },
}

enum CliError {
    Input(String),
    Integrator(String),
    Unitarity(f64),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Integrator(_) => 3,
            CliError::Unitarity(_) => 4,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

struct Loaded {
    spec: ModelSpec,
    preset: Option<Preset>,
}

impl GlobalOpts {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig::default().with_tolerances(self.rtol, self.atol)
    }

    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn window(&self, loaded: &Loaded) -> CliResult<f64> {
        match self.window.as_deref() {
            Some("auto") => auto(&loaded.spec),
            Some(text) => text
                .parse::<f64>()
                .ok()
                .filter(|t| *t > 0.0 && t.is_finite())
                .ok_or_else(|| CliError::Input(format!("invalid --T value `{text}`"))),
            None => match loaded.preset.as_ref().and_then(|p| p.default_window) {
                Some(t) => Ok(t),
                None => auto(&loaded.spec),
            },
        }
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn auto(spec: &ModelSpec) -> CliResult<f64> {
    auto_window(spec).map_err(|e| CliError::Input(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn load(source: &str, opts: &GlobalOpts) -> CliResult<Loaded> {
    let (spec, preset) = if let Some(rest) = source.strip_prefix("preset:") {
        let (name, arg) = match rest.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (rest, None),
        };
        let p = presets::preset(name, arg).map_err(|e| CliError::Input(e.to_string()))?;
        (p.spec.clone(), Some(p))
    } else {
        let text = fs::read_to_string(source)
            .map_err(|e| CliError::Input(format!("cannot read {source}: {e}")))?;
        let spec = modelfile::parse(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        (spec, None)
    };

    let violations = validate(&spec);
    if !is_valid(&violations) {
        let lines: Vec<String> = violations
            .iter()
            .filter(|v| v.severity() == Severity::Error)
            .map(|v| v.to_string())
            .collect();
        return Err(CliError::Input(format!("invalid model:\n{}", lines.join("\n"))));
    }
    for v in &violations {
        opts.warn(&v.to_string());
    }
    for (i, j) in near_parallel_pairs(&spec) {
        opts.warn(&format!(
            "warning: slopes of states {} and {} differ by less than {:e}; they are treated as crossing",
            i + 1,
            j + 1,
            model::NEAR_PARALLEL_THRESHOLD
        ));
    }
    Ok(Loaded { spec, preset })
}

fn state_index(k: usize, n: usize) -> CliResult<usize> {
    if k == 0 || k > n {
        Err(CliError::Input(format!("state {k} out of range 1..={n}")))
    } else {
        Ok(k - 1)
    }
}

/// Canonical form for the theory checks, with a notice when the basis changed.
fn canonical(loaded: &Loaded, opts: &GlobalOpts) -> ModelSpec {
    if loaded.spec.is_canonical() {
        loaded.spec.clone()
    } else {
        opts.warn("note: band couplings removed by a change of basis; results refer to the canonical basis");
        canonicalize_bands(&loaded.spec).0
    }
}

fn simulate(opts: &GlobalOpts, model: &str, initial: usize, samples: usize) -> CliResult<()> {
    let loaded = load(model, opts)?;
    let k = state_index(initial, loaded.spec.n)?;
    let t = opts.window(&loaded)?;
    let config = opts.config().with_samples(samples);
    let res = propagate(&loaded.spec, &StateVector::basis(loaded.spec.n, k, -t), t, &config)
        .map_err(|e| CliError::Integrator(e.to_string()))?;
    let csv = output::time_series_csv(&res);
    let summary = format!(
        "window T = {t}\nfinal {}\nnorm drift = {:.3e}\nrhs evaluations = {}, rejected steps = {}",
        output::probability_line(&res.final_state.probabilities()),
        res.norm_drift,
        res.rhs_evals,
        res.rejected_steps
    );
    match &opts.out {
        Some(path) => {
            write_file(path, &csv)?;
            println!("{summary}");
        }
        None => {
            print!("{csv}");
            opts.warn(&summary);
        }
    }
    Ok(())
}

fn amplitude_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scatter");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_amp.{ext}"))
}

fn scatter(opts: &GlobalOpts, model: &str) -> CliResult<()> {
    let loaded = load(model, opts)?;
    let t = opts.window(&loaded)?;
    let s = scattering_matrix(&loaded.spec, t, &opts.config().with_samples(2))
        .map_err(|e| CliError::Integrator(e.to_string()))?;
    let probs = output::probability_csv(&s);
    let amps = output::amplitude_csv(&s);
    let report = format!(
        "window T = {t}\nunitarity defect max|S^dag S - I| = {:.3e}\nmax norm drift = {:.3e}",
        s.unitarity_defect(),
        s.max_drift()
    );
    match &opts.out {
        Some(path) => {
            write_file(path, &probs)?;
            write_file(&amplitude_path(path), &amps)?;
            println!("{report}");
        }
        None => {
            print!("{probs}\n{amps}");
            opts.warn(&report);
        }
    }
    if s.unitarity_defect() > UNITARITY_LIMIT {
        return Err(CliError::Unitarity(s.unitarity_defect()));
    }
    Ok(())
}

fn deviation_row(label: &str, predicted: f64, measured: f64) -> String {
    let abs = (measured - predicted).abs();
    let rel = if predicted != 0.0 { abs / predicted.abs() } else { f64::NAN };
    format!("{label:<14} {predicted:>14.6e} {measured:>14.6e} {abs:>12.3e} {rel:>12.3e}\n")
}

fn check(opts: &GlobalOpts, model: &str, initial: usize) -> CliResult<()> {
    let loaded = load(model, opts)?;
    let spec = canonical(&loaded, opts);
    let k = state_index(initial, spec.n)?;
    let t = opts.window(&loaded)?;
    let config = opts.config().with_samples(2);
    let s = scattering_matrix(&spec, t, &config).map_err(|e| CliError::Integrator(e.to_string()))?;
    let sat = saturation_check(&spec, k, t, &config).map_err(|e| CliError::Integrator(e.to_string()))?;

    let mut out = format!("window T = {t}\n\n");
    out.push_str(&format!(
        "{:<14} {:>14} {:>14} {:>12} {:>12}\n",
        "quantity", "predicted", "measured", "abs dev", "rel dev"
    ));
    out.push_str("survival formula\n");
    match be_survival(&spec, k) {
        Ok(be) => {
            out.push_str(&deviation_row(
                &format!("|S_{0}{0}|^2", k + 1),
                be.survival_probability(),
                s.probability(k, k),
            ));
            // Adiabatic end states remove the 1/T residual oscillation.
            match adiabatic_column(&spec, k, t, &config) {
                Ok(p) => out.push_str(&deviation_row("  adiabatic", be.survival_probability(), p[k])),
                Err(e) => out.push_str(&format!("  adiabatic: unavailable ({e})\n")),
            }
        }
        Err(e) => out.push_str(&format!("  state {}: not applicable ({e})\n", k + 1)),
    }
    out.push_str("counterintuitive transitions (predicted zero)\n");
    match nogo_prediction(&spec) {
        Ok(pairs) if pairs.is_empty() => out.push_str("  none\n"),
        Ok(pairs) => {
            for p in pairs {
                out.push_str(&deviation_row(
                    &format!("{} -> {}", p.source + 1, p.target + 1),
                    0.0,
                    s.probability(p.target, p.source),
                ));
            }
        }
        Err(e) => out.push_str(&format!("  not applicable ({e})\n")),
    }
    out.push_str(&format!("saturation of column {} (T vs 2T)\n", k + 1));
    for (i, ((p, d), ok)) in sat
        .at_double
        .iter()
        .zip(&sat.deltas)
        .zip(&sat.saturated)
        .enumerate()
    {
        out.push_str(&format!(
            "  P{:<3} P(2T) = {:.6e}  delta = {:+.3e}  {}\n",
            i + 1,
            p,
            d,
            if *ok { "saturated" } else { "NOT saturated" }
        ));
    }
    opts.emit(&out)
}

fn sweep(
    opts: &GlobalOpts,
    model: &str,
    param: &str,
    grid: Option<&str>,
    values: Option<Vec<f64>>,
    initial: usize,
    full: bool,
) -> CliResult<()> {
    let loaded = load(model, opts)?;
    let path = ParamPath::parse(param).map_err(|e| CliError::Input(e.to_string()))?;
    let values = match (grid, values) {
        (Some(g), _) => parse_grid(g).map_err(|e| CliError::Input(e.to_string()))?,
        (None, Some(v)) => v,
        (None, None) => return Err(CliError::Input("sweep needs --grid or --values".into())),
    };
    let output = if full {
        SweepOutput::Full
    } else {
        SweepOutput::Column(state_index(initial, loaded.spec.n)?)
    };
    let window = match opts.window.as_deref() {
        Some("auto") => Window::Auto,
        Some(_) => Window::Fixed(opts.window(&loaded)?),
        None => match loaded.preset.as_ref().and_then(|p| p.default_window) {
            Some(t) => Window::Fixed(t),
            None => Window::Auto,
        },
    };
    let spec = SweepSpec { path, values, output };
    let rows = spec
        .run(&loaded.spec, window, &opts.config().with_samples(2))
        .map_err(|e| CliError::Input(e.to_string()))?;
    let failures: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} = {}: {e}", spec.path, r.param)))
        .collect();
    for f in &failures {
        eprintln!("sweep point failed: {f}");
    }
    opts.emit(&output::sweep_csv(&rows, loaded.spec.n, output))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Integrator(format!("{} sweep point(s) failed", failures.len())))
    }
}

fn preset_cmd(opts: &GlobalOpts, name: &str, arg: Option<&str>) -> CliResult<()> {
    let p = presets::preset(name, arg).map_err(|e| CliError::Input(e.to_string()))?;
    opts.emit(&p.model_file())
}

fn classify(opts: &GlobalOpts, model: &str) -> CliResult<()> {
    let loaded = load(model, opts)?;
    let spec = canonical(&loaded, opts);
    let mut out = String::from("bands\n");
    for b in bands(&spec) {
        let members: Vec<String> = b.members.iter().map(|m| (m + 1).to_string()).collect();
        out.push_str(&format!("  slope {} [{}] {:?}\n", fmt17(b.slope), members.join(" "), b.kind));
    }
    out.push_str("from to class\n");
    for m in 0..spec.n {
        for n in 0..spec.n {
            if m == n {
                continue;
            }
            let class = classify_transition(&spec, m, n).map_err(|e| CliError::Input(e.to_string()))?;
            out.push_str(&format!("{} {} {}\n", m + 1, n + 1, class));
        }
    }
    opts.emit(&out)
}

fn run(cli: Cli) -> CliResult<()> {
    let opts = &cli.global;
    match cli.command {
        Command::Simulate {
            model,
            initial,
            samples,
        } => simulate(opts, &model, initial, samples),
        Command::Scatter { model } => scatter(opts, &model),
        Command::Check { model, initial } => check(opts, &model, initial),
        Command::Sweep {
            model,
            param,
            grid,
            values,
            initial,
            full,
        } => sweep(opts, &model, &param, grid.as_deref(), values, initial, full),
        Command::Preset { name, arg } => preset_cmd(opts, &name, arg.as_deref()),
        Command::Classify { model } => classify(opts, &model),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(msg) | CliError::Integrator(msg) => eprintln!("error: {msg}"),
                CliError::Unitarity(d) => {
                    eprintln!("error: unitarity defect {d:.3e} exceeds {UNITARITY_LIMIT:e}; results are untrusted")
                }
            }
            ExitCode::from(e.code())
        }
    }
}
