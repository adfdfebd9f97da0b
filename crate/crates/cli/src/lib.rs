//! Command-line front end: reads a model or network file, runs one analysis
//! and emits a JSON report, or a CSV table for `sweep`.
//!
//! Reports have the shape
//! `{"schema_version": 1, "command": ..., "input_sha256": ..., "result": ...}`
//! with every number rounded to 12 significant digits.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use oqho::asymptotics::{asymptotics, lyapunov_exponent_sweep, sweep_csv};
use oqho::covariance::{default_dt, energy_rate, mean_energy, steady_covariance, weak_coupling_limit, CovarianceFlow};
use oqho::decay::{decoherence_time, optimize_bound, NormKind};
use oqho::interconnect::{analyze_closed_loop, NetworkFile};
use oqho::io::{round_json, serialize_complex_matrix};
use oqho::model::{build_state_space, spectral_structure, validate, ModelFile};
use oqho::onemode::{exact_covariance, exact_spectrum, extract_params, weighted_decay};
use oqho::{Complex, Matrix, Model};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Longest transient trajectory written to a report.
const MAX_TRAJECTORY_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Structural checks on Θ, R and the dimensions.
    Validate,
    /// Eigenfrequencies, eigenvectors and period of the isolated oscillator.
    Spectrum,
    /// Decoherence time τ*.
    Decoherence,
    /// Lyapunov-inequality upper bound on τ*, optimized over (λ, N).
    Bound,
    /// Weak-coupling damping coefficients and thresholds.
    Asymptotics,
    /// Invariant covariance, its weak-coupling limit and an optional transient.
    Covariance,
    /// Leading Lyapunov exponent against its approximation, as CSV.
    Sweep,
    /// Closed forms for a single mode.
    Onemode,
    /// Two-oscillator feedback network.
    Interconnect,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Decoherence => "decoherence",
            Command::Bound => "bound",
            Command::Asymptotics => "asymptotics",
            Command::Covariance => "covariance",
            Command::Sweep => "sweep",
            Command::Onemode => "onemode",
            Command::Interconnect => "interconnect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Frobenius,
    Weighted,
}

impl From<NormArg> for NormKind {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Frobenius => NormKind::Frobenius,
            NormArg::Weighted => NormKind::Weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "oqho", version, about = "Decoherence analysis for open quantum harmonic oscillators")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Model file, or network file for `interconnect`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "frobenius")]
    pub norm: NormArg,
    #[arg(long, default_value_t = 0.0)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 0.3)]
    pub eps_max: f64,
    /// Number of sweep points, endpoints included.
    #[arg(long, default_value_t = 61)]
    pub steps: usize,
    #[arg(long, default_value_t = 50)]
    pub lambda_grid: usize,
    /// End time of the transient covariance; no transient when absent.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Transient step; defaults to 0.01/‖A‖_F.
    #[arg(long)]
    pub dt: Option<f64>,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            output: None,
            norm: NormArg::Frobenius,
            eps_min: 0.0,
            eps_max: 0.3,
            steps: 61,
            lambda_grid: 50,
            t_end: None,
            dt: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Analysis(#[from] oqho::Error),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "invalid_arguments",
            CliError::Io { .. } => "io_error",
            CliError::Analysis(e) => e.name(),
        }
    }

    /// 1 for unreadable or invalid input, 2 for numerical or stability
    /// failures of the analysis itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Analysis(e) => match e {
                oqho::Error::Dimension(_) | oqho::Error::Validation(_) | oqho::Error::Parameter(_) => 1,
                _ => 2,
            },
        }
    }

    /// Single-line message for stderr.
    pub fn diagnostic(&self) -> String {
        format!("error[{}]: {}", self.name(), self.to_string().replace('\n', " "))
    }
}

/// What a run produced. A report can come with a non-zero exit code, as
/// when `validate` finds a failing check.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub exit_code: i32,
    pub diagnostic: Option<String>,
}

fn check_config(config: &RunConfig) -> Result<(), CliError> {
    if config.command == Command::Sweep {
        if !(config.eps_min.is_finite() && config.eps_max.is_finite() && config.eps_min < config.eps_max) {
            return Err(CliError::Usage(format!("sweep needs eps-min < eps-max, got {} and {}", config.eps_min, config.eps_max)));
        }
        if config.eps_min < 0.0 {
            return Err(CliError::Usage("sweep needs eps-min >= 0".into()));
        }
        if config.steps < 2 {
            return Err(CliError::Usage("sweep needs at least 2 steps".into()));
        }
    }
    if config.lambda_grid == 0 {
        return Err(CliError::Usage("lambda-grid must be positive".into()));
    }
    if let Some(t) = config.t_end {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("t-end must be a non-negative number, got {t}")));
        }
    }
    if let Some(dt) = config.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::Usage(format!("dt must be positive, got {dt}")));
        }
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<Output, CliError> {
    check_config(config)?;
    let bytes = std::fs::read(&config.input).map_err(|source| CliError::Io { path: config.input.clone(), source })?;
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("input is not UTF-8: {e}")))?;

    if config.command == Command::Interconnect {
        let network = NetworkFile::from_json(&text)?;
        return Ok(report(config.command, &digest, interconnect_payload(&network, config)?));
    }

    let model = ModelFile::from_json(&text)?.to_model()?;
    match config.command {
        Command::Validate => {
            let checks = validate(&model);
            let mut out = report(config.command, &digest, to_value(&checks));
            if !checks.all_passed() {
                out.exit_code = 1;
                out.diagnostic = Some(format!("error[validation_error]: failed checks {}", failed_checks(&checks)));
            }
            Ok(out)
        }
        Command::Sweep => {
            let n = config.steps;
            let eps: Vec<f64> = (0..n)
                .map(|i| config.eps_min + (config.eps_max - config.eps_min) * i as f64 / (n - 1) as f64)
                .collect();
            let rows = lyapunov_exponent_sweep(&model, &eps)?;
            Ok(Output { text: sweep_csv(&rows), exit_code: 0, diagnostic: None })
        }
        command => {
            let payload = match command {
                Command::Spectrum => spectrum_payload(&model)?,
                Command::Decoherence => to_value(&decoherence_time(&model, config.norm.into())?),
                Command::Bound => json!({ "lambda_grid": config.lambda_grid, "bound": to_value(&optimize_bound(&model, config.lambda_grid)?) }),
                Command::Asymptotics => {
                    let report = asymptotics(&model)?;
                    if !report.verdict.stable {
                        return Err(oqho::Error::WeakCouplingUnstable { margin: report.verdict.margin }.into());
                    }
                    to_value(&report)
                }
                Command::Covariance => covariance_payload(&model, config)?,
                Command::Onemode => onemode_payload(&model)?,
                _ => unreachable!("handled above"),
            };
            Ok(report(command, &digest, payload))
        }
    }
}

fn failed_checks(checks: &oqho::model::ValidationReport) -> String {
    let value = to_value(checks);
    let failed: Vec<String> = value
        .as_object()
        .map(|m| m.iter().filter(|(_, v)| v == &&Value::Bool(false)).map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    failed.join(", ")
}

fn to_value<S: Serialize>(x: &S) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

fn report(command: Command, digest: &str, mut payload: Value) -> Output {
    round_json(&mut payload);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "input_sha256": digest,
        "result": payload,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
    text.push('\n');
    Output { text, exit_code: 0, diagnostic: None }
}

#[derive(Serialize)]
struct ComplexMatrix<'a>(#[serde(serialize_with = "serialize_complex_matrix")] &'a Matrix<Complex<f64>>);

fn complex_list(zs: &[Complex<f64>]) -> Value {
    Value::Array(zs.iter().map(|z| json!({ "re": z.re, "im": z.im })).collect())
}

fn spectrum_payload(model: &Model) -> Result<Value, CliError> {
    let spec = spectral_structure(model)?;
    Ok(json!({
        "omegas": spec.omegas,
        "period": spec.period,
        "eigenvectors": to_value(&ComplexMatrix(&spec.v)),
    }))
}

fn covariance_payload(model: &Model, config: &RunConfig) -> Result<Value, CliError> {
    let steady = steady_covariance(model)?;
    let rate = energy_rate(model, &steady.p)?;
    let limit = weak_coupling_limit(model).ok();
    let mut payload = json!({
        "steady": to_value(&steady),
        "energy_rate": to_value(&rate),
        "mean_energy": mean_energy(model, &steady.p),
        "weak_coupling_limit": to_value(&limit),
    });
    if let Some(t_end) = config.t_end {
        let ss = build_state_space(model)?;
        let dt = config.dt.unwrap_or_else(|| default_dt(&ss.a));
        let steps = (t_end / dt * (1.0 + f64::EPSILON)).floor() as usize;
        let stride = steps.div_ceil(MAX_TRAJECTORY_SAMPLES - 1).max(1);
        let mut flow = CovarianceFlow::for_model(model, Matrix::zeros(model.n(), model.n()), dt)?;
        let sample = |flow: &CovarianceFlow<f64>| json!({ "t": flow.time(), "P": to_value(flow.state()) });
        let mut samples = vec![sample(&flow)];
        for i in 1..=steps {
            flow.step()?;
            if i % stride == 0 || i == steps {
                samples.push(sample(&flow));
            }
        }
        payload["transient"] = json!({
            "t_end": t_end,
            "dt": dt,
            "samples": samples,
            "distance_to_steady": flow.state().distance(&steady.p),
        });
    }
    Ok(payload)
}

fn onemode_payload(model: &Model) -> Result<Value, CliError> {
    let params = extract_params(model)?;
    let eps = model.epsilon();
    let spectrum = exact_spectrum(&params, eps);
    let decay = weighted_decay(&params, eps, 0.0)?;
    let at_tau_r = weighted_decay(&params, eps, decay.tau_r)?;
    let covariance = if eps > 0.0 { Some(exact_covariance(&params, eps)?) } else { None };
    Ok(json!({
        "epsilon": eps,
        "params": to_value(&params),
        "spectrum": complex_list(&spectrum),
        "tau_R": decay.tau_r,
        "eps_bound": decay.eps_bound,
        "weighted_norm_at_tau_R": to_value(&at_tau_r),
        "covariance": to_value(&covariance),
    }))
}

fn interconnect_payload(file: &NetworkFile, config: &RunConfig) -> Result<Value, CliError> {
    let net = file.assemble()?;
    let analysis = analyze_closed_loop(&net, config.lambda_grid)?;
    Ok(json!({
        "epsilon": net.epsilon,
        "network": {
            "A": to_value(&net.a),
            "B": to_value(&net.b),
            "Theta": to_value(&net.theta),
            "R": to_value(&net.r),
            "M": to_value(&net.m),
            "R0": to_value(&net.r0),
            "SR": to_value(&net.sr),
            "SM": to_value(&net.sm),
            "channel_order": net.channel_order,
        },
        "analysis": to_value(&analysis),
    }))
}
