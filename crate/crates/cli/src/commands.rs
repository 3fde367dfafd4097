//! Command implementations.
//!
//! Each command resolves its effective configuration (flag > config file >
//! default), validates it fully before computing, and emits exactly one
//! report. Payload values depend only on the configuration and seed.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use gxor_sim::{
    bell_state, kerr_gxor_residual, separability_threshold, teleport_demo, BellLabel, Dim,
    PurifyConfig, TwirlKind,
};

use crate::config::{self, FileConfig};
use crate::report::{self, ComplexPair, Meta, RunReport};
use crate::{Cli, CliError, Command, OutputFormat, MAX_CLI_DIM};

const DEFAULT_DIM: usize = 3;
const DEFAULT_TRIALS: usize = 100;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_SWEEP_DIMS: &str = "2..20";
const DEFAULT_KERR_DIMS: &str = "2..8";
const DEFAULT_LAMBDA_OFFSET: f64 = 0.05;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::load(cli.config.as_deref())?;
    let format = resolve_format(cli.format, &file)?;
    let out = cli.out.clone();

    match cli.command {
        Command::Bell { dim } => cmd_bell(dim, &file, format, out),
        Command::Teleport { dim, trials, seed } => {
            cmd_teleport(dim, trials, seed, &file, format, out)
        }
        Command::Purify {
            dim,
            lambda,
            max_iters,
            target,
        } => cmd_purify(dim, lambda, max_iters, target, &file, format, out),
        Command::Sweep {
            dims,
            lambdas,
            lambda_offset,
            max_iters,
            target,
        } => cmd_sweep(
            dims,
            lambdas,
            lambda_offset,
            max_iters,
            target,
            &file,
            format,
            out,
        ),
        Command::KerrCheck { dims } => cmd_kerr_check(dims, &file, format, out),
    }
}

fn resolve_format(flag: Option<OutputFormat>, file: &FileConfig) -> Result<OutputFormat, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match file.format.as_deref() {
        None => Ok(OutputFormat::Json),
        Some("json") => Ok(OutputFormat::Json),
        Some("csv") => Ok(OutputFormat::Csv),
        Some(other) => Err(CliError::Config(format!(
            "unknown format '{other}' in config file"
        ))),
    }
}

fn format_name(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    }
}

fn out_name(out: &Option<PathBuf>) -> Option<String> {
    out.as_ref().map(|p| p.display().to_string())
}

fn checked_dim(d: usize) -> Result<Dim, CliError> {
    let dim = Dim::new(d).map_err(|e| CliError::Config(e.to_string()))?;
    if d > MAX_CLI_DIM {
        return Err(CliError::Capacity(format!(
            "dimension {d} exceeds the dense-harness cap of {MAX_CLI_DIM}"
        )));
    }
    Ok(dim)
}

fn checked_lambda(lambda: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CliError::Config(format!(
            "Werner weight must lie in [0, 1], got {lambda}"
        )));
    }
    Ok(lambda)
}

fn checked_target(target: f64) -> Result<f64, CliError> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(CliError::Config(format!(
            "fidelity target must lie in (0, 1], got {target}"
        )));
    }
    Ok(target)
}

// ---------------------------------------------------------------------------
// bell
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BellConfig {
    dim: usize,
    format: &'static str,
    out: Option<String>,
}

#[derive(Serialize)]
struct BellStateRow {
    l: usize,
    m: usize,
    amplitudes: Vec<ComplexPair>,
}

#[derive(Serialize)]
struct BellData {
    dim: usize,
    /// Max-entry deviation of the Gram matrix from the identity.
    gram_residual: f64,
    states: Vec<BellStateRow>,
}

#[derive(Serialize)]
struct BellCsvRow {
    l: usize,
    m: usize,
    basis_index: usize,
    re: f64,
    im: f64,
}

fn cmd_bell(
    dim_flag: Option<usize>,
    file: &FileConfig,
    format: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let d = dim_flag.or(file.dim).unwrap_or(DEFAULT_DIM);
    let dim = checked_dim(d)?;
    let config = BellConfig {
        dim: d,
        format: format_name(format),
        out: out_name(&out),
    };

    let started = Instant::now();
    let states: Vec<_> = (0..d * d)
        .map(|flat| bell_state(BellLabel::new(flat / d, flat % d, dim).unwrap(), dim).unwrap())
        .collect();
    let mut gram_residual = 0.0_f64;
    for (a, sa) in states.iter().enumerate() {
        for (b, sb) in states.iter().enumerate() {
            let overlap = sa.overlap(sb).unwrap();
            let want = if a == b { 1.0 } else { 0.0 };
            gram_residual = gram_residual.max((overlap - want).norm());
        }
    }
    let data = BellData {
        dim: d,
        gram_residual,
        states: states
            .iter()
            .enumerate()
            .map(|(flat, state)| BellStateRow {
                l: flat / d,
                m: flat % d,
                amplitudes: state.amps().iter().map(|&z| z.into()).collect(),
            })
            .collect(),
    };
    let meta = Meta::new("bell", None, &config, started.elapsed().as_millis() as u64)?;

    match format {
        OutputFormat::Json => report::emit_json(&RunReport { meta, data }, out.as_deref()),
        OutputFormat::Csv => {
            let rows: Vec<BellCsvRow> = data
                .states
                .iter()
                .flat_map(|s| {
                    s.amplitudes
                        .iter()
                        .enumerate()
                        .map(|(idx, amp)| BellCsvRow {
                            l: s.l,
                            m: s.m,
                            basis_index: idx,
                            re: amp.re,
                            im: amp.im,
                        })
                })
                .collect();
            report::emit_csv(&meta, &rows, out.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// teleport
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TeleportConfig {
    dim: usize,
    trials: usize,
    seed: u64,
    format: &'static str,
    out: Option<String>,
}

#[derive(Serialize)]
struct OutcomeRow {
    l: usize,
    m: usize,
    count: u64,
    frequency: f64,
}

#[derive(Serialize)]
struct TeleportData {
    dim: usize,
    trials: usize,
    min_fidelity: f64,
    mean_fidelity: f64,
    classical_bits: f64,
    outcomes: Vec<OutcomeRow>,
}

#[derive(Serialize)]
struct TeleportCsvRow {
    l: usize,
    m: usize,
    count: u64,
    frequency: f64,
    min_fidelity: f64,
    mean_fidelity: f64,
    classical_bits: f64,
}

fn cmd_teleport(
    dim_flag: Option<usize>,
    trials_flag: Option<usize>,
    seed_flag: Option<u64>,
    file: &FileConfig,
    format: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let d = dim_flag.or(file.dim).unwrap_or(DEFAULT_DIM);
    let trials = trials_flag.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = seed_flag.or(file.seed).unwrap_or(DEFAULT_SEED);
    let dim = checked_dim(d)?;
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let config = TeleportConfig {
        dim: d,
        trials,
        seed,
        format: format_name(format),
        out: out_name(&out),
    };

    let started = Instant::now();
    let summary = teleport_demo(dim, trials, seed)?;
    let data = TeleportData {
        dim: d,
        trials,
        min_fidelity: summary.min_fidelity,
        mean_fidelity: summary.mean_fidelity,
        classical_bits: summary.classical_bits,
        outcomes: summary
            .outcome_counts
            .iter()
            .enumerate()
            .map(|(flat, &count)| OutcomeRow {
                l: flat / d,
                m: flat % d,
                count,
                frequency: count as f64 / trials as f64,
            })
            .collect(),
    };
    let meta = Meta::new(
        "teleport",
        Some(seed),
        &config,
        started.elapsed().as_millis() as u64,
    )?;

    match format {
        OutputFormat::Json => report::emit_json(&RunReport { meta, data }, out.as_deref()),
        OutputFormat::Csv => {
            let rows: Vec<TeleportCsvRow> = data
                .outcomes
                .iter()
                .map(|o| TeleportCsvRow {
                    l: o.l,
                    m: o.m,
                    count: o.count,
                    frequency: o.frequency,
                    min_fidelity: data.min_fidelity,
                    mean_fidelity: data.mean_fidelity,
                    classical_bits: data.classical_bits,
                })
                .collect();
            report::emit_csv(&meta, &rows, out.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// purify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PurifyCmdConfig {
    dim: usize,
    lambda: f64,
    max_iters: usize,
    fidelity_target: f64,
    twirl_schedule: &'static str,
    format: &'static str,
    out: Option<String>,
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    fidelity: f64,
    step_success_prob: f64,
    cumulative_success_prob: f64,
}

#[derive(Serialize)]
struct PurifyData {
    dim: usize,
    lambda: f64,
    threshold: f64,
    converged: bool,
    iterations_used: usize,
    initial_fidelity: f64,
    final_fidelity: f64,
    failure_reason: Option<String>,
    trace: Vec<TraceRow>,
}

#[derive(Serialize)]
struct PurifyCsvRow {
    dim: usize,
    lambda: f64,
    iteration: usize,
    fidelity: f64,
    step_success_prob: f64,
    cumulative_success_prob: f64,
}

fn cmd_purify(
    dim_flag: Option<usize>,
    lambda_flag: Option<f64>,
    max_iters_flag: Option<usize>,
    target_flag: Option<f64>,
    file: &FileConfig,
    format: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let d = dim_flag.or(file.dim).unwrap_or(DEFAULT_DIM);
    let lambda = lambda_flag.or(file.lambda).unwrap_or(0.5);
    let max_iters = max_iters_flag
        .or(file.max_iters)
        .unwrap_or(PurifyConfig::DEFAULT_MAX_ITERS);
    let target = target_flag
        .or(file.target)
        .unwrap_or(PurifyConfig::DEFAULT_FIDELITY_TARGET);
    let dim = checked_dim(d)?;
    checked_lambda(lambda)?;
    checked_target(target)?;

    let config = PurifyCmdConfig {
        dim: d,
        lambda,
        max_iters,
        fidelity_target: target,
        twirl_schedule: "full_dft,truncated_dft",
        format: format_name(format),
        out: out_name(&out),
    };

    let started = Instant::now();
    let mut run_config = PurifyConfig::new(dim, lambda);
    run_config.max_iters = max_iters;
    run_config.fidelity_target = target;
    let trace = gxor_sim::run_purification(&run_config)?;
    let data = PurifyData {
        dim: d,
        lambda,
        threshold: separability_threshold(dim),
        converged: trace.converged,
        iterations_used: trace.iterations_used,
        initial_fidelity: trace.initial_fidelity,
        final_fidelity: trace.final_fidelity,
        failure_reason: trace.failure_reason.clone(),
        trace: trace
            .steps
            .iter()
            .map(|s| TraceRow {
                iteration: s.iteration,
                fidelity: s.fidelity,
                step_success_prob: s.step_success_prob,
                cumulative_success_prob: s.cumulative_success_prob,
            })
            .collect(),
    };
    let meta = Meta::new(
        "purify",
        None,
        &config,
        started.elapsed().as_millis() as u64,
    )?;

    match format {
        OutputFormat::Json => report::emit_json(&RunReport { meta, data }, out.as_deref()),
        OutputFormat::Csv => {
            let rows: Vec<PurifyCsvRow> = data
                .trace
                .iter()
                .map(|s| PurifyCsvRow {
                    dim: d,
                    lambda,
                    iteration: s.iteration,
                    fidelity: s.fidelity,
                    step_success_prob: s.step_success_prob,
                    cumulative_success_prob: s.cumulative_success_prob,
                })
                .collect();
            report::emit_csv(&meta, &rows, out.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepConfig {
    dims: Vec<usize>,
    lambdas: Option<Vec<f64>>,
    lambda_offset: Option<f64>,
    max_iters: usize,
    fidelity_target: f64,
    twirl_schedule: &'static str,
    format: &'static str,
    out: Option<String>,
}

#[derive(Serialize)]
struct SweepRowOut {
    dim: usize,
    lambda: f64,
    threshold: f64,
    converged: bool,
    iterations_used: usize,
    final_fidelity: f64,
    cumulative_success_prob: f64,
}

#[derive(Serialize)]
struct SweepData {
    rows: Vec<SweepRowOut>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    dims_flag: Option<String>,
    lambdas_flag: Option<String>,
    offset_flag: Option<f64>,
    max_iters_flag: Option<usize>,
    target_flag: Option<f64>,
    file: &FileConfig,
    format: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let dims_spec = dims_flag
        .or_else(|| file.dims.clone())
        .unwrap_or_else(|| DEFAULT_SWEEP_DIMS.to_string());
    let lambdas_spec = lambdas_flag.or_else(|| file.lambdas.clone());
    let offset = offset_flag.or(file.lambda_offset);
    let max_iters = max_iters_flag
        .or(file.max_iters)
        .unwrap_or(PurifyConfig::DEFAULT_MAX_ITERS);
    let target = target_flag
        .or(file.target)
        .unwrap_or(PurifyConfig::DEFAULT_FIDELITY_TARGET);
    checked_target(target)?;

    if lambdas_spec.is_some() && offset.is_some() {
        return Err(CliError::Config(
            "--lambdas and --lambda-offset are mutually exclusive".into(),
        ));
    }

    let dims: Vec<Dim> = config::parse_dims(&dims_spec)?
        .into_iter()
        .map(checked_dim)
        .collect::<Result<_, _>>()?;

    let lambdas = match &lambdas_spec {
        Some(spec) => {
            let values = config::parse_lambdas(spec)?;
            for &v in &values {
                checked_lambda(v)?;
            }
            Some(values)
        }
        None => None,
    };
    let effective_offset = if lambdas.is_none() {
        Some(offset.unwrap_or(DEFAULT_LAMBDA_OFFSET))
    } else {
        None
    };

    // resolve the (D, λ) cells; offset mode intersects with valid weights
    let mut cells: Vec<(Dim, f64)> = Vec::new();
    match (&lambdas, effective_offset) {
        (Some(values), _) => {
            for &dim in &dims {
                for &lambda in values {
                    cells.push((dim, lambda));
                }
            }
        }
        (None, Some(offset)) => {
            for &dim in &dims {
                let lambda = separability_threshold(dim) + offset;
                if (0.0..=1.0).contains(&lambda) {
                    cells.push((dim, lambda));
                }
            }
            if cells.is_empty() {
                return Err(CliError::Config(format!(
                    "weight grid is empty: λ_D + {offset} lies outside [0, 1] for every \
                     requested dimension"
                )));
            }
        }
        (None, None) => unreachable!(),
    }

    let config = SweepConfig {
        dims: dims.iter().map(|d| d.get()).collect(),
        lambdas,
        lambda_offset: effective_offset,
        max_iters,
        fidelity_target: target,
        twirl_schedule: "full_dft,truncated_dft",
        format: format_name(format),
        out: out_name(&out),
    };

    let started = Instant::now();
    let mut template = PurifyConfig::new(dims[0], 0.5);
    template.max_iters = max_iters;
    template.fidelity_target = target;
    template.twirl_schedule = vec![TwirlKind::FullDft, TwirlKind::TruncatedDft];

    let mut rows = Vec::with_capacity(cells.len());
    for (dim, lambda) in cells {
        let cell_rows = gxor_sim::sweep(&[dim], &[lambda], &template)?;
        for r in cell_rows {
            rows.push(SweepRowOut {
                dim: r.dim,
                lambda: r.lambda,
                threshold: r.threshold,
                converged: r.converged,
                iterations_used: r.iterations_used,
                final_fidelity: r.final_fidelity,
                cumulative_success_prob: r.cumulative_success_prob,
            });
        }
    }
    let meta = Meta::new("sweep", None, &config, started.elapsed().as_millis() as u64)?;

    match format {
        OutputFormat::Json => report::emit_json(
            &RunReport {
                meta,
                data: SweepData { rows },
            },
            out.as_deref(),
        ),
        OutputFormat::Csv => report::emit_csv(&meta, &rows, out.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// kerr-check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct KerrConfig {
    dims: Vec<usize>,
    format: &'static str,
    out: Option<String>,
}

#[derive(Serialize)]
struct KerrRow {
    dim: usize,
    max_residual: f64,
}

#[derive(Serialize)]
struct KerrData {
    /// Phase conventions the residuals are defined against.
    fourier_kernel: &'static str,
    kerr_phase: &'static str,
    conjugation: &'static str,
    rows: Vec<KerrRow>,
}

fn cmd_kerr_check(
    dims_flag: Option<String>,
    file: &FileConfig,
    format: OutputFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let dims_spec = dims_flag
        .or_else(|| file.dims.clone())
        .unwrap_or_else(|| DEFAULT_KERR_DIMS.to_string());
    let dims: Vec<Dim> = config::parse_dims(&dims_spec)?
        .into_iter()
        .map(checked_dim)
        .collect::<Result<_, _>>()?;
    let config = KerrConfig {
        dims: dims.iter().map(|d| d.get()).collect(),
        format: format_name(format),
        out: out_name(&out),
    };

    let started = Instant::now();
    let rows: Vec<KerrRow> = dims
        .iter()
        .map(|&dim| KerrRow {
            dim: dim.get(),
            max_residual: kerr_gxor_residual(dim),
        })
        .collect();
    let data = KerrData {
        fourier_kernel: "F[k][l] = exp(+i 2 pi k l / D) / sqrt(D)",
        kerr_phase: "exp(-i 2 pi n1 n2 / D) at interaction time t = 2 pi / (D chi)",
        conjugation: "complex conjugation of Fock-basis coordinates",
        rows,
    };
    let meta = Meta::new(
        "kerr-check",
        None,
        &config,
        started.elapsed().as_millis() as u64,
    )?;

    match format {
        OutputFormat::Json => report::emit_json(&RunReport { meta, data }, out.as_deref()),
        OutputFormat::Csv => report::emit_csv(&meta, &data.rows, out.as_deref()),
    }
}
