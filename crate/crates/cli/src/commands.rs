//! The three subcommands: single-scenario runs, scheme comparison, and the
//! grid-refinement convergence study.

use std::io::Write;
use std::time::Instant;

use cn_tdse::observables::{self, initial_energy, ObservableRecord};
use cn_tdse::{build_scheme, init_gaussian, PropagationRun, SchemeKind};

use crate::config::RunConfig;
use crate::error::{from_config_error, from_run_error, CliError};
use crate::output::{fmt_f64, RecordWriter, TableWriter};

/// Packets closer than this many sigma to a wall get a startup warning.
const CONTAINMENT_SIGMAS: f64 = 5.0;

/// |psi| threshold in the five-point boundary band that flags reflection.
const LEAK_THRESHOLD: f64 = 1e-8;

fn fmt_opt_or_na(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "n/a".to_string())
}

/// Where the human-readable summary goes: stdout normally, stderr when the
/// records themselves stream to stdout.
fn summary_sink(records_to_stdout: bool) -> Box<dyn Write> {
    if records_to_stdout {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    }
}

fn warn_if_poorly_contained(config: &RunConfig) {
    let margin = config.packet.containment_sigmas(&config.grid);
    if margin < CONTAINMENT_SIGMAS {
        eprintln!(
            "warning: packet center is only {margin:.2} sigma from the nearest wall \
             (recommended >= {CONTAINMENT_SIGMAS}); expect boundary artifacts"
        );
    }
}

/// Propagate one scenario, streaming observable records to the output sink.
pub fn run_scenario(config: &RunConfig) -> Result<(), CliError> {
    warn_if_poorly_contained(config);
    let started = Instant::now();

    let scheme = build_scheme(
        &config.grid,
        &config.potential_values,
        &config.constants,
        config.dt,
        config.scheme,
    )
    .map_err(CliError::Numerical)?;
    let psi = init_gaussian(&config.grid, &config.constants, &config.packet)
        .map_err(from_config_error)?;
    let initial = initial_energy(
        &config.grid,
        &config.constants,
        &config.packet,
        &config.potential_values,
    )
    .map_err(from_config_error)?;

    let mut writer = match &config.out {
        Some(path) => RecordWriter::to_path(path, config.format)
            .map_err(|e| CliError::io(format!("creating {}", path.display()), e))?,
        None => RecordWriter::to_stdout(config.format),
    };

    let mut run =
        PropagationRun::new(&scheme, psi, config.diagnostics).map_err(CliError::Numerical)?;
    let mut max_rel_err: Option<f64> = None;
    let mut final_norm = 1.0;
    let mut samples = 0usize;
    let mut leak_warned = false;

    run.propagate(config.num_steps, config.every, |r| {
        let analytic = config
            .reference
            .map(|c| c.uncertainty(&config.constants, r.time()));
        let record = observables::record(
            r.state(),
            &config.grid,
            &config.potential_values,
            &config.constants,
            &initial,
            analytic,
        );
        if let Some(err) = record.relative_error {
            max_rel_err = Some(max_rel_err.map_or(err, |m: f64| m.max(err)));
        }
        final_norm = record.norm;
        samples += 1;
        if !leak_warned && r.state().boundary_leak(5) > LEAK_THRESHOLD {
            eprintln!(
                "warning: |psi| near the boundary exceeded {LEAK_THRESHOLD:e} at t = {}; \
                 reflections may contaminate later records",
                r.time()
            );
            leak_warned = true;
        }
        writer.write_record(&record).map_err(|e| e.into())
    })
    .map_err(from_run_error)?;
    writer
        .finish()
        .map_err(|e| CliError::io("flushing output", e))?;

    let mut summary = summary_sink(config.out.is_none());
    writeln!(
        summary,
        "summary: scheme={} steps={} samples={samples} max_relative_error={} \
         final_norm_drift={} wall_time_s={:.3}",
        config.scheme,
        config.num_steps,
        fmt_opt_or_na(max_rel_err),
        fmt_f64((final_norm - 1.0).abs()),
        started.elapsed().as_secs_f64()
    )
    .map_err(|e| CliError::io("writing summary", e))?;
    Ok(())
}

/// Run both discretizations on identical inputs and emit the paired
/// relative-error time series plus the ratio of the worst errors.
pub fn compare_schemes(config: &RunConfig) -> Result<(), CliError> {
    if config.reference.is_none() {
        return Err(CliError::usage(
            "compare requires an analytic reference; use a free or harmonic potential",
        ));
    }
    warn_if_poorly_contained(config);
    let started = Instant::now();

    let tri = collect_records(config, SchemeKind::Tridiagonal)?;
    let penta = collect_records(config, SchemeKind::Pentadiagonal)?;
    debug_assert_eq!(tri.len(), penta.len());

    let mut table = TableWriter::create(
        config.out.as_deref(),
        config.format,
        vec![
            "time",
            "uncertainty_tridiagonal",
            "uncertainty_pentadiagonal",
            "analytic_reference",
            "relative_error_tridiagonal",
            "relative_error_pentadiagonal",
        ],
    )
    .map_err(|e| CliError::io("creating comparison output", e))?;
    for (a, b) in tri.iter().zip(&penta) {
        table
            .write_row(&[
                Some(a.time),
                Some(a.uncertainty_product),
                Some(b.uncertainty_product),
                a.analytic_reference,
                a.relative_error,
                b.relative_error,
            ])
            .map_err(|e| CliError::io("writing comparison output", e))?;
    }
    table
        .finish()
        .map_err(|e| CliError::io("flushing comparison output", e))?;

    let max_err = |records: &[ObservableRecord]| {
        records
            .iter()
            .filter_map(|r| r.relative_error)
            .fold(0.0f64, f64::max)
    };
    let (err_tri, err_penta) = (max_err(&tri), max_err(&penta));
    let mut summary = summary_sink(config.out.is_none());
    writeln!(
        summary,
        "summary: max_err_tridiagonal={} max_err_pentadiagonal={} ratio_tri_over_penta={:.3} \
         wall_time_s={:.3}",
        fmt_f64(err_tri),
        fmt_f64(err_penta),
        err_tri / err_penta,
        started.elapsed().as_secs_f64()
    )
    .map_err(|e| CliError::io("writing summary", e))?;
    Ok(())
}

fn collect_records(
    config: &RunConfig,
    kind: SchemeKind,
) -> Result<Vec<ObservableRecord>, CliError> {
    let scheme = build_scheme(
        &config.grid,
        &config.potential_values,
        &config.constants,
        config.dt,
        kind,
    )
    .map_err(CliError::Numerical)?;
    let psi = init_gaussian(&config.grid, &config.constants, &config.packet)
        .map_err(from_config_error)?;
    let initial = initial_energy(
        &config.grid,
        &config.constants,
        &config.packet,
        &config.potential_values,
    )
    .map_err(from_config_error)?;
    let mut run =
        PropagationRun::new(&scheme, psi, config.diagnostics).map_err(CliError::Numerical)?;
    let mut records = Vec::new();
    run.propagate(config.num_steps, config.every, |r| {
        let analytic = config
            .reference
            .map(|c| c.uncertainty(&config.constants, r.time()));
        records.push(observables::record(
            r.state(),
            &config.grid,
            &config.potential_values,
            &config.constants,
            &initial,
            analytic,
        ));
        Ok(())
    })
    .map_err(from_run_error)?;
    Ok(records)
}

/// Run both schemes over a list of grid spacings and fit the order of the
/// uncertainty-product error at the final time.
pub fn convergence_study(
    config: &RunConfig,
    dx_flag: Option<Vec<f64>>,
    dt_given: bool,
) -> Result<(), CliError> {
    let spacings = dx_flag
        .or_else(|| config.dx_list.clone())
        .ok_or_else(|| CliError::usage("converge requires --dx with at least 3 spacings"))?;
    if spacings.len() < 3 {
        return Err(CliError::usage(format!(
            "insufficient points: got {} grid spacings, need at least 3",
            spacings.len()
        )));
    }
    if let Some(&bad) = spacings.iter().find(|&&dx| dx <= 0.0 || !dx.is_finite()) {
        return Err(CliError::usage(format!("invalid value for dx: {bad}")));
    }
    if config.reference.is_none() {
        return Err(CliError::usage(
            "converge requires an analytic reference; use a free or harmonic potential",
        ));
    }
    let started = Instant::now();

    // Keep the time error subdominant unless the caller pinned dt.
    let min_dx = spacings.iter().cloned().fold(f64::INFINITY, f64::min);
    let dt = if dt_given {
        config.dt
    } else {
        min_dx * min_dx / 10.0
    };
    let t_final = config.num_steps as f64 * config.dt;
    let n_steps = (t_final / dt).round().max(1.0) as usize;

    let extent = config.grid.x_max() - config.grid.x_min();
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for &dx in &spacings {
        let intervals = (extent / dx).round() as usize;
        let grid = cn_tdse::SpatialGrid::new(config.grid.x_min(), config.grid.x_max(), intervals)
            .map_err(from_config_error)?;
        let potential_values = config
            .potential
            .evaluate(&grid, &config.constants)
            .map_err(from_config_error)?;
        let refined = RunConfig {
            grid,
            potential_values,
            dt,
            num_steps: n_steps,
            // Only the final record matters here.
            every: n_steps,
            ..clone_for_refinement(config)
        };
        let err_tri = final_error(&refined, SchemeKind::Tridiagonal)?;
        let err_penta = final_error(&refined, SchemeKind::Pentadiagonal)?;
        rows.push((refined.grid.dx(), err_tri, err_penta));
    }

    let mut table = TableWriter::create(
        config.out.as_deref(),
        config.format,
        vec!["dx", "error_tridiagonal", "error_pentadiagonal"],
    )
    .map_err(|e| CliError::io("creating convergence output", e))?;
    for &(dx, tri, penta) in &rows {
        table
            .write_row(&[Some(dx), Some(tri), Some(penta)])
            .map_err(|e| CliError::io("writing convergence output", e))?;
    }
    table
        .finish()
        .map_err(|e| CliError::io("flushing convergence output", e))?;

    let slope = |select: fn(&(f64, f64, f64)) -> f64| {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|row| (row.0.ln(), select(row).ln()))
            .collect();
        fit_slope(&points)
    };
    let order_tri = slope(|row| row.1);
    let order_penta = slope(|row| row.2);
    let mut summary = summary_sink(config.out.is_none());
    writeln!(
        summary,
        "summary: t_final={} dt={} order_tridiagonal={order_tri:.3} \
         order_pentadiagonal={order_penta:.3} wall_time_s={:.3}",
        t_final,
        dt,
        started.elapsed().as_secs_f64()
    )
    .map_err(|e| CliError::io("writing summary", e))?;
    Ok(())
}

fn final_error(config: &RunConfig, kind: SchemeKind) -> Result<f64, CliError> {
    let records = collect_records(config, kind)?;
    records
        .last()
        .and_then(|r| r.relative_error)
        .ok_or_else(|| CliError::usage("convergence run produced no reference errors"))
}

/// Clone the scenario-defining parts of a config; grid-like fields are
/// replaced by the caller per refinement level.
fn clone_for_refinement(config: &RunConfig) -> RunConfig {
    RunConfig {
        scheme: config.scheme,
        grid: config.grid.clone(),
        constants: config.constants,
        packet: config.packet,
        potential: config.potential.clone(),
        potential_values: config.potential_values.clone(),
        reference: config.reference,
        dt: config.dt,
        num_steps: config.num_steps,
        every: config.every,
        diagnostics: config.diagnostics,
        out: None,
        format: config.format,
        dx_list: None,
    }
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
