//! Commands behind the `bec2` binary.
//!
//! Each command reads a [`RunConfig`], writes its files under one output
//! directory and finishes with a `summary.json` manifest listing every
//! file with its SHA-256.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | i/o failure |
//! | 2 | config parse or validation error |
//! | 3 | singular or evanescent medium |
//! | 4 | numeric blowup |
//! | 5 | `validate` found a failing criterion |
//! | 130 | interrupted; manifest has `complete = false` |

pub mod config;
pub mod output;

use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

pub use config::{load_config, parse_config, RunConfig, TableFormat};
pub use output::{load_snapshot, Artifacts, ManifestEntry, RunSummary, Table};

use crate::error::{Error, Result};
use crate::medium::{refractive_index, susceptibility};
use crate::params::Component;
use crate::propagator::{momentum_spectrum, order_weights, EvolveConfig, Grid, MatterState, Propagator, System};
use crate::raman_nath::{DiffractionSpectrum, WIDE_PACKET_FACTOR};
use crate::validation::{run_all, ValidationReport};
use config::{Packet, Resolved, SnapshotFormat};
use output::{header_json, snapshot_binary, snapshot_csv, ResolvedParameters};

/// Analytic probability beyond the grid's last resolved order that
/// triggers a truncation warning.
pub const ORDER_TAIL_TOLERANCE: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;
pub const EXIT_VALIDATION_FAILED: i32 = 5;
pub const EXIT_INTERRUPTED: i32 = 130;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Parse(_)
        | Error::Validation(_)
        | Error::Domain(_)
        | Error::Resolution { .. }
        | Error::BesselRange(_)
        | Error::ZeroDetuning { .. } => EXIT_INVALID,
        Error::SingularMedium { .. } | Error::SingularDetuning { .. } | Error::Evanescent { .. } => EXIT_SINGULAR,
        Error::NumericBlowup { .. } => EXIT_BLOWUP,
    }
}

/// Settings shared by every command.
#[derive(Debug)]
pub struct Context<'a> {
    pub out: PathBuf,
    /// Overrides `output.format` from the config when set.
    pub format: Option<TableFormat>,
    pub jobs: usize,
    pub cancel: &'a AtomicBool,
}

impl Context<'_> {
    fn format(&self, cfg: &RunConfig) -> TableFormat {
        self.format.unwrap_or(cfg.output.format)
    }
}

fn begin(command: &str, cfg: &RunConfig, art: &mut Artifacts) -> Result<RunSummary> {
    let mut s = RunSummary::new(command);
    s.config_hash = Some(cfg.hash());
    art.write("config.resolved.toml", cfg.echo().as_bytes())?;
    Ok(s)
}

fn parameters(r: &Resolved) -> ResolvedParameters {
    ResolvedParameters {
        units: r.units,
        species: r.mixture.species,
        densities: r.mixture.densities,
        envelope_width: r.field.envelope_width,
        packet_width: r.packet_width,
    }
}

const OPTICS_COLUMNS: [&str; 7] = ["rho_1", "rho_2", "s", "chi", "n_re", "n_im", "flag"];

fn optics_row(cfg: &RunConfig, with_index: bool) -> (Vec<output::Cell>, Option<String>) {
    let nan = f64::NAN;
    let rm = match cfg.resolve_mixture() {
        Ok(rm) => rm,
        Err(e) => {
            let mut row = vec![nan.into(); if with_index { 6 } else { 4 }];
            row.push("invalid".into());
            return (row, Some(e.to_string()));
        }
    };
    let (rho, s) = match rm.mixture.sample() {
        Ok(sample) => (sample.densities, sample),
        Err(e) => {
            let mut row = vec![nan.into(); if with_index { 6 } else { 4 }];
            row.push("invalid".into());
            return (row, Some(e.to_string()));
        }
    };
    let mut row: Vec<output::Cell> = vec![rho[0].into(), rho[1].into(), s.screening_sum().into()];
    match (susceptibility(&s), refractive_index(&s)) {
        (Ok(chi), Ok(n)) => {
            row.push(chi.into());
            if with_index {
                let c = n.complex();
                row.push(c.re.into());
                row.push(c.im.into());
            }
            let flag = if with_index && n.is_evanescent() { "evanescent" } else { "ok" };
            row.push(flag.into());
        }
        _ => {
            row.push(nan.into());
            if with_index {
                row.push(nan.into());
                row.push(nan.into());
            }
            row.push("singular".into());
        }
    }
    (row, None)
}

fn optics_table(command: &str, cfg: &RunConfig, ctx: &Context, with_index: bool) -> Result<RunSummary> {
    let mut art = Artifacts::create(&ctx.out)?;
    let mut summary = begin(command, cfg, &mut art)?;
    let points = cfg.sweep_points()?;
    let columns: Vec<&str> = if with_index {
        OPTICS_COLUMNS.to_vec()
    } else {
        vec!["rho_1", "rho_2", "s", "chi", "flag"]
    };
    let mut table = Table::new(columns);
    for (i, (_, point)) in points.iter().enumerate() {
        let (row, err) = optics_row(point, with_index);
        if let Some(e) = err {
            summary.warnings.push(format!("point {i}: {e}"));
        }
        table.push(row);
    }
    if points.len() == 1 {
        if let Ok(rm) = cfg.resolve_mixture() {
            summary.warnings.extend(rm.warnings);
            summary.parameters = Some(ResolvedParameters {
                units: rm.units,
                species: rm.mixture.species,
                densities: rm.mixture.densities,
                envelope_width: rm.inputs.envelope_width,
                packet_width: rm.inputs.packet_width,
            });
        }
    }
    art.write_table(command, &table, ctx.format(cfg))?;
    summary.finish(art)
}

/// Refractive index n = √n² (complex when evanescent) over the sweep grid.
/// Singular and invalid points are flagged rows, not errors.
pub fn cmd_index(cfg: &RunConfig, ctx: &Context) -> Result<RunSummary> {
    optics_table("index", cfg, ctx, true)
}

/// Susceptibility χ over the sweep grid.
pub fn cmd_chi(cfg: &RunConfig, ctx: &Context) -> Result<RunSummary> {
    optics_table("chi", cfg, ctx, false)
}

fn spectrum_table(spectrum: &DiffractionSpectrum) -> Table {
    let mut t = Table::new(["species", "q", "probability", "angle_rad"]);
    for c in Component::BOTH {
        for o in &spectrum.components[c.index()].orders {
            t.push(vec![(c.number() as i64).into(), (o.order as i64).into(), o.probability.into(), o.angle.into()]);
        }
    }
    t
}

const DIFFRACT_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set logscale y
set yrange [1e-12:1]
set xlabel 'order q'
set ylabel 'probability'
plot 'plot_data.csv' using 1:2 with impulses lw 3 title 'species 1', \\
     '' using ($1+0.2):3 with impulses lw 3 title 'species 2'
";

fn write_spectrum(art: &mut Artifacts, r: &Resolved, format: TableFormat, plot_scripts: bool) -> Result<()> {
    let spectrum = &r.spectrum;
    art.write_table("spectrum", &spectrum_table(spectrum), format)?;
    let mut plot = Table::new(["q", "probability_1", "probability_2", "angle_1", "angle_2"]);
    let [a, b] = &spectrum.components;
    for (x, y) in a.orders.iter().zip(&b.orders) {
        plot.push(vec![
            (x.order as i64).into(),
            x.probability.into(),
            y.probability.into(),
            x.angle.into(),
            y.angle.into(),
        ]);
    }
    art.write("plot_data.csv", plot.to_csv().as_bytes())?;
    if plot_scripts {
        art.write("plot.gp", DIFFRACT_PLOT.as_bytes())?;
    }
    Ok(())
}

/// Closed-form far-field spectrum: `spectrum.csv` (species, q, probability,
/// angle_rad), `plot_data.csv`, an optional gnuplot script, and τ_j, g_j, n
/// and the separation predicate in `summary.json`.
pub fn cmd_diffract(cfg: &RunConfig, ctx: &Context) -> Result<RunSummary> {
    let r = cfg.resolve()?;
    let mut art = Artifacts::create(&ctx.out)?;
    let mut summary = begin("diffract", cfg, &mut art)?;
    write_spectrum(&mut art, &r, ctx.format(cfg), cfg.output.plot_scripts)?;
    summary.warnings = r.warnings.clone();
    summary.parameters = Some(parameters(&r));
    summary.derived = Some(r.derived.clone());
    summary.finish(art)
}

fn initial_state(cfg: &RunConfig, r: &Resolved, warnings: &mut Vec<String>) -> Result<MatterState> {
    let g = &cfg.grid;
    let grid = || Grid::commensurate(g.points, g.periods, &r.field);
    let state = match g.packet {
        Packet::Uniform => MatterState::uniform(grid()?, r.mixture.densities),
        Packet::Gaussian => {
            let grid = grid()?;
            let w = r.packet_width.expect("validated: gaussian packets carry a width");
            let wavelength = 2.0 * std::f64::consts::PI / r.field.medium_wavenumber();
            if w < WIDE_PACKET_FACTOR * wavelength {
                warnings.push(format!(
                    "packet width {w:.4} is below {WIDE_PACKET_FACTOR} medium wavelengths; far-field picture is unreliable"
                ));
            }
            if w > grid.extent() / 8.0 {
                warnings.push(format!(
                    "packet width {w:.4} exceeds 1/8 of the grid extent {:.4}; expect wrap-around",
                    grid.extent()
                ));
            }
            MatterState::gaussian(grid, r.mixture.densities, w)
        }
        Packet::File => load_snapshot(g.file.as_ref().expect("validated: file packets carry a path"))?,
    };
    Ok(state)
}

fn write_snapshot(art: &mut Artifacts, state: &MatterState, step: usize, format: SnapshotFormat) -> Result<()> {
    let stem = format!("snapshots/step_{step:06}");
    match format {
        SnapshotFormat::Csv => art.write(&format!("{stem}.csv"), snapshot_csv(state).as_bytes())?,
        SnapshotFormat::Binary => art.write(&format!("{stem}.bin"), &snapshot_binary(state))?,
    }
    art.write(&format!("{stem}.json"), header_json(state).as_bytes())
}

const TIMESERIES_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 'z'
set ylabel 'norm'
plot 'timeseries.csv' using 1:2 with lines, '' using 1:3 with lines
";

/// Split-step evolution across the laser envelope. Writes snapshots at
/// every observed step, `timeseries.csv` (z, norms, adiabaticity) and the
/// final `momentum.csv` and `orders.csv`. With `steps = 0` only the initial
/// snapshot is written. Setting `ctx.cancel` stops the run at the next
/// observed step; the summary is then flagged incomplete.
pub fn cmd_simulate(cfg: &RunConfig, ctx: &Context) -> Result<RunSummary> {
    let r = cfg.resolve()?;
    let mut art = Artifacts::create(&ctx.out)?;
    let mut summary = begin("simulate", cfg, &mut art)?;
    summary.warnings = r.warnings.clone();
    summary.parameters = Some(parameters(&r));
    summary.derived = Some(r.derived.clone());
    let e = &cfg.evolve;
    let snap_format = e.snapshot_format;

    let state = initial_state(cfg, &r, &mut summary.warnings)?;
    if e.steps == 0 {
        write_snapshot(&mut art, &state, 0, snap_format)?;
        return summary.finish(art);
    }
    let evolve = EvolveConfig {
        mode: e.mode,
        kinetic: e.kinetic,
        envelope: e.envelope,
        observe_every: e.observe_every,
        ..EvolveConfig::across_envelope(&r.field, e.span, e.steps)
    };
    let system = System::new(r.mixture.species, r.field)?;
    let propagator = Propagator::new(system, evolve, state.grid)?;
    summary.warnings.extend(propagator.warnings(&state)?);

    let mut snapshot_err = None;
    let evolution = propagator.evolve(state, |s, rec| {
        if let Err(e) = write_snapshot(&mut art, s, rec.step, snap_format) {
            snapshot_err = Some(e);
            return ControlFlow::Break(());
        }
        if ctx.cancel.load(Ordering::SeqCst) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }

    let mut ts = Table::new(["z", "norm_1", "norm_2", "adiabaticity_1", "adiabaticity_2"]);
    for rec in &evolution.records {
        ts.push(vec![
            rec.z.into(),
            rec.norms[0].into(),
            rec.norms[1].into(),
            rec.adiabaticity[0].into(),
            rec.adiabaticity[1].into(),
        ]);
    }
    art.write("timeseries.csv", ts.to_csv().as_bytes())?;
    if cfg.output.plot_scripts {
        art.write("timeseries.gp", TIMESERIES_PLOT.as_bytes())?;
    }
    if evolution.interrupted {
        summary.complete = false;
        summary
            .warnings
            .push(format!("interrupted after {} of {} steps", evolution.completed_steps, e.steps));
        return summary.finish(art);
    }

    let final_state = &evolution.state;
    let mut mom = Table::new(["species", "k", "weight"]);
    for c in Component::BOTH {
        for b in &momentum_spectrum(final_state)[c.index()] {
            mom.push(vec![(c.number() as i64).into(), b.k.into(), b.weight.into()]);
        }
    }
    art.write_table("momentum", &mom, ctx.format(cfg))?;

    // largest order the grid resolves below Nyquist
    let bins_per_order = 2.0 * r.field.medium_wavenumber() * final_state.grid.extent() / (2.0 * std::f64::consts::PI);
    let nyquist_order = ((final_state.grid.points() / 2) as f64 / bins_per_order.round().max(1.0)).ceil() as usize;
    let q = r.spectrum.max_order.min(nyquist_order.saturating_sub(1));
    match order_weights(final_state, r.field.medium_wavenumber(), q) {
        Ok(weights) => {
            let mut t = Table::new(["species", "q", "weight", "analytic_probability"]);
            for c in Component::BOTH {
                let spec = &r.spectrum.components[c.index()];
                for (order, w) in &weights[c.index()] {
                    let p = spec.probability(*order).unwrap_or(0.0);
                    t.push(vec![(c.number() as i64).into(), (*order as i64).into(), (*w).into(), p.into()]);
                }
            }
            art.write_table("orders", &t, ctx.format(cfg))?;
            let tail = r
                .spectrum
                .components
                .iter()
                .map(|c| c.orders.iter().filter(|o| o.order.unsigned_abs() as usize > q).map(|o| o.probability).sum::<f64>())
                .fold(0.0f64, f64::max);
            if tail > ORDER_TAIL_TOLERANCE {
                summary.warnings.push(format!(
                    "orders.csv stops at |q| = {q} (grid Nyquist limit); analytic probability {tail:.2e} lies beyond"
                ));
            }
        }
        Err(e) => summary.warnings.push(format!("order weights unavailable: {e}")),
    }
    summary.finish(art)
}

/// One diffraction run per sweep point, in parallel on `ctx.jobs` threads.
/// Each point writes to `points/NNNN/`; `sweep.csv` merges them in sorted
/// parameter order. Failing points become rows with a status, not errors.
pub fn cmd_sweep(cfg: &RunConfig, ctx: &Context) -> Result<RunSummary> {
    let mut art = Artifacts::create(&ctx.out)?;
    let mut summary = begin("sweep", cfg, &mut art)?;
    let mut points = cfg.sweep_points()?;
    points.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs.max(1))
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    let format = ctx.format(cfg);
    let root = ctx.out.clone();
    let results: Vec<Result<(Artifacts, std::result::Result<Resolved, Error>)>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, (_, point))| {
                let mut local = Artifacts::create(&root.join(format!("points/{i:04}")))?;
                local.write("config.resolved.toml", point.echo().as_bytes())?;
                let resolved = point.resolve();
                if let Ok(r) = &resolved {
                    write_spectrum(&mut local, r, format, false)?;
                }
                Ok((local, resolved))
            })
            .collect()
    });

    let mut columns: Vec<String> = cfg.sweep.iter().map(|a| a.parameter.clone()).collect();
    columns.extend(
        [
            "status", "n", "chi", "g_1", "g_2", "tau_1", "tau_2", "p0_1", "p0_2", "p1_1", "p1_2", "separated",
        ]
        .map(String::from),
    );
    let mut table = Table::new(columns);
    for (i, ((values, _), res)) in points.iter().zip(results).enumerate() {
        let (local, resolved) = res?;
        art.absorb(&format!("points/{i:04}"), local);
        let mut row: Vec<output::Cell> = values.iter().map(|v| (*v).into()).collect();
        match resolved {
            Ok(r) => {
                let d = &r.derived;
                let p = |j: usize, q: i32| r.spectrum.components[j].probability(q).unwrap_or(0.0);
                row.push("ok".into());
                for v in [
                    d.refractive_index,
                    d.susceptibility,
                    d.couplings[0],
                    d.couplings[1],
                    d.taus[0],
                    d.taus[1],
                    p(0, 0),
                    p(1, 0),
                    p(0, 1),
                    p(1, 1),
                ] {
                    row.push(v.into());
                }
                row.push(d.separated.into());
            }
            Err(e) => {
                let status = match exit_code(&e) {
                    EXIT_SINGULAR => "singular",
                    _ => "invalid",
                };
                summary.warnings.push(format!("point {i}: {e}"));
                row.push(status.into());
                row.extend(std::iter::repeat_with(|| f64::NAN.into()).take(10));
                row.push("".into());
            }
        }
        table.push(row);
    }
    art.write_table("sweep", &table, format)?;
    summary.finish(art)
}

/// Runs the acceptance criteria and writes `validation.json`.
pub fn cmd_validate(ctx: &Context) -> Result<(ValidationReport, RunSummary)> {
    let report = run_all();
    let mut art = Artifacts::create(&ctx.out)?;
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    art.write("validation.json", body.as_bytes())?;
    let mut summary = RunSummary::new("validate");
    summary.warnings = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("criterion {} failed: {}", c.id, c.detail))
        .collect();
    Ok((report, summary.finish(art)?))
}
