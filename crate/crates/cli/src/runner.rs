//! Experiment dispatch, parallel sweep execution, and deterministic
//! persistence (CSV/JSON tables, SVG figures, manifest).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result, anyhow, bail};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use mzsim_core::device::{DeviceModel, SectorBasis};
use mzsim_core::experiments::presets;
use mzsim_core::experiments::{
    AlignmentCost, AlignmentProblem, ENSEMBLE_CHUNK, Mz12Mode, Mz12Options, default_crosstalk,
    align_frequencies, fit_fringe, mz12_ensemble_chunk, mz12_sme_inputs, run_mz4,
    run_mz4_tomography, run_mz12, zeno_metrics,
};
use mzsim_core::lindblad::{DensityOperator, EvolutionTrace, run_schedule};
use mzsim_core::qinfo;
use mzsim_core::sme::{DiagObservable, SmeConfig, sample_trajectory_from};
use mzsim_core::C64;

use crate::config::{
    AlignCostSpec, ExperimentConfig, ExperimentSpec, ModeKeyword, ModeSpec, build_device,
    build_schedule, canonical_json,
};
use crate::svg::{Figure, HeatMap, LinePlot, Series};
use crate::table::{Cell, Table};

/// Requested output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => bail!("unknown output format '{other}'"),
        }
    }
}

/// Everything a run produced, before persistence.
pub struct RunOutput {
    pub experiment: &'static str,
    pub tables: Vec<Table>,
    pub figures: Vec<Figure>,
    /// One-line human summaries printed at the end.
    pub notes: Vec<String>,
}

impl RunOutput {
    fn new(experiment: &'static str) -> Self {
        Self { experiment, tables: Vec::new(), figures: Vec::new(), notes: Vec::new() }
    }
}

/// Effective run settings after CLI overrides.
pub struct RunSettings {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<Format>,
    pub threads: usize,
}

impl RunSettings {
    pub fn from_config(
        mut config: ExperimentConfig,
        seed_override: Option<u64>,
        out_override: Option<&Path>,
        formats_override: Option<&str>,
        threads_override: Option<usize>,
    ) -> Result<Self> {
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        let out_dir = out_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&config.output.directory));
        let mut formats = BTreeSet::new();
        match formats_override {
            Some(list) => {
                for part in list.split(',').filter(|p| !p.is_empty()) {
                    formats.insert(Format::parse(part.trim())?);
                }
            }
            None => {
                for part in &config.output.formats {
                    formats.insert(Format::parse(part)?);
                }
            }
        }
        if formats.is_empty() {
            bail!("no output formats selected");
        }
        let threads = threads_override
            .or_else(|| {
                std::env::var("MZSIM_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(0);
        Ok(Self { config, out_dir, formats, threads })
    }
}

/// Runs the configured experiment inside a dedicated thread pool and writes
/// every requested artifact. Returns the written file names.
pub fn execute(settings: &RunSettings) -> Result<Vec<String>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .context("building the worker pool")?;
    let output = pool.install(|| dispatch(&settings.config))?;
    persist(settings, &output)
}

/// Builds the in-memory results for a validated configuration.
pub fn dispatch(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let device = build_device(&cfg.device)?;
    match &cfg.experiment {
        ExperimentSpec::Mz4 {
            gamma_bar_hz,
            delta_start_hz,
            delta_stop_hz,
            delta_points,
            gamma_sweep_hz,
        } => {
            let grid = linspace(*delta_start_hz, *delta_stop_hz, *delta_points);
            let gammas: Vec<f64> = if gamma_sweep_hz.is_empty() {
                vec![*gamma_bar_hz]
            } else {
                gamma_sweep_hz.clone()
            };
            mz4_output(cfg, &device, &gammas, &grid)
        }
        ExperimentSpec::Mz4Tomo { gamma_grid_hz } => mz4_tomo_output(cfg, &device, gamma_grid_hz),
        ExperimentSpec::Mz12 { gamma_m_hz, mode, stark_residual_hz, duration_s, gamma_sweep_hz } => {
            let gammas: Vec<f64> = if gamma_sweep_hz.is_empty() {
                vec![*gamma_m_hz]
            } else {
                gamma_sweep_hz.clone()
            };
            mz12_output(cfg, &device, &gammas, mode, *stark_residual_hz, *duration_s)
        }
        ExperimentSpec::ZenoSweep { gamma_grid_hz } => zeno_output(cfg, &device, gamma_grid_hz),
        ExperimentSpec::Align { cost, injected_offsets, crosstalk_off_diagonal, budget } => {
            align_output(&device, *cost, injected_offsets, *crosstalk_off_diagonal, *budget)
        }
        ExperimentSpec::SmeDemo { gamma_m_hz, n_trajectories, duration_s, sample_trajectories } => {
            sme_demo_output(cfg, &device, *gamma_m_hz, *n_trajectories, *duration_s, *sample_trajectories)
        }
        ExperimentSpec::Custom { schedule, initial_excited, max_excitations } => {
            custom_output(cfg, &device, schedule, initial_excited, *max_excitations)
        }
    }
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
        .collect()
}

fn populations_table(name: &str, device: &DeviceModel, trace: &EvolutionTrace) -> Table {
    let mut names: Vec<String> =
        (0..device.n_qubits()).map(|p| format!("n_Q{}", device.label(p))).collect();
    names.push("n_total".into());
    let mut with_se: Vec<String> = Vec::new();
    for n in &names {
        with_se.push(n.clone());
        if trace.observables.contains_key(&format!("se_{n}")) {
            with_se.push(format!("se_{n}"));
        }
    }
    let mut cols: Vec<&str> = vec!["time_s"];
    cols.extend(with_se.iter().map(String::as_str));
    let mut table = Table::new(name, &cols);
    for (k, &t) in trace.times_s.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        for n in &with_se {
            let v = trace.observables.get(n).map_or(f64::NAN, |s| s[k]);
            row.push(v.into());
        }
        table.push_row(row);
    }
    table
}

fn populations_figure(name: &str, title: &str, device: &DeviceModel, trace: &EvolutionTrace) -> Figure {
    let series = (0..device.n_qubits())
        .map(|p| {
            let key = format!("n_Q{}", device.label(p));
            let ys = trace.observables.get(&key).cloned().unwrap_or_default();
            Series {
                name: key,
                points: trace.times_s.iter().copied().zip(ys).collect(),
            }
        })
        .collect();
    Figure::Line(
        name.into(),
        LinePlot {
            title: title.into(),
            x_label: "time (s)".into(),
            y_label: "population".into(),
            series,
        },
    )
}

fn mz4_output(
    cfg: &ExperimentConfig,
    device: &DeviceModel,
    gammas: &[f64],
    delta_grid: &[f64],
) -> Result<RunOutput> {
    let opts = cfg.solver.evolve_options();
    let scans: Vec<_> = gammas
        .par_iter()
        .map(|&g| run_mz4(device, g, delta_grid, &opts))
        .collect::<std::result::Result<_, _>>()?;

    let mut out = RunOutput::new("mz4");
    let mut vis = Table::new(
        "visibility_vs_gamma",
        &["gamma_bar_hz", "visibility", "offset", "amplitude", "phase_rad", "residual_rms"],
    );
    for (k, scan) in scans.iter().enumerate() {
        let fit = fit_fringe(scan)?;
        let mut t = Table::new(&format!("fringe_g{k}"), &["delta_hz", "p_interference"]);
        for (&d, &p) in scan.delta_grid_hz.iter().zip(&scan.populations) {
            t.push_row(vec![d.into(), p.into()]);
        }
        out.tables.push(t);
        vis.push_row(vec![
            scan.gamma_bar_hz.into(),
            fit.visibility.into(),
            fit.offset.into(),
            fit.amplitude.into(),
            fit.phase_rad.into(),
            fit.residual_rms.into(),
        ]);
        out.figures.push(Figure::Line(
            format!("fringe_g{k}"),
            LinePlot {
                title: format!(
                    "Interference fringes, gamma_bar = {:.3} MHz (V = {:.3})",
                    scan.gamma_bar_hz / 1e6,
                    fit.visibility
                ),
                x_label: "delta (Hz)".into(),
                y_label: "P_I".into(),
                series: vec![Series {
                    name: "P_I".into(),
                    points: scan.delta_grid_hz.iter().copied().zip(scan.populations.clone()).collect(),
                }],
            },
        ));
        out.notes.push(format!(
            "gamma_bar/2pi = {:.3} MHz: visibility {:.4}",
            scan.gamma_bar_hz / 1e6,
            fit.visibility
        ));
    }
    if gammas.len() > 1 {
        let points: Vec<(f64, f64)> = vis
            .rows
            .iter()
            .map(|r| match (&r[0], &r[1]) {
                (Cell::Float(g), Cell::Float(v)) => (*g, *v),
                _ => unreachable!("visibility table holds floats"),
            })
            .collect();
        out.figures.push(Figure::Line(
            "visibility_vs_gamma".into(),
            LinePlot {
                title: "Fringe visibility vs measurement rate".into(),
                x_label: "gamma_bar (Hz)".into(),
                y_label: "visibility".into(),
                series: vec![Series { name: "V".into(), points }],
            },
        ));
    }
    out.tables.push(vis);
    Ok(out)
}

fn mz4_tomo_output(
    cfg: &ExperimentConfig,
    device: &DeviceModel,
    gamma_grid: &[f64],
) -> Result<RunOutput> {
    let opts = cfg.solver.evolve_options();
    let states: Vec<DensityOperator> = gamma_grid
        .par_iter()
        .map(|&g| run_mz4_tomography(device, g, &opts))
        .collect::<std::result::Result<_, _>>()?;

    let mut out = RunOutput::new("mz4_tomo");
    let mut table = Table::new(
        "tomography_metrics",
        &[
            "gamma_bar_hz",
            "concurrence",
            "weight",
            "visibility",
            "purity_s",
            "entropy_s_bits",
            "linear_entropy",
            "gap_purity",
            "gap_entropy",
        ],
    );
    let mut curves: Vec<(f64, f64, f64, f64)> = Vec::new();
    for (&g, rho) in gamma_grid.iter().zip(&states) {
        let c = qinfo::concurrence(rho)?;
        let proj = qinfo::project_single_excitation(rho)?;
        let report = qinfo::complementarity_report(&proj)?;
        table.push_row(vec![
            g.into(),
            c.into(),
            proj.weight.into(),
            report.visibility.into(),
            report.purity.into(),
            report.entropy_bits.into(),
            report.linear_entropy.into(),
            report.bound_gap_purity.into(),
            report.bound_gap_entropy.into(),
        ]);
        curves.push((g, c, report.purity, report.entropy_bits));
    }
    out.figures.push(Figure::Line(
        "tomography_metrics".into(),
        LinePlot {
            title: "Entanglement and mixedness vs measurement rate".into(),
            x_label: "gamma_bar (Hz)".into(),
            y_label: "metric".into(),
            series: vec![
                Series {
                    name: "concurrence".into(),
                    points: curves.iter().map(|c| (c.0, c.1)).collect(),
                },
                Series {
                    name: "purity_s".into(),
                    points: curves.iter().map(|c| (c.0, c.2)).collect(),
                },
                Series {
                    name: "entropy_s (bits)".into(),
                    points: curves.iter().map(|c| (c.0, c.3)).collect(),
                },
            ],
        },
    ));
    out.tables.push(table);
    Ok(out)
}

fn mz12_mode(mode: &ModeSpec, seed: u64) -> Mz12Mode {
    match mode {
        ModeSpec::Keyword(ModeKeyword::Lindblad) => Mz12Mode::Lindblad,
        ModeSpec::Trajectories { trajectories } => {
            Mz12Mode::Trajectories { n: *trajectories, seed }
        }
    }
}

fn mz12_output(
    cfg: &ExperimentConfig,
    device: &DeviceModel,
    gammas: &[f64],
    mode: &ModeSpec,
    stark_residual_hz: f64,
    duration_s: f64,
) -> Result<RunOutput> {
    let opts = Mz12Options {
        evolve: cfg.solver.evolve_options(),
        sme_dt_s: cfg.solver.sme_dt_s,
        stark_residual_hz,
        duration_s,
    };
    let mut out = RunOutput::new("mz12");
    for (k, &gamma) in gammas.iter().enumerate() {
        let trace = match mz12_mode(mode, cfg.seed) {
            Mz12Mode::Lindblad => run_mz12(device, gamma, Mz12Mode::Lindblad, &opts)?,
            Mz12Mode::Trajectories { n, seed } => {
                run_mz12_trajectories_parallel(device, gamma, n, seed, &opts)?
            }
        };
        let suffix = if gammas.len() > 1 { format!("_g{k}") } else { String::new() };
        out.tables.push(populations_table(&format!("populations{suffix}"), device, &trace));
        out.figures.push(populations_figure(
            &format!("populations{suffix}"),
            &format!("12-qubit populations, Gamma_m = {:.3} MHz", gamma / 1e6),
            device,
            &trace,
        ));
        let final_n15 = trace.observable("n_Q15")?.last().copied().unwrap_or(f64::NAN);
        out.notes.push(format!(
            "Gamma_m/2pi = {:.3} MHz: final n_Q15 = {final_n15:.4}",
            gamma / 1e6
        ));
    }
    Ok(out)
}

/// Trajectory ensembles parallelize over fixed-width chunks; merging in
/// chunk order keeps the result bit-identical for any thread count.
fn run_mz12_trajectories_parallel(
    device: &DeviceModel,
    gamma_m_hz: f64,
    n: usize,
    seed: u64,
    opts: &Mz12Options,
) -> Result<EvolutionTrace> {
    if n == 0 {
        bail!("trajectory count must be positive");
    }
    let (schedule, basis, initial, cfg) = mz12_sme_inputs(device, gamma_m_hz, opts, seed)?;
    let ranges: Vec<_> = (0..n as u64)
        .step_by(ENSEMBLE_CHUNK)
        .map(|s| s..(s + ENSEMBLE_CHUNK as u64).min(n as u64))
        .collect();
    let chunks: Vec<_> = ranges
        .into_par_iter()
        .map(|r| mz12_ensemble_chunk(device, &schedule, &basis, initial, &cfg, r))
        .collect::<std::result::Result<_, _>>()?;
    let mut merged = chunks
        .into_iter()
        .reduce(|mut a, b| {
            a.merge(&b).expect("chunks share one grid");
            a
        })
        .ok_or_else(|| anyhow!("no trajectory chunks"))?;
    let _ = &mut merged;
    Ok(merged.finalize()?)
}

fn zeno_output(cfg: &ExperimentConfig, device: &DeviceModel, grid: &[f64]) -> Result<RunOutput> {
    let opts = Mz12Options {
        evolve: cfg.solver.evolve_options(),
        sme_dt_s: cfg.solver.sme_dt_s,
        stark_residual_hz: 0.0,
        duration_s: presets::MZ12_DURATION_S,
    };
    let result = zeno_metrics(device, grid, &opts)?;

    let mut out = RunOutput::new("zeno_sweep");
    let mut metrics = Table::new(
        "zeno_metrics",
        &["gamma_m_hz", "concurrence_q4q8", "purity_s", "entropy_s_bits", "extraction_time_s"],
    );
    for (i, &g) in result.gamma_grid_hz.iter().enumerate() {
        metrics.push_row(vec![
            g.into(),
            result.concurrence[i].into(),
            result.purity[i].into(),
            result.entropy_bits[i].into(),
            result.extraction_time_s.into(),
        ]);
    }
    out.tables.push(metrics);

    // Long-format heat-map data: qubit x time x gamma.
    let mut heat = Table::new(
        "populations_heatmap",
        &["gamma_m_hz", "time_s", "qubit", "population"],
    );
    for (i, &g) in result.gamma_grid_hz.iter().enumerate() {
        for p in 0..device.n_qubits() {
            let label = device.label(p);
            let series = result.population_traces[i]
                .get(&format!("n_Q{label}"))
                .ok_or_else(|| anyhow!("missing population series"))?;
            for (k, &t) in result.times_s.iter().enumerate() {
                heat.push_row(vec![
                    g.into(),
                    t.into(),
                    Cell::Int(label as i64),
                    series[k].into(),
                ]);
            }
        }
    }
    out.tables.push(heat);

    for (i, &g) in result.gamma_grid_hz.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..device.n_qubits())
            .map(|p| {
                result.population_traces[i]
                    .get(&format!("n_Q{}", device.label(p)))
                    .cloned()
                    .unwrap_or_default()
            })
            .collect();
        out.figures.push(Figure::Heat(
            format!("population_heatmap_g{i}"),
            HeatMap {
                title: format!("Populations, Gamma_m = {:.3} MHz", g / 1e6),
                x_label: "time (s)".into(),
                y_label: "qubit".into(),
                rows,
                row_labels: (0..device.n_qubits())
                    .map(|p| format!("Q{}", device.label(p)))
                    .collect(),
                x_range: (0.0, *result.times_s.last().unwrap_or(&0.0)),
            },
        ));
    }
    out.figures.push(Figure::Line(
        "zeno_metrics".into(),
        LinePlot {
            title: format!(
                "Zeno sweep metrics at t = {:.1} ns",
                result.extraction_time_s * 1e9
            ),
            x_label: "Gamma_m (Hz)".into(),
            y_label: "metric".into(),
            series: vec![
                Series {
                    name: "concurrence".into(),
                    points: result
                        .gamma_grid_hz
                        .iter()
                        .copied()
                        .zip(result.concurrence.clone())
                        .collect(),
                },
                Series {
                    name: "purity_s".into(),
                    points: result
                        .gamma_grid_hz
                        .iter()
                        .copied()
                        .zip(result.purity.clone())
                        .collect(),
                },
                Series {
                    name: "entropy_s (bits)".into(),
                    points: result
                        .gamma_grid_hz
                        .iter()
                        .copied()
                        .zip(result.entropy_bits.clone())
                        .collect(),
                },
            ],
        },
    ));
    out.notes.push(format!(
        "extraction time {:.1} ns; concurrence {:.4} -> {:.4} across the grid",
        result.extraction_time_s * 1e9,
        result.concurrence.first().unwrap_or(&f64::NAN),
        result.concurrence.last().unwrap_or(&f64::NAN)
    ));
    Ok(out)
}

fn align_output(
    device: &DeviceModel,
    cost: AlignCostSpec,
    injected: &[crate::config::InjectedOffset],
    off_diag: f64,
    budget: usize,
) -> Result<RunOutput> {
    let cost = match cost {
        AlignCostSpec::Mz4Stage1 => AlignmentCost::Mz4Stage1,
        AlignCostSpec::Mz4Stage4 => AlignmentCost::Mz4Stage4,
        AlignCostSpec::Mz12 => AlignmentCost::Mz12,
    };
    let crosstalk = default_crosstalk(device.n_qubits(), off_diag);
    let shifts: Vec<(usize, f64)> = injected
        .iter()
        .map(|o| Ok((device.position(o.qubit)?, o.offset_hz)))
        .collect::<std::result::Result<_, mzsim_core::Error>>()?;
    let problem = AlignmentProblem::with_compensable_shifts(
        device.clone(),
        cost,
        crosstalk,
        &shifts,
        budget,
    )?;
    let outcome = align_frequencies(&problem)?;
    let want = problem.compensating_offsets_hz();

    let mut out = RunOutput::new("align");
    let mut table = Table::new(
        "alignment",
        &[
            "qubit",
            "injected_shift_hz",
            "commanded_offset_hz",
            "compensating_offset_hz",
            "offset_error_hz",
            "residual_detuning_hz",
        ],
    );
    for p in 0..device.n_qubits() {
        table.push_row(vec![
            Cell::Int(device.label(p) as i64),
            problem.injected_shifts_hz[p].into(),
            outcome.offsets_hz[p].into(),
            want[p].into(),
            (outcome.offsets_hz[p] - want[p]).into(),
            outcome.residual_detuning_hz[p].into(),
        ]);
    }
    out.tables.push(table);

    let mut history = Table::new("alignment_history", &["evaluation", "best_cost"]);
    for (i, &c) in outcome.history.iter().enumerate() {
        history.push_row(vec![Cell::Int(i as i64 + 1), c.into()]);
    }
    out.tables.push(history);

    out.figures.push(Figure::Line(
        "alignment_history".into(),
        LinePlot {
            title: "Alignment cost (log10) vs evaluations".into(),
            x_label: "cost evaluation".into(),
            y_label: "log10 best cost".into(),
            series: vec![Series {
                name: "best cost".into(),
                points: outcome
                    .history
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (i as f64 + 1.0, c.max(1e-300).log10()))
                    .collect(),
            }],
        },
    ));
    out.notes.push(format!(
        "cost {:.3e} -> {:.3e} in {} evaluations",
        outcome.initial_cost, outcome.final_cost, outcome.evaluations
    ));
    Ok(out)
}

fn sme_demo_output(
    cfg: &ExperimentConfig,
    device: &DeviceModel,
    gamma_m_hz: f64,
    n_trajectories: usize,
    duration_s: f64,
    sample_trajectories: usize,
) -> Result<RunOutput> {
    use mzsim_core::device::{CouplingGraph, QubitSpec, Schedule, Stage};
    use mzsim_core::sme::unraveling_rate_from_dephasing_hz;

    // Single decoupled monitor qubit taken from the configured device.
    let q = device.qubit(0).clone();
    let label = q.index;
    let solo = DeviceModel::new(
        vec![QubitSpec { index: label, ..q }],
        CouplingGraph::default(),
        vec![None],
    )?;
    let basis = SectorBasis::new(1, 1)?;
    let schedule = Schedule::new(
        solo.qubit(0).idle_frequency_hz,
        vec![Stage::new("monitor", duration_s, vec![solo.qubit(0).idle_frequency_hz])],
    )?;
    let amp = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let rho0 = DensityOperator::pure(&[amp, amp])?;
    let sme_cfg = SmeConfig::new(
        basis.sigma_z_matrix(0),
        unraveling_rate_from_dephasing_hz(gamma_m_hz),
        cfg.solver.sme_dt_s,
    )?
    .with_trajectories(n_trajectories, cfg.seed)
    .with_snapshots(cfg.solver.dt_output_s);

    // Sample trajectories for plotting.
    let sz = basis.sigma_z_matrix(0);
    let samples: Vec<_> = (0..sample_trajectories as u64)
        .map(|k| sample_trajectory_from(&solo, &schedule, &rho0, &basis, &sme_cfg, k))
        .collect::<std::result::Result<_, _>>()?;

    let mut out = RunOutput::new("sme_demo");
    if let Some(first) = samples.first() {
        let mut signals = Table::with_columns("signals", {
            let mut c: Vec<String> = vec!["time_s".into()];
            c.extend((0..samples.len()).map(|k| format!("i_traj{k}")));
            c
        });
        for (row, &t) in first.times_s.iter().enumerate() {
            let mut cells: Vec<Cell> = vec![t.into()];
            for s in &samples {
                cells.push(s.signal[row].into());
            }
            signals.push_row(cells);
        }
        out.tables.push(signals);

        let mut collapse = Table::with_columns("collapse", {
            let mut c: Vec<String> = vec!["time_s".into()];
            c.extend((0..samples.len()).map(|k| format!("sigma_z_traj{k}")));
            c
        });
        let mut series = Vec::new();
        for (k, s) in samples.iter().enumerate() {
            let states = s.states.as_ref().expect("snapshots requested");
            let zs: Vec<f64> = states
                .iter()
                .map(|st| mzsim_core::lindblad::expectation(st, &sz))
                .collect::<std::result::Result<_, _>>()?;
            series.push(Series {
                name: format!("traj {k}"),
                points: s.snapshot_times_s.iter().copied().zip(zs).collect(),
            });
        }
        for row in 0..first.snapshot_times_s.len() {
            let mut cells: Vec<Cell> = vec![first.snapshot_times_s[row].into()];
            for s in &series {
                cells.push(s.points[row].1.into());
            }
            collapse.push_row(cells);
        }
        out.tables.push(collapse);
        out.figures.push(Figure::Line(
            "collapse".into(),
            LinePlot {
                title: format!(
                    "Conditioned <sigma_z>, Gamma_m = {:.2} MHz",
                    gamma_m_hz / 1e6
                ),
                x_label: "time (s)".into(),
                y_label: "<sigma_z>".into(),
                series,
            },
        ));
    }

    // Ensemble average versus the deterministic solution.
    let observables = DiagObservable::populations(&solo, &basis);
    let chunks: Vec<_> = (0..n_trajectories as u64)
        .step_by(ENSEMBLE_CHUNK)
        .map(|s| s..(s + ENSEMBLE_CHUNK as u64).min(n_trajectories as u64))
        .collect();
    let accumulators: Vec<_> = chunks
        .into_par_iter()
        .map(|range| -> mzsim_core::Result<_> {
            let mut acc: Option<mzsim_core::sme::EnsembleAccumulator> = None;
            for k in range {
                let rec = sample_trajectory_from(&solo, &schedule, &rho0, &basis, &sme_cfg, k)?;
                match acc.as_mut() {
                    Some(a) => a.push(&rec)?,
                    None => {
                        let mut a = mzsim_core::sme::EnsembleAccumulator::new(
                            rec.snapshot_times_s.clone(),
                            basis.dim(),
                            observables.clone(),
                        );
                        a.push(&rec)?;
                        acc = Some(a);
                    }
                }
            }
            Ok(acc.expect("nonempty chunk"))
        })
        .collect::<std::result::Result<_, _>>()?;
    let merged = accumulators
        .into_iter()
        .reduce(|mut a, b| {
            a.merge(&b).expect("chunks share one grid");
            a
        })
        .ok_or_else(|| anyhow!("no trajectories"))?;
    let mean = merged.finalize()?;

    use mzsim_core::device::{build_hcb, collapse_operators};
    let h = build_hcb(&solo, &[solo.qubit(0).idle_frequency_hz], &basis, schedule.rotating_frame_hz)?;
    let stage = Stage::new("monitor", duration_s, vec![solo.qubit(0).idle_frequency_hz])
        .with_measurement(label, gamma_m_hz);
    let c_ops = collapse_operators(&solo, &stage, &basis)?;
    let lindblad = mzsim_core::lindblad::evolve_stage(
        &h,
        &c_ops,
        &rho0,
        duration_s,
        &cfg.solver.evolve_options(),
    )?;

    let key = format!("n_Q{label}");
    let mut cmp = Table::new(
        "ensemble_vs_lindblad",
        &["time_s", "n_sme", "se_n_sme", "n_lindblad", "trace_distance"],
    );
    let mut dist_series = Vec::new();
    for (k, &t) in mean.times_s.iter().enumerate() {
        let d = mean.states[k].trace_distance(&lindblad.states[k])?;
        dist_series.push((t, d));
        cmp.push_row(vec![
            t.into(),
            mean.observables[&key][k].into(),
            mean.observables[&format!("se_{key}")][k].into(),
            lindblad.states[k].matrix()[(1, 1)].re.into(),
            d.into(),
        ]);
    }
    out.tables.push(cmp);
    out.figures.push(Figure::Line(
        "ensemble_vs_lindblad".into(),
        LinePlot {
            title: format!("Unraveling check, {n_trajectories} trajectories"),
            x_label: "time (s)".into(),
            y_label: "trace distance".into(),
            series: vec![Series { name: "trace distance".into(), points: dist_series.clone() }],
        },
    ));
    let worst = dist_series.iter().map(|p| p.1).fold(0.0f64, f64::max);
    out.notes.push(format!(
        "ensemble of {n_trajectories}: worst trace distance to the deterministic run {worst:.4}"
    ));
    Ok(out)
}

fn custom_output(
    cfg: &ExperimentConfig,
    device: &DeviceModel,
    schedule: &crate::config::ScheduleSection,
    initial_excited: &[usize],
    max_excitations: usize,
) -> Result<RunOutput> {
    let schedule = build_schedule(schedule)?;
    let basis = SectorBasis::new(device.n_qubits(), max_excitations)?;
    let positions: Vec<usize> = initial_excited
        .iter()
        .map(|&l| device.position(l))
        .collect::<std::result::Result<_, _>>()?;
    let initial = basis.state_from_positions(&positions)?;
    let trace = run_schedule(device, &schedule, initial, &basis, &cfg.solver.evolve_options())?;
    let mut out = RunOutput::new("custom");
    out.tables.push(populations_table("populations", device, &trace));
    out.figures.push(populations_figure("populations", "Scheduled evolution", device, &trace));
    Ok(out)
}

/// Writes tables, figures, and the manifest; returns the file names.
fn persist(settings: &RunSettings, output: &RunOutput) -> Result<Vec<String>> {
    fs::create_dir_all(&settings.out_dir)
        .with_context(|| format!("creating output directory {:?}", settings.out_dir))?;
    let mut written = Vec::new();

    for table in &output.tables {
        if settings.formats.contains(&Format::Csv) {
            let name = format!("{}.csv", table.name);
            fs::write(settings.out_dir.join(&name), table.to_csv()?)?;
            written.push(name);
        }
        if settings.formats.contains(&Format::Json) {
            let name = format!("{}.json", table.name);
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, serde_json::Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| {
                            let v = match cell {
                                Cell::Int(i) => serde_json::json!(i),
                                Cell::Float(f) => serde_json::json!(f),
                                Cell::Text(t) => serde_json::json!(t),
                            };
                            (c.clone(), v)
                        })
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
            fs::write(
                settings.out_dir.join(&name),
                serde_json::to_vec_pretty(&rows)?,
            )?;
            written.push(name);
        }
    }
    if settings.formats.contains(&Format::Svg) {
        for figure in &output.figures {
            let name = format!("{}.svg", figure.name());
            fs::write(settings.out_dir.join(&name), figure.to_svg())?;
            written.push(name);
        }
    }

    let manifest = serde_json::json!({
        "experiment": output.experiment,
        "config_sha256": config_hash(&settings.config),
        "seed": settings.config.seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "created_unix_s": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "threads": settings.threads,
        "tables": output.tables.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
        "figures": output.figures.iter().map(|f| f.name().to_string()).collect::<Vec<_>>(),
        "files": written,
    });
    fs::write(
        settings.out_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    written.push("manifest.json".into());
    Ok(written)
}

/// SHA-256 of the canonical configuration serialization.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = canonical_json(cfg);
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
