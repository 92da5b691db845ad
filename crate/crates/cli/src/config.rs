//! JSON experiment configuration: schema, validation, and translation into
//! core types.
//!
//! Every quantity carries its unit in the field name (`_hz`, `_s`); unknown
//! keys are rejected so typos fail loudly, and validation errors name the
//! offending JSON path.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use mzsim_core::device::{
    CouplingEdge, CouplingGraph, DeviceModel, QubitSpec, Schedule, Stage,
};
use mzsim_core::experiments::presets;
use mzsim_core::lindblad::EvolveOptions;
use mzsim_core::readout::ReadoutParams;

/// A configuration failure with the JSON path it refers to.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(path: &str, msg: &str) -> Result<T, ConfigError> {
    Err(ConfigError(format!("{path}: {msg}")))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub device: DeviceSection,
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    /// Built-in lattice: "mz4", "mz4_asymmetric", "mz12", "mz12_asymmetric".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Uniform coherence overrides applied to a preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tphi_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qubits: Vec<QubitSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub index: usize,
    pub idle_frequency_hz: f64,
    pub anharmonicity_hz: f64,
    #[serde(default)]
    pub t1_s: Option<f64>,
    #[serde(default)]
    pub tphi_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    pub chi_hz: f64,
    pub kappa_hz: f64,
    #[serde(default)]
    pub g_hz: Option<f64>,
    #[serde(default)]
    pub detuning_hz: Option<f64>,
    #[serde(default)]
    pub photon_gain_nbar_per_amp2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub a: usize,
    pub b: usize,
    pub j_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Fringe scan of the staged 4-qubit interferometer.
    Mz4 {
        #[serde(default)]
        gamma_bar_hz: f64,
        #[serde(default = "default_delta_start")]
        delta_start_hz: f64,
        #[serde(default = "default_delta_stop")]
        delta_stop_hz: f64,
        #[serde(default = "default_delta_points")]
        delta_points: usize,
        /// Measurement-rate grid for the `sweep` subcommand.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        gamma_sweep_hz: Vec<f64>,
    },
    /// Two-qubit tomography metrics versus measurement rate.
    Mz4Tomo { gamma_grid_hz: Vec<f64> },
    /// Continuously monitored 12-qubit run.
    Mz12 {
        #[serde(default)]
        gamma_m_hz: f64,
        #[serde(default)]
        mode: ModeSpec,
        #[serde(default)]
        stark_residual_hz: f64,
        #[serde(default = "default_mz12_duration")]
        duration_s: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        gamma_sweep_hz: Vec<f64>,
    },
    /// Zeno sweep with metric extraction at the frozen reference time.
    ZenoSweep { gamma_grid_hz: Vec<f64> },
    /// Crosstalk-recovery loop.
    Align {
        cost: AlignCostSpec,
        injected_offsets: Vec<InjectedOffset>,
        #[serde(default = "default_crosstalk_off_diag")]
        crosstalk_off_diagonal: f64,
        #[serde(default = "default_align_budget")]
        budget: usize,
    },
    /// Single monitored qubit: collapse trajectories and the
    /// ensemble-versus-deterministic comparison.
    SmeDemo {
        gamma_m_hz: f64,
        #[serde(default = "default_demo_trajectories")]
        n_trajectories: usize,
        #[serde(default = "default_demo_duration")]
        duration_s: f64,
        #[serde(default = "default_demo_samples")]
        sample_trajectories: usize,
    },
    /// Direct staged schedule on the configured device.
    Custom {
        schedule: ScheduleSection,
        initial_excited: Vec<usize>,
        #[serde(default = "default_max_excitations")]
        max_excitations: usize,
    },
}

fn default_delta_start() -> f64 {
    0.0
}
fn default_delta_stop() -> f64 {
    30e6
}
fn default_delta_points() -> usize {
    31
}
fn default_mz12_duration() -> f64 {
    presets::MZ12_DURATION_S
}
fn default_crosstalk_off_diag() -> f64 {
    0.02
}
fn default_align_budget() -> usize {
    500
}
fn default_demo_trajectories() -> usize {
    400
}
fn default_demo_duration() -> f64 {
    200e-9
}
fn default_demo_samples() -> usize {
    3
}
fn default_max_excitations() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeKeyword {
    #[default]
    Lindblad,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ModeSpec {
    Keyword(ModeKeyword),
    Trajectories { trajectories: usize },
}

impl Default for ModeSpec {
    fn default() -> Self {
        ModeSpec::Keyword(ModeKeyword::Lindblad)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AlignCostSpec {
    Mz4Stage1,
    Mz4Stage4,
    Mz12,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InjectedOffset {
    pub qubit: usize,
    pub offset_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub rotating_frame_hz: f64,
    pub stages: Vec<StageSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StageSection {
    #[serde(default)]
    pub label: String,
    pub duration_s: f64,
    pub frequencies_hz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurements: Vec<MeasurementSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub qubit: usize,
    pub gamma_m_hz: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub rtol: f64,
    pub atol: f64,
    pub dt_output_s: f64,
    pub dt_max_s: Option<f64>,
    pub sme_dt_s: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let e = EvolveOptions::default();
        Self {
            rtol: e.rtol,
            atol: e.atol,
            dt_output_s: e.dt_output_s,
            dt_max_s: e.dt_max_s,
            sme_dt_s: 1e-10,
        }
    }
}

impl SolverSection {
    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            rtol: self.rtol,
            atol: self.atol,
            dt_output_s: self.dt_output_s,
            dt_max_s: self.dt_max_s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    /// Any of "csv", "json", "svg".
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec!["csv".into(), "json".into(), "svg".into()] }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| ConfigError(format!("{}: {}", e.path(), e.inner())))?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    validate_device(&cfg.device)?;
    validate_solver(&cfg.solver)?;
    for f in &cfg.output.formats {
        if !matches!(f.as_str(), "csv" | "json" | "svg") {
            return err("output.formats", &format!("unknown format '{f}'"));
        }
    }
    validate_experiment(cfg)?;
    // Cross-reference: the experiment must be able to build its device.
    build_device(&cfg.device).map(|_| ())
}

fn validate_device(dev: &DeviceSection) -> Result<(), ConfigError> {
    match (&dev.preset, dev.qubits.is_empty()) {
        (Some(p), _) if !dev.qubits.is_empty() || !dev.couplings.is_empty() => {
            return err("device", &format!("preset '{p}' excludes explicit qubits/couplings"));
        }
        (None, true) => return err("device", "needs either a preset or an explicit qubit list"),
        _ => {}
    }
    if let Some(p) = &dev.preset {
        if !matches!(p.as_str(), "mz4" | "mz4_asymmetric" | "mz12" | "mz12_asymmetric") {
            return err("device.preset", &format!("unknown preset '{p}'"));
        }
    }
    for (i, q) in dev.qubits.iter().enumerate() {
        let path = format!("device.qubits[{i}]");
        if !(1e9..20e9).contains(&q.idle_frequency_hz) {
            return err(
                &format!("{path}.idle_frequency_hz"),
                "must lie in the (1, 20) GHz sanity window",
            );
        }
        for (name, v) in [("t1_s", q.t1_s), ("tphi_s", q.tphi_s), ("t1_s", dev.t1_s)] {
            if let Some(t) = v {
                if !(t > 0.0) {
                    return err(&format!("{path}.{name}"), "must be positive (or null for infinity)");
                }
            }
        }
        if let Some(r) = &q.readout {
            if !(r.kappa_hz > 0.0) {
                return err(&format!("{path}.readout.kappa_hz"), "must be positive");
            }
        }
    }
    for (i, c) in dev.couplings.iter().enumerate() {
        if c.a == c.b {
            return err(&format!("device.couplings[{i}]"), "self-coupling is not allowed");
        }
    }
    for (name, v) in [("t1_s", dev.t1_s), ("tphi_s", dev.tphi_s)] {
        if let Some(t) = v {
            if !(t > 0.0) {
                return err(&format!("device.{name}"), "must be positive (or null for infinity)");
            }
        }
    }
    Ok(())
}

fn validate_solver(s: &SolverSection) -> Result<(), ConfigError> {
    if !(s.rtol > 0.0) || !(s.atol > 0.0) {
        return err("solver", "rtol and atol must be positive");
    }
    if !(s.dt_output_s > 0.0) {
        return err("solver.dt_output_s", "must be positive");
    }
    if !(s.sme_dt_s > 0.0) {
        return err("solver.sme_dt_s", "must be positive");
    }
    if let Some(d) = s.dt_max_s {
        if !(d > 0.0) {
            return err("solver.dt_max_s", "must be positive (or null)");
        }
    }
    Ok(())
}

fn require_sorted(path: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return err(path, "must not be empty");
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return err(path, "must be strictly increasing");
        }
    }
    if grid.iter().any(|g| *g < 0.0) {
        return err(path, "rates must be nonnegative");
    }
    Ok(())
}

fn validate_experiment(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    match &cfg.experiment {
        ExperimentSpec::Mz4 {
            gamma_bar_hz,
            delta_start_hz,
            delta_stop_hz,
            delta_points,
            gamma_sweep_hz,
        } => {
            if *gamma_bar_hz < 0.0 {
                return err("experiment.gamma_bar_hz", "must be nonnegative");
            }
            if *delta_points < 6 {
                return err("experiment.delta_points", "needs at least 6 points for the fit");
            }
            if delta_stop_hz <= delta_start_hz {
                return err("experiment.delta_stop_hz", "must exceed delta_start_hz");
            }
            if !gamma_sweep_hz.is_empty() {
                require_sorted("experiment.gamma_sweep_hz", gamma_sweep_hz)?;
            }
        }
        ExperimentSpec::Mz4Tomo { gamma_grid_hz } => {
            require_sorted("experiment.gamma_grid_hz", gamma_grid_hz)?;
        }
        ExperimentSpec::Mz12 { gamma_m_hz, duration_s, gamma_sweep_hz, mode, .. } => {
            if *gamma_m_hz < 0.0 {
                return err("experiment.gamma_m_hz", "must be nonnegative");
            }
            if !(*duration_s > 0.0) {
                return err("experiment.duration_s", "must be positive");
            }
            if !gamma_sweep_hz.is_empty() {
                require_sorted("experiment.gamma_sweep_hz", gamma_sweep_hz)?;
            }
            if let ModeSpec::Trajectories { trajectories } = mode {
                if *trajectories == 0 {
                    return err("experiment.mode.trajectories", "must be positive");
                }
            }
        }
        ExperimentSpec::ZenoSweep { gamma_grid_hz } => {
            require_sorted("experiment.gamma_grid_hz", gamma_grid_hz)?;
        }
        ExperimentSpec::Align { injected_offsets, crosstalk_off_diagonal, budget, .. } => {
            if injected_offsets.is_empty() {
                return err("experiment.injected_offsets", "must not be empty");
            }
            let mut seen = BTreeSet::new();
            for (i, o) in injected_offsets.iter().enumerate() {
                if !seen.insert(o.qubit) {
                    return err(
                        &format!("experiment.injected_offsets[{i}].qubit"),
                        "duplicate qubit",
                    );
                }
                if o.offset_hz.abs() > 1.5e6 {
                    return err(
                        &format!("experiment.injected_offsets[{i}].offset_hz"),
                        "beyond the locally identifiable range (|offset| <= 1.5 MHz)",
                    );
                }
            }
            if crosstalk_off_diagonal.abs() >= 0.08 {
                return err(
                    "experiment.crosstalk_off_diagonal",
                    "must stay small (|value| < 0.08) for diagonal dominance",
                );
            }
            if *budget == 0 {
                return err("experiment.budget", "must be positive");
            }
        }
        ExperimentSpec::SmeDemo { gamma_m_hz, n_trajectories, duration_s, sample_trajectories } => {
            if *gamma_m_hz < 0.0 {
                return err("experiment.gamma_m_hz", "must be nonnegative");
            }
            if *n_trajectories == 0 {
                return err("experiment.n_trajectories", "must be positive");
            }
            if !(*duration_s > 0.0) {
                return err("experiment.duration_s", "must be positive");
            }
            if *sample_trajectories > *n_trajectories {
                return err(
                    "experiment.sample_trajectories",
                    "cannot exceed n_trajectories",
                );
            }
        }
        ExperimentSpec::Custom { schedule, initial_excited, max_excitations } => {
            if schedule.stages.is_empty() {
                return err("experiment.schedule.stages", "must not be empty");
            }
            for (i, st) in schedule.stages.iter().enumerate() {
                if st.duration_s < 0.0 {
                    return err(
                        &format!("experiment.schedule.stages[{i}].duration_s"),
                        "must be nonnegative",
                    );
                }
                for (j, m) in st.measurements.iter().enumerate() {
                    if m.gamma_m_hz < 0.0 {
                        return err(
                            &format!(
                                "experiment.schedule.stages[{i}].measurements[{j}].gamma_m_hz"
                            ),
                            "must be nonnegative",
                        );
                    }
                }
            }
            if *max_excitations == 0 {
                return err("experiment.max_excitations", "must be at least 1");
            }
            if initial_excited.len() > *max_excitations {
                return err(
                    "experiment.initial_excited",
                    "more excitations than the basis allows",
                );
            }
        }
    }
    Ok(())
}

/// Builds the core device from the configuration.
pub fn build_device(dev: &DeviceSection) -> Result<DeviceModel, ConfigError> {
    if let Some(p) = &dev.preset {
        let base = match p.as_str() {
            "mz4" => presets::mz4_device_with_coherence(dev.t1_s, dev.tphi_s),
            "mz12" => presets::mz12_device_with_coherence(dev.t1_s, dev.tphi_s),
            "mz4_asymmetric" => presets::mz4_device_asymmetric(),
            "mz12_asymmetric" => presets::mz12_device_asymmetric(),
            other => return err("device.preset", &format!("unknown preset '{other}'")),
        };
        return Ok(base);
    }
    let qubits: Vec<QubitSpec> = dev
        .qubits
        .iter()
        .map(|q| QubitSpec {
            index: q.index,
            idle_frequency_hz: q.idle_frequency_hz,
            anharmonicity_hz: q.anharmonicity_hz,
            t1_s: q.t1_s.or(dev.t1_s),
            tphi_s: q.tphi_s.or(dev.tphi_s),
        })
        .collect();
    let readout = dev
        .qubits
        .iter()
        .map(|q| {
            q.readout.as_ref().map(|r| ReadoutParams {
                chi_hz: r.chi_hz,
                kappa_hz: r.kappa_hz,
                g_hz: r.g_hz,
                detuning_hz: r.detuning_hz,
                photon_gain_nbar_per_amp2: r.photon_gain_nbar_per_amp2,
            })
        })
        .collect();
    let edges = dev
        .couplings
        .iter()
        .map(|c| CouplingEdge { a: c.a, b: c.b, j_hz: c.j_hz })
        .collect();
    DeviceModel::new(qubits, CouplingGraph::new(edges), readout)
        .map_err(|e| ConfigError(format!("device: {e}")))
}

/// Builds a core schedule from the custom-experiment section.
pub fn build_schedule(s: &ScheduleSection) -> Result<Schedule, ConfigError> {
    let stages = s
        .stages
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let label = if st.label.is_empty() { format!("stage{i}") } else { st.label.clone() };
            let mut stage = Stage::new(&label, st.duration_s, st.frequencies_hz.clone());
            for m in &st.measurements {
                stage = stage.with_measurement(m.qubit, m.gamma_m_hz);
            }
            stage
        })
        .collect();
    Schedule::new(s.rotating_frame_hz, stages)
        .map_err(|e| ConfigError(format!("experiment.schedule: {e}")))
}

/// Canonical serialization of the effective configuration: keys are sorted
/// by the map representation, so equal configs hash equally regardless of
/// the input formatting.
pub fn canonical_json(cfg: &ExperimentConfig) -> String {
    let value = serde_json::to_value(cfg).expect("config serializes");
    serde_json::to_string(&value).expect("canonical value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_mz4() -> String {
        r#"{
            "device": { "preset": "mz4" },
            "experiment": { "kind": "mz4", "gamma_bar_hz": 0.0 }
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(&minimal_mz4()).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.solver.rtol, 1e-8);
        assert_eq!(cfg.output.directory, "out");
        match cfg.experiment {
            ExperimentSpec::Mz4 { delta_points, .. } => assert_eq!(delta_points, 31),
            _ => panic!("wrong kind"),
        }
        build_device(&cfg.device).unwrap();
    }

    #[test]
    fn negative_t1_names_the_path() {
        let text = r#"{
            "device": { "qubits": [
                {"index": 0, "idle_frequency_hz": 5.82e9, "anharmonicity_hz": -220e6, "t1_s": -1.0}
            ]},
            "experiment": { "kind": "mz12" }
        }"#;
        let e = parse_config(text).unwrap_err();
        assert!(e.0.contains("device.qubits[0].t1_s"), "{}", e.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "device": { "preset": "mz4" },
            "experiment": { "kind": "mz4", "gamma_hz_typo": 1.0 }
        }"#;
        let e = parse_config(text).unwrap_err();
        assert!(e.0.contains("gamma_hz_typo") || e.0.contains("unknown field"), "{}", e.0);
    }

    #[test]
    fn canonical_json_is_format_invariant() {
        let a = parse_config(&minimal_mz4()).unwrap();
        let spaced = minimal_mz4().replace('\n', "\n\n  ");
        let b = parse_config(&spaced).unwrap();
        assert_eq!(canonical_json(&a), canonical_json(&b));

        // Round trip: serialize and reparse to an equal config.
        let again = parse_config(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn mode_spec_accepts_both_forms() {
        let lind = r#"{
            "device": { "preset": "mz12" },
            "experiment": { "kind": "mz12", "gamma_m_hz": 1e6, "mode": "lindblad" }
        }"#;
        let cfg = parse_config(lind).unwrap();
        assert!(matches!(
            cfg.experiment,
            ExperimentSpec::Mz12 { mode: ModeSpec::Keyword(ModeKeyword::Lindblad), .. }
        ));
        let traj = r#"{
            "device": { "preset": "mz12" },
            "experiment": { "kind": "mz12", "gamma_m_hz": 1e6, "mode": {"trajectories": 64} }
        }"#;
        let cfg = parse_config(traj).unwrap();
        assert!(matches!(
            cfg.experiment,
            ExperimentSpec::Mz12 { mode: ModeSpec::Trajectories { trajectories: 64 }, .. }
        ));
    }

    #[test]
    fn preset_and_explicit_qubits_conflict() {
        let text = r#"{
            "device": { "preset": "mz4", "qubits": [
                {"index": 0, "idle_frequency_hz": 5.82e9, "anharmonicity_hz": -220e6}
            ]},
            "experiment": { "kind": "mz4" }
        }"#;
        assert!(parse_config(text).is_err());
    }
}
