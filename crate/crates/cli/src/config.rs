//! Run configuration: JSON schema with full defaults, strict key checking,
//! and `--set key.path=value` overrides applied before validation.

use crate::CliError;
use quench_core::geometry::{commensurate_angle, LatticeConfig, StandingWaveConfig};
use quench_core::pulse::GaussianPair;
use quench_core::quantum::IntegratorConfig;
use quench_core::register::{OperationMode, QuenchSetup, SiteState};
use quench_core::stirap::{SimulationParams, TransferSettings};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    StirapScan,
    Quench,
    Rotate,
    Measure,
    Cphase,
    PatternLoad,
    PrecisionBudget,
    ProtocolScript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferSection {
    /// Intermediate-state detuning in units of gamma_q.
    pub delta_q: f64,
    /// Decay rate of the quench transition; 1 fixes the unit system.
    pub gamma_q: f64,
}

impl Default for TransferSection {
    fn default() -> Self {
        Self { delta_q: 100.0, gamma_q: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { omega_min: 0.0, omega_max: 40.0, n_points: 81 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub site_count: usize,
    pub target_site: usize,
    pub reach: u32,
    pub lamb_dicke: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { site_count: 10, target_site: 2, reach: 4, lamb_dicke: 0.0 }
    }
}

impl LatticeSection {
    pub fn build(&self) -> Result<LatticeConfig, CliError> {
        LatticeConfig::new(self.site_count, self.target_site, self.reach, self.lamb_dicke)
            .map_err(|e| CliError::Config(format!("lattice: {e}")))
    }
}

/// Lengths are in units of the lattice spacing `d_l`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveSection {
    pub wavelength: f64,
    pub tilt_angle: f64,
    pub relative_phase: f64,
    pub peak_rabi: f64,
}

impl Default for WaveSection {
    fn default() -> Self {
        // matches the default lattice: axial period 2 (reach + 1)
        let tilt = commensurate_angle(0.8, 1.0, 4).expect("default tilt");
        Self { wavelength: 0.8, tilt_angle: tilt, relative_phase: 0.0, peak_rabi: 20.0 }
    }
}

impl WaveSection {
    pub fn build(&self) -> Result<StandingWaveConfig, CliError> {
        StandingWaveConfig::new(self.wavelength, self.tilt_angle, self.relative_phase, self.peak_rabi)
            .map_err(|e| CliError::Config(format!("waves: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub peak: f64,
    pub t1: f64,
    pub t2: f64,
    pub width: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self { peak: 20.0, t1: 6.0, t2: 0.0, width: 5.0 }
    }
}

impl PulseSection {
    pub fn build(&self) -> Result<GaussianPair, CliError> {
        GaussianPair::new(self.peak, self.t1, self.t2, self.width)
            .map_err(|e| CliError::Config(format!("pulses: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub n_sites: usize,
    pub tilt_angle: f64,
    pub reach: u32,
    pub angle_error: f64,
    pub phase_error: f64,
    /// Use the large-reach closed form instead of the explicit tilt.
    pub asymptotic: bool,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            n_sites: 1000,
            tilt_angle: WaveSection::default().tilt_angle,
            reach: 4,
            angle_error: 1e-5,
            phase_error: 0.0,
            asymptotic: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSection {
    #[default]
    Ideal,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SitePattern {
    A,
    B,
    Q,
    Plus,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegisterSection {
    pub site_count: usize,
    pub target_site: usize,
    pub reach: u32,
    /// Rotation angle used by the rotate scenario and script defaults.
    pub alpha: f64,
    pub mode: ModeSection,
    /// Per-site initial states; None picks a scenario-appropriate default.
    pub pattern: Option<Vec<SitePattern>>,
}

impl Default for RegisterSection {
    fn default() -> Self {
        Self {
            site_count: 5,
            target_site: 2,
            reach: 4,
            alpha: std::f64::consts::PI,
            mode: ModeSection::Ideal,
            pattern: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ScriptStep {
    Quench { site: usize, reach: u32 },
    InverseQuench { site: usize, reach: u32 },
    RotateZ { site: usize, reach: u32, alpha: f64 },
    RotateX { site: usize, reach: u32, alpha: f64 },
    RotateEuler { site: usize, reach: u32, z1: f64, x: f64, z2: f64 },
    Hadamard,
    Cphase { site: usize, reach: u32 },
    ControlledRotation { site: usize, reach: u32, alpha: f64 },
    Measure { site: usize, reach: u32 },
    Pump {
        #[serde(default)]
        trajectory: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub transfer: TransferSection,
    pub scan: ScanSection,
    pub lattice: LatticeSection,
    pub waves: Vec<WaveSection>,
    pub pulses: PulseSection,
    pub integrator: IntegratorConfig,
    pub budget: BudgetSection,
    pub register: RegisterSection,
    pub script: Vec<ScriptStep>,
    pub seed: u64,
    pub output_path: Option<String>,
    pub output_format: Option<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            transfer: TransferSection::default(),
            scan: ScanSection::default(),
            lattice: LatticeSection::default(),
            waves: vec![WaveSection::default(), WaveSection::default()],
            pulses: PulseSection::default(),
            integrator: IntegratorConfig::default(),
            budget: BudgetSection::default(),
            register: RegisterSection::default(),
            script: Vec::new(),
            seed: 1,
            output_path: None,
            output_format: None,
        }
    }
}

impl RunConfig {
    pub fn simulation_params(&self) -> Result<SimulationParams, CliError> {
        if self.transfer.gamma_q < 0.0 {
            return Err(CliError::Config(format!(
                "transfer.gamma_q: decay rate must be >= 0, got {}",
                self.transfer.gamma_q
            )));
        }
        Ok(SimulationParams {
            detuning: self.transfer.delta_q,
            gamma: self.transfer.gamma_q,
            integrator: self.integrator.clone(),
        })
    }

    pub fn transfer_settings(&self) -> Result<TransferSettings, CliError> {
        Ok(TransferSettings { params: self.simulation_params()?, ..TransferSettings::default() })
    }

    pub fn wave_pair(&self) -> Result<[StandingWaveConfig; 2], CliError> {
        if self.waves.len() != 2 {
            return Err(CliError::Config(format!(
                "waves: exactly 2 standing waves required, got {}",
                self.waves.len()
            )));
        }
        Ok([self.waves[0].build()?, self.waves[1].build()?])
    }

    pub fn operation_mode(&self) -> Result<OperationMode, CliError> {
        Ok(match self.register.mode {
            ModeSection::Ideal => OperationMode::Ideal,
            ModeSection::Simulated => OperationMode::Simulated(QuenchSetup {
                pulses: self.pulses.build()?,
                params: self.simulation_params()?,
                lamb_dicke: self.lattice.lamb_dicke,
            }),
        })
    }

    /// Initial site states for register scenarios. `fallback` fills sites
    /// when the config leaves the pattern unset.
    pub fn register_pattern(&self, fallback: SitePattern) -> Result<Vec<Option<SiteState>>, CliError> {
        let n = self.register.site_count;
        let entries: Vec<SitePattern> = match &self.register.pattern {
            Some(p) => {
                if p.len() != n {
                    return Err(CliError::Config(format!(
                        "register.pattern: length {} does not match register.site_count {n}",
                        p.len()
                    )));
                }
                p.clone()
            }
            None => vec![fallback; n],
        };
        Ok(entries
            .into_iter()
            .map(|e| match e {
                SitePattern::A => Some(SiteState::a()),
                SitePattern::B => Some(SiteState::b()),
                SitePattern::Q => Some(SiteState::q()),
                SitePattern::Plus => Some(SiteState::plus()),
                SitePattern::Empty => None,
            })
            .collect())
    }

    pub fn default_output_path(&self) -> &'static str {
        match self.scenario {
            Scenario::StirapScan => "stirap_scan.csv",
            Scenario::Quench => "quench_maps.json",
            Scenario::Rotate => "rotate.json",
            Scenario::Measure => "measure.json",
            Scenario::Cphase => "cphase.json",
            Scenario::PatternLoad => "pattern_load.json",
            Scenario::PrecisionBudget => "precision_budget.json",
            Scenario::ProtocolScript => "protocol.json",
        }
    }

    pub fn format(&self) -> OutputFormat {
        self.output_format.unwrap_or(match self.scenario {
            Scenario::StirapScan => OutputFormat::Csv,
            _ => OutputFormat::Json,
        })
    }
}

/// Parse config text, apply `key.path=value` overrides, then validate
/// against the schema (unknown keys are rejected).
///
/// The user document is merged over the serialized defaults before the
/// overrides run, so dotted paths can address sections the user left out.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let user: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
    if !user.is_object() {
        return Err(CliError::Config("config root must be a JSON object".into()));
    }
    let mut value = serde_json::to_value(RunConfig::default())
        .map_err(|e| CliError::Config(format!("default serialization: {e}")))?;
    deep_merge(&mut value, user);
    for entry in overrides {
        apply_override(&mut value, entry)?;
    }
    check_script_keys(&value)?;
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Serde's tagged-enum decoding ignores surplus keys, so step objects are
/// checked against the operation signatures by hand.
fn check_script_keys(value: &serde_json::Value) -> Result<(), CliError> {
    let Some(steps) = value.get("script").and_then(|s| s.as_array()) else {
        return Ok(());
    };
    for (i, step) in steps.iter().enumerate() {
        let Some(obj) = step.as_object() else { continue };
        let Some(op) = obj.get("op").and_then(|o| o.as_str()) else { continue };
        let allowed: &[&str] = match op {
            "quench" | "inverse-quench" | "cphase" | "measure" => &["op", "site", "reach"],
            "rotate-z" | "rotate-x" | "controlled-rotation" => &["op", "site", "reach", "alpha"],
            "rotate-euler" => &["op", "site", "reach", "z1", "x", "z2"],
            "hadamard" => &["op"],
            "pump" => &["op", "trajectory"],
            _ => continue,
        };
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "script[{i}]: unknown key `{key}` for op `{op}`"
                )));
            }
        }
    }
    Ok(())
}

/// Recursively overlay `src` onto `dest`. Objects merge key by key; arrays
/// and scalars replace wholesale.
fn deep_merge(dest: &mut serde_json::Value, src: serde_json::Value) {
    match (dest, src) {
        (serde_json::Value::Object(d), serde_json::Value::Object(s)) => {
            for (k, v) in s {
                match d.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        d.insert(k, v);
                    }
                }
            }
        }
        (dest, src) => *dest = src,
    }
}

fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<(), CliError> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set needs KEY=VALUE, got `{entry}`")))?;
    if path.is_empty() {
        return Err(CliError::Config(format!("--set has an empty key in `{entry}`")));
    }
    let new_value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));

    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = segment.parse::<usize>() {
            let arr = cursor.as_array_mut().ok_or_else(|| {
                CliError::Config(format!("--set {path}: `{segment}` indexes a non-array"))
            })?;
            if index >= arr.len() {
                return Err(CliError::Config(format!(
                    "--set {path}: index {index} out of bounds (length {})",
                    arr.len()
                )));
            }
            if last {
                arr[index] = new_value;
                return Ok(());
            }
            cursor = &mut arr[index];
        } else {
            let obj = cursor.as_object_mut().ok_or_else(|| {
                CliError::Config(format!("--set {path}: `{segment}` descends into a non-object"))
            })?;
            if last {
                obj.insert(segment.to_string(), new_value);
                return Ok(());
            }
            cursor = obj
                .entry(segment.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_all_defaults() {
        let cfg = parse_config("{}", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.transfer.delta_q, 100.0);
        assert_eq!(cfg.pulses.t1 - cfg.pulses.t2, 6.0);
        assert_eq!(cfg.pulses.width, 5.0);
    }

    #[test]
    fn negative_detuning_is_accepted() {
        let cfg = parse_config(r#"{"transfer": {"delta_q": -5.0}}"#, &[]).unwrap();
        assert_eq!(cfg.transfer.delta_q, -5.0);
        assert!(cfg.simulation_params().is_ok());
    }

    #[test]
    fn zero_reach_is_rejected_with_the_constraint() {
        let cfg = parse_config(r#"{"lattice": {"reach": 0}}"#, &[]).unwrap();
        let err = cfg.lattice.build().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1"), "message should name the bound: {msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"plse": {"peak": 3}}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("plse"), "{err}");
        let err = parse_config(r#"{"pulses": {"peek": 3}}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("peek"), "{err}");
    }

    #[test]
    fn overrides_descend_objects_and_arrays() {
        let sets = vec![
            "scenario=precision-budget".to_string(),
            "scan.n_points=11".to_string(),
            "pulses.peak=25.5".to_string(),
            "waves.1.relative_phase=0.25".to_string(),
        ];
        let cfg = parse_config("{}", &sets).unwrap();
        assert_eq!(cfg.scenario, Scenario::PrecisionBudget);
        assert_eq!(cfg.scan.n_points, 11);
        assert_eq!(cfg.pulses.peak, 25.5);
        assert_eq!(cfg.waves[1].relative_phase, 0.25);
        assert_eq!(cfg.waves[0].relative_phase, 0.0);
    }

    #[test]
    fn override_with_bad_key_is_rejected_downstream() {
        let err = parse_config("{}", &["pulses.peek=3".to_string()]).unwrap_err();
        assert!(err.to_string().contains("peek"), "{err}");
        let err = parse_config("{}", &["waves.7.peak_rabi=1".to_string()]).unwrap_err();
        assert!(err.to_string().contains("out of bounds"), "{err}");
        let err = parse_config("{}", &["seed".to_string()]).unwrap_err();
        assert!(err.to_string().contains("KEY=VALUE"), "{err}");
    }

    #[test]
    fn script_steps_validate_their_shape() {
        let text = r#"{"scenario": "protocol-script", "script": [
            {"op": "rotate-z", "site": 2, "reach": 4, "alpha": 1.0},
            {"op": "hadamard"},
            {"op": "measure", "site": 2, "reach": 4},
            {"op": "pump"}
        ]}"#;
        let cfg = parse_config(text, &[]).unwrap();
        assert_eq!(cfg.script.len(), 4);
        assert_eq!(
            cfg.script[0],
            ScriptStep::RotateZ { site: 2, reach: 4, alpha: 1.0 }
        );

        let bad = r#"{"script": [{"op": "rotate-z", "site": 2}]}"#;
        let err = parse_config(bad, &[]).unwrap_err();
        assert!(err.to_string().contains("reach"), "{err}");

        let surplus = r#"{"script": [{"op": "hadamard", "bogus": 1}]}"#;
        let err = parse_config(surplus, &[]).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn default_serialization_reaches_every_section() {
        let doc = serde_json::to_value(RunConfig::default()).unwrap();
        for key in [
            "scenario", "transfer", "scan", "lattice", "waves", "pulses", "integrator",
            "budget", "register", "script", "seed", "output_path", "output_format",
        ] {
            assert!(doc.get(key).is_some(), "missing {key}");
        }
        let lattice = doc.get("lattice").unwrap();
        for key in ["site_count", "target_site", "reach", "lamb_dicke"] {
            assert!(lattice.get(key).is_some(), "missing lattice.{key}");
        }
        let wave = &doc.get("waves").unwrap().as_array().unwrap()[0];
        for key in ["wavelength", "tilt_angle", "relative_phase", "peak_rabi"] {
            assert!(wave.get(key).is_some(), "missing waves.{key}");
        }
        for key in ["peak", "t1", "t2", "width"] {
            assert!(doc.get("pulses").unwrap().get(key).is_some(), "missing pulses.{key}");
        }
        for key in ["method", "rel_tol", "abs_tol", "max_step"] {
            assert!(doc.get("integrator").unwrap().get(key).is_some(), "missing integrator.{key}");
        }
        for key in ["n_sites", "tilt_angle", "reach", "angle_error", "phase_error", "asymptotic"] {
            assert!(doc.get("budget").unwrap().get(key).is_some(), "missing budget.{key}");
        }
        for key in ["site_count", "target_site", "reach", "alpha", "mode", "pattern"] {
            assert!(doc.get("register").unwrap().get(key).is_some(), "missing register.{key}");
        }
        for key in ["delta_q", "gamma_q"] {
            assert!(doc.get("transfer").unwrap().get(key).is_some(), "missing transfer.{key}");
        }
        for key in ["omega_min", "omega_max", "n_points"] {
            assert!(doc.get("scan").unwrap().get(key).is_some(), "missing scan.{key}");
        }
    }
}
