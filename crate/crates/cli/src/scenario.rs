//! Scenario dispatch: each scenario builds its domain objects from the
//! config, runs, and writes one artifact file.

use crate::config::{OutputFormat, RunConfig, Scenario, ScriptStep, SitePattern};
use crate::emit;
use crate::CliError;
use quench_core::geometry::{asymptotic_budget, precision_budget};
use quench_core::register::{
    pattern_load, split_seed, LatticeRegister, Measurement, PumpMode, PumpReport,
    RegisterSnapshot,
};
use quench_core::stirap::{fidelity_scan, quench_site_map, FidelityCurve};
use serde::Serialize;
use std::path::PathBuf;

pub fn run_scenario(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(
        cfg.output_path.clone().unwrap_or_else(|| cfg.default_output_path().to_string()),
    );
    let format = cfg.format();
    let bytes = match cfg.scenario {
        Scenario::StirapScan => stirap_scan(cfg, format)?,
        Scenario::Quench => quench_maps(cfg, format)?,
        Scenario::Rotate => rotate(cfg, format)?,
        Scenario::Measure => measure(cfg, format)?,
        Scenario::Cphase => cphase(cfg, format)?,
        Scenario::PatternLoad => pattern_load_scenario(cfg, format)?,
        Scenario::PrecisionBudget => budget(cfg, format)?,
        Scenario::ProtocolScript => protocol_script(cfg, format)?,
    };
    emit::write_atomic(&path, &bytes)?;
    Ok(path)
}

fn json_only(format: OutputFormat, scenario: &str) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => Ok(()),
        OutputFormat::Csv => Err(CliError::Config(format!(
            "output_format: scenario {scenario} only supports json"
        ))),
    }
}

fn stirap_scan(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    let scan = &cfg.scan;
    if !(scan.omega_min <= scan.omega_max) {
        return Err(CliError::Config(format!(
            "scan: omega_min {} must not exceed omega_max {}",
            scan.omega_min, scan.omega_max
        )));
    }
    if scan.omega_min < scan.omega_max && scan.n_points < 2 {
        return Err(CliError::Config(format!(
            "scan.n_points: need at least 2 points for a non-degenerate range, got {}",
            scan.n_points
        )));
    }
    let pulses = cfg.pulses.build()?;
    let settings = cfg.transfer_settings()?;
    let curve: FidelityCurve =
        fidelity_scan(scan.omega_min, scan.omega_max, scan.n_points, &pulses, &settings)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(match format {
        OutputFormat::Csv => emit::curve_csv(&curve).into_bytes(),
        OutputFormat::Json => emit::curve_json(&curve).into_bytes(),
    })
}

#[derive(Serialize)]
struct ComplexEntry {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SiteMapRecord {
    site: usize,
    residue: i64,
    node: bool,
    leakage: f64,
    matrix: [[ComplexEntry; 3]; 3],
}

fn quench_maps(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "quench")?;
    let lattice = cfg.lattice.build()?;
    let waves = cfg.wave_pair()?;
    let pulses = cfg.pulses.build()?;
    let params = cfg.simulation_params()?;
    let mut records = Vec::with_capacity(lattice.site_count);
    for s in 0..lattice.site_count {
        let map = quench_site_map(s as i64, &lattice, &waves, &pulses, &params)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let matrix = map.matrix.map(|row| row.map(|z| ComplexEntry { re: z.re, im: z.im }));
        records.push(SiteMapRecord {
            site: s,
            residue: lattice.residue(s as i64),
            node: lattice.is_node_site(s as i64),
            leakage: map.leakage,
            matrix,
        });
    }
    Ok(emit::json_doc(&records)?.into_bytes())
}

#[derive(Serialize)]
struct RegisterReport {
    snapshot: RegisterSnapshot,
    norm_deficit: f64,
    quench_applications: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    measurement: Option<Measurement>,
}

fn build_register(cfg: &RunConfig, fallback: SitePattern) -> Result<LatticeRegister, CliError> {
    let pattern = cfg.register_pattern(fallback)?;
    LatticeRegister::with_vacancies(cfg.register.site_count, &pattern)
        .map_err(|e| CliError::Config(format!("register: {e}")))
}

fn register_report(reg: &LatticeRegister, measurement: Option<Measurement>) -> RegisterReport {
    RegisterReport {
        snapshot: reg.snapshot(),
        norm_deficit: reg.norm_deficit(),
        quench_applications: reg.quench_applications(),
        measurement,
    }
}

fn rotate(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "rotate")?;
    let mut reg = build_register(cfg, SitePattern::Plus)?;
    let mode = cfg.operation_mode()?;
    reg.rotate_z(cfg.register.target_site, cfg.register.reach, cfg.register.alpha, &mode)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(emit::json_doc(&register_report(&reg, None))?.into_bytes())
}

fn measure(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "measure")?;
    let mut reg = build_register(cfg, SitePattern::Plus)?;
    let mode = cfg.operation_mode()?;
    let m = reg
        .measure_site(cfg.register.target_site, cfg.register.reach, cfg.seed, &mode)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(emit::json_doc(&register_report(&reg, Some(m)))?.into_bytes())
}

fn cphase(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "cphase")?;
    let mut reg = build_register(cfg, SitePattern::B)?;
    let mode = cfg.operation_mode()?;
    reg.collective_cphase(cfg.register.target_site, cfg.register.reach, &mode)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(emit::json_doc(&register_report(&reg, None))?.into_bytes())
}

#[derive(Serialize)]
struct PatternLoadReport {
    site_count: usize,
    target_site: usize,
    reach: u32,
    occupied_sites: Vec<usize>,
    flags: Vec<bool>,
}

fn pattern_load_scenario(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    let lattice = cfg.lattice.build()?;
    let flags = pattern_load(lattice.site_count, lattice.target_site, lattice.reach)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let occupied: Vec<usize> =
        flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
    Ok(match format {
        OutputFormat::Csv => emit::pattern_csv(&flags).into_bytes(),
        OutputFormat::Json => emit::json_doc(&PatternLoadReport {
            site_count: lattice.site_count,
            target_site: lattice.target_site,
            reach: lattice.reach,
            occupied_sites: occupied,
            flags,
        })?
        .into_bytes(),
    })
}

#[derive(Serialize)]
struct BudgetReport {
    reach: u32,
    n_sites: usize,
    angle_error: f64,
    phase_error: f64,
    asymptotic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tilt_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node_displacement: Option<f64>,
    feasible: bool,
}

fn budget(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "precision-budget")?;
    let b = &cfg.budget;
    let report = if b.asymptotic {
        let out = asymptotic_budget(b.reach, b.n_sites, b.angle_error, b.phase_error);
        BudgetReport {
            reach: b.reach,
            n_sites: b.n_sites,
            angle_error: b.angle_error,
            phase_error: b.phase_error,
            asymptotic: true,
            tilt_angle: None,
            lhs: Some(out.lhs),
            margin: Some(out.margin),
            node_displacement: None,
            feasible: out.feasible,
        }
    } else {
        let out = precision_budget(b.n_sites, b.tilt_angle, b.reach, b.angle_error, b.phase_error);
        BudgetReport {
            reach: b.reach,
            n_sites: b.n_sites,
            angle_error: b.angle_error,
            phase_error: b.phase_error,
            asymptotic: false,
            tilt_angle: Some(b.tilt_angle),
            lhs: None,
            margin: None,
            node_displacement: Some(out.node_displacement),
            feasible: out.feasible,
        }
    };
    Ok(emit::json_doc(&report)?.into_bytes())
}

#[derive(Serialize)]
struct StepEvent {
    step: usize,
    op: ScriptStep,
    #[serde(skip_serializing_if = "Option::is_none")]
    measurement: Option<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pump: Option<PumpReport>,
}

#[derive(Serialize)]
struct ScriptReport {
    events: Vec<StepEvent>,
    snapshot: RegisterSnapshot,
    norm_deficit: f64,
    quench_applications: usize,
}

fn validate_script(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.register.site_count;
    for (i, step) in cfg.script.iter().enumerate() {
        let site = match step {
            ScriptStep::Quench { site, .. }
            | ScriptStep::InverseQuench { site, .. }
            | ScriptStep::RotateZ { site, .. }
            | ScriptStep::RotateX { site, .. }
            | ScriptStep::RotateEuler { site, .. }
            | ScriptStep::Cphase { site, .. }
            | ScriptStep::ControlledRotation { site, .. }
            | ScriptStep::Measure { site, .. } => Some(*site),
            ScriptStep::Hadamard | ScriptStep::Pump { .. } => None,
        };
        if let Some(site) = site {
            if site >= n {
                return Err(CliError::Config(format!(
                    "script[{i}]: site {site} outside register of {n} sites"
                )));
            }
        }
    }
    Ok(())
}

fn protocol_script(cfg: &RunConfig, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    json_only(format, "protocol-script")?;
    validate_script(cfg)?;
    let mut reg = build_register(cfg, SitePattern::B)?;
    let mode = cfg.operation_mode()?;
    let runtime = |e: quench_core::register::RegisterError| CliError::Runtime(e.to_string());
    let mut events = Vec::with_capacity(cfg.script.len());
    for (i, step) in cfg.script.iter().enumerate() {
        let mut measurement = None;
        let mut pump = None;
        match step {
            ScriptStep::Quench { site, reach } => {
                reg.apply_quench(*site, *reach, &mode).map_err(runtime)?;
            }
            ScriptStep::InverseQuench { site, reach } => {
                reg.apply_inverse_quench(*site, *reach, &mode).map_err(runtime)?;
            }
            ScriptStep::RotateZ { site, reach, alpha } => {
                reg.rotate_z(*site, *reach, *alpha, &mode).map_err(runtime)?;
            }
            ScriptStep::RotateX { site, reach, alpha } => {
                reg.rotate_x(*site, *reach, *alpha, &mode).map_err(runtime)?;
            }
            ScriptStep::RotateEuler { site, reach, z1, x, z2 } => {
                reg.rotate_euler(*site, *reach, (*z1, *x, *z2), &mode).map_err(runtime)?;
            }
            ScriptStep::Hadamard => reg.collective_hadamard(),
            ScriptStep::Cphase { site, reach } => {
                reg.collective_cphase(*site, *reach, &mode).map_err(runtime)?;
            }
            ScriptStep::ControlledRotation { site, reach, alpha } => {
                reg.controlled_rotation(*site, *reach, *alpha, &mode).map_err(runtime)?;
            }
            ScriptStep::Measure { site, reach } => {
                let m = reg
                    .measure_site(*site, *reach, split_seed(cfg.seed, i as u64), &mode)
                    .map_err(runtime)?;
                measurement = Some(m);
            }
            ScriptStep::Pump { trajectory } => {
                let pump_mode =
                    if *trajectory { PumpMode::Trajectory } else { PumpMode::Deterministic };
                pump = Some(reg.optical_pump(split_seed(cfg.seed, i as u64), pump_mode));
            }
        }
        events.push(StepEvent { step: i, op: step.clone(), measurement, pump });
    }
    let report = ScriptReport {
        events,
        snapshot: reg.snapshot(),
        norm_deficit: reg.norm_deficit(),
        quench_applications: reg.quench_applications(),
    };
    Ok(emit::json_doc(&report)?.into_bytes())
}
