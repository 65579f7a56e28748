//! Per-site STIRAP transfer: figures of merit, fidelity scans over the peak
//! coupling, threshold search, and extraction of the 3x3 quench map that the
//! register protocols consume.

use crate::geometry::{
    effective_rabi, validate_node_condition, LatticeConfig, NodeConditionReport,
    StandingWaveConfig,
};
use crate::pulse::{GaussianPair, PulseError};
use crate::quantum::{
    evolve, AtomState, IntegrationError, IntegratorConfig, Level, SiteHamiltonianSpec, SpecError,
    StateError,
};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Reference peak coupling (units of `gamma_q`) at which the transfer is
/// considered quenched; the constants below are figures of merit at this peak
/// for the default schedule, frozen from an independent fine-step reference
/// integration (8th-order, rtol 1e-12). The test suite re-derives them with
/// an in-repo fixed-step oracle.
pub const REF_PEAK: f64 = 20.0;
/// `|<Psi'|psi>|^2` for initial `(|a>+|b>)/sqrt(2)` at peak 20.
pub const REF_FIDELITY_TARGET_AT_20: f64 = 0.998_625_098_843_565_3;
/// `|<Psi|psi>|^2` at peak 20.
pub const REF_FIDELITY_INITIAL_AT_20: f64 = 0.250_203_140_883_404_8;
/// Squared norm at peak 20.
pub const REF_SURVIVAL_AT_20: f64 = 0.999_594_202_548_371_1;
/// Phase of the transferred `|q>` amplitude relative to the initial `|b>`.
pub const REF_TRANSFER_PHASE_AT_20: f64 = -0.061_498_109_084_215_28;
/// Frozen bound on `max - min` of `fidelity_target` over peaks `[20, 40]`
/// (measured variation 1.64e-3 on a 0.5-spaced grid).
pub const REF_PLATEAU_VARIATION_BOUND: f64 = 2.0e-3;
/// Frozen lower bound for per-site forward-then-inverse return fidelity at
/// peak >= 20 with decay on (worst measured class: 0.998).
pub const REF_ROUND_TRIP_FIDELITY_BOUND: f64 = 0.995;
/// Frozen lower bound for the `|b> -> |q>` transfer population of a quench
/// map at peak >= 20 (worst measured class: 0.9991).
pub const REF_QUENCH_TRANSFER_BOUND: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("omega range must satisfy min <= max, got [{0}, {1}]")]
    BadRange(f64, f64),
    #[error("a scan over a nonempty range needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("threshold search needs a nonempty curve")]
    EmptyCurve,
    #[error("target fidelity {target} not reached; curve maximum is {max_reached}")]
    ThresholdNotReached { target: f64, max_reached: f64 },
    #[error("standing-wave node condition violated at {} site(s)", .0.violations.len())]
    NodeCondition(Box<NodeConditionReport>),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Physical and numerical parameters shared by all engine entry points.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationParams {
    pub detuning: f64,
    pub gamma: f64,
    pub integrator: IntegratorConfig,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self { detuning: 100.0, gamma: 1.0, integrator: IntegratorConfig::default() }
    }
}

/// Initial state and the two fidelity references for a transfer run.
/// Defaults: start in `Psi = (|a>+|b>)/sqrt(2)`, compare against `Psi` and
/// `Psi' = (|a>+|q>)/sqrt(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSettings {
    pub params: SimulationParams,
    pub initial: AtomState,
    pub reference: AtomState,
    pub target: AtomState,
}

impl Default for TransferSettings {
    fn default() -> Self {
        Self {
            params: SimulationParams::default(),
            initial: AtomState::equal_superposition(Level::A, Level::B),
            reference: AtomState::equal_superposition(Level::A, Level::B),
            target: AtomState::equal_superposition(Level::A, Level::Q),
        }
    }
}

impl TransferSettings {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { params: SimulationParams { gamma, ..Default::default() }, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub final_state: AtomState,
    pub fidelity_initial: f64,
    pub fidelity_target: f64,
    /// `1 - norm^2`: probability of a spontaneous-emission event.
    pub leakage: f64,
    /// Phase of the final `|q>` amplitude relative to the initial `|b>`.
    pub transfer_phase: f64,
}

/// Run the transfer at peak coupling `omega_q_peak` over the full truncated
/// pulse window. The peak replaces the amplitude of `pulses`; its timings are
/// kept. Only the product of site factor and pulse amplitude enters the
/// dynamics, so the split between them is immaterial here.
pub fn simulate_transfer(
    omega_q_peak: f64,
    pulses: &GaussianPair,
    settings: &TransferSettings,
) -> Result<TransferResult, EngineError> {
    let pair = pulses.with_peak(omega_q_peak)?;
    let spec = SiteHamiltonianSpec::new(settings.params.detuning, settings.params.gamma, 1.0, pair)?;
    let (lo, hi) = spec.pulses.window();
    let final_state = evolve(&settings.initial, &spec, lo, hi, &settings.params.integrator)?;

    let fidelity_initial = final_state.fidelity(&settings.reference)?;
    let fidelity_target = final_state.fidelity(&settings.target)?;
    let leakage = (1.0 - final_state.norm_sq()).clamp(0.0, 1.0);

    let q = final_state.amplitude(Level::Q);
    let b0 = settings.initial.amplitude(Level::B);
    let transfer_phase = if q.norm() < 1e-12 {
        0.0
    } else if b0.norm() < 1e-12 {
        q.arg()
    } else {
        (q * b0.conj()).arg()
    };

    Ok(TransferResult { final_state, fidelity_initial, fidelity_target, leakage, transfer_phase })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub omega: f64,
    pub fidelity_initial: f64,
    pub fidelity_target: f64,
    pub leakage: f64,
}

/// Fidelity-vs-peak-coupling curve on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityCurve {
    pub samples: Vec<CurveSample>,
    /// First peak at which `fidelity_target` overtakes `fidelity_initial`
    /// (linear interpolation between grid points), if it does.
    pub crossing: Option<f64>,
}

/// Scan `simulate_transfer` over `[omega_min, omega_max]`. A degenerate range
/// (`min == max`) yields a single sample; otherwise `n_points >= 2` samples
/// are spaced uniformly. Samples integrate independently in parallel.
pub fn fidelity_scan(
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
    pulses: &GaussianPair,
    settings: &TransferSettings,
) -> Result<FidelityCurve, EngineError> {
    if !(omega_min <= omega_max) {
        return Err(EngineError::BadRange(omega_min, omega_max));
    }
    let omegas: Vec<f64> = if omega_min == omega_max {
        vec![omega_min]
    } else {
        if n_points < 2 {
            return Err(EngineError::TooFewPoints(n_points));
        }
        (0..n_points)
            .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (n_points - 1) as f64)
            .collect()
    };

    let results: Result<Vec<TransferResult>, EngineError> = omegas
        .par_iter()
        .map(|&omega| simulate_transfer(omega, pulses, settings))
        .collect();
    let results = results?;

    let samples: Vec<CurveSample> = omegas
        .iter()
        .zip(&results)
        .map(|(&omega, r)| CurveSample {
            omega,
            fidelity_initial: r.fidelity_initial,
            fidelity_target: r.fidelity_target,
            leakage: r.leakage,
        })
        .collect();

    let crossing = find_crossing(&samples);
    Ok(FidelityCurve { samples, crossing })
}

fn find_crossing(samples: &[CurveSample]) -> Option<f64> {
    let diff = |s: &CurveSample| s.fidelity_target - s.fidelity_initial;
    let i = samples.iter().position(|s| diff(s) >= 0.0)?;
    if i == 0 {
        return Some(samples[0].omega);
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    let (da, db) = (diff(a), diff(b));
    Some(a.omega + (b.omega - a.omega) * (-da) / (db - da))
}

/// Smallest peak on the curve reaching `target` in `fidelity_target`, with
/// linear interpolation inside the bracketing grid cell.
pub fn find_threshold(curve: &FidelityCurve, target: f64) -> Result<f64, EngineError> {
    if curve.samples.is_empty() {
        return Err(EngineError::EmptyCurve);
    }
    let max_reached =
        curve.samples.iter().map(|s| s.fidelity_target).fold(f64::NEG_INFINITY, f64::max);
    let i = curve
        .samples
        .iter()
        .position(|s| s.fidelity_target >= target)
        .ok_or(EngineError::ThresholdNotReached { target, max_reached })?;
    if i == 0 {
        return Ok(curve.samples[0].omega);
    }
    let (a, b) = (&curve.samples[i - 1], &curve.samples[i]);
    let t = (target - a.fidelity_target) / (b.fidelity_target - a.fidelity_target);
    Ok(a.omega + (b.omega - a.omega) * t)
}

/// Restriction of one site's quench evolution to `{|a>, |b>, |q>}`.
///
/// `matrix[row][col]` maps input basis `col` to output `row`; `leakage` is the
/// worst column-norm deficit (decay plus residual excited-state amplitude).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteQuenchMap {
    pub matrix: [[C64; 3]; 3],
    pub leakage: f64,
}

impl SiteQuenchMap {
    pub fn identity() -> Self {
        let mut matrix = [[C64::ZERO; 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = C64::ONE;
        }
        Self { matrix, leakage: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Largest deviation of `M^H M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut g = C64::ZERO;
                for r in 0..3 {
                    g += m[r][i].conj() * m[r][j];
                }
                let expect = if i == j { C64::ONE } else { C64::ZERO };
                defect = defect.max((g - expect).norm());
            }
        }
        defect
    }
}

/// Quench map for site `s` under a validated standing-wave pair. Sites on the
/// protected sublattice short-circuit to the exact identity.
pub fn quench_site_map(
    site: i64,
    lattice: &LatticeConfig,
    waves: &[StandingWaveConfig; 2],
    pulses: &GaussianPair,
    params: &SimulationParams,
) -> Result<SiteQuenchMap, EngineError> {
    let report = validate_node_condition(lattice, waves);
    if !report.is_clean() {
        return Err(EngineError::NodeCondition(Box::new(report)));
    }
    quench_map_for_factor(effective_rabi(site, lattice, 1.0), pulses, params)
}

/// Quench map for a bare site factor (`exp(-eta^2/2) sin(phi_s)`), assembled
/// by evolving the `|b>` and `|q>` basis states; `|a>` is uncoupled exactly.
pub fn quench_map_for_factor(
    factor: f64,
    pulses: &GaussianPair,
    params: &SimulationParams,
) -> Result<SiteQuenchMap, EngineError> {
    if factor == 0.0 {
        return Ok(SiteQuenchMap::identity());
    }
    let spec = SiteHamiltonianSpec::new(params.detuning, params.gamma, factor, pulses.clone())?;
    let (lo, hi) = pulses.window();

    let mut matrix = [[C64::ZERO; 3]; 3];
    matrix[0][0] = C64::ONE;
    let mut leakage: f64 = 0.0;
    for level in [Level::B, Level::Q] {
        let col = level as usize;
        let out = evolve(&AtomState::basis(level), &spec, lo, hi, &params.integrator)?;
        let mut kept = 0.0;
        for row in 0..3 {
            let amp = out.amplitudes()[row];
            matrix[row][col] = amp;
            kept += amp.norm_sqr();
        }
        leakage = leakage.max((1.0 - kept).clamp(0.0, 1.0));
    }
    Ok(SiteQuenchMap { matrix, leakage })
}
