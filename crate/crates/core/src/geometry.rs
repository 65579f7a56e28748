//! Standing-wave geometry: spatial periods, node placement on the lattice,
//! per-site coupling factors, and alignment precision budgets.
//!
//! Lengths are in units of the lattice constant `d_l` unless a `d_l` argument
//! is taken explicitly.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Relative tolerance for the structural node/period checks.
const NODE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("wavelength must be positive, got {0}")]
    NonPositiveWavelength(f64),
    #[error("tilt angle must lie in [0, pi/2), got {0}")]
    TiltOutOfRange(f64),
    #[error("no real tilt angle: wavelength {wavelength} exceeds 2(L+1)d_l = {limit}")]
    IncommensurateWavelength { wavelength: f64, limit: f64 },
    #[error("site count must be >= 1, got {0}")]
    EmptyLattice(usize),
    #[error("target site {target} outside lattice of {site_count} sites")]
    TargetOutOfRange { target: usize, site_count: usize },
    #[error("reach L must be >= 1, got {0}")]
    ReachTooSmall(u32),
    #[error("Lamb-Dicke parameter must be >= 0, got {0}")]
    NegativeLambDicke(f64),
}

/// One standing-wave driving field: two arms of wavelength `wavelength`
/// tilted by `+-tilt_angle` against the trap axis.
///
/// `relative_phase = 0` registers a node of the interference pattern to the
/// target site; a nonzero value shifts the node grid along the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingWaveConfig {
    pub wavelength: f64,
    pub tilt_angle: f64,
    pub relative_phase: f64,
    pub peak_rabi: f64,
}

impl StandingWaveConfig {
    pub fn new(
        wavelength: f64,
        tilt_angle: f64,
        relative_phase: f64,
        peak_rabi: f64,
    ) -> Result<Self, GeometryError> {
        if !(wavelength > 0.0) {
            return Err(GeometryError::NonPositiveWavelength(wavelength));
        }
        if !(0.0..PI / 2.0).contains(&tilt_angle) {
            return Err(GeometryError::TiltOutOfRange(tilt_angle));
        }
        Ok(Self { wavelength, tilt_angle, relative_phase, peak_rabi })
    }

    /// Build the wave whose period along the axis is commensurate with the
    /// lattice for reach `L`, with nodes registered to the target site.
    pub fn commensurate(wavelength: f64, reach: u32, peak_rabi: f64) -> Result<Self, GeometryError> {
        let theta = commensurate_angle(wavelength, 1.0, reach)?;
        Self::new(wavelength, theta, 0.0, peak_rabi)
    }
}

/// Spatial period of the standing wave along the trap axis,
/// `lambda / cos(theta)`.
pub fn spatial_period(wave: &StandingWaveConfig) -> f64 {
    wave.wavelength / wave.tilt_angle.cos()
}

/// Tilt angle solving `lambda / cos(theta) = 2 (L+1) d_l`, so that the node
/// spacing equals `(L+1) d_l`.
pub fn commensurate_angle(wavelength: f64, d_l: f64, reach: u32) -> Result<f64, GeometryError> {
    if reach < 1 {
        return Err(GeometryError::ReachTooSmall(reach));
    }
    if !(wavelength > 0.0) {
        return Err(GeometryError::NonPositiveWavelength(wavelength));
    }
    let limit = 2.0 * (reach as f64 + 1.0) * d_l;
    if wavelength > limit {
        return Err(GeometryError::IncommensurateWavelength { wavelength, limit });
    }
    Ok((wavelength / limit).acos())
}

/// Lattice, target site and addressing reach for one quench configuration.
///
/// The protected sublattice is `S = { s : s = k + (L+1) n }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub site_count: usize,
    pub target_site: usize,
    pub reach: u32,
    pub lamb_dicke: f64,
}

impl LatticeConfig {
    pub fn new(
        site_count: usize,
        target_site: usize,
        reach: u32,
        lamb_dicke: f64,
    ) -> Result<Self, GeometryError> {
        if site_count < 1 {
            return Err(GeometryError::EmptyLattice(site_count));
        }
        if target_site >= site_count {
            return Err(GeometryError::TargetOutOfRange { target: target_site, site_count });
        }
        if reach < 1 {
            return Err(GeometryError::ReachTooSmall(reach));
        }
        if !(lamb_dicke >= 0.0) {
            return Err(GeometryError::NegativeLambDicke(lamb_dicke));
        }
        Ok(Self { site_count, target_site, reach, lamb_dicke })
    }

    /// Node spacing `(L+1) d_l` in units of `d_l`.
    pub fn period(&self) -> i64 {
        self.reach as i64 + 1
    }

    /// `(s - k) mod (L+1)`, the residue class deciding node membership.
    pub fn residue(&self, s: i64) -> i64 {
        (s - self.target_site as i64).rem_euclid(self.period())
    }

    /// True iff `s` lies on the protected sublattice.
    pub fn is_node_site(&self, s: i64) -> bool {
        self.residue(s) == 0
    }

    /// Protected sublattice restricted to `[0, N)`, in increasing order.
    pub fn sublattice(&self) -> Vec<usize> {
        (0..self.site_count).filter(|&s| self.is_node_site(s as i64)).collect()
    }
}

/// Site phase `phi_s = pi (s - k) / (L+1)`.
pub fn site_phase(s: i64, lattice: &LatticeConfig) -> f64 {
    PI * (s - lattice.target_site as i64) as f64 / lattice.period() as f64
}

/// Effective (signed) Rabi peak at site `s`:
/// `exp(-eta^2/2) * sin(phi_s) * omega_peak`.
///
/// Sites on the protected sublattice return exactly 0: the residue is tested
/// as an integer rather than trusting `sin(n*pi)` to vanish in floating point.
pub fn effective_rabi(s: i64, lattice: &LatticeConfig, omega_peak: f64) -> f64 {
    if lattice.is_node_site(s) {
        return 0.0;
    }
    let motional = (-lattice.lamb_dicke * lattice.lamb_dicke / 2.0).exp();
    motional * site_phase(s, lattice).sin() * omega_peak
}

/// One site where the standing-wave pattern breaks the node condition.
///
/// `spurious = false`: a protected site sits off a node by `displacement`.
/// `spurious = true`: an unprotected site sits on a node (zero coupling where
/// a finite one is required).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeViolation {
    pub site: usize,
    pub wave: usize,
    pub displacement: f64,
    pub spurious: bool,
}

/// Outcome of checking both standing waves against the lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeConditionReport {
    /// Required axial period `2 (L+1)`.
    pub expected_period: f64,
    pub wave_periods: [f64; 2],
    /// Each wave's period matches `expected_period` within 1e-9 relative.
    pub period_matched: [bool; 2],
    /// The two waves share a period within 1e-9 relative.
    pub waves_consistent: bool,
    /// Displacement of each wave's node grid from the target site.
    pub node_displacements: [f64; 2],
    pub violations: Vec<NodeViolation>,
}

impl NodeConditionReport {
    pub fn is_clean(&self) -> bool {
        self.period_matched[0]
            && self.period_matched[1]
            && self.waves_consistent
            && self.violations.is_empty()
    }
}

/// Check that both waves place nodes exactly on the protected sublattice and
/// anti-align nowhere else (the structural condition behind the quench).
pub fn validate_node_condition(
    lattice: &LatticeConfig,
    waves: &[StandingWaveConfig; 2],
) -> NodeConditionReport {
    let expected = 2.0 * lattice.period() as f64;
    let periods = [spatial_period(&waves[0]), spatial_period(&waves[1])];
    let matched = [
        (periods[0] - expected).abs() <= NODE_TOL * expected,
        (periods[1] - expected).abs() <= NODE_TOL * expected,
    ];
    let consistent = (periods[0] - periods[1]).abs() <= NODE_TOL * expected;

    let mut displacements = [0.0; 2];
    let mut violations = Vec::new();
    for (w, wave) in waves.iter().enumerate() {
        let period = periods[w];
        // Node grid: x_n = n * period/2 - shift, with x measured from site k.
        let shift = period * wave.relative_phase / (2.0 * PI);
        let nearest_node_distance = |x: f64| -> f64 {
            let r = (x + shift) / (period / 2.0);
            (r - r.round()).abs() * (period / 2.0)
        };
        displacements[w] = nearest_node_distance(0.0);
        for s in 0..lattice.site_count {
            let d = nearest_node_distance(s as f64 - lattice.target_site as f64);
            let on_node = d <= NODE_TOL;
            if lattice.is_node_site(s as i64) && !on_node {
                violations.push(NodeViolation { site: s, wave: w, displacement: d, spurious: false });
            } else if !lattice.is_node_site(s as i64) && on_node {
                violations.push(NodeViolation { site: s, wave: w, displacement: d, spurious: true });
            }
        }
    }

    NodeConditionReport {
        expected_period: expected,
        wave_periods: periods,
        period_matched: matched,
        waves_consistent: consistent,
        node_displacements: displacements,
        violations,
    }
}

/// Node-placement tolerance `Delta d / d_l <= (1/20) sinc(pi/(L+1))` keeping
/// the residual coupling at protected sites below `gamma_q` when the nearest
/// unprotected site runs at a peak of `20 gamma_q`.
pub fn required_node_precision(reach: u32) -> f64 {
    let x = PI / (reach as f64 + 1.0);
    0.05 * x.sin() / x
}

/// Worst-case node displacement `N tan(theta) dtheta + (L+1) dphi / pi`
/// accumulated over `N` sites from a tilt error and a phase error.
pub fn worst_case_displacement(
    n_sites: usize,
    tilt_angle: f64,
    angle_error: f64,
    phase_error: f64,
    reach: u32,
) -> f64 {
    n_sites as f64 * tilt_angle.tan() * angle_error
        + (reach as f64 + 1.0) * phase_error / PI
}

/// Alignment budget for one configuration: inputs and the derived
/// displacement/feasibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionBudget {
    pub angle_error: f64,
    pub phase_error: f64,
    pub node_displacement: f64,
    pub feasible: bool,
}

pub fn precision_budget(
    n_sites: usize,
    tilt_angle: f64,
    reach: u32,
    angle_error: f64,
    phase_error: f64,
) -> PrecisionBudget {
    let displacement = worst_case_displacement(n_sites, tilt_angle, angle_error, phase_error, reach);
    PrecisionBudget {
        angle_error,
        phase_error,
        node_displacement: displacement,
        feasible: displacement <= required_node_precision(reach),
    }
}

/// Large-`L` budget `(L+1)(N dtheta + dphi/pi) <= 1/20`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticBudget {
    pub lhs: f64,
    pub margin: f64,
    pub feasible: bool,
}

/// Asymptotic form of the budget, valid when `lambda/2 ~ d_l` so that
/// `tan(theta) ~ 2(L+1)/pi`; the caller is responsible for that regime.
pub fn asymptotic_budget(reach: u32, n_sites: usize, angle_error: f64, phase_error: f64) -> AsymptoticBudget {
    let lhs = (reach as f64 + 1.0) * (n_sites as f64 * angle_error + phase_error / PI);
    AsymptoticBudget { lhs, margin: 0.05 - lhs, feasible: lhs <= 0.05 }
}

/// Residual coupling at a protected site displaced by `displacement` from its
/// node, scaled so that `omega_ref` is the peak at the nearest unprotected
/// site: `omega_ref * |sin(pi d / (L+1))| / sin(pi/(L+1))`.
pub fn residual_rabi_at_node(displacement: f64, reach: u32, omega_ref: f64) -> f64 {
    let period = reach as f64 + 1.0;
    omega_ref * (PI * displacement / period).sin().abs() / (PI / period).sin()
}
