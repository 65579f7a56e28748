//! Drive schedules: the delayed Gaussian STIRAP pair, the focused
//! manipulation beam for single-site rotations, and the Raman shortcut
//! figures for small reach.

use crate::geometry::LatticeConfig;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Pulses are truncated to exactly zero beyond this many widths from center.
pub const TRUNCATION_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("pulse width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("peak amplitude must be >= 0, got {0}")]
    NegativePeak(f64),
    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("Raman couplings must be nonzero for a pi-pulse duration")]
    ZeroCoupling,
}

/// Delayed Gaussian pulse pair
/// `Omega_i(t) = (-1)^i Omega_0 exp[-(t - t_i)^2 / width^2]`,
/// truncated to zero beyond `4 * width` from each center.
///
/// `Omega_1` couples `|b> <-> |e_q>` and peaks at `t1`; `Omega_2` couples
/// `|q> <-> |e_q>` and peaks at `t2`. Counterintuitive ordering means
/// `t2 < t1`, which the defaults (`t1 = 6`, `t2 = 0`, `width = 5`, times in
/// `1/gamma_q`) satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPair {
    pub peak: f64,
    pub t1: f64,
    pub t2: f64,
    pub width: f64,
}

impl GaussianPair {
    pub fn new(peak: f64, t1: f64, t2: f64, width: f64) -> Result<Self, PulseError> {
        if !(width > 0.0) {
            return Err(PulseError::NonPositiveWidth(width));
        }
        if !(peak >= 0.0) {
            return Err(PulseError::NegativePeak(peak));
        }
        Ok(Self { peak, t1, t2, width })
    }

    /// Default timings `t1 = 6`, `t2 = 0`, `width = 5` at the given peak.
    pub fn standard(peak: f64) -> Self {
        Self { peak, t1: 6.0, t2: 0.0, width: 5.0 }
    }

    /// Same timings with a different peak amplitude.
    pub fn with_peak(&self, peak: f64) -> Result<Self, PulseError> {
        Self::new(peak, self.t1, self.t2, self.width)
    }

    /// Swapped pulse order; running this pair drives the inverse transfer.
    pub fn time_reversed(&self) -> Self {
        Self { peak: self.peak, t1: self.t2, t2: self.t1, width: self.width }
    }

    /// `(Omega_1(t), Omega_2(t))`: signed amplitudes, `Omega_1 <= 0 <= Omega_2`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        (-self.lobe(t, self.t1), self.lobe(t, self.t2))
    }

    fn lobe(&self, t: f64, center: f64) -> f64 {
        let u = (t - center) / self.width;
        if u.abs() > TRUNCATION_WIDTHS {
            0.0
        } else {
            self.peak * (-u * u).exp()
        }
    }

    /// Support of the truncated pair: `[min(t1,t2) - 4w, max(t1,t2) + 4w]`.
    pub fn window(&self) -> (f64, f64) {
        let lo = self.t1.min(self.t2) - TRUNCATION_WIDTHS * self.width;
        let hi = self.t1.max(self.t2) + TRUNCATION_WIDTHS * self.width;
        (lo, hi)
    }
}

impl Default for GaussianPair {
    fn default() -> Self {
        Self::standard(20.0)
    }
}

pub fn sample_pair(pulses: &GaussianPair, t: f64) -> (f64, f64) {
    pulses.sample(t)
}

/// Focused off-resonant beam driving `|b> <-> |e_m>` for the AC-Stark `R_z`.
///
/// The Gaussian envelope is a free choice within the support bound (the beam
/// must cover site `k` and die out beyond `k +- L`); the hard cutoff at
/// `|s - k| > L` is structural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationBeam {
    pub rabi: f64,
    pub detuning: f64,
    pub decay: f64,
    pub duration: f64,
    pub center: usize,
    pub waist: f64,
    pub cutoff: u32,
}

impl ManipulationBeam {
    /// Beam centered on `k` with the default waist `L/2` (units of `d_l`).
    pub fn focused(center: usize, reach: u32) -> Self {
        Self {
            rabi: 10.0,
            detuning: 100.0,
            decay: 1.0,
            duration: 1.0,
            center,
            waist: reach as f64 / 2.0,
            cutoff: reach,
        }
    }

    /// Records (does not enforce) the dispersive hierarchy
    /// `|detuning| >> |rabi| >> decay`, read as factors of 10.
    pub fn hierarchy_satisfied(&self) -> bool {
        self.detuning.abs() >= 10.0 * self.rabi.abs() && self.rabi.abs() >= 10.0 * self.decay
    }

    /// Field envelope `exp[-(s-k)^2 / w^2]` for `|s - k| <= L`, exactly 0
    /// beyond the cutoff.
    pub fn envelope(&self, s: i64) -> f64 {
        let d = s - self.center as i64;
        if d.unsigned_abs() > self.cutoff as u64 {
            return 0.0;
        }
        let u = d as f64 / self.waist;
        (-u * u).exp()
    }
}

pub fn beam_envelope(beam: &ManipulationBeam, s: i64) -> f64 {
    beam.envelope(s)
}

/// AC-Stark rotation angle `|rabi|^2 * duration / detuning`.
pub fn stark_rotation_angle(beam: &ManipulationBeam) -> Result<f64, PulseError> {
    if beam.detuning == 0.0 {
        return Err(PulseError::ZeroDetuning);
    }
    Ok(beam.rabi * beam.rabi * beam.duration / beam.detuning)
}

/// Two-photon Rabi frequency `o1 * o2 / detuning` of the far-detuned Raman
/// transition `|b> <-> |q>`.
pub fn raman_effective_rabi(o1: f64, o2: f64, detuning: f64) -> Result<f64, PulseError> {
    if detuning == 0.0 {
        return Err(PulseError::ZeroDetuning);
    }
    Ok(o1 * o2 / detuning)
}

/// Square-pulse duration of a Raman pi-pulse at the common off-node coupling.
pub fn raman_pi_duration(o1: f64, o2: f64, detuning: f64) -> Result<f64, PulseError> {
    if o1 == 0.0 || o2 == 0.0 {
        return Err(PulseError::ZeroCoupling);
    }
    Ok((PI * detuning / (o1 * o2)).abs())
}

/// True iff `sin^2(phi_s)` takes a single value over all unprotected sites,
/// i.e. the Raman rate is site-independent. Holds exactly for `L <= 2`.
pub fn raman_uniformity_check(lattice: &LatticeConfig) -> bool {
    let period = lattice.reach as f64 + 1.0;
    let mut first = None;
    for m in 1..=lattice.reach as i64 {
        let s = (PI * m as f64 / period).sin().powi(2);
        match first {
            None => first = Some(s),
            Some(f) => {
                if (s - f).abs() > 1e-12 {
                    return false;
                }
            }
        }
    }
    true
}
