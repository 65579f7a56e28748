//! Single-site state vectors over `{|a>, |b>, |q>, |e_q>}` and the
//! time-dependent non-Hermitian Schroedinger integrator.
//!
//! The Hamiltonian (units of `gamma_q`, rotating frame) is
//!
//! ```text
//! H(t) = (detuning - i/2 decay) |e_q><e_q|
//!      + f [ Omega_1(t) |e_q><b| + Omega_2(t) |e_q><q| + h.c. ]
//! ```
//!
//! with `f` the per-site standing-wave factor. Norm loss under evolution is
//! the probability of a spontaneous-emission event.

use crate::pulse::GaussianPair;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DIM: usize = 4;

/// Basis levels in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    A = 0,
    B = 1,
    Q = 2,
    /// Excited state of the quenching transition.
    EQ = 3,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state must be normalized at construction, got norm^2 = {0}")]
    NotNormalized(f64),
    #[error("target must be a normalized pure state, got norm^2 = {0}")]
    TargetNotNormalized(f64),
    #[error("state and target dimensions differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Amplitudes of one site. Normalized when constructed; evolution with
/// `decay > 0` leaves it sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomState {
    amps: [C64; DIM],
}

impl AtomState {
    pub fn basis(level: Level) -> Self {
        let mut amps = [C64::ZERO; DIM];
        amps[level as usize] = C64::ONE;
        Self { amps }
    }

    /// `(|l1> + |l2>)/sqrt(2)`.
    pub fn equal_superposition(l1: Level, l2: Level) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [C64::ZERO; DIM];
        amps[l1 as usize] = C64::new(h, 0.0);
        amps[l2 as usize] = C64::new(h, 0.0);
        Self { amps }
    }

    pub fn from_amplitudes(amps: [C64; DIM]) -> Result<Self, StateError> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-9 {
            return Err(StateError::NotNormalized(n));
        }
        Ok(Self { amps })
    }

    pub(crate) fn raw(amps: [C64; DIM]) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.amps
    }

    pub fn amplitude(&self, level: Level) -> C64 {
        self.amps[level as usize]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn fidelity(&self, target: &AtomState) -> Result<f64, StateError> {
        fidelity(&self.amps, &target.amps)
    }
}

/// `|<target|psi>|^2` for a possibly unnormalized `psi`.
pub fn fidelity(psi: &[C64], target: &[C64]) -> Result<f64, StateError> {
    if psi.len() != target.len() {
        return Err(StateError::LengthMismatch(psi.len(), target.len()));
    }
    let tn: f64 = target.iter().map(|a| a.norm_sqr()).sum();
    if (tn - 1.0).abs() > 1e-9 {
        return Err(StateError::TargetNotNormalized(tn));
    }
    let overlap: C64 = target.iter().zip(psi).map(|(t, p)| t.conj() * p).sum();
    Ok(overlap.norm_sqr())
}

/// Squared norm: probability that no spontaneous-emission event occurred.
pub fn survival_probability(state: &AtomState) -> f64 {
    state.norm_sq()
}

/// Parameters of the single-site Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteHamiltonianSpec {
    pub detuning: f64,
    pub decay: f64,
    /// `exp(-eta^2/2) sin(phi_s)`, signed, `|site_factor| <= 1`.
    pub site_factor: f64,
    pub pulses: GaussianPair,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("decay rate must be >= 0, got {0}")]
    NegativeDecay(f64),
    #[error("|site_factor| must be <= 1, got {0}")]
    SiteFactorOutOfRange(f64),
}

impl SiteHamiltonianSpec {
    pub fn new(
        detuning: f64,
        decay: f64,
        site_factor: f64,
        pulses: GaussianPair,
    ) -> Result<Self, SpecError> {
        if !(decay >= 0.0) {
            return Err(SpecError::NegativeDecay(decay));
        }
        if !(site_factor.abs() <= 1.0) {
            return Err(SpecError::SiteFactorOutOfRange(site_factor));
        }
        Ok(Self { detuning, decay, site_factor, pulses })
    }
}

/// `H(t)` as a dense matrix, row-major over the `Level` order.
pub fn build_hamiltonian(spec: &SiteHamiltonianSpec, t: f64) -> [[C64; DIM]; DIM] {
    let (o1, o2) = spec.pulses.sample(t);
    let fb = C64::new(spec.site_factor * o1, 0.0);
    let fq = C64::new(spec.site_factor * o2, 0.0);
    let mut h = [[C64::ZERO; DIM]; DIM];
    h[Level::EQ as usize][Level::EQ as usize] = C64::new(spec.detuning, -spec.decay / 2.0);
    h[Level::EQ as usize][Level::B as usize] = fb;
    h[Level::B as usize][Level::EQ as usize] = fb;
    h[Level::EQ as usize][Level::Q as usize] = fq;
    h[Level::Q as usize][Level::EQ as usize] = fq;
    h
}

/// `dy/dt = -i H(t) y`.
fn deriv(spec: &SiteHamiltonianSpec, t: f64, y: &[C64; DIM]) -> [C64; DIM] {
    let h = build_hamiltonian(spec, t);
    let mut dy = [C64::ZERO; DIM];
    for (r, row) in h.iter().enumerate() {
        let mut acc = C64::ZERO;
        for (c, hrc) in row.iter().enumerate() {
            acc += hrc * y[c];
        }
        dy[r] = C64::new(acc.im, -acc.re);
    }
    dy
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMethod {
    FixedRk4,
    AdaptiveRk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: IntegrationMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Fixed step for `FixedRk4`; upper step bound for `AdaptiveRk45`.
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: IntegrationMethod::AdaptiveRk45,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed_rk4(step: f64) -> Self {
        Self { method: IntegrationMethod::FixedRk4, max_step: step, ..Self::default() }
    }

    fn valid(&self) -> bool {
        self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("t_end = {t_end} precedes t_start = {t_start}")]
    TimeReversed { t_start: f64, t_end: f64 },
    #[error("integrator config invalid: rel_tol, abs_tol and max_step must be positive")]
    InvalidConfig,
    #[error("adaptive step size underflow at t = {t}; tolerance unreachable")]
    StepUnderflow { t: f64 },
}

/// Integrate `i dy/dt = H(t) y` from `t_start` to `t_end`.
///
/// The `|a>` amplitude is carried through untouched by construction (its
/// derivative is exactly zero), and `site_factor = 0` reproduces the input
/// bit-for-bit.
pub fn evolve(
    state: &AtomState,
    spec: &SiteHamiltonianSpec,
    t_start: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<AtomState, IntegrationError> {
    if t_end < t_start {
        return Err(IntegrationError::TimeReversed { t_start, t_end });
    }
    if !cfg.valid() {
        return Err(IntegrationError::InvalidConfig);
    }
    if t_end == t_start {
        return Ok(state.clone());
    }
    let y = match cfg.method {
        IntegrationMethod::FixedRk4 => rk4(state.amps, spec, t_start, t_end, cfg.max_step),
        IntegrationMethod::AdaptiveRk45 => rk45(state.amps, spec, t_start, t_end, cfg)?,
    };
    Ok(AtomState::raw(y))
}

fn axpy(y: &[C64; DIM], h: f64, k: &[C64; DIM]) -> [C64; DIM] {
    let mut out = *y;
    for i in 0..DIM {
        out[i] += h * k[i];
    }
    out
}

fn rk4(mut y: [C64; DIM], spec: &SiteHamiltonianSpec, t0: f64, t1: f64, step: f64) -> [C64; DIM] {
    let span = t1 - t0;
    let n = (span / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut t = t0;
    for i in 0..n {
        let k1 = deriv(spec, t, &y);
        let k2 = deriv(spec, t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = deriv(spec, t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = deriv(spec, t + h, &axpy(&y, h, &k3));
        for c in 0..DIM {
            y[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        t = t0 + (i + 1) as f64 * h;
    }
    y
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

fn combine(y: &[C64; DIM], h: f64, ks: &[&[C64; DIM]], ws: &[f64]) -> [C64; DIM] {
    let mut out = *y;
    for (k, w) in ks.iter().zip(ws) {
        if *w == 0.0 {
            continue;
        }
        for i in 0..DIM {
            out[i] += (h * w) * k[i];
        }
    }
    out
}

fn rk45(
    y0: [C64; DIM],
    spec: &SiteHamiltonianSpec,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<[C64; DIM], IntegrationError> {
    let span = t1 - t0;
    let min_step = span * 1e-14;
    let mut y = y0;
    let mut t = t0;
    let mut h = (span / 100.0).min(cfg.max_step);
    loop {
        if h < min_step {
            return Err(IntegrationError::StepUnderflow { t });
        }
        let last = h >= t1 - t;
        let hs = if last { t1 - t } else { h };

        let k1 = deriv(spec, t, &y);
        let k2 = deriv(spec, t + C[0] * hs, &combine(&y, hs, &[&k1], &A2));
        let k3 = deriv(spec, t + C[1] * hs, &combine(&y, hs, &[&k1, &k2], &A3));
        let k4 = deriv(spec, t + C[2] * hs, &combine(&y, hs, &[&k1, &k2, &k3], &A4));
        let k5 = deriv(spec, t + C[3] * hs, &combine(&y, hs, &[&k1, &k2, &k3, &k4], &A5));
        let k6 = deriv(spec, t + C[4] * hs, &combine(&y, hs, &[&k1, &k2, &k3, &k4, &k5], &A6));
        let y5 = combine(&y, hs, &[&k1, &k2, &k3, &k4, &k5, &k6], &B5);
        let k7 = deriv(spec, t + hs, &y5);
        let y4 = combine(&y, hs, &[&k1, &k2, &k3, &k4, &k5, &k6, &k7], &B4);

        let mut err_sq = 0.0;
        for i in 0..DIM {
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y5[i].norm());
            let e = (y5[i] - y4[i]).norm() / scale;
            err_sq += e * e;
        }
        let err = (err_sq / DIM as f64).sqrt();

        if err <= 1.0 {
            y = y5;
            if last {
                return Ok(y);
            }
            t += hs;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hs * factor).min(cfg.max_step);
        } else {
            h = hs * (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
}
