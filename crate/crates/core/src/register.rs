//! Dense register of N lattice sites, three levels `{|a>, |b>, |q>}` per
//! site, with the protocol operations built from quench / inverse-quench
//! sandwiches: single-site rotations, fluorescence measurement, the
//! collective CPHASE, controlled rotations, patterned loading and optical
//! pumping.
//!
//! Site 0 is the most significant ternary digit of a basis index. Operations
//! that return an error may leave the register partially transformed.

use crate::geometry::{effective_rabi, GeometryError, LatticeConfig};
use crate::pulse::{GaussianPair, ManipulationBeam};
use crate::quantum::fidelity as vec_fidelity;
use crate::quantum::StateError;
use crate::stirap::{
    quench_map_for_factor, EngineError, SimulationParams, SiteQuenchMap,
    REF_TRANSFER_PHASE_AT_20,
};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Dense simulation cap: 3^12 = 531441 amplitudes.
pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundLevel {
    A = 0,
    B = 1,
    Q = 2,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegisterError {
    #[error("site count {0} outside supported range [1, {MAX_SITES}]")]
    SiteCountOutOfRange(usize),
    #[error("pattern length {got} does not match site count {expected}")]
    PatternLength { expected: usize, got: usize },
    #[error("site state must be normalized, got norm^2 = {0}")]
    SiteNotNormalized(f64),
    #[error("site {site} needs a right neighbor, register has {site_count} sites")]
    NeighborOutOfRange { site: usize, site_count: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Normalized state of one site over `(|a>, |b>, |q>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteState(pub [C64; 3]);

impl SiteState {
    pub fn new(amps: [C64; 3]) -> Result<Self, RegisterError> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > 1e-9 {
            return Err(RegisterError::SiteNotNormalized(n));
        }
        Ok(Self(amps))
    }

    pub fn a() -> Self {
        Self([C64::ONE, C64::ZERO, C64::ZERO])
    }

    pub fn b() -> Self {
        Self([C64::ZERO, C64::ONE, C64::ZERO])
    }

    pub fn q() -> Self {
        Self([C64::ZERO, C64::ZERO, C64::ONE])
    }

    /// `(|a> + |b>)/sqrt(2)`.
    pub fn plus() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self([h, h, C64::ZERO])
    }

    pub fn qubit(ca: C64, cb: C64) -> Result<Self, RegisterError> {
        Self::new([ca, cb, C64::ZERO])
    }
}

/// Pulse and integration parameters for simulated-mode quenches.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSetup {
    pub pulses: GaussianPair,
    pub params: SimulationParams,
    pub lamb_dicke: f64,
}

impl QuenchSetup {
    /// Pulse amplitude chosen so the weakest unprotected class
    /// (`sin(pi/(L+1))`) runs at the reference peak of 20.
    pub fn at_threshold(reach: u32) -> Self {
        let weakest = (std::f64::consts::PI / (reach as f64 + 1.0)).sin();
        Self {
            pulses: GaussianPair::standard(20.0 / weakest),
            params: SimulationParams::default(),
            lamb_dicke: 0.0,
        }
    }
}

/// How quench sandwiches are realized: closed-form per-site maps, or maps
/// integrated from the pulse dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum OperationMode {
    Ideal,
    Simulated(QuenchSetup),
}

impl OperationMode {
    fn lamb_dicke(&self) -> f64 {
        match self {
            OperationMode::Ideal => 0.0,
            OperationMode::Simulated(setup) => setup.lamb_dicke,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasurementOutcome {
    Bright,
    Dark,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub outcome: MeasurementOutcome,
    /// Bright probability before the projection.
    pub probability_bright: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpMode {
    /// Zero all `|q>` amplitudes; their weight moves into `norm_deficit`.
    Deterministic,
    /// Per-site seeded collapse; collapsed `|q>` population is rerouted
    /// incoherently to the pump target.
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpTarget {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpReport {
    /// Squared weight removed from `|q>` (deterministic: into the deficit;
    /// trajectory: rerouted to the target level).
    pub leakage_removed: f64,
    pub pumped_sites: Vec<usize>,
}

/// Entry of a serialized register snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotAmplitude {
    /// One character per site: `a`, `b` or `q`.
    pub basis: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegisterSnapshot {
    pub site_count: usize,
    pub occupancy: Vec<bool>,
    pub norm_deficit: f64,
    /// Amplitudes with magnitude above 1e-9, in basis-index order.
    pub amplitudes: Vec<SnapshotAmplitude>,
}

/// Counter-based stream split: derive an independent seed for trial or site
/// `index` from one master seed (splitmix64 finalizer).
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeRegister {
    site_count: usize,
    amps: Vec<C64>,
    occupancy: Vec<bool>,
    norm_deficit: f64,
    quench_count: usize,
}

pub fn new_register(site_count: usize, pattern: &[SiteState]) -> Result<LatticeRegister, RegisterError> {
    LatticeRegister::new(site_count, pattern)
}

/// Occupancy flags after patterned loading: quench with all atoms in `|b>`,
/// then release the `|q>` potential. Exactly the protected sublattice stays.
pub fn pattern_load(site_count: usize, k: usize, reach: u32) -> Result<Vec<bool>, RegisterError> {
    let lattice = LatticeConfig::new(site_count, k, reach, 0.0)?;
    let mut flags = vec![false; site_count];
    for s in lattice.sublattice() {
        flags[s] = true;
    }
    Ok(flags)
}

impl LatticeRegister {
    pub fn new(site_count: usize, pattern: &[SiteState]) -> Result<Self, RegisterError> {
        let full: Vec<Option<SiteState>> = pattern.iter().cloned().map(Some).collect();
        Self::with_vacancies(site_count, &full)
    }

    /// Build a register where `None` marks an unoccupied site. Empty sites
    /// are pinned to the `a` digit with no weight of their own.
    pub fn with_vacancies(
        site_count: usize,
        pattern: &[Option<SiteState>],
    ) -> Result<Self, RegisterError> {
        if !(1..=MAX_SITES).contains(&site_count) {
            return Err(RegisterError::SiteCountOutOfRange(site_count));
        }
        if pattern.len() != site_count {
            return Err(RegisterError::PatternLength { expected: site_count, got: pattern.len() });
        }
        let mut amps = vec![C64::ONE];
        for site in pattern {
            let factors = match site {
                Some(state) => state.0,
                None => SiteState::a().0,
            };
            let mut next = Vec::with_capacity(amps.len() * 3);
            for a in &amps {
                for f in &factors {
                    next.push(a * f);
                }
            }
            amps = next;
        }
        let occupancy = pattern.iter().map(|p| p.is_some()).collect();
        let mut reg =
            Self { site_count, amps, occupancy, norm_deficit: 0.0, quench_count: 0 };
        reg.refresh_deficit();
        Ok(reg)
    }

    /// Register produced by patterned loading: sublattice sites occupied in
    /// `|b>`, everything else empty.
    pub fn loaded(site_count: usize, k: usize, reach: u32) -> Result<Self, RegisterError> {
        let flags = pattern_load(site_count, k, reach)?;
        let pattern: Vec<Option<SiteState>> =
            flags.iter().map(|&occ| occ.then(SiteState::b)).collect();
        Self::with_vacancies(site_count, &pattern)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Number of forward quenches applied so far (one per Q/Q^-1 pair in the
    /// composite operations).
    pub fn quench_applications(&self) -> usize {
        self.quench_count
    }

    pub fn fidelity_against(&self, other: &LatticeRegister) -> Result<f64, RegisterError> {
        Ok(vec_fidelity(&self.amps, &other.amps)?)
    }

    fn stride(&self, s: usize) -> usize {
        3usize.pow((self.site_count - 1 - s) as u32)
    }

    fn digit(&self, index: usize, s: usize) -> usize {
        (index / self.stride(s)) % 3
    }

    pub fn level_population(&self, s: usize, level: GroundLevel) -> f64 {
        let want = level as usize;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.digit(*i, s) == want)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Reduced density matrix of one site (unnormalized: trace equals the
    /// register's squared norm).
    pub fn reduced_density(&self, s: usize) -> [[C64; 3]; 3] {
        let stride = self.stride(s);
        let block = 3 * stride;
        let mut rho = [[C64::ZERO; 3]; 3];
        for base in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let i = base + inner;
                let v = [self.amps[i], self.amps[i + stride], self.amps[i + 2 * stride]];
                for (r, vr) in v.iter().enumerate() {
                    for (c, vc) in v.iter().enumerate() {
                        rho[r][c] += vr * vc.conj();
                    }
                }
            }
        }
        rho
    }

    /// Purity `Tr(rho^2)` of the reduced state left of `cut` (sites
    /// `0..cut`), normalized; 1 for a product state across that cut.
    pub fn bipartition_purity(&self, cut: usize) -> f64 {
        assert!(cut >= 1 && cut < self.site_count, "cut must split the register");
        let left = 3usize.pow(cut as u32);
        let right = self.amps.len() / left;
        let n2 = self.norm_sq();
        let mut purity = 0.0;
        for i in 0..left {
            for j in 0..left {
                let mut g = C64::ZERO;
                for r in 0..right {
                    g += self.amps[i * right + r] * self.amps[j * right + r].conj();
                }
                purity += g.norm_sqr();
            }
        }
        purity / (n2 * n2)
    }

    fn refresh_deficit(&mut self) {
        self.norm_deficit = (1.0 - self.norm_sq()).max(0.0);
    }

    fn apply_site_map(&mut self, s: usize, m: &[[C64; 3]; 3]) {
        let stride = self.stride(s);
        let block = 3 * stride;
        for base in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let i0 = base + inner;
                let i1 = i0 + stride;
                let i2 = i1 + stride;
                let (a0, a1, a2) = (self.amps[i0], self.amps[i1], self.amps[i2]);
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1 + m[0][2] * a2;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1 + m[1][2] * a2;
                self.amps[i2] = m[2][0] * a0 + m[2][1] * a1 + m[2][2] * a2;
            }
        }
    }

    /// Multiply amplitudes whose digit at `s` equals `level` by `phase`;
    /// other amplitudes are not touched at all.
    fn apply_site_phase(&mut self, s: usize, level: GroundLevel, phase: C64) {
        let want = level as usize;
        for i in 0..self.amps.len() {
            if self.digit(i, s) == want {
                self.amps[i] *= phase;
            }
        }
    }

    fn scale_all(&mut self, factor: C64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Zero every amplitude whose digit at `s` is not kept; returns the
    /// squared weight that survives.
    fn project_site(&mut self, s: usize, keep: [bool; 3]) -> f64 {
        let mut kept = 0.0;
        for i in 0..self.amps.len() {
            if keep[self.digit(i, s)] {
                kept += self.amps[i].norm_sqr();
            } else {
                self.amps[i] = C64::ZERO;
            }
        }
        kept
    }

    fn rescale_to(&mut self, target_norm_sq: f64) {
        let current = self.norm_sq();
        if current > 0.0 && target_norm_sq >= 0.0 {
            let f = (target_norm_sq / current).sqrt();
            for a in &mut self.amps {
                *a *= f;
            }
        }
    }

    /// Move all `|q>` amplitude at `s` onto `target`; assumes the target
    /// digit carries no amplitude (true right after a projection onto q).
    fn relabel_q(&mut self, s: usize, target: PumpTarget) {
        let stride = self.stride(s);
        let shift = match target {
            PumpTarget::A => 2 * stride,
            PumpTarget::B => stride,
        };
        for i in 0..self.amps.len() {
            if self.digit(i, s) == GroundLevel::Q as usize && self.amps[i] != C64::ZERO {
                self.amps[i - shift] = self.amps[i];
                self.amps[i] = C64::ZERO;
            }
        }
    }

    fn lattice_for(&self, k: usize, reach: u32, mode: &OperationMode) -> Result<LatticeConfig, RegisterError> {
        Ok(LatticeConfig::new(self.site_count, k, reach, mode.lamb_dicke())?)
    }

    fn ideal_quench_matrix() -> [[C64; 3]; 3] {
        let chi = C64::from_polar(1.0, REF_TRANSFER_PHASE_AT_20);
        let mut m = [[C64::ZERO; 3]; 3];
        m[0][0] = C64::ONE;
        m[2][1] = chi;
        m[1][2] = chi.conj();
        m
    }

    fn quench_impl(
        &mut self,
        k: usize,
        reach: u32,
        mode: &OperationMode,
        inverse: bool,
    ) -> Result<(), RegisterError> {
        let lattice = self.lattice_for(k, reach, mode)?;
        let period = lattice.period() as usize;
        match mode {
            OperationMode::Ideal => {
                let m = Self::ideal_quench_matrix();
                for s in 0..self.site_count {
                    if self.occupancy[s] && !lattice.is_node_site(s as i64) {
                        self.apply_site_map(s, &m);
                    }
                }
            }
            OperationMode::Simulated(setup) => {
                let pulses =
                    if inverse { setup.pulses.time_reversed() } else { setup.pulses.clone() };
                // The restricted map depends on the site factor only through
                // its magnitude, and |sin| is shared by residues m and
                // period - m, so each class pair integrates once.
                let mut cache: Vec<Option<SiteQuenchMap>> = vec![None; period];
                for s in 0..self.site_count {
                    if !self.occupancy[s] {
                        continue;
                    }
                    let residue = lattice.residue(s as i64) as usize;
                    if residue == 0 {
                        continue;
                    }
                    let key = residue.min(period - residue);
                    if cache[key].is_none() {
                        let canonical = (k as i64) + key as i64;
                        let factor = effective_rabi(canonical, &lattice, 1.0);
                        cache[key] =
                            Some(quench_map_for_factor(factor, &pulses, &setup.params)?);
                    }
                    let map = cache[key].as_ref().unwrap().matrix;
                    self.apply_site_map(s, &map);
                }
            }
        }
        if !inverse {
            self.quench_count += 1;
        }
        self.refresh_deficit();
        Ok(())
    }

    /// Quench around `k`: transfer `|b> -> |q>` at every occupied site off
    /// the protected sublattice. Protected sites are not touched at all.
    pub fn apply_quench(&mut self, k: usize, reach: u32, mode: &OperationMode) -> Result<(), RegisterError> {
        self.quench_impl(k, reach, mode, false)
    }

    pub fn apply_inverse_quench(
        &mut self,
        k: usize,
        reach: u32,
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        self.quench_impl(k, reach, mode, true)
    }

    /// `R_z(alpha) = exp(-i alpha sigma_z / 2)` on site `k`, with
    /// `sigma_z = |a><a| - |b><b|`, realized as quench, focused AC-Stark
    /// pulse, inverse quench, and a global phase. Off-target phases scale
    /// with the squared beam envelope (intensity) and land on quenched-away
    /// `|b>` amplitudes.
    pub fn rotate_z(
        &mut self,
        k: usize,
        reach: u32,
        alpha: f64,
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        self.quench_impl(k, reach, mode, false)?;
        let beam = ManipulationBeam::focused(k, reach);
        for s in 0..self.site_count {
            if !self.occupancy[s] {
                continue;
            }
            let env = beam.envelope(s as i64);
            if env > 0.0 {
                let theta = alpha * env * env;
                self.apply_site_phase(s, GroundLevel::B, C64::from_polar(1.0, theta));
            }
        }
        self.quench_impl(k, reach, mode, true)?;
        self.scale_all(C64::from_polar(1.0, -alpha / 2.0));
        self.refresh_deficit();
        Ok(())
    }

    /// `(sigma_x + sigma_z)/sqrt(2)` on the qubit subspace of every occupied
    /// site; `|q>` amplitudes untouched.
    pub fn collective_hadamard(&mut self) {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let m = [
            [h, h, C64::ZERO],
            [h, -h, C64::ZERO],
            [C64::ZERO, C64::ZERO, C64::ONE],
        ];
        for s in 0..self.site_count {
            if self.occupancy[s] {
                self.apply_site_map(s, &m);
            }
        }
    }

    /// `R_x(beta)` on site `k` via the Hadamard sandwich around `rotate_z`.
    pub fn rotate_x(
        &mut self,
        k: usize,
        reach: u32,
        beta: f64,
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        self.collective_hadamard();
        self.rotate_z(k, reach, beta, mode)?;
        self.collective_hadamard();
        Ok(())
    }

    /// Z-X-Z Euler stages; an arbitrary single-qubit rotation costs at most
    /// three quench pairs.
    pub fn rotate_euler(
        &mut self,
        k: usize,
        reach: u32,
        angles: (f64, f64, f64),
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        self.rotate_z(k, reach, angles.0, mode)?;
        self.rotate_x(k, reach, angles.1, mode)?;
        self.rotate_z(k, reach, angles.2, mode)?;
        Ok(())
    }

    /// Fluorescence readout of site `k`: quench, project on `|b>_k` (bright)
    /// or its complement (dark), renormalize to the surviving weight,
    /// inverse quench. Deterministic for a fixed seed.
    pub fn measure_site(
        &mut self,
        k: usize,
        reach: u32,
        seed: u64,
        mode: &OperationMode,
    ) -> Result<Measurement, RegisterError> {
        self.quench_impl(k, reach, mode, false)?;
        let norm = self.norm_sq();
        let bright_weight = self.level_population(k, GroundLevel::B);
        let probability_bright =
            if norm > 0.0 { (bright_weight / norm).clamp(0.0, 1.0) } else { 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bright = rng.gen::<f64>() < probability_bright;
        let keep = if bright { [false, true, false] } else { [true, false, true] };
        self.project_site(k, keep);
        let target = 1.0 - self.norm_deficit;
        self.rescale_to(target);
        self.quench_impl(k, reach, mode, true)?;
        self.refresh_deficit();
        Ok(Measurement {
            outcome: if bright { MeasurementOutcome::Bright } else { MeasurementOutcome::Dark },
            probability_bright,
        })
    }

    fn conditional_pi(&mut self, s: usize) {
        let b = GroundLevel::B as usize;
        let q = GroundLevel::Q as usize;
        for i in 0..self.amps.len() {
            if self.digit(i, s) == b && self.digit(i, s + 1) == q {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Collective CPHASE around `k`: quench, a conditional-pi collision
    /// between every atom in `|b>` and its right neighbor in `|q>`, inverse
    /// quench. Equals `prod_{s in S} (|a><a| (x) I + |b><b| (x) sigma_z)` on
    /// the protected pairs.
    pub fn collective_cphase(
        &mut self,
        k: usize,
        reach: u32,
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        let lattice = self.lattice_for(k, reach, mode)?;
        for s in lattice.sublattice() {
            if self.occupancy[s] && s + 1 >= self.site_count {
                return Err(RegisterError::NeighborOutOfRange {
                    site: s,
                    site_count: self.site_count,
                });
            }
        }
        self.quench_impl(k, reach, mode, false)?;
        for s in 0..self.site_count - 1 {
            self.conditional_pi(s);
        }
        self.quench_impl(k, reach, mode, true)?;
        Ok(())
    }

    /// `C_L^(k)`, `R_x^(k+1)(-alpha/2)`, `C_L^(k)`: a controlled `R_x(alpha)`
    /// on the pair `(k, k+1)` up to the local `R_x^(k+1)(-alpha/2)`.
    pub fn controlled_rotation(
        &mut self,
        k: usize,
        reach: u32,
        alpha: f64,
        mode: &OperationMode,
    ) -> Result<(), RegisterError> {
        if k + 1 >= self.site_count {
            return Err(RegisterError::NeighborOutOfRange {
                site: k,
                site_count: self.site_count,
            });
        }
        self.collective_cphase(k, reach, mode)?;
        self.rotate_x(k + 1, reach, -alpha / 2.0, mode)?;
        self.collective_cphase(k, reach, mode)?;
        Ok(())
    }

    pub fn optical_pump(&mut self, seed: u64, mode: PumpMode) -> PumpReport {
        self.optical_pump_to(seed, mode, PumpTarget::A)
    }

    /// Globally pump residual `|q>` population back into the qubit subspace.
    pub fn optical_pump_to(&mut self, seed: u64, mode: PumpMode, target: PumpTarget) -> PumpReport {
        match mode {
            PumpMode::Deterministic => {
                let before = self.norm_sq();
                for i in 0..self.amps.len() {
                    let lost = (0..self.site_count)
                        .any(|s| self.occupancy[s] && self.digit(i, s) == GroundLevel::Q as usize);
                    if lost {
                        self.amps[i] = C64::ZERO;
                    }
                }
                let removed = (before - self.norm_sq()).max(0.0);
                self.refresh_deficit();
                PumpReport { leakage_removed: removed, pumped_sites: Vec::new() }
            }
            PumpMode::Trajectory => {
                let mut pumped_sites = Vec::new();
                let mut removed = 0.0;
                for s in 0..self.site_count {
                    if !self.occupancy[s] {
                        continue;
                    }
                    let norm = self.norm_sq();
                    if norm <= 0.0 {
                        break;
                    }
                    let q_weight = self.level_population(s, GroundLevel::Q);
                    let p = (q_weight / norm).clamp(0.0, 1.0);
                    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, s as u64));
                    if rng.gen::<f64>() < p {
                        self.project_site(s, [false, false, true]);
                        self.relabel_q(s, target);
                        pumped_sites.push(s);
                        removed += q_weight;
                    } else {
                        self.project_site(s, [true, true, false]);
                    }
                    let t = 1.0 - self.norm_deficit;
                    self.rescale_to(t);
                }
                PumpReport { leakage_removed: removed, pumped_sites }
            }
        }
    }

    pub fn snapshot(&self) -> RegisterSnapshot {
        let labels = [b'a', b'b', b'q'];
        let amplitudes = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-9)
            .map(|(i, a)| {
                let basis: String = (0..self.site_count)
                    .map(|s| labels[self.digit(i, s)] as char)
                    .collect();
                SnapshotAmplitude { basis, re: a.re, im: a.im }
            })
            .collect();
        RegisterSnapshot {
            site_count: self.site_count,
            occupancy: self.occupancy.clone(),
            norm_deficit: self.norm_deficit,
            amplitudes,
        }
    }
}
