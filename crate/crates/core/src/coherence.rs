//! Driven dynamics of one pair of metastable sublevels in the rotating frame,
//! with sublevel leakage to the ground state, pure dephasing and
//! inhomogeneous-ensemble averaging.
//!
//! Density matrices are 3×3 in the zero-field basis {|0⟩, |+⟩, |−⟩}. The
//! triplet trace deficit is the population already lost to the ground state.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, SMatrix, SVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::fitting::{fit, FitModel, FitResult};
use crate::linalg::{expm, hermiticity_defect, min_eigenvalue, Mat3c, C64};
use crate::photodynamics::RateParams;
use crate::spin_model::Transition;
use crate::{Error, Result};

type Super = SMatrix<C64, 10, 10>;
type SVec = SVector<C64, 10>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Carrier frequency (MHz).
    pub frequency: f64,
    /// Ω/2π (MHz).
    pub rabi_rate: f64,
    /// Drive phase (rad); 0 is the x axis.
    pub phase: f64,
    pub target: Transition,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::domain("frequency", "must be finite and > 0"));
        }
        if !(self.rabi_rate.is_finite() && self.rabi_rate >= 0.0) {
            return Err(Error::domain("rabi_rate", "must be finite and >= 0"));
        }
        if !self.phase.is_finite() {
            return Err(Error::domain("phase", "must be finite"));
        }
        Ok(())
    }

    /// Length of a rotation by `angle` (µs).
    pub fn pulse_duration(&self, angle: f64) -> f64 {
        angle / (2.0 * PI * self.rabi_rate)
    }
}

/// Ω/2π from a π/2 pulse length in ns.
pub fn rabi_rate_from_half_pi(duration_ns: f64) -> f64 {
    1.0 / (4.0 * duration_ns * 1e-3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceParams {
    /// Inhomogeneous dephasing time (µs).
    pub t2_star: f64,
    /// Dephasing rate surviving refocusing (1/µs).
    pub gamma_phi_dyn: f64,
    /// Lorentzian half width of the relative Rabi-rate distribution.
    pub rabi_spread: f64,
    /// Quadrature nodes for ensemble averages.
    pub nodes: usize,
}

impl CoherenceParams {
    /// T2* = 27 ns. `gamma_phi_dyn` makes the echo time 2.1 µs on top of the
    /// (Γ0 + Γ+)/2 lifetime limit and `rabi_spread` gives a 230 ns Rabi
    /// envelope at Ω = 34.7 MHz; both are calibrated.
    pub const G_CENTER: CoherenceParams =
        CoherenceParams { t2_star: 0.027, gamma_phi_dyn: 0.2038, rabi_spread: 0.0187, nodes: 201 };

    pub fn validate(&self) -> Result<()> {
        if !(self.t2_star.is_finite() && self.t2_star > 0.0) {
            return Err(Error::domain("t2_star", "must be finite and > 0"));
        }
        if !(self.gamma_phi_dyn.is_finite() && self.gamma_phi_dyn >= 0.0) {
            return Err(Error::domain("gamma_phi_dyn", "must be finite and >= 0"));
        }
        if !(self.rabi_spread.is_finite() && self.rabi_spread >= 0.0) {
            return Err(Error::domain("rabi_spread", "must be finite and >= 0"));
        }
        if self.nodes == 0 {
            return Err(Error::domain("nodes", "must be >= 1"));
        }
        Ok(())
    }

    /// Half width of the Lorentzian detuning distribution, 1/(2π T2*) (MHz).
    pub fn detuning_hwhm(&self) -> f64 {
        1.0 / (2.0 * PI * self.t2_star)
    }

    /// Echo-limited dephasing time 1/((Γa + Γb)/2 + γφ) of a pair (µs).
    pub fn echo_time(&self, rates: &RateParams, target: Transition) -> f64 {
        let g = rates.intrinsic_rates();
        let (a, b) = target.levels();
        1.0 / (0.5 * (g[a] + g[b]) + self.gamma_phi_dyn)
    }

    /// `gamma_phi_dyn` that yields a given echo time, clamped at zero.
    pub fn gamma_phi_for_echo(echo_time: f64, rates: &RateParams, target: Transition) -> f64 {
        let g = rates.intrinsic_rates();
        let (a, b) = target.levels();
        (1.0 / echo_time - 0.5 * (g[a] + g[b])).max(0.0)
    }

    /// Relative Rabi spread whose ensemble decay adds up with the pair
    /// lifetimes to an envelope time `tau_r` at Rabi rate `rabi_rate`.
    pub fn rabi_spread_for(tau_r: f64, rabi_rate: f64, rates: &RateParams, target: Transition) -> f64 {
        let g = rates.intrinsic_rates();
        let (a, b) = target.levels();
        (1.0 / tau_r - 0.5 * (g[a] + g[b])).max(0.0) / (2.0 * PI * rabi_rate)
    }
}

impl Default for CoherenceParams {
    fn default() -> Self {
        Self::G_CENTER
    }
}

/// Triplet density matrix plus the probability already leaked to the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityState {
    pub rho: Mat3c,
    pub leaked: f64,
}

impl DensityState {
    pub fn pure(level: usize) -> Self {
        let mut rho = Mat3c::zeros();
        rho[(level, level)] = C64::new(1.0, 0.0);
        DensityState { rho, leaked: 0.0 }
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.rho[(i, i)].re).sum()
    }

    fn to_vec(self) -> SVec {
        let mut v = SVec::zeros();
        for i in 0..3 {
            for j in 0..3 {
                v[3 * i + j] = self.rho[(i, j)];
            }
        }
        v[9] = C64::new(self.leaked, 0.0);
        v
    }

    fn from_vec(v: &SVec) -> Self {
        DensityState { rho: Matrix3::from_fn(|i, j| v[3 * i + j]), leaked: v[9].re }
    }
}

fn check_density(rho: &Mat3c) -> Result<()> {
    if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::domain("initial", "density matrix must be finite"));
    }
    if hermiticity_defect(rho) > 1e-10 {
        return Err(Error::domain("initial", "density matrix must be Hermitian"));
    }
    if min_eigenvalue(rho) < -1e-10 {
        return Err(Error::domain("initial", "density matrix must be positive semidefinite"));
    }
    let tr: f64 = (0..3).map(|i| rho[(i, i)].re).sum();
    if tr > 1.0 + 1e-10 {
        return Err(Error::domain("initial", "trace must not exceed 1"));
    }
    Ok(())
}

/// Rotating-frame Liouvillian on (vec ρ, leaked), row-major vectorisation.
fn liouvillian(target: Transition, detuning: f64, rabi: f64, phase: f64, gammas: [f64; 3], gamma_phi: f64) -> Super {
    let (a, b) = target.levels();
    let mut h = Mat3c::zeros();
    h[(a, a)] = C64::new(PI * detuning, 0.0);
    h[(b, b)] = C64::new(-PI * detuning, 0.0);
    let off = C64::from_polar(PI * rabi, -phase);
    h[(a, b)] = off;
    h[(b, a)] = off.conj();
    let mi = C64::new(0.0, -1.0);
    let mut l = Super::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let row = 3 * i + j;
            for k in 0..3 {
                l[(row, 3 * k + j)] += mi * h[(i, k)];
                l[(row, 3 * i + k)] -= mi * h[(k, j)];
            }
            let mut damp = 0.5 * (gammas[i] + gammas[j]);
            if i != j {
                damp += gamma_phi;
            }
            l[(row, row)] -= C64::new(damp, 0.0);
        }
        l[(9, 4 * i)] = C64::new(gammas[i], 0.0);
    }
    l
}

/// Superoperator of the instantaneous rotation by `angle` about the axis at
/// `phase` on the pair.
fn rotation(target: Transition, angle: f64, phase: f64) -> Super {
    let (a, b) = target.levels();
    let (s, c) = (0.5 * angle).sin_cos();
    let mut u = Mat3c::identity();
    u[(a, a)] = C64::new(c, 0.0);
    u[(b, b)] = C64::new(c, 0.0);
    u[(a, b)] = C64::new(0.0, -s) * C64::from_polar(1.0, -phase);
    u[(b, a)] = C64::new(0.0, -s) * C64::from_polar(1.0, phase);
    let mut m = Super::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    m[(3 * i + j, 3 * k + l)] = u[(i, k)] * u[(j, l)].conj();
                }
            }
        }
    }
    m[(9, 9)] = C64::new(1.0, 0.0);
    m
}

/// Undriven evolution in closed form.
fn free_evolve(state: &SVec, target: Transition, detuning: f64, gammas: [f64; 3], gamma_phi: f64, t: f64) -> SVec {
    let (a, b) = target.levels();
    let mut e = [0.0; 3];
    e[a] = PI * detuning;
    e[b] = -PI * detuning;
    let mut out = *state;
    let mut leak = state[9].re;
    for i in 0..3 {
        for j in 0..3 {
            let idx = 3 * i + j;
            if i == j {
                let p = state[idx].re;
                let keep = (-gammas[i] * t).exp();
                out[idx] = C64::new(p * keep, 0.0);
                leak += p * (1.0 - keep);
            } else {
                let rate = 0.5 * (gammas[i] + gammas[j]) + gamma_phi;
                out[idx] = state[idx] * C64::from_polar((-rate * t).exp(), -(e[i] - e[j]) * t);
            }
        }
    }
    out[9] = C64::new(leak, 0.0);
    out
}

/// Evolves a triplet state for `duration` µs under a drive detuned by
/// `detuning` MHz from the addressed pair.
pub fn evolve_density_matrix(
    initial: &Mat3c,
    drive: &DriveParams,
    detuning: f64,
    rates: &RateParams,
    coh: &CoherenceParams,
    duration: f64,
) -> Result<DensityState> {
    check_density(initial)?;
    drive.validate()?;
    rates.validate()?;
    coh.validate()?;
    if !detuning.is_finite() {
        return Err(Error::domain("detuning", "must be finite"));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::domain("duration", "must be finite and >= 0"));
    }
    let tr: f64 = (0..3).map(|i| initial[(i, i)].re).sum();
    let start = DensityState { rho: *initial, leaked: 1.0 - tr }.to_vec();
    let gammas = rates.intrinsic_rates();
    let v = if drive.rabi_rate == 0.0 {
        free_evolve(&start, drive.target, detuning, gammas, coh.gamma_phi_dyn, duration)
    } else {
        let l = liouvillian(drive.target, detuning, drive.rabi_rate, drive.phase, gammas, coh.gamma_phi_dyn);
        expm(&(l * C64::new(duration, 0.0)))? * start
    };
    Ok(DensityState::from_vec(&v))
}

/// Populations after a drive started from each pure sublevel: entry (j, k)
/// is the probability of ending in j having started in k. Column deficits
/// are the leaked probability. Same dynamics as [`evolve_density_matrix`],
/// restricted to the diagonal initial states.
pub fn population_transfer(
    drive: &DriveParams,
    detuning: f64,
    rates: &RateParams,
    coh: &CoherenceParams,
    duration: f64,
) -> Result<Matrix3<f64>> {
    let (a, b) = drive.target.levels();
    let c = 3 - a - b;
    let g = rates.intrinsic_rates();
    let pair = [a, b];
    let mut h = SMatrix::<C64, 2, 2>::zeros();
    h[(0, 0)] = C64::new(PI * detuning, 0.0);
    h[(1, 1)] = C64::new(-PI * detuning, 0.0);
    h[(0, 1)] = C64::from_polar(PI * drive.rabi_rate, -drive.phase);
    h[(1, 0)] = h[(0, 1)].conj();
    let mi = C64::new(0.0, -1.0);
    let mut l = SMatrix::<C64, 4, 4>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * i + j;
            for k in 0..2 {
                l[(row, 2 * k + j)] += mi * h[(i, k)];
                l[(row, 2 * i + k)] -= mi * h[(k, j)];
            }
            let mut damp = 0.5 * (g[pair[i]] + g[pair[j]]);
            if i != j {
                damp += coh.gamma_phi_dyn;
            }
            l[(row, row)] -= C64::new(damp, 0.0);
        }
    }
    let e = expm(&(l * C64::new(duration, 0.0)))?;
    let mut t = Matrix3::zeros();
    for (k, &from) in pair.iter().enumerate() {
        t[(a, from)] = e[(0, 3 * k)].re;
        t[(b, from)] = e[(3, 3 * k)].re;
    }
    t[(c, c)] = (-g[c] * duration).exp();
    Ok(t)
}

/// Midpoint quantiles of a Lorentzian with half width `hwhm`, equal weights.
pub fn lorentzian_nodes(hwhm: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| hwhm * (PI * ((i as f64 + 0.5) / n as f64 - 0.5)).tan()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Rabi,
    Ramsey,
    Echo,
    Cpmg(usize),
}

/// How microwave pulses act: instantaneous ideal rotations, or square pulses
/// of finite length at Rabi rate `rabi_rate` (MHz) that see the detuning and
/// the decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseMode {
    Ideal,
    Finite { rabi_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub target: Transition,
    pub pulses: PulseMode,
}

impl Protocol {
    pub fn new(kind: ProtocolKind, target: Transition) -> Self {
        Protocol { kind, target, pulses: PulseMode::Ideal }
    }

    pub fn validate(&self) -> Result<()> {
        if let ProtocolKind::Cpmg(0) = self.kind {
            return Err(Error::domain("kind", "CPMG needs at least one pi pulse"));
        }
        if let PulseMode::Finite { rabi_rate } = self.pulses {
            if !(rabi_rate.is_finite() && rabi_rate > 0.0) {
                return Err(Error::domain("rabi_rate", "must be finite and > 0"));
            }
        } else if self.kind == ProtocolKind::Rabi {
            return Err(Error::domain("pulses", "a Rabi sweep needs a finite drive"));
        }
        Ok(())
    }

    /// Number of refocusing π pulses.
    pub fn pi_pulses(&self) -> usize {
        match self.kind {
            ProtocolKind::Rabi | ProtocolKind::Ramsey => 0,
            ProtocolKind::Echo => 1,
            ProtocolKind::Cpmg(n) => n,
        }
    }
}

/// Signal versus sweep variable. For Rabi the abscissa is the drive length,
/// otherwise the total free evolution time (µs).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub contrast: Vec<f64>,
}

fn check_sweep(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::domain("times", "must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("times", "must be ascending"));
    }
    Ok(())
}

struct PulseSet {
    half_x: Super,
    pi_y: Super,
    read_0: Super,
    read_pi: Super,
}

fn pulse(protocol: &Protocol, detuning: f64, angle: f64, phase: f64, gammas: [f64; 3], gamma_phi: f64) -> Result<Super> {
    match protocol.pulses {
        PulseMode::Ideal => Ok(rotation(protocol.target, angle, phase)),
        PulseMode::Finite { rabi_rate } => {
            let l = liouvillian(protocol.target, detuning, rabi_rate, phase, gammas, gamma_phi);
            expm(&(l * C64::new(angle / (2.0 * PI * rabi_rate), 0.0)))
        }
    }
}

/// Ensemble-averaged contrast P_b(read phase 0) − P_b(read phase π) of a
/// pulse sequence started in the upper level `a` of the pair (a, b).
/// Ramsey is π/2_x – τ – π/2; CPMG-n puts π_y pulses at τ/2n, 3τ/2n, …
/// and echo is CPMG-1.
pub fn simulate_protocol(
    protocol: &Protocol,
    rates: &RateParams,
    coh: &CoherenceParams,
    times: &[f64],
) -> Result<CoherenceCurve> {
    protocol.validate()?;
    rates.validate()?;
    coh.validate()?;
    check_sweep(times)?;
    if protocol.kind == ProtocolKind::Rabi {
        let PulseMode::Finite { rabi_rate } = protocol.pulses else { unreachable!() };
        let drive = DriveParams { frequency: 1.0, rabi_rate, phase: 0.0, target: protocol.target };
        return simulate_rabi(&drive, rates, coh, times);
    }
    let gammas = rates.intrinsic_rates();
    let gp = coh.gamma_phi_dyn;
    let (a, b) = protocol.target.levels();
    let start = DensityState::pure(a).to_vec();
    let n_pi = protocol.pi_pulses();
    let nodes = lorentzian_nodes(coh.detuning_hwhm(), coh.nodes);
    let mut acc = vec![0.0; times.len()];
    for &d in &nodes {
        let ps = PulseSet {
            half_x: pulse(protocol, d, FRAC_PI_2, 0.0, gammas, gp)?,
            pi_y: pulse(protocol, d, PI, FRAC_PI_2, gammas, gp)?,
            read_0: pulse(protocol, d, FRAC_PI_2, 0.0, gammas, gp)?,
            read_pi: pulse(protocol, d, FRAC_PI_2, PI, gammas, gp)?,
        };
        let prepared = ps.half_x * start;
        for (k, &t) in times.iter().enumerate() {
            let mut v = prepared;
            if n_pi == 0 {
                v = free_evolve(&v, protocol.target, d, gammas, gp, t);
            } else {
                let seg = t / n_pi as f64;
                v = free_evolve(&v, protocol.target, d, gammas, gp, 0.5 * seg);
                for p in 0..n_pi {
                    v = ps.pi_y * v;
                    let dt = if p + 1 == n_pi { 0.5 * seg } else { seg };
                    v = free_evolve(&v, protocol.target, d, gammas, gp, dt);
                }
            }
            let p0 = (ps.read_0 * v)[4 * b].re;
            let p1 = (ps.read_pi * v)[4 * b].re;
            acc[k] += p0 - p1;
        }
    }
    let n = nodes.len() as f64;
    Ok(CoherenceCurve { times: times.to_vec(), contrast: acc.into_iter().map(|c| c / n).collect() })
}

/// Population transferred to the lower level `b` after a resonant drive of
/// each length, starting in the upper level `a`, averaged over a Lorentzian
/// spread of Rabi rates (relative half width `coh.rabi_spread`).
pub fn simulate_rabi(drive: &DriveParams, rates: &RateParams, coh: &CoherenceParams, durations: &[f64]) -> Result<CoherenceCurve> {
    drive.validate()?;
    rates.validate()?;
    coh.validate()?;
    check_sweep(durations)?;
    let (a, b) = drive.target.levels();
    let gammas = rates.intrinsic_rates();
    let start = DensityState::pure(a).to_vec();
    if drive.rabi_rate == 0.0 {
        return Ok(CoherenceCurve { times: durations.to_vec(), contrast: vec![0.0; durations.len()] });
    }
    let spread: Vec<f64> = if coh.rabi_spread == 0.0 {
        vec![0.0]
    } else {
        lorentzian_nodes(coh.rabi_spread, coh.nodes)
    };
    let mut acc = vec![0.0; durations.len()];
    for &s in &spread {
        let omega = (drive.rabi_rate * (1.0 + s)).abs();
        let l = liouvillian(drive.target, 0.0, omega, drive.phase, gammas, coh.gamma_phi_dyn);
        let mut v = start;
        let mut t_prev = 0.0;
        let mut step: Option<(f64, Super)> = None;
        for (k, &t) in durations.iter().enumerate() {
            let dt = t - t_prev;
            if dt > 0.0 {
                let m = match step {
                    Some((h, m)) if (h - dt).abs() <= 1e-12 * dt.max(1e-300) => m,
                    _ => {
                        let m = expm(&(l * C64::new(dt, 0.0)))?;
                        step = Some((dt, m));
                        m
                    }
                };
                v = m * v;
            }
            t_prev = t;
            acc[k] += v[4 * b].re;
        }
    }
    let n = spread.len() as f64;
    Ok(CoherenceCurve { times: durations.to_vec(), contrast: acc.into_iter().map(|c| c / n).collect() })
}

/// Frequency and envelope time extracted from a Rabi curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiFit {
    pub frequency: f64,
    pub decay_time: f64,
    pub fit: FitResult,
}

/// Fits offset + e^(−t/τ)·A·sin(2πft + φ), seeded from the first maximum.
pub fn fit_rabi(curve: &CoherenceCurve) -> Result<RabiFit> {
    let (t, y) = (&curve.times, &curve.contrast);
    let n = t.len();
    if n < 8 {
        return Err(Error::domain("times", "need at least 8 points"));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let first_max = (1..n - 1).find(|&i| y[i] > mean && y[i] >= y[i - 1] && y[i] > y[i + 1]);
    let Some(i) = first_max else {
        return Err(Error::numerical("no oscillation found in the Rabi curve"));
    };
    let f0 = 1.0 / (2.0 * (t[i] - t[0]).max(f64::MIN_POSITIVE));
    let amp = 0.5 * (y[i] - y[0]).abs();
    let span = t[n - 1] - t[0];
    let init = [mean, amp, span, f0, -FRAC_PI_2 - 2.0 * PI * f0 * t[0]];
    let r = fit(&FitModel::DampedSinusoid { harmonics: 1 }, t, y, None, &init)?;
    Ok(RabiFit { frequency: r.params[3], decay_time: r.params[2], fit: r })
}

/// Rabi frequency against microwave power with Ω = coefficient·√P.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiPowerScan {
    pub powers: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// Linear fit of frequency against √P.
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
}

pub fn rabi_power_scan(
    powers: &[f64],
    coefficient: f64,
    target: Transition,
    rates: &RateParams,
    coh: &CoherenceParams,
    durations: &[f64],
) -> Result<RabiPowerScan> {
    if powers.len() < 3 || powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain("powers", "need at least three finite powers >= 0"));
    }
    if !(coefficient.is_finite() && coefficient > 0.0) {
        return Err(Error::domain("coefficient", "must be finite and > 0"));
    }
    let mut freqs = Vec::with_capacity(powers.len());
    for &p in powers {
        let drive = DriveParams { frequency: 1.0, rabi_rate: coefficient * p.sqrt(), phase: 0.0, target };
        let curve = simulate_rabi(&drive, rates, coh, durations)?;
        let f = if curve.contrast.iter().all(|c| c.abs() < 1e-12) { 0.0 } else { fit_rabi(&curve)?.frequency };
        freqs.push(f);
    }
    let top = powers.iter().cloned().fold(0.0, f64::max);
    let init = [freqs.iter().cloned().fold(0.0, f64::max) / top.sqrt().max(f64::MIN_POSITIVE), 0.0];
    let r = fit(&FitModel::SqrtLinear, powers, &freqs, None, &init)?;
    Ok(RabiPowerScan {
        powers: powers.to_vec(),
        frequencies: freqs,
        slope: r.params[0],
        intercept: r.params[1],
        slope_sigma: r.uncertainties[0],
        intercept_sigma: r.uncertainties[1],
    })
}
