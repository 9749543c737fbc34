//! Five-level population model: ground state (GS), excited state (ES) and
//! the three metastable sublevels MS₀, MS₊, MS₋, with field-mixed MS decay
//! and power-linear photo-detrapping.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};
use num_traits::Float;

use crate::linalg::{expm, expm_with_integral5};
use crate::spin_model::{enumerate_orientations, spectrum_in_lab, DefectOrientation, ZfsParams};
use crate::{Error, Result};

pub const GS: usize = 0;
pub const ES: usize = 1;
pub const MS0: usize = 2;
pub const MSP: usize = 3;
pub const MSM: usize = 4;

/// Optical-cycle rates. Lifetimes in µs except `tau_e_ns`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// ES radiative lifetime (ns).
    pub tau_e_ns: f64,
    /// Total ES → MS intersystem-crossing rate (1/µs).
    pub k_isc: f64,
    /// ISC branching onto (MS₀, MS₊, MS₋).
    pub branching: [f64; 3],
    pub tau_0: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// GS → ES rate per unit optical power (1/(µs·µW)).
    pub pump_coeff: f64,
    /// MS → GS photo-deshelving rate per unit power (1/(µs·µW)).
    pub detrap_coeff: f64,
}

impl RateParams {
    /// G-center defaults. `k_isc`, `pump_coeff` and `detrap_coeff` are
    /// calibrated (ODMR contrast near 1 % at t_a = t_b = 5 µs, readout
    /// overshoot gone above ~500 µW), not measured.
    pub const G_CENTER: RateParams = RateParams {
        tau_e_ns: 5.0,
        k_isc: 0.25,
        branching: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        tau_0: 1.9,
        tau_plus: 54.0,
        tau_minus: 42.0,
        pump_coeff: 10.0,
        detrap_coeff: 0.15,
    };

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &'static str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(name, "must be finite and > 0"))
            }
        };
        positive(self.tau_e_ns, "tau_e_ns")?;
        positive(self.tau_0, "tau_0")?;
        positive(self.tau_plus, "tau_plus")?;
        positive(self.tau_minus, "tau_minus")?;
        for (v, name) in [(self.k_isc, "k_isc"), (self.pump_coeff, "pump_coeff"), (self.detrap_coeff, "detrap_coeff")] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(name, "must be finite and >= 0"));
            }
        }
        if self.k_isc > 1.0 / self.tau_e_us() {
            return Err(Error::domain("k_isc", "cannot exceed the total ES decay rate 1/tau_e"));
        }
        if self.branching.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::domain("branching", "fractions must lie in [0, 1]"));
        }
        if (self.branching.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::domain("branching", "fractions must sum to 1"));
        }
        Ok(())
    }

    pub fn tau_e_us(&self) -> f64 {
        self.tau_e_ns * 1e-3
    }

    /// Zero-field decay rates (1/τ0, 1/τ+, 1/τ−) in 1/µs.
    pub fn intrinsic_rates(&self) -> [f64; 3] {
        [1.0 / self.tau_0, 1.0 / self.tau_plus, 1.0 / self.tau_minus]
    }

    /// τ1 with τ1⁻¹ = (τ+⁻¹ + τ−⁻¹)/2.
    pub fn tau_1(&self) -> f64 {
        2.0 / (1.0 / self.tau_plus + 1.0 / self.tau_minus)
    }

    pub fn with_plus_minus_swapped(&self) -> Self {
        let mut r = *self;
        core::mem::swap(&mut r.tau_plus, &mut r.tau_minus);
        r.branching.swap(1, 2);
        r
    }
}

impl Default for RateParams {
    fn default() -> Self {
        Self::G_CENTER
    }
}

/// Effective lifetime under complete mixing: 1/τ_eff = (1/τ0 + 2/τ1)/3.
pub fn complete_mixing_lifetime(tau_0: f64, tau_1: f64) -> f64 {
    3.0 / (1.0 / tau_0 + 2.0 / tau_1)
}

/// Inverts [`complete_mixing_lifetime`] for τ0.
pub fn tau_0_from_mixing(tau_eff: f64, tau_1: f64) -> Result<f64> {
    let inv = 3.0 / tau_eff - 2.0 / tau_1;
    if !(tau_eff > 0.0 && tau_1 > 0.0 && inv > 0.0) {
        return Err(Error::domain("tau_eff", "no positive tau_0 reproduces this effective lifetime"));
    }
    Ok(1.0 / inv)
}

/// Occupation probabilities of the five levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationState {
    pub n_gs: f64,
    pub n_es: f64,
    pub n_ms0: f64,
    pub n_msp: f64,
    pub n_msm: f64,
}

impl PopulationState {
    pub const GROUND: PopulationState = PopulationState { n_gs: 1.0, n_es: 0.0, n_ms0: 0.0, n_msp: 0.0, n_msm: 0.0 };

    pub fn uniform() -> Self {
        Self::from_vector(&Vector5::repeat(0.2))
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.n_gs, self.n_es, self.n_ms0, self.n_msp, self.n_msm)
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        PopulationState { n_gs: v[0], n_es: v[1], n_ms0: v[2], n_msp: v[3], n_msm: v[4] }
    }

    pub fn total(&self) -> f64 {
        self.n_gs + self.n_es + self.n_ms0 + self.n_msp + self.n_msm
    }

    pub fn metastable(&self) -> f64 {
        self.n_ms0 + self.n_msp + self.n_msm
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vector();
        if v.iter().any(|x| !(x.is_finite() && *x >= -1e-12 && *x <= 1.0 + 1e-12)) {
            return Err(Error::domain("initial", "populations must lie in [0, 1]"));
        }
        if (self.total() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("initial", "populations must sum to 1"));
        }
        Ok(())
    }
}

/// Decay rates of the field-dressed MS states. Entry k belongs to the
/// dressed state labelled by zero-field state k (|0⟩, |+⟩, |−⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedDecay {
    pub rates: [f64; 3],
    pub overlaps: Matrix3<f64>,
}

impl MixedDecay {
    /// Γ_k = Σ_i overlaps[i][k] · Γ_i.
    pub fn from_overlaps(overlaps: Matrix3<f64>, rates: &RateParams) -> Self {
        let g = Vector3::from(rates.intrinsic_rates());
        let dressed = overlaps.transpose() * g;
        MixedDecay { rates: [dressed[0], dressed[1], dressed[2]], overlaps }
    }

    pub fn zero_field(rates: &RateParams) -> Self {
        Self::from_overlaps(Matrix3::identity(), rates)
    }

    /// Every dressed state an equal superposition of the three zero-field states.
    pub fn complete_mixing(rates: &RateParams) -> Self {
        Self::from_overlaps(Matrix3::repeat(1.0 / 3.0), rates)
    }
}

pub fn mixed_decay_rates(
    zfs: &ZfsParams,
    b_lab: &Vector3<f64>,
    orientation: &DefectOrientation,
    rates: &RateParams,
) -> Result<MixedDecay> {
    let spec = spectrum_in_lab(zfs, b_lab, orientation)?;
    Ok(MixedDecay::from_overlaps(spec.labelled_overlaps(), rates))
}

/// Generator A of dx/dt = A·x for x = (GS, ES, MS₀, MS₊, MS₋).
pub fn rate_matrix(rates: &RateParams, mixed: &MixedDecay, power: f64) -> Result<Matrix5<f64>> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::domain("laser_power", "must be finite and >= 0"));
    }
    let mut a = Matrix5::zeros();
    let mut link = |from: usize, to: usize, k: f64| {
        a[(to, from)] += k;
        a[(from, from)] -= k;
    };
    link(GS, ES, rates.pump_coeff * power);
    link(ES, GS, 1.0 / rates.tau_e_us() - rates.k_isc);
    for k in 0..3 {
        link(ES, MS0 + k, rates.k_isc * rates.branching[k]);
        link(MS0 + k, GS, mixed.rates[k] + rates.detrap_coeff * power);
    }
    Ok(a)
}

/// Populations and PL sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub populations: Vec<PopulationState>,
    /// Instantaneous PL rate n_es/τ_e (1/µs).
    pub pl: Vec<f64>,
}

/// Exact piecewise-constant propagation sampled every `dt` (the final step
/// is shortened to land on `duration`).
pub fn evolve_populations(
    initial: &PopulationState,
    laser_power: f64,
    mixed: &MixedDecay,
    rates: &RateParams,
    duration: f64,
    dt: f64,
) -> Result<PopulationTrace> {
    rates.validate()?;
    initial.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain("dt", "must be finite and > 0"));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::domain("duration", "must be finite and >= 0"));
    }
    let a = rate_matrix(rates, mixed, laser_power)?;
    let step = expm(&(a * dt))?;
    let tau_e = rates.tau_e_us();
    let full = Float::floor(duration / dt * (1.0 + 1e-12)) as usize;
    let mut x = initial.to_vector();
    let mut times = Vec::with_capacity(full + 2);
    let mut populations = Vec::with_capacity(full + 2);
    let mut pl = Vec::with_capacity(full + 2);
    let mut push = |t: f64, x: &Vector5<f64>| {
        times.push(t);
        populations.push(PopulationState::from_vector(x));
        pl.push(x[ES] / tau_e);
    };
    push(0.0, &x);
    for k in 1..=full {
        x = step * x;
        push(k as f64 * dt, &x);
    }
    let last = full as f64 * dt;
    let rest = duration - last;
    if rest > 1e-12 * duration.max(dt) {
        x = expm(&(a * rest))? * x;
        push(duration, &x);
    }
    Ok(PopulationTrace { times, populations, pl })
}

fn interpolate(trace: &PopulationTrace, t: f64) -> f64 {
    let i = match trace.times.iter().position(|&s| s >= t) {
        Some(0) => return trace.pl[0],
        Some(i) => i,
        None => return *trace.pl.last().unwrap(),
    };
    let (t0, t1) = (trace.times[i - 1], trace.times[i]);
    let w = (t - t0) / (t1 - t0);
    trace.pl[i - 1] * (1.0 - w) + trace.pl[i] * w
}

/// Trapezoidal integral of the PL over [start, start + width].
pub fn integrate_window(trace: &PopulationTrace, start: f64, width: f64) -> Result<f64> {
    if trace.times.is_empty() {
        return Err(Error::domain("trace", "empty trace"));
    }
    if !(width.is_finite() && width >= 0.0 && start.is_finite()) {
        return Err(Error::domain("width", "window must be finite with width >= 0"));
    }
    let (t_first, t_last) = (trace.times[0], *trace.times.last().unwrap());
    let end = start + width;
    let slack = 1e-12 * (t_last - t_first).abs().max(1.0);
    if start < t_first - slack || end > t_last + slack {
        return Err(Error::domain("start", "window lies outside the trace"));
    }
    if width == 0.0 {
        return Ok(0.0);
    }
    let mut knots = Vec::new();
    knots.push((start, interpolate(trace, start)));
    for (t, p) in trace.times.iter().zip(&trace.pl) {
        if *t > start && *t < end {
            knots.push((*t, *p));
        }
    }
    knots.push((end, interpolate(trace, end)));
    Ok(knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum())
}

/// Exact PL integral over [offset, offset + width] of a constant-power
/// segment entered with populations `x`.
pub fn window_integral(a: &Matrix5<f64>, x: &Vector5<f64>, offset: f64, width: f64, tau_e: f64) -> Result<f64> {
    let x0 = if offset > 0.0 { expm(&(a * offset))? * x } else { *x };
    let (_, integral) = expm_with_integral5(a, width)?;
    Ok((integral * x0)[ES] / tau_e)
}

/// Fixed point of a repeated cycle map, reached by running the cycle
/// 1, 2, 4, 8, … times until the state stops changing.
pub fn periodic_state(cycle: &Matrix5<f64>, start: &Vector5<f64>) -> Result<Vector5<f64>> {
    let mut m = *cycle;
    let mut x = *start;
    for _ in 0..80 {
        let mut next = m * x;
        let s = next.sum();
        next /= s;
        let change = (next - x).lp_norm(1);
        x = next;
        if change < 1e-14 {
            return Ok(x);
        }
        m = m * m;
    }
    Err(Error::numerical("cyclic steady state did not converge"))
}

/// Laser pulse used by the two-pulse protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserPulse {
    /// µs
    pub duration: f64,
    /// µW
    pub power: f64,
}

impl Default for LaserPulse {
    fn default() -> Self {
        LaserPulse { duration: 1.0, power: 10.0 }
    }
}

/// Width of the S and R integration windows (µs).
pub const READOUT_WINDOW: f64 = 0.2;

/// (S, R) of the repeated pulse/delay cycle: S in the first 200 ns of a
/// pulse, R in the last 200 ns of the previous one.
pub fn two_pulse_windows(rates: &RateParams, mixed: &MixedDecay, pulse: &LaserPulse, delay: f64) -> Result<(f64, f64)> {
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(Error::domain("delay", "must be finite and >= 0"));
    }
    if pulse.duration < READOUT_WINDOW {
        return Err(Error::domain("pulse_duration", "shorter than the readout window"));
    }
    let lit = rate_matrix(rates, mixed, pulse.power)?;
    let dark = rate_matrix(rates, mixed, 0.0)?;
    let cycle = expm(&(dark * delay))? * expm(&(lit * pulse.duration))?;
    let x = periodic_state(&cycle, &PopulationState::GROUND.to_vector())?;
    let tau_e = rates.tau_e_us();
    let s = window_integral(&lit, &x, 0.0, READOUT_WINDOW, tau_e)?;
    let r = window_integral(&lit, &x, pulse.duration - READOUT_WINDOW, READOUT_WINDOW, tau_e)?;
    Ok((s, r))
}

/// ΔS_B(τ) = (S/R)_{B_on} − (S/R)_{B=0}.
#[derive(Debug, Clone, PartialEq)]
pub struct TrplDifferential {
    pub delays: Vec<f64>,
    pub s_over_r_zero: Vec<f64>,
    pub s_over_r_field: Vec<f64>,
    pub delta: Vec<f64>,
}

pub fn simulate_trpl_differential(
    rates: &RateParams,
    zfs: &ZfsParams,
    b_on: &Vector3<f64>,
    delays: &[f64],
    pulse: &LaserPulse,
) -> Result<TrplDifferential> {
    rates.validate()?;
    zfs.validate()?;
    if delays.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::domain("delays", "must be positive"));
    }
    let zero = MixedDecay::zero_field(rates);
    let orientations = enumerate_orientations();
    let mut mixes: Vec<MixedDecay> = Vec::with_capacity(orientations.len());
    for o in &orientations {
        mixes.push(mixed_decay_rates(zfs, b_on, o, rates)?);
    }
    let mut out = TrplDifferential { delays: delays.to_vec(), s_over_r_zero: Vec::new(), s_over_r_field: Vec::new(), delta: Vec::new() };
    for &tau in delays {
        let (s0, r0) = two_pulse_windows(rates, &zero, pulse, tau)?;
        let (mut s, mut r) = (0.0, 0.0);
        for m in &mixes {
            let (si, ri) = two_pulse_windows(rates, m, pulse, tau)?;
            s += si;
            r += ri;
        }
        let (a, b) = (s0 / r0, s / r);
        out.s_over_r_zero.push(a);
        out.s_over_r_field.push(b);
        out.delta.push(b - a);
    }
    Ok(out)
}

/// Readout overshoot: peak PL during a pulse relative to its end-of-pulse
/// PL, minus one, in the cyclic steady state of pulse + `delay`.
pub fn readout_overshoot(rates: &RateParams, mixed: &MixedDecay, pulse: &LaserPulse, delay: f64) -> Result<f64> {
    let lit = rate_matrix(rates, mixed, pulse.power)?;
    let dark = rate_matrix(rates, mixed, 0.0)?;
    let cycle = expm(&(dark * delay))? * expm(&(lit * pulse.duration))?;
    let x = periodic_state(&cycle, &PopulationState::GROUND.to_vector())?;
    let trace = evolve_populations(&PopulationState::from_vector(&x), pulse.power, mixed, rates, pulse.duration, 1e-3)?;
    let peak = trace.pl.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let end = *trace.pl.last().unwrap();
    Ok(peak / end - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rk4(a: &Matrix5<f64>, x: Vector5<f64>, t: f64, n: usize) -> Vector5<f64> {
        let h = t / n as f64;
        let mut x = x;
        for _ in 0..n {
            let k1 = a * x;
            let k2 = a * (x + k1 * (h / 2.0));
            let k3 = a * (x + k2 * (h / 2.0));
            let k4 = a * (x + k3 * h);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        x
    }

    #[test]
    fn columns_of_generator_sum_to_zero() {
        let r = RateParams::G_CENTER;
        let a = rate_matrix(&r, &MixedDecay::zero_field(&r), 37.0).unwrap();
        for j in 0..5 {
            assert!(a.column(j).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn metastable_plus_decay_in_dark() {
        let r = RateParams::G_CENTER;
        let init = PopulationState { n_gs: 0.0, n_es: 0.0, n_ms0: 0.0, n_msp: 1.0, n_msm: 0.0 };
        let tr = evolve_populations(&init, 0.0, &MixedDecay::zero_field(&r), &r, 100.0, 0.1).unwrap();
        let half = 54.0 * core::f64::consts::LN_2;
        assert_abs_diff_eq!(half, 37.43, epsilon = 0.01);
        for (t, p) in tr.times.iter().zip(&tr.populations) {
            assert_abs_diff_eq!(p.n_msp, (-t / 54.0).exp(), epsilon = 1e-12);
        }
        let i = tr.times.iter().position(|&t| t >= 37.4).unwrap();
        assert_abs_diff_eq!(tr.populations[i].n_msp, 0.5, epsilon = 2e-3);
    }

    #[test]
    fn matches_rk4_oracle() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::complete_mixing(&r);
        let a = rate_matrix(&r, &m, 20.0).unwrap();
        let x0 = PopulationState::uniform().to_vector();
        let tr = evolve_populations(&PopulationState::uniform(), 20.0, &m, &r, 0.5, 0.05).unwrap();
        let oracle = rk4(&a, x0, 0.5, 200_000);
        let got = tr.populations.last().unwrap().to_vector();
        assert!(((got - oracle).amax() / oracle.amax()) < 1e-6);
    }

    #[test]
    fn steady_state_under_constant_light() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let tr = evolve_populations(&PopulationState::GROUND, 5.0, &m, &r, 100.0 * 54.0, 100.0).unwrap();
        let x = tr.populations.last().unwrap().to_vector();
        let a = rate_matrix(&r, &m, 5.0).unwrap();
        assert!((a * x).amax() < 1e-8);
    }

    #[test]
    fn probability_conserved() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::complete_mixing(&r);
        for p in [0.0, 1.0, 100.0, 3000.0] {
            let tr = evolve_populations(&PopulationState::GROUND, p, &m, &r, 3.0, 0.01).unwrap();
            for s in &tr.populations {
                assert!((s.total() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn high_power_empties_metastable_level() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let ms = |p: f64| {
            let tr = evolve_populations(&PopulationState::GROUND, p, &m, &r, 200.0, 200.0).unwrap();
            tr.populations.last().unwrap().metastable()
        };
        assert!(ms(1e5) < 0.05 * ms(20.0));
    }

    #[test]
    fn invalid_inputs() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let g = PopulationState::GROUND;
        assert!(evolve_populations(&g, -1.0, &m, &r, 1.0, 0.1).is_err());
        assert!(evolve_populations(&g, 1.0, &m, &r, 1.0, 0.0).is_err());
        assert!(evolve_populations(&g, 1.0, &m, &r, 1.0, f64::NAN).is_err());
        let mut bad = r;
        bad.branching = [0.5, 0.5, 0.5];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn window_integrals() {
        let trace = PopulationTrace {
            times: alloc::vec![0.0, 0.5, 1.0],
            populations: alloc::vec![PopulationState::GROUND; 3],
            pl: alloc::vec![3.0, 3.0, 3.0],
        };
        assert_abs_diff_eq!(integrate_window(&trace, 0.1, 0.7).unwrap(), 2.1, epsilon = 1e-12);
        assert_eq!(integrate_window(&trace, 0.3, 0.0).unwrap(), 0.0);
        assert!(integrate_window(&trace, 0.9, 0.2).is_err());
        assert!(integrate_window(&trace, -0.1, 0.2).is_err());
    }

    #[test]
    fn exact_window_matches_trapezoid_on_fine_trace() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let a = rate_matrix(&r, &m, 10.0).unwrap();
        let x = PopulationState::GROUND;
        let tr = evolve_populations(&x, 10.0, &m, &r, 1.0, 1e-4).unwrap();
        let trap = integrate_window(&tr, 0.0, 0.2).unwrap();
        let exact = window_integral(&a, &x.to_vector(), 0.0, 0.2, r.tau_e_us()).unwrap();
        assert!((trap - exact).abs() / exact < 1e-5);
        let trap = integrate_window(&tr, 0.8, 0.2).unwrap();
        let exact = window_integral(&a, &x.to_vector(), 0.8, 0.2, r.tau_e_us()).unwrap();
        assert!((trap - exact).abs() / exact < 1e-6);
    }

    #[test]
    fn mixed_rates_at_zero_field_are_intrinsic() {
        let r = RateParams::G_CENTER;
        for o in enumerate_orientations() {
            let m = mixed_decay_rates(&ZfsParams::G_CENTER, &Vector3::zeros(), &o, &r).unwrap();
            assert_eq!(m.rates, r.intrinsic_rates());
        }
    }

    #[test]
    fn complete_mixing_reproduces_closed_form() {
        let r = RateParams { tau_0: 2.5, tau_plus: 55.0, tau_minus: 55.0, ..RateParams::G_CENTER };
        let m = MixedDecay::complete_mixing(&r);
        let tau = complete_mixing_lifetime(2.5, 55.0);
        for g in m.rates {
            assert_abs_diff_eq!(1.0 / g, tau, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(tau, 6.875, epsilon = 1e-12);
        assert_abs_diff_eq!(tau_0_from_mixing(7.0, 55.0).unwrap(), 2.5497, epsilon = 1e-4);
        assert!(tau_0_from_mixing(100.0, 55.0).is_err());
    }

    #[test]
    fn two_identical_pulses_without_gap() {
        let r = RateParams::G_CENTER;
        let (s, rr) = two_pulse_windows(&r, &MixedDecay::zero_field(&r), &LaserPulse::default(), 0.0).unwrap();
        assert!((s / rr - 1.0).abs() < 1e-6);
    }

    #[test]
    fn periodic_state_independent_of_start() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let lit = rate_matrix(&r, &m, 10.0).unwrap();
        let dark = rate_matrix(&r, &m, 0.0).unwrap();
        let cycle = expm(&(dark * 15.0)).unwrap() * expm(&lit).unwrap();
        let a = periodic_state(&cycle, &PopulationState::GROUND.to_vector()).unwrap();
        let b = periodic_state(&cycle, &PopulationState::uniform().to_vector()).unwrap();
        assert!((a - b).amax() < 1e-12);
        assert!((cycle * a - a).amax() < 1e-12);
    }

    #[test]
    fn differential_vanishes_at_extremes() {
        let r = RateParams::G_CENTER;
        let b = Vector3::new(0.0, 0.0, 50.0);
        let d = simulate_trpl_differential(&r, &ZfsParams::G_CENTER, &b, &[0.01, 15.0, 2000.0], &LaserPulse::default()).unwrap();
        assert!(d.delta[1] > 0.0, "{:?}", d.delta);
        assert!(d.delta[0].abs() < 0.02 * d.delta[1]);
        assert!(d.delta[2].abs() < 0.02 * d.delta[1], "{:?}", d);
    }

    #[test]
    fn overshoot_shrinks_at_high_power() {
        let r = RateParams::G_CENTER;
        let m = MixedDecay::zero_field(&r);
        let low = readout_overshoot(&r, &m, &LaserPulse { duration: 1.0, power: 10.0 }, 15.0).unwrap();
        let high = readout_overshoot(&r, &m, &LaserPulse { duration: 1.0, power: 1000.0 }, 15.0).unwrap();
        assert!(low > 0.0 && high < 0.05 * low);
    }
}
