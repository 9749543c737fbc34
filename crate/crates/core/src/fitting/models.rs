use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Boltzmann constant in meV/K.
pub const K_B_MEV_PER_K: f64 = 0.08617;

/// Temperature dependence used by [`FitModel::ArrheniusAmplitude`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrheniusForm {
    /// c / (1 + A·exp(−E_a/(k_B·T))); params (c, A, E_a).
    Saturating,
    /// c·exp(E_a/(k_B·T)); params (c, E_a). High-temperature limit of the
    /// saturating form.
    Pure,
}

/// Parametric models. Parameter order is given by [`FitModel::param_names`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// baseline + Σ a_k / (1 + ((x − c_k)/w_k)²), w the half width.
    LorentzianDoublet,
    /// a·(exp(−x/τ1) − exp(−x/τ_eff)).
    BiexpDiff,
    /// |a_l|·exp(−x/τ_l) − |a_0|·exp(−x/τ_0).
    LifetimeDiff,
    /// a·exp(−x/τ) + c.
    Monoexp,
    ArrheniusAmplitude(ArrheniusForm),
    /// offset + exp(−x/τ)·Σ_k A_k·sin(2π·k·f·x + φ_k), k = 1..=harmonics.
    DampedSinusoid { harmonics: usize },
    /// slope·√x + intercept (x is a power, the result a Rabi frequency).
    SqrtLinear,
}

pub trait Model {
    fn n_params(&self) -> usize;
    fn value(&self, x: f64, p: &[f64]) -> f64;
    /// Checks parameters (and abscissae) against the model domain.
    fn check(&self, x: &[f64], p: &[f64]) -> Result<()>;
    /// Analytic gradient of `value` with respect to `p`, when implemented.
    fn gradient(&self, _x: f64, _p: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

fn positive(v: f64, name: &'static str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, "must be finite and > 0"))
    }
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::LorentzianDoublet => "lorentzian_doublet",
            FitModel::BiexpDiff => "biexp_diff",
            FitModel::LifetimeDiff => "lifetime_diff",
            FitModel::Monoexp => "monoexp",
            FitModel::ArrheniusAmplitude(_) => "arrhenius_amplitude",
            FitModel::DampedSinusoid { .. } => "damped_sinusoid",
            FitModel::SqrtLinear => "sqrt_linear",
        }
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        match self {
            FitModel::LorentzianDoublet => alloc::vec!["baseline", "amplitude_1", "center_1", "hwhm_1", "amplitude_2", "center_2", "hwhm_2"],
            FitModel::BiexpDiff => alloc::vec!["a", "tau_1", "tau_eff"],
            FitModel::LifetimeDiff => alloc::vec!["a_long", "tau_long", "a_0", "tau_0"],
            FitModel::Monoexp => alloc::vec!["a", "tau", "c"],
            FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => alloc::vec!["c", "prefactor", "e_a"],
            FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => alloc::vec!["c", "e_a"],
            FitModel::DampedSinusoid { harmonics } => {
                let mut v = alloc::vec!["offset", "amplitude", "tau", "frequency", "phase"];
                for _ in 1..*harmonics {
                    v.push("harmonic_amplitude");
                    v.push("harmonic_phase");
                }
                v
            }
            FitModel::SqrtLinear => alloc::vec!["slope", "intercept"],
        }
    }

    /// Units for the usual abscissa of each model (MHz spectra, µs delays,
    /// K temperatures, µW powers).
    pub fn param_units(&self) -> Vec<&'static str> {
        match self {
            FitModel::LorentzianDoublet => alloc::vec!["signal", "signal", "MHz", "MHz", "signal", "MHz", "MHz"],
            FitModel::BiexpDiff => alloc::vec!["signal", "us", "us"],
            FitModel::LifetimeDiff => alloc::vec!["signal", "us", "signal", "us"],
            FitModel::Monoexp => alloc::vec!["signal", "us", "signal"],
            FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => alloc::vec!["signal", "1", "meV"],
            FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => alloc::vec!["signal", "meV"],
            FitModel::DampedSinusoid { harmonics } => {
                let mut v = alloc::vec!["signal", "signal", "us", "MHz", "rad"];
                for _ in 1..*harmonics {
                    v.push("signal");
                    v.push("rad");
                }
                v
            }
            FitModel::SqrtLinear => alloc::vec!["MHz/sqrt(uW)", "MHz"],
        }
    }

    pub fn evaluate(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check(x, p)?;
        Ok(x.iter().map(|&xi| self.value(xi, p)).collect())
    }
}

impl Model for FitModel {
    fn n_params(&self) -> usize {
        match self {
            FitModel::LorentzianDoublet => 7,
            FitModel::BiexpDiff => 3,
            FitModel::LifetimeDiff => 4,
            FitModel::Monoexp => 3,
            FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => 3,
            FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => 2,
            FitModel::DampedSinusoid { harmonics } => 3 + 2 * harmonics,
            FitModel::SqrtLinear => 2,
        }
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        match self {
            FitModel::LorentzianDoublet => {
                let l = |a: f64, c: f64, w: f64| a / (1.0 + ((x - c) / w).powi(2));
                p[0] + l(p[1], p[2], p[3]) + l(p[4], p[5], p[6])
            }
            FitModel::BiexpDiff => p[0] * ((-x / p[1]).exp() - (-x / p[2]).exp()),
            FitModel::LifetimeDiff => p[0].abs() * (-x / p[1]).exp() - p[2].abs() * (-x / p[3]).exp(),
            FitModel::Monoexp => p[0] * (-x / p[1]).exp() + p[2],
            FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => {
                p[0] / (1.0 + p[1] * (-p[2] / (K_B_MEV_PER_K * x)).exp())
            }
            FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => p[0] * (p[1] / (K_B_MEV_PER_K * x)).exp(),
            FitModel::DampedSinusoid { harmonics } => {
                let env = (-x / p[2]).exp();
                let w = 2.0 * PI * p[3] * x;
                let mut s = p[1] * (w + p[4]).sin();
                for k in 1..*harmonics {
                    let (a, ph) = (p[5 + 2 * (k - 1)], p[6 + 2 * (k - 1)]);
                    s += a * ((k + 1) as f64 * w + ph).sin();
                }
                p[0] + env * s
            }
            FitModel::SqrtLinear => p[0] * x.sqrt() + p[1],
        }
    }

    fn check(&self, x: &[f64], p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::domain("params", "wrong parameter count for model"));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("params", "parameters must be finite"));
        }
        match self {
            FitModel::LorentzianDoublet => {
                positive(p[3], "hwhm_1")?;
                positive(p[6], "hwhm_2")
            }
            FitModel::BiexpDiff => {
                positive(p[1], "tau_1")?;
                positive(p[2], "tau_eff")
            }
            FitModel::LifetimeDiff => {
                positive(p[1], "tau_long")?;
                positive(p[3], "tau_0")
            }
            FitModel::Monoexp => positive(p[1], "tau"),
            FitModel::ArrheniusAmplitude(form) => {
                let ea = if *form == ArrheniusForm::Saturating {
                    if !(p[1] >= 0.0) {
                        return Err(Error::domain("prefactor", "must be >= 0"));
                    }
                    p[2]
                } else {
                    p[1]
                };
                positive(ea, "e_a")?;
                if x.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                    return Err(Error::domain("temperature", "must be > 0"));
                }
                Ok(())
            }
            FitModel::DampedSinusoid { harmonics } => {
                if *harmonics == 0 {
                    return Err(Error::domain("harmonics", "must be >= 1"));
                }
                positive(p[2], "tau")?;
                if !(p[3] >= 0.0) {
                    return Err(Error::domain("frequency", "must be >= 0"));
                }
                Ok(())
            }
            FitModel::SqrtLinear => {
                if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::domain("power", "must be >= 0"));
                }
                Ok(())
            }
        }
    }

    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]) -> bool {
        match self {
            FitModel::Monoexp => {
                let e = (-x / p[1]).exp();
                out[0] = e;
                out[1] = p[0] * e * x / (p[1] * p[1]);
                out[2] = 1.0;
                true
            }
            FitModel::BiexpDiff => {
                let (e1, e2) = ((-x / p[1]).exp(), (-x / p[2]).exp());
                out[0] = e1 - e2;
                out[1] = p[0] * e1 * x / (p[1] * p[1]);
                out[2] = -p[0] * e2 * x / (p[2] * p[2]);
                true
            }
            _ => false,
        }
    }
}

/// Single Lorentzian on a baseline; params (baseline, amplitude, center, hwhm).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lorentzian;

impl Model for Lorentzian {
    fn n_params(&self) -> usize {
        4
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] / (1.0 + ((x - p[2]) / p[3]).powi(2))
    }

    fn check(&self, _x: &[f64], p: &[f64]) -> Result<()> {
        if p.len() != 4 || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("params", "expected four finite parameters"));
        }
        positive(p[3], "hwhm")
    }
}

/// Location of the maximum of a·(e^(−t/τ1) − e^(−t/τ2)).
pub fn biexp_argmax(tau_1: f64, tau_2: f64) -> f64 {
    (tau_1 / tau_2).ln() * tau_1 * tau_2 / (tau_1 - tau_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn biexp_vanishes_at_origin() {
        let y = FitModel::BiexpDiff.evaluate(&[0.0], &[0.03, 55.0, 7.0]).unwrap();
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn biexp_argmax_closed_form() {
        let t = biexp_argmax(55.0, 7.0);
        assert_abs_diff_eq!(t, 16.5, epsilon = 0.05);
        let f = |x: f64| (-x / 55.0).exp() - (-x / 7.0).exp();
        assert!(f(t) > f(t - 1e-3) && f(t) > f(t + 1e-3));
    }

    #[test]
    fn doublet_peaks_at_centers() {
        let p = [0.0, 0.01, 690.0, 10.0, 0.008, 1730.0, 15.0];
        let y = FitModel::LorentzianDoublet.evaluate(&[689.0, 690.0, 691.0, 1729.0, 1730.0, 1731.0], &p).unwrap();
        assert!(y[1] > y[0] && y[1] > y[2]);
        assert!(y[4] > y[3] && y[4] > y[5]);
    }

    #[test]
    fn arrhenius_low_temperature_plateau() {
        let m = FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating);
        let y = m.evaluate(&[0.5, 2.0, 30.0], &[1.0, 4500.0, 8.7]).unwrap();
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-12);
        assert!(y[1] > 0.99 && y[2] < 0.2);
        assert!(m.evaluate(&[0.0], &[1.0, 4500.0, 8.7]).is_err());
        assert!(m.evaluate(&[4.0], &[1.0, 4500.0, -1.0]).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(FitModel::Monoexp.evaluate(&[1.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(FitModel::LorentzianDoublet.evaluate(&[1.0], &[0.0; 7]).is_err());
        assert!(FitModel::SqrtLinear.evaluate(&[-1.0], &[1.0, 0.0]).is_err());
        assert!(FitModel::BiexpDiff.evaluate(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        for (m, p) in [(FitModel::Monoexp, [0.7, 3.0, 0.1]), (FitModel::BiexpDiff, [0.03, 55.0, 7.0])] {
            let xs = [0.0, 0.5, 3.0, 20.0, 80.0];
            let mut scale = [0.0f64; 3];
            for x in xs {
                let mut g = [0.0; 3];
                m.gradient(x, &p, &mut g);
                for j in 0..3 {
                    scale[j] = scale[j].max(g[j].abs());
                }
            }
            for x in xs {
                let mut g = [0.0; 3];
                assert!(m.gradient(x, &p, &mut g));
                for j in 0..3 {
                    let h = (1e-6 * p[j].abs()).max(1e-9);
                    let (mut a, mut b) = (p, p);
                    a[j] += h;
                    b[j] -= h;
                    let fd = (m.value(x, &a) - m.value(x, &b)) / (2.0 * h);
                    assert!((fd - g[j]).abs() <= 1e-6 * scale[j], "{m:?} x={x} j={j}");
                }
            }
        }
    }

    #[test]
    fn parameter_tables_are_consistent() {
        let all = [
            FitModel::LorentzianDoublet,
            FitModel::BiexpDiff,
            FitModel::LifetimeDiff,
            FitModel::Monoexp,
            FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating),
            FitModel::ArrheniusAmplitude(ArrheniusForm::Pure),
            FitModel::DampedSinusoid { harmonics: 1 },
            FitModel::DampedSinusoid { harmonics: 3 },
            FitModel::SqrtLinear,
        ];
        for m in all {
            assert_eq!(m.param_names().len(), m.n_params());
            assert_eq!(m.param_units().len(), m.n_params());
        }
    }
}
