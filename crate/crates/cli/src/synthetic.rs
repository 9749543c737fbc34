//! Seeded synthetic data and starting guesses for the fit models.

use std::f64::consts::FRAC_PI_2;

use gspin_core::coherence::{fit_rabi, CoherenceCurve};
use gspin_core::fitting::{extract_peak_centers, ArrheniusForm, FitModel};
use gspin_core::sequencer::recipes::arange;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::CliError;

pub const MODEL_NAMES: [&str; 8] = [
    "lorentzian_doublet",
    "biexp_diff",
    "lifetime_diff",
    "monoexp",
    "arrhenius_amplitude",
    "arrhenius_pure",
    "damped_sinusoid",
    "sqrt_linear",
];

pub fn parse_model(name: &str) -> Result<FitModel, CliError> {
    Ok(match name {
        "lorentzian_doublet" => FitModel::LorentzianDoublet,
        "biexp_diff" => FitModel::BiexpDiff,
        "lifetime_diff" => FitModel::LifetimeDiff,
        "monoexp" => FitModel::Monoexp,
        "arrhenius_amplitude" => FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating),
        "arrhenius_pure" => FitModel::ArrheniusAmplitude(ArrheniusForm::Pure),
        "damped_sinusoid" => FitModel::DampedSinusoid { harmonics: 1 },
        "sqrt_linear" => FitModel::SqrtLinear,
        other => {
            return Err(CliError::Invalid {
                key: "fit.model".into(),
                reason: format!("unknown model '{other}' (one of {})", MODEL_NAMES.join(", ")),
            })
        }
    })
}

/// Abscissa grid and parameters of a representative data set per model.
pub fn reference_case(model: &FitModel) -> (Vec<f64>, Vec<f64>) {
    let grid = |a: f64, b: f64, s: f64| arange(a, b, s).expect("static grid");
    match model {
        FitModel::LorentzianDoublet => (grid(400.0, 2000.0, 5.0), vec![0.002, 0.012, 690.0, 15.0, 0.008, 1730.0, 25.0]),
        FitModel::BiexpDiff => (grid(1.0, 150.0, 1.0), vec![0.03, 55.0, 7.0]),
        FitModel::LifetimeDiff => (grid(0.25, 150.0, 0.25), vec![0.01, 54.0, 0.012, 1.9]),
        FitModel::Monoexp => (grid(0.0, 10.0, 0.05), vec![0.8, 2.1, 0.1]),
        FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => (grid(4.0, 24.0, 1.0), vec![1.0, 400.0, 8.7]),
        FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => (grid(12.0, 24.0, 0.5), vec![0.01, 8.7]),
        FitModel::DampedSinusoid { .. } => (grid(0.0, 1.0, 0.001), vec![0.5, 0.5, 0.23, 34.72, -FRAC_PI_2]),
        FitModel::SqrtLinear => (grid(0.0, 1000.0, 2.0), vec![3.0, 10.0]),
    }
}

/// Model values plus Gaussian noise with σ = `noise`·max|y|.
pub fn generate(model: &FitModel, x: &[f64], truth: &[f64], noise: f64, seed: u64) -> Result<Vec<f64>, CliError> {
    let clean = crate::config::with_key("fit", model.evaluate(x, truth))?;
    let scale = clean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if noise == 0.0 || scale == 0.0 {
        return Ok(clean);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, noise * scale).map_err(|e| CliError::Invalid { key: "fit.noise".into(), reason: e.to_string() })?;
    Ok(clean.into_iter().map(|v| v + dist.sample(&mut rng)).collect())
}

fn argmax(y: &[f64]) -> usize {
    (0..y.len()).fold(0, |b, i| if y[i] > y[b] { i } else { b })
}

/// Data-driven starting point for `model`.
pub fn initial_guess(model: &FitModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>, CliError> {
    let n = x.len();
    let fail = |m: &str| CliError::Numerical(format!("no starting guess: {m}"));
    if n < 3 || y.len() != n {
        return Err(fail("need at least three points"));
    }
    let top = y[argmax(y)];
    let span = x[n - 1] - x[0];
    Ok(match model {
        FitModel::LorentzianDoublet => {
            let mut peaks = extract_peak_centers(x, y);
            if peaks.len() < 2 {
                return Err(fail("fewer than two peaks"));
            }
            peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
            peaks.truncate(2);
            peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
            let mut low = y.to_vec();
            low.sort_by(f64::total_cmp);
            let base = low[n / 2];
            let p = &peaks;
            vec![base, p[0].amplitude, p[0].center, 0.5 * p[0].width, p[1].amplitude, p[1].center, 0.5 * p[1].width]
        }
        FitModel::BiexpDiff => {
            let t = x[argmax(y)].max(1e-3);
            vec![2.0 * top, 5.0 * t, 0.5 * t]
        }
        FitModel::LifetimeDiff => {
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let a = top.abs().max(lo.abs());
            vec![1.5 * a, span / 3.0, 1.5 * a + lo.abs(), span / 50.0]
        }
        FitModel::Monoexp => {
            let (y0, y1) = (y[0], y[n - 1]);
            let half = y1 + 0.5 * (y0 - y1);
            let k = (1..n).find(|&i| (y[i] - half) * (y0 - half) <= 0.0).unwrap_or(n / 2);
            vec![y0 - y1, (x[k] - x[0]).max(span / n as f64) / std::f64::consts::LN_2, y1]
        }
        FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => {
            let i = (0..n).fold(0, |b, i| if x[i] < x[b] { i } else { b });
            vec![y[i], 100.0, 5.0]
        }
        FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => {
            // ln y = ln c + E_a/(k_B T) is linear in 1/T.
            if y.iter().any(|v| *v <= 0.0) || x.iter().any(|t| *t <= 0.0) {
                return Err(fail("pure Arrhenius data must be positive"));
            }
            let u: Vec<f64> = x.iter().map(|t| 1.0 / (gspin_core::fitting::K_B_MEV_PER_K * t)).collect();
            let l: Vec<f64> = y.iter().map(|v| v.ln()).collect();
            let (s, b) = line(&u, &l);
            vec![b.exp(), s.max(1e-3)]
        }
        FitModel::DampedSinusoid { .. } => {
            let curve = CoherenceCurve { times: x.to_vec(), contrast: y.to_vec() };
            crate::config::with_key("fit", fit_rabi(&curve))?.fit.params
        }
        FitModel::SqrtLinear => {
            let r: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
            let (s, b) = line(&r, y);
            vec![s, b]
        }
    })
}

/// Ordinary least-squares slope and intercept.
fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let s = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (s, my - s * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gspin_core::fitting::fit;

    #[test]
    fn generation_is_seeded() {
        let m = FitModel::BiexpDiff;
        let (x, p) = reference_case(&m);
        let a = generate(&m, &x, &p, 0.01, 7).unwrap();
        assert_eq!(a, generate(&m, &x, &p, 0.01, 7).unwrap());
        assert_ne!(a, generate(&m, &x, &p, 0.01, 8).unwrap());
        assert_eq!(generate(&m, &x, &p, 0.0, 7).unwrap(), m.evaluate(&x, &p).unwrap());
    }

    #[test]
    fn guesses_lead_to_the_truth_on_clean_data() {
        for name in MODEL_NAMES {
            let m = parse_model(name).unwrap();
            let (x, p) = reference_case(&m);
            let y = generate(&m, &x, &p, 0.0, 1).unwrap();
            let init = initial_guess(&m, &x, &y).unwrap();
            let r = fit(&m, &x, &y, None, &init).unwrap();
            for (a, b) in r.params.iter().zip(&p) {
                assert!((a.abs() - b.abs()).abs() <= 1e-4 * b.abs(), "{name}: {:?} vs {p:?}", r.params);
            }
        }
    }

    #[test]
    fn unknown_model_names_the_key() {
        assert!(parse_model("cubic").unwrap_err().to_string().contains("fit.model"));
    }
}
