use alloc::vec;
use alloc::vec::Vec;


use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::models::Model;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Largest allowed cosine between the residual vector and any Jacobian column.
    pub gradient_tolerance: f64,
    /// Relative parameter step below which the iteration is considered converged.
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 200, gradient_tolerance: 1e-10, step_tolerance: 1e-12, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    /// Residuals vanish (interpolating data).
    ExactFit,
    GradientTolerance,
    StepTolerance,
    /// No step lowers χ² and the undamped model predicts a gain below
    /// rounding level.
    ResidualFloor,
    /// No damping level produced a lower residual.
    Stalled,
    MaxIterations,
    SingularNormalMatrix,
}

impl FitStatus {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            FitStatus::ExactFit | FitStatus::GradientTolerance | FitStatus::StepTolerance | FitStatus::ResidualFloor
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FitStatus::ExactFit => "exact-fit",
            FitStatus::GradientTolerance => "gradient-tolerance",
            FitStatus::StepTolerance => "step-tolerance",
            FitStatus::ResidualFloor => "residual-floor",
            FitStatus::Stalled => "stalled",
            FitStatus::MaxIterations => "max-iterations",
            FitStatus::SingularNormalMatrix => "singular-normal-matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// 1σ uncertainties; infinite when the normal matrix is singular.
    pub uncertainties: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    /// √χ² of the weighted residuals.
    pub residual_norm: f64,
    /// Largest cosine between the residual vector and a Jacobian column.
    pub gradient_cosine: f64,
    pub converged: bool,
    pub status: FitStatus,
    pub iterations: usize,
}

fn residuals<M: Model>(model: &M, x: &[f64], y: &[f64], w: &[f64], p: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len(), (0..x.len()).map(|i| (y[i] - model.value(x[i], p)) * w[i]))
}

/// Weighted Jacobian of the model by central differences (one-sided at a
/// domain edge).
pub fn jacobian<M: Model>(model: &M, x: &[f64], w: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let k = p.len();
    let mut j = DMatrix::zeros(n, k);
    let mut up = p.to_vec();
    let mut dn = p.to_vec();
    for c in 0..k {
        let h = (1e-6 * p[c].abs()).max(1e-9);
        up[c] = p[c] + h;
        dn[c] = p[c] - h;
        let up_ok = model.check(x, &up).is_ok();
        let dn_ok = model.check(x, &dn).is_ok();
        for i in 0..n {
            let d = match (up_ok, dn_ok) {
                (true, true) => (model.value(x[i], &up) - model.value(x[i], &dn)) / (2.0 * h),
                (true, false) => (model.value(x[i], &up) - model.value(x[i], p)) / h,
                _ => (model.value(x[i], p) - model.value(x[i], &dn)) / h,
            };
            j[(i, c)] = d * w[i];
        }
        up[c] = p[c];
        dn[c] = p[c];
    }
    j
}

fn gradient_cosine(j: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for c in 0..j.ncols() {
        let col = j.column(c);
        let cn = col.norm();
        if cn > 0.0 {
            worst = worst.max((col.dot(r) / (cn * rn)).abs());
        }
    }
    worst
}

/// Weighted least squares with Levenberg–Marquardt damping (×10 on a
/// rejected step, ÷10 on an accepted one).
pub fn fit<M: Model>(model: &M, x: &[f64], y: &[f64], sigma: Option<&[f64]>, init: &[f64]) -> Result<FitResult> {
    fit_with(model, x, y, sigma, init, &FitOptions::default())
}

pub fn fit_with<M: Model>(
    model: &M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    init: &[f64],
    opts: &FitOptions,
) -> Result<FitResult> {
    let n = x.len();
    let k = model.n_params();
    if y.len() != n {
        return Err(Error::domain("y", "length differs from x"));
    }
    if init.len() != k {
        return Err(Error::domain("init", "wrong parameter count for model"));
    }
    if n <= k {
        return Err(Error::domain("x", "need more data points than parameters"));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::domain("y", "data must be finite"));
    }
    let w: Vec<f64> = match sigma {
        Some(s) => {
            if s.len() != n || s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::domain("sigma", "must be positive with one entry per point"));
            }
            s.iter().map(|v| 1.0 / v).collect()
        }
        None => vec![1.0; n],
    };
    model.check(x, init)?;

    let mut p = init.to_vec();
    let mut r = residuals(model, x, y, &w, &p);
    let mut chi2 = r.norm_squared();
    if !chi2.is_finite() {
        return Err(Error::domain("init", "model is not finite at the initial parameters"));
    }
    let mut lambda = opts.initial_damping;
    let mut status = FitStatus::MaxIterations;
    let mut iterations = 0;
    let scale = y.iter().zip(&w).map(|(a, b)| (a * b).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        if r.norm() <= 1e-14 * scale * (n as f64).sqrt() {
            status = FitStatus::ExactFit;
            break;
        }
        let j = jacobian(model, x, &w, &p);
        if gradient_cosine(&j, &r) <= opts.gradient_tolerance {
            status = FitStatus::GradientTolerance;
            break;
        }
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * &r;
        if (0..k).any(|c| jtj[(c, c)] == 0.0) {
            status = FitStatus::SingularNormalMatrix;
            break;
        }
        loop {
            let mut a = jtj.clone();
            for c in 0..k {
                a[(c, c)] += lambda * jtj[(c, c)];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        status = FitStatus::Stalled;
                        break 'outer;
                    }
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let ok = model.check(x, &trial).is_ok();
            let r_trial = if ok { residuals(model, x, y, &w, &trial) } else { r.clone() };
            let chi2_trial = r_trial.norm_squared();
            if ok && chi2_trial.is_finite() && chi2_trial < chi2 {
                let pnorm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                let small = step.norm() <= opts.step_tolerance * (pnorm + opts.step_tolerance);
                p = trial;
                r = r_trial;
                chi2 = chi2_trial;
                lambda = (lambda / 10.0).max(1e-15);
                if small {
                    status = FitStatus::StepTolerance;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                let gain = jtj.clone().cholesky().map(|ch| jtr.dot(&ch.solve(&jtr)));
                status = match gain {
                    Some(g) if g <= 1e-12 * chi2 => FitStatus::ResidualFloor,
                    _ => FitStatus::Stalled,
                };
                break 'outer;
            }
        }
    }

    let j = jacobian(model, x, &w, &p);
    let cosine = gradient_cosine(&j, &r);
    if status == FitStatus::Stalled && cosine <= opts.gradient_tolerance {
        status = FitStatus::GradientTolerance;
    }
    let jtj = j.transpose() * &j;
    let dof = (n - k) as f64;
    let s2 = chi2 / dof;
    let covariance = if (0..k).any(|c| jtj[(c, c)] == 0.0) {
        None
    } else {
        jtj.clone().cholesky().map(|ch| {
            let inv = ch.inverse();
            let sym = (&inv + inv.transpose()) * 0.5;
            sym * s2
        })
    };
    if covariance.is_none() {
        status = FitStatus::SingularNormalMatrix;
    }
    let uncertainties = match &covariance {
        Some(c) => (0..k).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; k],
    };
    Ok(FitResult {
        params: p,
        uncertainties,
        covariance,
        residual_norm: chi2.sqrt(),
        gradient_cosine: cosine,
        converged: status.is_converged(),
        status,
        iterations,
    })
}
