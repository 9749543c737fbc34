use alloc::vec::Vec;


use super::models::{FitModel, Lorentzian};
use super::solver::fit;

/// A resolved spectral line. `width` is the full width at half maximum and
/// `amplitude` the height above the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left = h;
    for k in (0..i).rev() {
        if y[k] > h {
            break;
        }
        left = left.min(y[k]);
    }
    let mut right = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

fn half_width(x: &[f64], y: &[f64], i: usize, base: f64) -> f64 {
    let half = base + 0.5 * (y[i] - base);
    let cross = |k0: usize, k1: usize| {
        let t = (half - y[k0]) / (y[k1] - y[k0]);
        x[k0] + t * (x[k1] - x[k0])
    };
    let mut lo = None;
    for k in (0..i).rev() {
        if y[k] <= half {
            lo = Some(cross(k, k + 1));
            break;
        }
    }
    let mut hi = None;
    for k in i + 1..y.len() {
        if y[k] <= half {
            hi = Some(cross(k, k - 1));
            break;
        }
    }
    let dx = (x[x.len() - 1] - x[0]).abs() / (x.len() - 1) as f64;
    let hw = match (lo, hi) {
        (Some(a), Some(b)) => 0.5 * (b - a),
        (Some(a), None) => x[i] - a,
        (None, Some(b)) => b - x[i],
        (None, None) => 0.25 * (x[x.len() - 1] - x[0]),
    };
    hw.abs().max(dx)
}

/// Finds spectral lines: local maxima whose prominence clears the noise
/// floor (MAD of successive differences) are refined by Lorentzian fits. Returns an
/// empty list when nothing stands out of the noise.
pub fn extract_peak_centers(x: &[f64], y: &[f64]) -> Vec<Peak> {
    let n = x.len();
    if n < 5 || y.len() != n || x.iter().chain(y).any(|v| !v.is_finite()) {
        return Vec::new();
    }
    let mut tmp = y.to_vec();
    let base = median(&mut tmp);
    let mut dev: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let sigma = 1.4826 * median(&mut dev) / core::f64::consts::SQRT_2;
    let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = top - bottom;
    if !(range > 1e-12 * top.abs().max(bottom.abs()).max(f64::MIN_POSITIVE)) {
        return Vec::new();
    }
    let threshold = (5.0 * sigma).max(0.02 * range);

    let mut seeds: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] - base > threshold && prominence(y, i) > threshold {
            seeds.push(i);
        }
    }
    if seeds.is_empty() {
        return Vec::new();
    }

    let guess: Vec<Peak> = seeds
        .iter()
        .map(|&i| Peak { center: x[i], width: 2.0 * half_width(x, y, i, base), amplitude: y[i] - base })
        .collect();

    let mut out = if guess.len() == 2 { fit_doublet(x, y, base, &guess) } else { None }
        .unwrap_or_else(|| guess.iter().map(|g| fit_single(x, y, base, g).unwrap_or(*g)).collect());
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

fn inside(x: &[f64], c: f64) -> bool {
    let (a, b) = (x[0].min(x[x.len() - 1]), x[0].max(x[x.len() - 1]));
    c >= a && c <= b
}

fn fit_doublet(x: &[f64], y: &[f64], base: f64, g: &[Peak]) -> Option<Vec<Peak>> {
    let init = [base, g[0].amplitude, g[0].center, 0.5 * g[0].width, g[1].amplitude, g[1].center, 0.5 * g[1].width];
    let f = fit(&FitModel::LorentzianDoublet, x, y, None, &init).ok()?;
    let p = &f.params;
    let peaks = [
        Peak { center: p[2], width: 2.0 * p[3], amplitude: p[1] },
        Peak { center: p[5], width: 2.0 * p[6], amplitude: p[4] },
    ];
    let ok = peaks.iter().zip(g).all(|(pk, s)| {
        inside(x, pk.center) && pk.amplitude > 0.0 && (pk.center - s.center).abs() < s.width
    });
    ok.then(|| peaks.to_vec())
}

fn fit_single(x: &[f64], y: &[f64], base: f64, g: &Peak) -> Option<Peak> {
    let hw = 0.5 * g.width;
    let mut span = 4.0 * hw;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for _ in 0..8 {
        xs.clear();
        ys.clear();
        for (a, b) in x.iter().zip(y) {
            if (a - g.center).abs() <= span {
                xs.push(*a);
                ys.push(*b);
            }
        }
        if xs.len() >= 7 {
            break;
        }
        span *= 2.0;
    }
    if xs.len() < 5 {
        return None;
    }
    let f = fit(&Lorentzian, &xs, &ys, None, &[base, g.amplitude, g.center, hw]).ok()?;
    let p = &f.params;
    let pk = Peak { center: p[2], width: 2.0 * p[3], amplitude: p[1] };
    ((pk.center - g.center).abs() < g.width && pk.amplitude > 0.0).then_some(pk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::models::Model;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let x = grid(0.0, 100.0, 50);
        assert!(extract_peak_centers(&x, &vec![3.0; 50]).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise = Normal::new(0.0, 1e-3).unwrap();
        let y: Vec<f64> = x.iter().map(|_| 1.0 + noise.sample(&mut rng)).collect();
        assert!(extract_peak_centers(&x, &y).is_empty());
    }

    #[test]
    fn overlapping_pair_is_resolved() {
        let x = grid(40.0, 190.0, 301);
        let truth = [0.2, 1.0, 100.0, 10.0, 0.6, 125.0, 8.0];
        let y = FitModel::LorentzianDoublet.evaluate(&x, &truth).unwrap();
        let p = extract_peak_centers(&x, &y);
        assert_eq!(p.len(), 2);
        for (pk, (c, hw, a)) in p.iter().zip([(100.0, 10.0, 1.0), (125.0, 8.0, 0.6)]) {
            assert!((pk.center - c).abs() / c < 0.03);
            assert!((pk.width - 2.0 * hw).abs() / (2.0 * hw) < 0.03);
            assert!((pk.amplitude - a).abs() / a < 0.03);
        }
    }

    #[test]
    fn three_separate_lines() {
        let x = grid(0.0, 3000.0, 601);
        let y: Vec<f64> = x
            .iter()
            .map(|v| {
                Lorentzian.value(*v, &[0.0, 1.0, 690.0, 20.0])
                    + Lorentzian.value(*v, &[0.0, 0.3, 1040.0, 20.0])
                    + Lorentzian.value(*v, &[0.0, 0.8, 1730.0, 30.0])
            })
            .collect();
        let p = extract_peak_centers(&x, &y);
        let c: Vec<f64> = p.iter().map(|p| p.center).collect();
        assert_eq!(c.len(), 3, "{c:?}");
        for (a, b) in c.iter().zip([690.0, 1040.0, 1730.0]) {
            assert!((a - b).abs() < 2.5);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(extract_peak_centers(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).is_empty());
    }
}
