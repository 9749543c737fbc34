//! Named experiments. Each returns an [`ExperimentResult`] whose columns all
//! share the sweep length.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use num_traits::Float;

use super::{run_sequence, MwMode, PulseSequence, SequenceOutput, SystemParams};
use crate::coherence::{
    fit_rabi, rabi_power_scan, simulate_protocol, simulate_rabi, DriveParams, Protocol, ProtocolKind,
};
use crate::fitting::{biexp_argmax, extract_peak_centers, fit, FitModel};
use crate::photodynamics::{readout_overshoot, LaserPulse, MixedDecay, READOUT_WINDOW};
use crate::spin_model::{
    enumerate_orientations, group_by_field, lac_field, tilted_direction, transition_frequencies, DefectOrientation,
    OrientationFamily, Transition,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub unit: String,
    /// Values are fractions meant to be shown in percent.
    pub percent: bool,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Series { name: name.to_string(), unit: unit.to_string(), percent: false, values }
    }

    pub fn percent(name: &str, values: Vec<f64>) -> Self {
        Series { name: name.to_string(), unit: "1".to_string(), percent: true, values }
    }
}

/// Signal restricted to one orientation family, scaled so that the
/// multiplicity-weighted sum over families equals the total signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySeries {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub multiplicity: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub recipe: String,
    /// One axis for sweeps, two (flattened, first axis slowest) for maps.
    pub axes: Vec<Series>,
    pub signal: Series,
    pub extra: Vec<Series>,
    pub per_family: Vec<FamilySeries>,
    pub summary: Vec<Scalar>,
}

impl ExperimentResult {
    fn new(recipe: &str, axes: Vec<Series>, signal: Series) -> Self {
        ExperimentResult { recipe: recipe.to_string(), axes, signal, extra: Vec::new(), per_family: Vec::new(), summary: Vec::new() }
    }

    fn scalar(&mut self, name: &str, unit: &str, value: f64) {
        self.summary.push(Scalar { name: name.to_string(), unit: unit.to_string(), value });
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn column(&self, name: &str) -> Option<&Series> {
        self.axes.iter().chain(core::iter::once(&self.signal)).chain(&self.extra).find(|s| s.name == name)
    }

    /// Σ_f (multiplicity_f / Σ multiplicity) · family_f, pointwise.
    pub fn family_weighted_sum(&self) -> Option<Vec<f64>> {
        if self.per_family.is_empty() {
            return None;
        }
        let total: usize = self.per_family.iter().map(|f| f.multiplicity).sum();
        let mut out = vec![0.0; self.signal.values.len()];
        for f in &self.per_family {
            let w = f.multiplicity as f64 / total as f64;
            for (o, v) in out.iter_mut().zip(&f.values) {
                *o += w * v;
            }
        }
        Some(out)
    }
}

/// `start, start + step, …` up to `stop` inclusive (within 1e-9 of a step).
pub fn arange(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(Error::domain("step", "need finite start <= stop and step > 0"));
    }
    let n = Float::floor((stop - start) / step + 1e-9) as usize;
    if n > 10_000_000 {
        return Err(Error::domain("step", "sweep too long"));
    }
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn check_sweep(name: &'static str, v: &[f64], positive: bool) -> Result<()> {
    if v.is_empty() {
        return Err(Error::domain(name, "sweep is empty"));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0 || (positive && *x == 0.0)) {
        return Err(Error::domain(name, if positive { "values must be > 0" } else { "values must be >= 0" }));
    }
    Ok(())
}

/// Vertex of the parabola through the three samples around each strict
/// local maximum of `y`.
pub fn parabolic_peaks(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            out.push(parabolic_vertex(x, y, i));
        }
    }
    out
}

fn parabolic_vertex(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
    if !(a < 0.0) {
        return (x1, y1);
    }
    let xv = -b / (2.0 * a);
    let c = y1 - a * x1 * x1 - b * x1;
    (xv, a * xv * xv + b * xv + c)
}

fn families_for(orientations: &[DefectOrientation], b: &Vector3<f64>) -> Result<Vec<OrientationFamily>> {
    let n = b.norm();
    if n == 0.0 {
        return Ok(vec![OrientationFamily {
            theta_deg: 0.0,
            phi_deg: 0.0,
            multiplicity: orientations.len(),
            members: (0..orientations.len()).collect(),
        }]);
    }
    group_by_field(orientations, &(b / n))
}

/// Per-family (Σ_members (a_o − b_o) / multiplicity) / reference.
fn family_delta(fams: &[OrientationFamily], a: &SequenceOutput, b: &SequenceOutput, label: &str, reference: f64) -> Result<Vec<f64>> {
    let i = a.index(label)?;
    let j = b.index(label)?;
    Ok(fams
        .iter()
        .map(|f| {
            let s: f64 = f.members.iter().map(|&o| a.per_orientation[o][i] - b.per_orientation[o][j]).sum();
            s / f.multiplicity as f64 / reference
        })
        .collect())
}

fn push_families(res: &mut ExperimentResult, fams: &[OrientationFamily], columns: Vec<Vec<f64>>) {
    for (k, f) in fams.iter().enumerate() {
        let values = columns.iter().map(|c| c[k]).collect();
        res.per_family.push(FamilySeries { theta_deg: f.theta_deg, phi_deg: f.phi_deg, multiplicity: f.multiplicity, values });
    }
}

fn rel_delta(x: &[f64]) -> f64 {
    x.iter().cloned().fold(0.0, f64::max)
}

// ---------------------------------------------------------------- ODMR

#[derive(Debug, Clone, PartialEq)]
pub struct OdmrParams {
    pub frequencies: Vec<f64>,
    /// Lab-frame field (mT).
    pub field: Vector3<f64>,
    pub laser: LaserPulse,
    pub t_a: f64,
    pub t_b: f64,
    pub mw_duration_ns: f64,
    /// Ω/2π (MHz); the default makes the pulse a resonant π rotation.
    pub rabi_rate: f64,
    pub mode: MwMode,
    pub target: Transition,
}

impl Default for OdmrParams {
    fn default() -> Self {
        OdmrParams {
            frequencies: arange(400.0, 2000.0, 5.0).expect("static grid"),
            field: Vector3::zeros(),
            laser: LaserPulse::default(),
            t_a: 5.0,
            t_b: 5.0,
            mw_duration_ns: 120.0,
            rabi_rate: 1e3 / (2.0 * 120.0),
            mode: MwMode::NearestPair,
            target: Transition::PlusZero,
        }
    }
}

fn odmr_sequence(p: &OdmrParams, t_a: f64, t_b: f64, mw: Option<DriveParams>) -> PulseSequence {
    let seq = PulseSequence::new().laser(p.laser.power, p.laser.duration).window(0.0, READOUT_WINDOW, "S").wait(t_a);
    match mw {
        Some(d) => seq.microwave(d, p.mw_duration_ns, p.mode).wait(t_b),
        None => seq.wait(p.mw_duration_ns * 1e-3 + t_b),
    }
}

/// C(f) = S_MW(f)/S_off − 1 with S the first 200 ns of the readout pulse.
pub fn odmr_spectrum(sys: &SystemParams, p: &OdmrParams) -> Result<ExperimentResult> {
    check_sweep("frequencies", &p.frequencies, true)?;
    let o = enumerate_orientations();
    let fams = families_for(&o, &p.field)?;
    let off = run_sequence(&odmr_sequence(p, p.t_a, p.t_b, None), sys, &p.field, &o)?;
    let s_off = off.get("S")?;
    let mut contrast = Vec::with_capacity(p.frequencies.len());
    let mut fam_cols = Vec::with_capacity(p.frequencies.len());
    for &f in &p.frequencies {
        let drive = DriveParams { frequency: f, rabi_rate: p.rabi_rate, phase: 0.0, target: p.target };
        let on = run_sequence(&odmr_sequence(p, p.t_a, p.t_b, Some(drive)), sys, &p.field, &o)?;
        contrast.push(on.get("S")? / s_off - 1.0);
        fam_cols.push(family_delta(&fams, &on, &off, "S", s_off)?);
    }
    let mut res = ExperimentResult::new(
        "odmr",
        vec![Series::new("frequency", "MHz", p.frequencies.clone())],
        Series::percent("contrast", contrast.clone()),
    );
    push_families(&mut res, &fams, fam_cols);
    for (k, pk) in extract_peak_centers(&p.frequencies, &contrast).iter().enumerate() {
        res.scalar(&format!("peak_{}_center", k + 1), "MHz", pk.center);
        res.scalar(&format!("peak_{}_fwhm", k + 1), "MHz", pk.width);
        res.scalar(&format!("peak_{}_amplitude", k + 1), "1", pk.amplitude);
    }
    let floor = 0.05 * rel_delta(&contrast);
    let mut k = 0;
    for (x, y) in parabolic_peaks(&p.frequencies, &contrast) {
        if y > floor {
            k += 1;
            res.scalar(&format!("grid_peak_{k}"), "MHz", x);
        }
    }
    Ok(res)
}

// ---------------------------------------------------------------- contrast map

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMapParams {
    pub t_a: Vec<f64>,
    pub t_b: Vec<f64>,
    pub field: Vector3<f64>,
    pub laser: LaserPulse,
    pub mw_duration_ns: f64,
    pub rabi_rate: f64,
    pub mode: MwMode,
    pub target: Transition,
}

impl Default for ContrastMapParams {
    fn default() -> Self {
        let t = vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 15.0, 20.0];
        ContrastMapParams {
            t_a: t.clone(),
            t_b: t,
            field: Vector3::zeros(),
            laser: LaserPulse::default(),
            mw_duration_ns: 120.0,
            rabi_rate: 1e3 / (2.0 * 120.0),
            mode: MwMode::IdealSwap,
            target: Transition::PlusZero,
        }
    }
}

/// ODMR contrast on resonance with `target` against the delays before (t_a)
/// and after (t_b) the microwave pulse.
pub fn contrast_map(sys: &SystemParams, p: &ContrastMapParams) -> Result<ExperimentResult> {
    check_sweep("t_a", &p.t_a, false)?;
    check_sweep("t_b", &p.t_b, false)?;
    let o = enumerate_orientations();
    let centre = transition_frequencies(&sys.zfs, &p.field, &o[0])?.get(p.target);
    let odmr = OdmrParams {
        frequencies: vec![centre],
        field: p.field,
        laser: p.laser,
        t_a: 0.0,
        t_b: 0.0,
        mw_duration_ns: p.mw_duration_ns,
        rabi_rate: p.rabi_rate,
        mode: p.mode,
        target: p.target,
    };
    let drive = DriveParams { frequency: centre, rabi_rate: p.rabi_rate, phase: 0.0, target: p.target };
    let (mut xa, mut xb, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for &ta in &p.t_a {
        for &tb in &p.t_b {
            let on = run_sequence(&odmr_sequence(&odmr, ta, tb, Some(drive)), sys, &p.field, &o)?;
            let off = run_sequence(&odmr_sequence(&odmr, ta, tb, None), sys, &p.field, &o)?;
            xa.push(ta);
            xb.push(tb);
            c.push(on.get("S")? / off.get("S")? - 1.0);
        }
    }
    let best = (0..c.len()).fold(0, |b, i| if c[i] > c[b] { i } else { b });
    let mut res = ExperimentResult::new(
        "contrast-map",
        vec![Series::new("t_a", "us", xa.clone()), Series::new("t_b", "us", xb.clone())],
        Series::percent("contrast", c.clone()),
    );
    res.scalar("argmax_t_a", "us", xa[best]);
    res.scalar("argmax_t_b", "us", xb[best]);
    res.scalar("max_contrast", "1", c[best]);
    Ok(res)
}

// ---------------------------------------------------------------- field split

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSplitParams {
    pub fields: Vec<f64>,
    pub direction: Vector3<f64>,
}

impl Default for FieldSplitParams {
    fn default() -> Self {
        FieldSplitParams { fields: arange(0.0, 30.0, 0.5).expect("static grid"), direction: Vector3::new(1.0, 1.0, 1.0) }
    }
}

/// |+⟩ ↔ |0⟩ line of each orientation family against field magnitude.
pub fn field_split(sys: &SystemParams, p: &FieldSplitParams) -> Result<ExperimentResult> {
    check_sweep("fields", &p.fields, false)?;
    sys.zfs.validate()?;
    let n = p.direction.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain("direction", "must be a non-zero vector"));
    }
    let dir = p.direction / n;
    let o = enumerate_orientations();
    let fams = group_by_field(&o, &dir)?;
    let mut res = ExperimentResult::new(
        "field-split",
        vec![Series::new("field", "mT", p.fields.clone())],
        Series::new("mean_line", "MHz", Vec::new()),
    );
    let mut cols = vec![Vec::with_capacity(p.fields.len()); fams.len()];
    for &b in &p.fields {
        for (k, f) in fams.iter().enumerate() {
            cols[k].push(transition_frequencies(&sys.zfs, &(dir * b), &o[f.members[0]])?.plus_zero);
        }
    }
    let total: usize = fams.iter().map(|f| f.multiplicity).sum();
    res.signal.values = (0..p.fields.len())
        .map(|i| fams.iter().zip(&cols).map(|(f, c)| c[i] * f.multiplicity as f64).sum::<f64>() / total as f64)
        .collect();
    push_families(&mut res, &fams, (0..p.fields.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect());
    for (k, f) in fams.iter().enumerate() {
        res.scalar(&format!("family_{}_multiplicity", k + 1), "1", f.multiplicity as f64);
        res.scalar(&format!("family_{}_theta", k + 1), "deg", f.theta_deg);
        res.scalar(&format!("family_{}_phi", k + 1), "deg", f.phi_deg);
    }
    Ok(res)
}

// ---------------------------------------------------------------- LAC sweep

#[derive(Debug, Clone, PartialEq)]
pub struct LacParams {
    pub fields: Vec<f64>,
    pub axis: Vector3<f64>,
    /// Tilt of the field away from `axis` (degrees) ...
    pub misalignment_deg: f64,
    /// ... in the plane containing this direction.
    pub tilt_towards: Vector3<f64>,
    pub laser: LaserPulse,
    pub delay: f64,
}

impl Default for LacParams {
    fn default() -> Self {
        LacParams {
            fields: arange(0.0, 60.0, 0.25).expect("static grid"),
            axis: Vector3::new(1.0, 1.0, 1.0),
            misalignment_deg: 1.5,
            tilt_towards: Vector3::new(-1.0, -1.0, 2.0),
            laser: LaserPulse::default(),
            delay: 10.0,
        }
    }
}

/// PL change S(B)/S(0) − 1 of the pulse + delay cycle with the field close
/// to `axis`.
pub fn lac_sweep(sys: &SystemParams, p: &LacParams) -> Result<ExperimentResult> {
    check_sweep("fields", &p.fields, false)?;
    if !(p.misalignment_deg.is_finite() && p.misalignment_deg >= 0.0) {
        return Err(Error::domain("misalignment", "must be finite and >= 0"));
    }
    if !(p.delay.is_finite() && p.delay >= 0.0) {
        return Err(Error::domain("delay", "must be finite and >= 0"));
    }
    let b_lac = lac_field(&sys.zfs)?;
    let axis = p.axis.try_normalize(1e-300).ok_or_else(|| Error::domain("axis", "must be non-zero"))?;
    let dir = if p.misalignment_deg == 0.0 { axis } else { tilted_direction(&axis, &p.tilt_towards, p.misalignment_deg)? };
    let o = enumerate_orientations();
    let fams = group_by_field(&o, &axis)?;
    let seq = PulseSequence::new().laser(p.laser.power, p.laser.duration).window(0.0, READOUT_WINDOW, "S").wait(p.delay);
    let zero = run_sequence(&seq, sys, &Vector3::zeros(), &o)?;
    let s0 = zero.get("S")?;
    let mut signal = Vec::with_capacity(p.fields.len());
    let mut fam_cols = Vec::with_capacity(p.fields.len());
    for &b in &p.fields {
        let out = run_sequence(&seq, sys, &(dir * b), &o)?;
        signal.push(out.get("S")? / s0 - 1.0);
        fam_cols.push(family_delta(&fams, &out, &zero, "S", s0)?);
    }
    let mut res = ExperimentResult::new(
        "lac-sweep",
        vec![Series::new("field", "mT", p.fields.clone())],
        Series::percent("pl_change", signal.clone()),
    );
    push_families(&mut res, &fams, fam_cols);
    res.scalar("lac_field", "mT", b_lac);
    let best = (0..signal.len()).fold(0, |b, i| if signal[i] > signal[b] { i } else { b });
    let (x, y) = if best > 0 && best + 1 < signal.len() { parabolic_vertex(&p.fields, &signal, best) } else { (p.fields[best], signal[best]) };
    res.scalar("peak_field", "mT", x);
    res.scalar("peak_value", "1", y);
    Ok(res)
}

// ---------------------------------------------------------------- TRPL differential

#[derive(Debug, Clone, PartialEq)]
pub struct TrplParams {
    pub delays: Vec<f64>,
    pub field: Vector3<f64>,
    pub laser: LaserPulse,
}

impl Default for TrplParams {
    fn default() -> Self {
        TrplParams { delays: arange(1.0, 150.0, 1.0).expect("static grid"), field: Vector3::new(0.0, 0.0, 50.0), laser: LaserPulse::default() }
    }
}

/// ΔS_B(τ) = (S/R)(B) − (S/R)(0) for the pulse + dark delay cycle, with a
/// bi-exponential fit a·(e^(−τ/τ1) − e^(−τ/τ_eff)).
pub fn trpl_differential(sys: &SystemParams, p: &TrplParams) -> Result<ExperimentResult> {
    check_sweep("delays", &p.delays, true)?;
    let o = enumerate_orientations();
    let fams = families_for(&o, &p.field)?;
    let (mut zero, mut field, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    let mut fam_cols = Vec::new();
    for &tau in &p.delays {
        let seq = PulseSequence::new()
            .laser(p.laser.power, p.laser.duration)
            .window(0.0, READOUT_WINDOW, "S")
            .window(p.laser.duration - READOUT_WINDOW, READOUT_WINDOW, "R")
            .wait(tau);
        let a = run_sequence(&seq, sys, &Vector3::zeros(), &o)?;
        let b = run_sequence(&seq, sys, &p.field, &o)?;
        let (r0, r1) = (a.get("S")? / a.get("R")?, b.get("S")? / b.get("R")?);
        zero.push(r0);
        field.push(r1);
        delta.push(r1 - r0);
        let (ra, rb) = (a.get("R")?, b.get("R")?);
        fam_cols.push(
            fams.iter()
                .map(|f| {
                    let m = f.multiplicity as f64;
                    let sb: f64 = f.members.iter().map(|&i| b.per_orientation[i][0]).sum::<f64>() / m;
                    let sa: f64 = f.members.iter().map(|&i| a.per_orientation[i][0]).sum::<f64>() / m;
                    sb / rb - sa / ra
                })
                .collect(),
        );
    }
    let mut res = ExperimentResult::new(
        "trpl-diff",
        vec![Series::new("delay", "us", p.delays.clone())],
        Series::new("delta_s_over_r", "1", delta.clone()),
    );
    res.extra.push(Series::new("s_over_r_zero_field", "1", zero));
    res.extra.push(Series::new("s_over_r_field", "1", field));
    push_families(&mut res, &fams, fam_cols);
    let best = (0..delta.len()).fold(0, |b, i| if delta[i] > delta[b] { i } else { b });
    res.scalar("grid_argmax", "us", p.delays[best]);
    let peak = delta[best];
    if delta.len() > 3 && peak > 0.0 {
        let tau_eff0 = (p.delays[best] / 2.0).max(1e-3);
        let init = [2.0 * peak, 5.0 * p.delays[best], tau_eff0];
        if let Ok(f) = fit(&FitModel::BiexpDiff, &p.delays, &delta, None, &init) {
            res.scalar("fit_a", "1", f.params[0]);
            res.scalar("fit_tau_1", "us", f.params[1]);
            res.scalar("fit_tau_eff", "us", f.params[2]);
            res.scalar("fit_converged", "1", if f.converged { 1.0 } else { 0.0 });
            res.scalar("fit_argmax", "us", biexp_argmax(f.params[1], f.params[2]));
        }
    }
    Ok(res)
}

// ---------------------------------------------------------------- lifetime differential

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeDiffParams {
    pub delays: Vec<f64>,
    pub target: Transition,
    pub rabi_rate: f64,
    /// Rotation angle of the inserted pulse (π for the measurement, 2π as a null check).
    pub pulse_angle: f64,
    pub wait: f64,
    pub laser: LaserPulse,
    pub field: Vector3<f64>,
}

impl Default for LifetimeDiffParams {
    fn default() -> Self {
        LifetimeDiffParams {
            delays: arange(0.25, 150.0, 0.25).expect("static grid"),
            target: Transition::PlusZero,
            rabi_rate: crate::coherence::rabi_rate_from_half_pi(7.2),
            pulse_angle: PI,
            wait: 5.0,
            laser: LaserPulse::default(),
            field: Vector3::zeros(),
        }
    }
}

/// (S/R) with a resonant pulse after the initial wait minus (S/R) without,
/// against the delay τ between pulse and readout; fitted with
/// |a_l|·e^(−τ/τ_l) − |a_0|·e^(−τ/τ_0).
pub fn lifetime_differential(sys: &SystemParams, p: &LifetimeDiffParams) -> Result<ExperimentResult> {
    check_sweep("delays", &p.delays, false)?;
    if !(p.rabi_rate.is_finite() && p.rabi_rate > 0.0) {
        return Err(Error::domain("rabi_rate", "must be finite and > 0"));
    }
    if !(p.pulse_angle.is_finite() && p.pulse_angle >= 0.0) {
        return Err(Error::domain("pulse_angle", "must be finite and >= 0"));
    }
    let o = enumerate_orientations();
    let centre = transition_frequencies(&sys.zfs, &p.field, &o[0])?.get(p.target);
    let drive = DriveParams { frequency: centre, rabi_rate: p.rabi_rate, phase: 0.0, target: p.target };
    let pulse_ns = drive.pulse_duration(p.pulse_angle) * 1e3;
    let head = || {
        PulseSequence::new()
            .laser(p.laser.power, p.laser.duration)
            .window(0.0, READOUT_WINDOW, "S")
            .window(p.laser.duration - READOUT_WINDOW, READOUT_WINDOW, "R")
            .wait(p.wait)
    };
    let mut d = Vec::with_capacity(p.delays.len());
    for &tau in &p.delays {
        let with = run_sequence(&head().microwave(drive, pulse_ns, MwMode::IdealSwap).wait(tau), sys, &p.field, &o)?;
        let without = run_sequence(&head().wait(pulse_ns * 1e-3 + tau), sys, &p.field, &o)?;
        d.push(with.get("S")? / with.get("R")? - without.get("S")? / without.get("R")?);
    }
    let mut res = ExperimentResult::new(
        "lifetime-diff",
        vec![Series::new("delay", "us", p.delays.clone())],
        Series::new("delta_s_over_r", "1", d.clone()),
    );
    let (a, b) = p.target.levels();
    let g = MixedDecay::zero_field(&sys.rates).rates;
    let (long, short) = if g[a] < g[b] { (a, b) } else { (b, a) };
    let peak = d.iter().cloned().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak > 0.0 && d.len() > 5 {
        let init = [2.0 * peak, 1.0 / g[long], 2.0 * peak, 1.0 / g[short]];
        if let Ok(f) = fit(&FitModel::LifetimeDiff, &p.delays, &d, None, &init) {
            res.scalar("fit_a_long", "1", f.params[0].abs());
            res.scalar("fit_tau_long", "us", f.params[1]);
            res.scalar("fit_a_short", "1", f.params[2].abs());
            res.scalar("fit_tau_short", "us", f.params[3]);
            res.scalar("fit_converged", "1", if f.converged { 1.0 } else { 0.0 });
        }
    }
    res.scalar("pulse_duration", "ns", pulse_ns);
    Ok(res)
}

// ---------------------------------------------------------------- Rabi

#[derive(Debug, Clone, PartialEq)]
pub struct RabiParams {
    pub durations: Vec<f64>,
    pub rabi_rate: f64,
    pub target: Transition,
    /// Optional power scan (µW) with Ω = coefficient·√P.
    pub powers: Vec<f64>,
    pub coefficient: f64,
}

impl Default for RabiParams {
    fn default() -> Self {
        RabiParams {
            durations: arange(0.0, 1.0, 0.001).expect("static grid"),
            rabi_rate: crate::coherence::rabi_rate_from_half_pi(7.2),
            target: Transition::PlusZero,
            powers: Vec::new(),
            coefficient: 1.0,
        }
    }
}

pub fn rabi(sys: &SystemParams, p: &RabiParams) -> Result<ExperimentResult> {
    let drive = DriveParams { frequency: 1.0, rabi_rate: p.rabi_rate, phase: 0.0, target: p.target };
    let c = simulate_rabi(&drive, &sys.rates, &sys.coherence, &p.durations)?;
    let mut res = ExperimentResult::new(
        "rabi",
        vec![Series::new("duration", "us", p.durations.clone())],
        Series::new("transferred_population", "1", c.contrast.clone()),
    );
    if p.rabi_rate > 0.0 {
        let f = fit_rabi(&c)?;
        res.scalar("fit_frequency", "MHz", f.frequency);
        res.scalar("fit_decay_time", "us", f.decay_time);
        res.scalar("fit_decay_time_sigma", "us", f.fit.uncertainties[2]);
    }
    if !p.powers.is_empty() {
        let s = rabi_power_scan(&p.powers, p.coefficient, p.target, &sys.rates, &sys.coherence, &p.durations)?;
        res.scalar("scan_slope", "MHz/sqrt(uW)", s.slope);
        res.scalar("scan_slope_sigma", "MHz/sqrt(uW)", s.slope_sigma);
        res.scalar("scan_intercept", "MHz", s.intercept);
        res.scalar("scan_intercept_sigma", "MHz", s.intercept_sigma);
    }
    Ok(res)
}

// ---------------------------------------------------------------- Ramsey / echo / CPMG

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRecipeParams {
    pub protocol: Protocol,
    pub times: Vec<f64>,
}

impl Default for CoherenceRecipeParams {
    fn default() -> Self {
        CoherenceRecipeParams {
            protocol: Protocol::new(ProtocolKind::Echo, Transition::PlusZero),
            times: arange(0.0, 10.0, 0.05).expect("static grid"),
        }
    }
}

/// Contrast against total free evolution time, with a mono-exponential fit.
pub fn coherence(sys: &SystemParams, p: &CoherenceRecipeParams) -> Result<ExperimentResult> {
    let c = simulate_protocol(&p.protocol, &sys.rates, &sys.coherence, &p.times)?;
    let mut res = ExperimentResult::new(
        "coherence",
        vec![Series::new("free_time", "us", p.times.clone())],
        Series::new("contrast", "1", c.contrast.clone()),
    );
    if p.protocol.kind != ProtocolKind::Rabi && p.times.len() > 3 {
        let guess = match p.protocol.kind {
            ProtocolKind::Ramsey => sys.coherence.t2_star,
            _ => sys.coherence.echo_time(&sys.rates, p.protocol.target),
        };
        let init = [c.contrast[0], guess, 0.0];
        let f = fit(&FitModel::Monoexp, &p.times, &c.contrast, None, &init)?;
        res.scalar("fit_amplitude", "1", f.params[0]);
        res.scalar("fit_decay_time", "us", f.params[1]);
        res.scalar("fit_decay_time_sigma", "us", f.uncertainties[1]);
        res.scalar("fit_offset", "1", f.params[2]);
    }
    Ok(res)
}

// ---------------------------------------------------------------- readout overshoot

#[derive(Debug, Clone, PartialEq)]
pub struct OvershootParams {
    pub powers: Vec<f64>,
    pub pulse_duration: f64,
    pub delay: f64,
}

impl Default for OvershootParams {
    fn default() -> Self {
        OvershootParams {
            powers: vec![10.0, 15.0, 20.0, 30.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0],
            pulse_duration: 1.0,
            delay: 15.0,
        }
    }
}

/// Peak-over-plateau PL excess of the readout pulse against laser power,
/// at zero field.
pub fn overshoot_power_sweep(sys: &SystemParams, p: &OvershootParams) -> Result<ExperimentResult> {
    check_sweep("powers", &p.powers, true)?;
    let mixed = MixedDecay::zero_field(&sys.rates);
    let mut v = Vec::with_capacity(p.powers.len());
    for &power in &p.powers {
        let pulse = LaserPulse { duration: p.pulse_duration, power };
        v.push(readout_overshoot(&sys.rates, &mixed, &pulse, p.delay)?);
    }
    let mut res = ExperimentResult::new(
        "overshoot",
        vec![Series::new("power", "uW", p.powers.clone())],
        Series::percent("overshoot", v),
    );
    res.scalar("detrap_rate_per_uw", "1/(us*uW)", sys.rates.detrap_coeff);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arange_is_inclusive() {
        let v = arange(400.0, 2000.0, 5.0).unwrap();
        assert_eq!(v.len(), 321);
        assert_eq!(*v.last().unwrap(), 2000.0);
        assert!(arange(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - (v - 2.3) * (v - 2.3)).collect();
        let p = parabolic_peaks(&x, &y);
        assert_eq!(p.len(), 1);
        assert!((p[0].0 - 2.3).abs() < 1e-12 && (p[0].1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn odmr_lines_at_zero_field() {
        let sys = SystemParams::default();
        let p = OdmrParams::default();
        let r = odmr_spectrum(&sys, &p).unwrap();
        let c1 = r.summary_value("peak_1_center").unwrap();
        let c2 = r.summary_value("peak_2_center").unwrap();
        assert!((c1 - 690.0).abs() < 2.5 && (c2 - 1730.0).abs() < 2.5, "{c1} {c2}");
        assert!(r.summary_value("peak_3_center").is_none());
        let i = p.frequencies.iter().position(|f| *f == 690.0).unwrap();
        assert!(r.signal.values[i] > 0.0);
        let j = p.frequencies.iter().position(|f| *f == 1040.0).unwrap();
        assert!(r.signal.values[j].abs() < 0.05 * r.signal.values[i]);
        let sum = r.family_weighted_sum().unwrap();
        for (a, b) in sum.iter().zip(&r.signal.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn contrast_map_shape() {
        let sys = SystemParams::default();
        let r = contrast_map(&sys, &ContrastMapParams::default()).unwrap();
        let ta = r.summary_value("argmax_t_a").unwrap();
        let tb = r.summary_value("argmax_t_b").unwrap();
        assert!((3.0..=8.0).contains(&ta) && (3.0..=8.0).contains(&tb), "{ta} {tb}");
        assert!(r.signal.values.iter().all(|c| *c >= 0.0));
        let long = contrast_map(&sys, &ContrastMapParams { t_a: vec![200.0], t_b: vec![200.0], ..Default::default() }).unwrap();
        assert!(long.signal.values[0] < 0.01 * r.summary_value("max_contrast").unwrap());
    }

    #[test]
    fn field_split_families() {
        let sys = SystemParams::default();
        let r = field_split(&sys, &FieldSplitParams::default()).unwrap();
        let m: Vec<usize> = r.per_family.iter().map(|f| f.multiplicity).collect();
        let mut sorted = m.clone();
        sorted.sort();
        assert_eq!(sorted, vec![3, 3, 6]);
        for f in &r.per_family {
            assert!((f.values[0] - 690.0).abs() < 1e-9);
        }
        let par = r.per_family.iter().find(|f| f.theta_deg < 1e-6).unwrap();
        assert!(*par.values.last().unwrap() < 690.0);
        for f in r.per_family.iter().filter(|f| f.theta_deg > 1.0) {
            assert!(*f.values.last().unwrap() > 690.0);
        }
        let sum = r.family_weighted_sum().unwrap();
        for (a, b) in sum.iter().zip(&r.signal.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn lac_peak_and_aligned_limit() {
        let sys = SystemParams::default();
        let p = LacParams { fields: arange(30.0, 48.0, 0.25).unwrap(), ..Default::default() };
        let r = lac_sweep(&sys, &p).unwrap();
        let peak = r.summary_value("peak_field").unwrap();
        assert!((peak - 39.0).abs() < 1.0, "{peak}");
        let sum = r.family_weighted_sum().unwrap();
        for (a, b) in sum.iter().zip(&r.signal.values) {
            assert!((a - b).abs() < 1e-9);
        }
        let swapped = SystemParams { rates: sys.rates.with_plus_minus_swapped(), ..sys };
        let q = lac_sweep(&swapped, &p).unwrap();
        assert!((q.summary_value("peak_field").unwrap() - peak).abs() <= 0.25);

        let top = r.summary_value("peak_value").unwrap();
        let at = |f: f64| r.signal.values[p.fields.iter().position(|x| *x == f).unwrap()];
        assert!(at(35.0) < top);
        assert!(p.fields.iter().zip(&r.signal.values).filter(|(f, _)| **f > 41.0).all(|(_, v)| *v < top));

        let aligned = lac_sweep(&sys, &LacParams { misalignment_deg: 0.0, ..p.clone() }).unwrap();
        assert!(aligned.signal.values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn lifetime_differential_two_pi_is_null() {
        let sys = SystemParams::default();
        let p = LifetimeDiffParams { delays: vec![0.5, 5.0, 30.0], pulse_angle: 2.0 * PI, ..Default::default() };
        let r = lifetime_differential(&sys, &p).unwrap();
        let q = lifetime_differential(&sys, &LifetimeDiffParams { delays: vec![0.5, 5.0, 30.0], ..Default::default() }).unwrap();
        let scale = q.signal.values.iter().cloned().fold(0.0, |m: f64, v| m.max(v.abs()));
        for v in &r.signal.values {
            assert!(v.abs() < 0.05 * scale, "{v} vs {scale}");
        }
    }

    #[test]
    fn lifetime_differential_recovers_lifetimes() {
        let sys = SystemParams::default();
        let r = lifetime_differential(&sys, &LifetimeDiffParams::default()).unwrap();
        let t0 = r.summary_value("fit_tau_short").unwrap();
        let tp = r.summary_value("fit_tau_long").unwrap();
        assert!((t0 - 1.9).abs() / 1.9 < 0.1, "{t0} {tp}");
        assert!((tp - 54.0).abs() / 54.0 < 0.1, "{tp}");
    }

    #[test]
    fn lifetime_differential_sign_changes_match_fit() {
        let sys = SystemParams::default();
        let r = lifetime_differential(&sys, &LifetimeDiffParams::default()).unwrap();
        let (x, v) = (&r.axes[0].values, &r.signal.values);
        let flips: Vec<usize> = (1..v.len()).filter(|&i| v[i - 1].signum() != v[i].signum()).collect();
        let (al, tl) = (r.summary_value("fit_a_long").unwrap(), r.summary_value("fit_tau_long").unwrap());
        let (a0, t0) = (r.summary_value("fit_a_short").unwrap(), r.summary_value("fit_tau_short").unwrap());
        // Root of |a_l| e^(-t/τl) = |a_0| e^(-t/τ0).
        let root = (a0 / al).ln() / (1.0 / t0 - 1.0 / tl);
        if root > x[0] && root < x[x.len() - 1] {
            assert_eq!(flips.len(), 1);
            assert!(root >= x[flips[0] - 1] - 0.5 && root <= x[flips[0]] + 0.5, "{root}");
        } else {
            assert!(flips.is_empty(), "{root} {flips:?}");
        }
    }

    #[test]
    fn trpl_differential_is_fitted() {
        let sys = SystemParams::default();
        let p = TrplParams { delays: arange(1.0, 120.0, 1.0).unwrap(), ..Default::default() };
        let r = trpl_differential(&sys, &p).unwrap();
        assert!(r.signal.values.iter().all(|v| *v > 0.0));
        assert!(r.summary_value("fit_tau_1").is_some());
        let g = r.summary_value("grid_argmax").unwrap();
        assert!(g > 5.0 && g < 40.0, "{g}");
    }

    #[test]
    fn rabi_and_echo_summaries() {
        let sys = SystemParams::default();
        let r = rabi(&sys, &RabiParams::default()).unwrap();
        let f = r.summary_value("fit_frequency").unwrap();
        assert!((f - 34.72).abs() / 34.72 < 0.01, "{f}");
        let e = coherence(&sys, &CoherenceRecipeParams::default()).unwrap();
        let t = e.summary_value("fit_decay_time").unwrap();
        assert!((t - 2.1).abs() / 2.1 < 0.1, "{t}");
    }

    #[test]
    fn overshoot_falls_with_power() {
        let r = overshoot_power_sweep(&SystemParams::default(), &OvershootParams::default()).unwrap();
        let v = &r.signal.values;
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        let at500 = v[r.axes[0].values.iter().position(|p| *p == 500.0).unwrap()];
        assert!(at500 < 0.05 * v[0]);
    }
}
