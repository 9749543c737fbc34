//! S=1 spin Hamiltonian of the metastable triplet, its spectrum, the twelve
//! crystallographic orientations and the level anticrossing.
//!
//! Spin basis order is |+1, 0, −1⟩. The zero-field eigenbasis is ordered
//! {|0⟩, |+⟩, |−⟩} with |±⟩ = (|+1⟩ ± |−1⟩)/√2.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{hermitian_eigen, hermiticity_defect, Mat3c, C64};
use crate::{Error, Result};

/// Zero-field splitting and electron gyromagnetic ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfsParams {
    /// Longitudinal ZFS D (MHz, signed).
    pub d: f64,
    /// Transverse ZFS E (MHz, ≥ 0).
    pub e: f64,
    /// Gyromagnetic ratio (MHz/mT, signed).
    pub gamma_e: f64,
}

impl ZfsParams {
    pub const G_CENTER: ZfsParams = ZfsParams { d: -1210.0, e: 520.0, gamma_e: -28.0 };

    pub fn new(d: f64, e: f64, gamma_e: f64) -> Result<Self> {
        let z = ZfsParams { d, e, gamma_e };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.d.is_finite() {
            return Err(Error::domain("d", "must be finite"));
        }
        if !(self.e.is_finite() && self.e >= 0.0) {
            return Err(Error::domain("e", "must be finite and >= 0"));
        }
        if !self.gamma_e.is_finite() {
            return Err(Error::domain("gamma_e", "must be finite"));
        }
        Ok(())
    }

    /// Principal tensor components (D_x, D_y, D_z) = (−D/3 + E, −D/3 − E, 2D/3).
    pub fn tensor_components(&self) -> [f64; 3] {
        [-self.d / 3.0 + self.e, -self.d / 3.0 - self.e, 2.0 * self.d / 3.0]
    }

    /// Zero-field energies of {|0⟩, |+⟩, |−⟩}.
    pub fn zero_field_energies(&self) -> [f64; 3] {
        [0.0, self.d + self.e, self.d - self.e]
    }
}

impl Default for ZfsParams {
    fn default() -> Self {
        Self::G_CENTER
    }
}

/// Spin-1 operators in the |+1, 0, −1⟩ basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrices {
    pub sx: Mat3c,
    pub sy: Mat3c,
    pub sz: Mat3c,
}

pub fn spin_operators() -> SpinMatrices {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let ri = C64::new(0.0, FRAC_1_SQRT_2);
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let sx = Matrix3::new(z, r, z, r, z, r, z, r, z);
    let sy = Matrix3::new(z, -ri, z, ri, z, -ri, z, ri, z);
    let sz = Matrix3::new(one, z, z, z, z, z, z, z, -one);
    SpinMatrices { sx, sy, sz }
}

/// H = D·Sz² + E·(Sx² − Sy²) − γe·B·S, with B in the defect frame (mT), H in MHz.
pub fn build_hamiltonian(zfs: &ZfsParams, b_defect: &Vector3<f64>) -> Mat3c {
    let s = spin_operators();
    let c = |x: f64| C64::new(x, 0.0);
    let sz2 = s.sz * s.sz;
    let sx2 = s.sx * s.sx;
    let sy2 = s.sy * s.sy;
    sz2 * c(zfs.d) + (sx2 - sy2) * c(zfs.e)
        - (s.sx * c(b_defect.x) + s.sy * c(b_defect.y) + s.sz * c(b_defect.z)) * c(zfs.gamma_e)
}

/// Columns are |0⟩, |+⟩, |−⟩ expressed in the |+1, 0, −1⟩ basis.
pub fn zero_field_basis() -> Mat3c {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    Matrix3::new(z, r, r, one, z, z, z, r, -r)
}

/// Pairs of zero-field levels addressed by a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// |+⟩ ↔ |0⟩ (ν+ = 690 MHz at zero field for the G center).
    PlusZero,
    /// |−⟩ ↔ |0⟩ (ν− = 1730 MHz).
    MinusZero,
    /// |+⟩ ↔ |−⟩ (2E = 1040 MHz).
    PlusMinus,
}

impl Transition {
    pub const ALL: [Transition; 3] = [Transition::PlusZero, Transition::MinusZero, Transition::PlusMinus];

    /// Zero-field level indices `(upper, lower)` in {0: |0⟩, 1: |+⟩, 2: |−⟩}.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::PlusZero => (1, 0),
            Transition::MinusZero => (2, 0),
            Transition::PlusMinus => (1, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Transition::PlusZero => "plus-zero",
            Transition::MinusZero => "minus-zero",
            Transition::PlusMinus => "plus-minus",
        }
    }
}

impl core::str::FromStr for Transition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus-zero" | "plus_zero" => Ok(Transition::PlusZero),
            "minus-zero" | "minus_zero" => Ok(Transition::MinusZero),
            "plus-minus" | "plus_minus" => Ok(Transition::PlusMinus),
            other => Err(Error::domain("transition", format!("unknown transition '{other}'"))),
        }
    }
}

/// Eigen-decomposition of a triplet Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpectrum {
    /// Ascending energies (MHz).
    pub energies: [f64; 3],
    /// Eigenvectors as columns, in the |+1, 0, −1⟩ basis.
    pub states: Mat3c,
    /// Entry (i, k) = |⟨zero-field state i | state k⟩|², rows ordered |0⟩, |+⟩, |−⟩.
    pub zero_field_overlaps: Matrix3<f64>,
}

const HERMITIAN_TOL: f64 = 1e-9;

pub fn eigen_spectrum(h: &Mat3c) -> Result<SpinSpectrum> {
    let scale = h.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if !h.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::domain("hamiltonian", "non-finite entries"));
    }
    if hermiticity_defect(h) > HERMITIAN_TOL * scale {
        return Err(Error::domain("hamiltonian", "matrix is not Hermitian"));
    }
    // Diagonalising in the zero-field basis keeps B = 0 exact and labels stable.
    let u = zero_field_basis();
    let h_zf = u.adjoint() * h * u;
    let (vals, vecs) = hermitian_eigen(&h_zf);

    let tie = 1e-9 * scale;
    let weight = |k: usize, i: usize| vecs[(i, k)].norm_sqr();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let (ea, eb) = (vals[a], vals[b]);
        if (ea - eb).abs() > tie {
            return ea.partial_cmp(&eb).unwrap();
        }
        weight(b, 0)
            .partial_cmp(&weight(a, 0))
            .unwrap()
            .then(weight(b, 1).partial_cmp(&weight(a, 1)).unwrap())
    });

    let mut states_zf = Mat3c::zeros();
    let mut energies = [0.0; 3];
    for (col, &k) in order.iter().enumerate() {
        energies[col] = vals[k];
        let mut v = vecs.column(k).into_owned();
        // Phase convention: the largest component is real and positive.
        let mut pivot = 0;
        for i in 1..3 {
            if v[i].norm() > v[pivot].norm() + 1e-12 {
                pivot = i;
            }
        }
        let ph = v[pivot] / v[pivot].norm();
        v /= ph;
        states_zf.set_column(col, &v);
    }
    let overlaps = Matrix3::from_fn(|i, k| states_zf[(i, k)].norm_sqr());
    Ok(SpinSpectrum { energies, states: u * states_zf, zero_field_overlaps: overlaps })
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

impl SpinSpectrum {
    /// Assigns one eigenstate to each zero-field label. Entry `i` of the
    /// result is the column of the eigenstate labelled by zero-field state
    /// `i`, chosen to maximise the summed overlap.
    pub fn assignment(&self) -> [usize; 3] {
        let o = &self.zero_field_overlaps;
        let mut best = PERMUTATIONS[0];
        let mut best_score = f64::NEG_INFINITY;
        for p in PERMUTATIONS {
            let score = o[(0, p[0])] + o[(1, p[1])] + o[(2, p[2])];
            if score > best_score + 1e-12 {
                best = p;
                best_score = score;
            }
        }
        best
    }

    /// Overlap matrix with columns reordered so column `k` is the eigenstate
    /// labelled by zero-field state `k`.
    pub fn labelled_overlaps(&self) -> Matrix3<f64> {
        let p = self.assignment();
        Matrix3::from_fn(|i, k| self.zero_field_overlaps[(i, p[k])])
    }

    /// Energies reordered by zero-field label.
    pub fn labelled_energies(&self) -> [f64; 3] {
        let p = self.assignment();
        [self.energies[p[0]], self.energies[p[1]], self.energies[p[2]]]
    }
}

/// Transition frequencies labelled by the zero-field character of the
/// connected dressed states (MHz, non-negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionFrequencies {
    pub plus_zero: f64,
    pub minus_zero: f64,
    pub plus_minus: f64,
}

impl TransitionFrequencies {
    pub fn get(&self, t: Transition) -> f64 {
        match t {
            Transition::PlusZero => self.plus_zero,
            Transition::MinusZero => self.minus_zero,
            Transition::PlusMinus => self.plus_minus,
        }
    }

    fn from_labelled(e: [f64; 3]) -> Self {
        TransitionFrequencies {
            plus_zero: (e[1] - e[0]).abs(),
            minus_zero: (e[2] - e[0]).abs(),
            plus_minus: (e[1] - e[2]).abs(),
        }
    }
}

/// Spectrum of one orientation at a lab-frame field.
pub fn spectrum_in_lab(zfs: &ZfsParams, b_lab: &Vector3<f64>, orientation: &DefectOrientation) -> Result<SpinSpectrum> {
    let b = field_in_defect_frame(b_lab, orientation);
    eigen_spectrum(&build_hamiltonian(zfs, &b))
}

pub fn transition_frequencies(
    zfs: &ZfsParams,
    b_lab: &Vector3<f64>,
    orientation: &DefectOrientation,
) -> Result<TransitionFrequencies> {
    let spec = spectrum_in_lab(zfs, b_lab, orientation)?;
    Ok(TransitionFrequencies::from_labelled(spec.labelled_energies()))
}

/// One crystallographic frame of the defect: z along ⟨111⟩, x along ⟨110⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectOrientation {
    pub z_axis: Vector3<f64>,
    pub x_axis: Vector3<f64>,
    pub y_axis: Vector3<f64>,
    pub z_miller: [i32; 3],
    pub x_miller: [i32; 3],
    pub label: String,
}

fn miller_string(v: [i32; 3]) -> String {
    let mut s = String::from("[");
    for c in v {
        s.push_str(&format!("{c}"));
    }
    s.push(']');
    s
}

fn unit(v: [i32; 3]) -> Vector3<f64> {
    Vector3::new(v[0] as f64, v[1] as f64, v[2] as f64).normalize()
}

impl DefectOrientation {
    pub fn from_miller(z: [i32; 3], x: [i32; 3]) -> Result<Self> {
        let dot: i32 = z.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        if dot != 0 || z == [0, 0, 0] || x == [0, 0, 0] {
            return Err(Error::domain("orientation", "x axis must be a non-zero vector perpendicular to z"));
        }
        let z_axis = unit(z);
        let x_axis = unit(x);
        let y_axis = z_axis.cross(&x_axis);
        let label = format!("z={} x={}", miller_string(z), miller_string(x));
        Ok(DefectOrientation { z_axis, x_axis, y_axis, z_miller: z, x_miller: x, label })
    }
}

/// The twelve (z, x) frames: four ⟨111⟩ axes, three ⟨110⟩ x-axes each.
pub fn enumerate_orientations() -> Vec<DefectOrientation> {
    const Z: [[i32; 3]; 4] = [[1, 1, 1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]];
    let mut out = Vec::with_capacity(12);
    for z in Z {
        let mut xs: Vec<[i32; 3]> = Vec::new();
        for a in -1i32..=1 {
            for b in -1i32..=1 {
                for c in -1i32..=1 {
                    let v = [a, b, c];
                    let zeros = v.iter().filter(|&&q| q == 0).count();
                    let dot = a * z[0] + b * z[1] + c * z[2];
                    let first = *v.iter().find(|&&q| q != 0).unwrap_or(&0);
                    // one representative per ± pair: first non-zero component negative
                    if zeros == 1 && dot == 0 && first < 0 {
                        xs.push(v);
                    }
                }
            }
        }
        for x in xs {
            out.push(DefectOrientation::from_miller(z, x).expect("valid lattice frame"));
        }
    }
    out
}

/// Components of a lab-frame field along (x_axis, y_axis, z_axis).
pub fn field_in_defect_frame(b_lab: &Vector3<f64>, orientation: &DefectOrientation) -> Vector3<f64> {
    Vector3::new(
        b_lab.dot(&orientation.x_axis),
        b_lab.dot(&orientation.y_axis),
        b_lab.dot(&orientation.z_axis),
    )
}

/// Orientations sharing the same field angles in their own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationFamily {
    /// Polar angle of B from the defect z axis, folded into [0°, 90°].
    pub theta_deg: f64,
    /// Azimuth from the defect x axis folded by the frame's mirror
    /// symmetries into [0°, 90°); a folded value of 90° is reported as −90°.
    pub phi_deg: f64,
    pub multiplicity: usize,
    /// Indices into the orientation list passed to `group_by_field`.
    pub members: Vec<usize>,
}

fn folded_angles(b: &Vector3<f64>) -> (f64, f64) {
    let (ax, ay, az) = (b.x.abs(), b.y.abs(), b.z.abs());
    let theta = az.min(1.0).acos().to_degrees();
    let rho = (ax * ax + ay * ay).sqrt();
    let mut phi = if rho < 1e-12 { 0.0 } else { ay.atan2(ax).to_degrees() };
    if (phi - 90.0).abs() < 1e-9 {
        phi = -90.0;
    }
    (theta, phi)
}

const ANGLE_TOL_DEG: f64 = 1e-6;

pub fn group_by_field(orientations: &[DefectOrientation], b_direction: &Vector3<f64>) -> Result<Vec<OrientationFamily>> {
    let n = b_direction.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(Error::domain("b_direction", "must be a unit vector"));
    }
    let mut families: Vec<OrientationFamily> = Vec::new();
    for (idx, o) in orientations.iter().enumerate() {
        let (theta, phi) = folded_angles(&field_in_defect_frame(b_direction, o));
        let same = |f: &OrientationFamily| {
            (f.theta_deg - theta).abs() < ANGLE_TOL_DEG
                && ((f.phi_deg - phi).abs() < ANGLE_TOL_DEG || theta < ANGLE_TOL_DEG)
        };
        match families.iter_mut().find(|f| same(f)) {
            Some(f) => {
                f.multiplicity += 1;
                f.members.push(idx);
            }
            None => families.push(OrientationFamily { theta_deg: theta, phi_deg: phi, multiplicity: 1, members: alloc::vec![idx] }),
        }
    }
    Ok(families)
}

/// Field of the |0⟩/|+1⟩ anticrossing for B parallel to z: √(D² − E²)/|γe|.
pub fn lac_field(zfs: &ZfsParams) -> Result<f64> {
    if zfs.e.abs() >= zfs.d.abs() {
        return Err(Error::domain("e", "|E| must be smaller than |D| for a level anticrossing"));
    }
    if zfs.gamma_e == 0.0 {
        return Err(Error::domain("gamma_e", "must be non-zero"));
    }
    Ok((zfs.d * zfs.d - zfs.e * zfs.e).sqrt() / zfs.gamma_e.abs())
}

/// D and E from the two observed lines; γe is the G-center value.
pub fn zfs_from_lines(nu_plus: f64, nu_minus: f64) -> Result<ZfsParams> {
    if !(nu_plus > 0.0 && nu_plus <= nu_minus && nu_minus.is_finite()) {
        return Err(Error::domain("nu_plus", "lines must satisfy 0 < nu_plus <= nu_minus"));
    }
    Ok(ZfsParams { d: -(nu_minus + nu_plus) / 2.0, e: (nu_minus - nu_plus) / 2.0, gamma_e: ZfsParams::G_CENTER.gamma_e })
}

/// Lab direction tilted from `axis` by `angle_deg` towards `towards`
/// (the component of `towards` perpendicular to `axis`).
pub fn tilted_direction(axis: &Vector3<f64>, towards: &Vector3<f64>, angle_deg: f64) -> Result<Vector3<f64>> {
    let a = axis.normalize();
    let perp = towards - a * towards.dot(&a);
    if perp.norm() < 1e-12 {
        return Err(Error::domain("misalignment", "tilt reference is parallel to the axis"));
    }
    let p = perp.normalize();
    let t = angle_deg.to_radians();
    Ok(a * t.cos() + p * t.sin())
}
