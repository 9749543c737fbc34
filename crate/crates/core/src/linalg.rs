//! Small dense linear-algebra helpers shared by the engines.

use nalgebra::{ComplexField, Const, DimMin, Matrix3, Matrix5, SMatrix, ToTypenum, Vector3};
use num_complex::Complex;
use num_traits::Float;

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat3c = Matrix3<C64>;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Induced 1-norm (largest absolute column sum).
pub fn norm1<T, const N: usize>(a: &SMatrix<T, N, N>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    let mut best = 0.0;
    for j in 0..N {
        let mut s = 0.0;
        for i in 0..N {
            s += a[(i, j)].modulus();
        }
        if s > best {
            best = s;
        }
    }
    best
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<T, const N: usize>(a: &SMatrix<T, N, N>) -> Result<SMatrix<T, N, N>>
where
    T: ComplexField<RealField = f64> + Copy,
    Const<N>: DimMin<Const<N>, Output = Const<N>> + ToTypenum,
{
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::numerical("matrix exponential of a non-finite matrix"));
    }
    let s = if norm > THETA13 { Float::ceil(Float::log2(norm / THETA13)) as i32 } else { 0 };
    let scale = T::from_real(Float::powi(2.0f64, -s));
    let a = a * scale;
    let b = |k: usize| T::from_real(PADE13[k]);
    let ident = SMatrix::<T, N, N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b(13) + a4 * b(11) + a2 * b(9))
        + a6 * b(7)
        + a4 * b(5)
        + a2 * b(3)
        + ident * b(1);
    let u = a * u_inner;
    let v = a6 * (a6 * b(12) + a4 * b(10) + a2 * b(8))
        + a6 * b(6)
        + a4 * b(4)
        + a2 * b(2)
        + ident * b(0);
    let mut r = (v - u)
        .lu()
        .solve(&(v + u))
        .ok_or_else(|| Error::numerical("singular Padé denominator in matrix exponential"))?;
    for _ in 0..s {
        r = r * r;
    }
    Ok(r)
}

/// Returns `(exp(A t), ∫₀ᵗ exp(A s) ds)` for a 5×5 generator, both from a
/// single exponential of the augmented block matrix `[[A, I], [0, 0]]`.
pub fn expm_with_integral5(a: &Matrix5<f64>, t: f64) -> Result<(Matrix5<f64>, Matrix5<f64>)> {
    let mut aug = SMatrix::<f64, 10, 10>::zeros();
    for i in 0..5 {
        for j in 0..5 {
            aug[(i, j)] = a[(i, j)] * t;
        }
        aug[(i, i + 5)] = t;
    }
    let e = expm(&aug)?;
    let prop = e.fixed_view::<5, 5>(0, 0).into_owned();
    let integral = e.fixed_view::<5, 5>(0, 5).into_owned();
    Ok((prop, integral))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(h: &Mat3c) -> f64 {
    let mut worst = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = (h[(i, j)] - h[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian 3×3 matrix (unsorted).
pub fn hermitian_eigen(h: &Mat3c) -> (Vector3<f64>, Mat3c) {
    let eig = h.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Smallest eigenvalue of a Hermitian 3×3 matrix.
pub fn min_eigenvalue(h: &Mat3c) -> f64 {
    let (vals, _) = hermitian_eigen(h);
    vals.iter().cloned().fold(f64::INFINITY, f64::min)
}
