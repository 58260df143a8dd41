//! Exponentials `exp(-iθH)` of frozen Hermitian operators.
//!
//! Every evolution step exponentiates a real multiple of one Hermitian
//! operator, so a single eigendecomposition `H = V Λ V†` serves any `θ`.
//! Two-level operators use the closed-form Pauli exponential instead.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub enum Propagator {
    /// `H = shift·I + field·(σx, σy, σz)`.
    Pauli { shift: f64, field: [f64; 3] },
    /// Real symmetric `H`; eigenvectors are the columns of `vectors`.
    Real {
        values: Vec<f64>,
        vectors: DMatrix<f64>,
    },
    Complex {
        values: Vec<f64>,
        vectors: DMatrix<Complex64>,
    },
}

impl Propagator {
    /// Pauli form for two-level operators, eigendecomposition otherwise.
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        if h.dim() == 2 {
            Ok(Self::pauli(h))
        } else {
            Self::spectral(h)
        }
    }

    pub fn pauli(h: &HermitianOperator) -> Self {
        assert_eq!(h.dim(), 2, "Pauli form needs a 2x2 operator");
        let m = h.entries();
        let (a, b, d) = (m[(0, 0)].re, m[(0, 1)], m[(1, 1)].re);
        Self::Pauli {
            shift: 0.5 * (a + d),
            field: [b.re, -b.im, 0.5 * (a - d)],
        }
    }

    pub fn spectral(h: &HermitianOperator) -> Result<Self> {
        if h.is_real() {
            let eig = h
                .real_part()
                .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
                .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
            Ok(Self::Real {
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            })
        } else {
            let eig = h
                .entries()
                .clone()
                .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
                .ok_or_else(|| Error::Numerical("Hermitian eigendecomposition did not converge".into()))?;
            Ok(Self::Complex {
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            })
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pauli { .. } => 2,
            Self::Real { values, .. } | Self::Complex { values, .. } => values.len(),
        }
    }

    /// `state ← exp(-iθH) state`.
    pub fn apply(&self, theta: f64, state: &mut [Complex64]) {
        assert_eq!(state.len(), self.dim(), "state length does not match propagator");
        if theta == 0.0 {
            return;
        }
        match self {
            Self::Pauli { shift, field } => {
                let u = pauli_exponential(*shift, *field, theta);
                let (a, b) = (state[0], state[1]);
                state[0] = u[0][0] * a + u[0][1] * b;
                state[1] = u[1][0] * a + u[1][1] * b;
            }
            Self::Real { values, vectors } => {
                let dim = values.len();
                let v = vectors.as_slice();
                let mut coeffs = Vec::with_capacity(dim);
                for (k, &lambda) in values.iter().enumerate() {
                    let col = &v[k * dim..(k + 1) * dim];
                    let (mut re, mut im) = (0.0, 0.0);
                    for (&vk, z) in col.iter().zip(state.iter()) {
                        re += vk * z.re;
                        im += vk * z.im;
                    }
                    coeffs.push(Complex64::new(re, im) * Complex64::from_polar(1.0, -theta * lambda));
                }
                state.fill(Complex64::new(0.0, 0.0));
                for (k, c) in coeffs.iter().enumerate() {
                    let col = &v[k * dim..(k + 1) * dim];
                    for (&vk, z) in col.iter().zip(state.iter_mut()) {
                        z.re += vk * c.re;
                        z.im += vk * c.im;
                    }
                }
            }
            Self::Complex { values, vectors } => {
                let dim = values.len();
                let v = vectors.as_slice();
                let mut coeffs = Vec::with_capacity(dim);
                for (k, &lambda) in values.iter().enumerate() {
                    let col = &v[k * dim..(k + 1) * dim];
                    let c: Complex64 = col.iter().zip(state.iter()).map(|(vk, z)| vk.conj() * z).sum();
                    coeffs.push(c * Complex64::from_polar(1.0, -theta * lambda));
                }
                state.fill(Complex64::new(0.0, 0.0));
                for (k, c) in coeffs.iter().enumerate() {
                    let col = &v[k * dim..(k + 1) * dim];
                    for (vk, z) in col.iter().zip(state.iter_mut()) {
                        *z += vk * c;
                    }
                }
            }
        }
    }

    /// Dense `exp(-iθH)`.
    pub fn unitary(&self, theta: f64) -> DMatrix<Complex64> {
        match self {
            Self::Pauli { shift, field } => {
                let u = pauli_exponential(*shift, *field, theta);
                DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]])
            }
            Self::Real { values, vectors } => {
                let v = vectors.map(|x| Complex64::new(x, 0.0));
                synthesize(values, &v, theta)
            }
            Self::Complex { values, vectors } => synthesize(values, vectors, theta),
        }
    }
}

fn synthesize(values: &[f64], vectors: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -theta * lambda);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * vectors.adjoint()
}

/// `exp(-iθ(shift·I + f·σ)) = e^{-iθ·shift} (cos(θ|f|) I - i sin(θ|f|) f̂·σ)`.
pub fn pauli_exponential(shift: f64, field: [f64; 3], theta: f64) -> [[Complex64; 2]; 2] {
    let norm = field.iter().map(|f| f * f).sum::<f64>().sqrt();
    let global = Complex64::from_polar(1.0, -theta * shift);
    let zero = Complex64::new(0.0, 0.0);
    if norm == 0.0 {
        return [[global, zero], [zero, global]];
    }
    let (c, s) = ((theta * norm).cos(), (theta * norm).sin());
    let [x, y, z] = field.map(|f| f / norm);
    let i = Complex64::i();
    // f̂·σ = [[z, x - iy], [x + iy, -z]]
    let u00 = Complex64::new(c, 0.0) - i * s * z;
    let u11 = Complex64::new(c, 0.0) + i * s * z;
    let u01 = -i * s * Complex64::new(x, -y);
    let u10 = -i * s * Complex64::new(x, y);
    [[global * u00, global * u01], [global * u10, global * u11]]
}

/// `V exp(-iθΛ) V†` from the eigendecomposition of `h`.
pub fn unitary_of_hermitian(h: &HermitianOperator, theta: f64) -> Result<DMatrix<Complex64>> {
    Ok(Propagator::spectral(h)?.unitary(theta))
}

/// All eigenvalues of `h`, ascending.
pub fn eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = if h.is_real() {
        h.real_part()
            .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or_else(|| Error::Numerical("symmetric eigenvalues did not converge".into()))?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        h.entries()
            .clone()
            .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
            .ok_or_else(|| Error::Numerical("Hermitian eigenvalues did not converge".into()))?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `max |(U†U - I)_ij|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let gram = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}
