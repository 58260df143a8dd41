use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::qubo::IsingCoefficients;

/// Largest qubit count for which dense operators are built.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Hermiticity tolerance, elementwise.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Two smallest diagonal entries closer than this count as a tie.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Whether the Ising constant (and the QUBO offset) is kept on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantPolicy {
    #[default]
    Retain,
    Drop,
}

/// Final Hamiltonian, stored as its diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    diag: Vec<f64>,
}

impl DiagonalHamiltonian {
    /// Wraps a user-supplied diagonal; its length must be `2^n`, `n >= 1`.
    pub fn from_diagonal(diag: Vec<f64>) -> Result<Self> {
        let len = diag.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "diagonal length {len} is not a power of two >= 2"
            )));
        }
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("diagonal has non-finite entries"));
        }
        Ok(Self {
            n: len.trailing_zeros() as usize,
            diag,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn to_operator(&self) -> HermitianOperator {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (i, &v) in self.diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        HermitianOperator { entries: m }
    }
}

/// Dense operator on the `2^n` state space, Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::invalid("operator matrix is not square"));
        }
        let dim = entries.nrows();
        for i in 0..dim {
            for j in i..dim {
                let d = entries[(i, j)] - entries[(j, i)].conj();
                if d.re.abs() > HERMITIAN_TOLERANCE || d.im.abs() > HERMITIAN_TOLERANCE {
                    return Err(Error::invalid(format!(
                        "operator is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_real(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        assert_eq!(v.len(), dim, "vector length does not match operator");
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (j, &vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[(i, j)] * vj;
            }
        }
        out
    }
}

pub fn build_final_hamiltonian(ising: &IsingCoefficients) -> Result<DiagonalHamiltonian> {
    build_final_hamiltonian_with(ising, ConstantPolicy::Retain)
}

/// Diagonal of `Σ h_i σ_i^z + Σ J_ik σ_i^z σ_k^z`, with `σ^z = +1` on bit value 0.
pub fn build_final_hamiltonian_with(
    ising: &IsingCoefficients,
    policy: ConstantPolicy,
) -> Result<DiagonalHamiltonian> {
    let n = ising.n();
    check_qubits(n)?;
    let shift = match policy {
        ConstantPolicy::Retain => ising.offset,
        ConstantPolicy::Drop => -ising.constant,
    };
    let diag = (0..1usize << n)
        .map(|x| ising.evaluate_index(x) + shift)
        .collect();
    Ok(DiagonalHamiltonian { n, diag })
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("operator needs at least one qubit"));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

/// `H_I = -Σ_i σ_i^x`: entry `-1` wherever two basis indices differ in one bit.
pub fn build_initial_hamiltonian(n: usize) -> Result<HermitianOperator> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        for i in 0..n {
            m[(x ^ (1 << i), x)] = Complex64::new(-1.0, 0.0);
        }
    }
    Ok(HermitianOperator { entries: m })
}

/// `(1 - s) H_I + s H_F`.
pub fn interpolate(
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    s: f64,
) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("schedule value {s} outside [0, 1]")));
    }
    if hi.dim() != hf.dim() {
        return Err(Error::invalid(format!(
            "initial ({}) and final ({}) dimensions differ",
            hi.dim(),
            hf.dim()
        )));
    }
    let mut m = hi.entries.scale(1.0 - s);
    for (i, &v) in hf.diag.iter().enumerate() {
        m[(i, i)] += Complex64::new(s * v, 0.0);
    }
    Ok(HermitianOperator { entries: m })
}

/// Index of the strictly smallest diagonal entry.
pub fn ground_state_index(hf: &DiagonalHamiltonian) -> Result<usize> {
    let mut order: Vec<usize> = (0..hf.dim()).collect();
    order.sort_by(|&a, &b| hf.diag[a].total_cmp(&hf.diag[b]).then(a.cmp(&b)));
    let (first, second) = (order[0], order[1]);
    if hf.diag[second] - hf.diag[first] <= DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateGroundState {
            first,
            second,
            tolerance: DEGENERACY_TOLERANCE,
        });
    }
    Ok(first)
}
