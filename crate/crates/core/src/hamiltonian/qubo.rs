//! Objective → QUBO → Ising coefficients.
//!
//! Expanding `(1 - x_i - x_j - x_k)^2` with `x^2 = x` gives `1 - Σ x + 2 Σ_pairs x x`,
//! so each clause contributes `-1` to every diagonal entry it touches and `+2`
//! to every pair it contains. The constant `m` (clause count) is carried in
//! [`QuboMatrix::offset`].

use nalgebra::{DMatrix, DVector};

use crate::ec3::Ec3Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    q: DMatrix<f64>,
    offset: f64,
}

impl QuboMatrix {
    /// Builds from an upper-triangular coefficient array. Entries below the
    /// diagonal are folded onto their transposed position.
    pub fn from_upper(q: DMatrix<f64>, offset: f64) -> Self {
        assert!(q.is_square(), "QUBO matrix must be square");
        let n = q.nrows();
        let mut upper = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (r, c) = if i <= j { (i, j) } else { (j, i) };
                upper[(r, c)] += q[(i, j)];
            }
        }
        Self { q: upper, offset }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    /// 0-based access; `get(i, j)` with `i > j` is always 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `g(x) = Σ_i q_ii x_i + Σ_{i<j} q_ij x_i x_j` for the assignment encoded by `index`.
    pub fn evaluate_index(&self, index: usize) -> f64 {
        let n = self.n();
        let bit = |i: usize| (index >> i) & 1 == 1;
        let mut total = 0.0;
        for i in (0..n).filter(|&i| bit(i)) {
            total += self.q[(i, i)];
            for j in (i + 1..n).filter(|&j| bit(j)) {
                total += self.q[(i, j)];
            }
        }
        total
    }
}

pub fn build_qubo(instance: &Ec3Instance) -> QuboMatrix {
    let n = instance.n();
    let mut q = DMatrix::zeros(n, n);
    for clause in instance.clauses() {
        let bits = clause.map(|i| i - 1);
        for (a, &i) in bits.iter().enumerate() {
            q[(i, i)] -= 1.0;
            for &j in &bits[a + 1..] {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                q[(lo, hi)] += 2.0;
            }
        }
    }
    QuboMatrix {
        q,
        offset: instance.num_clauses() as f64,
    }
}

/// `g(x) = Σ h_i z_i + Σ_{i<k} J_ik z_i z_k + constant` under `x = (1 - z)/2`.
/// `offset` is the QUBO's dropped constant, so adding it recovers `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingCoefficients {
    pub h: DVector<f64>,
    pub j: DMatrix<f64>,
    pub constant: f64,
    pub offset: f64,
}

impl IsingCoefficients {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Polynomial value at spins `z_i = 1 - 2 x_i` for the assignment `index`,
    /// including `constant` but not `offset`.
    pub fn evaluate_index(&self, index: usize) -> f64 {
        let n = self.n();
        let spin = |i: usize| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut total = self.constant;
        for i in 0..n {
            let zi = spin(i);
            total += self.h[i] * zi;
            for k in i + 1..n {
                total += self.j[(i, k)] * zi * spin(k);
            }
        }
        total
    }
}

pub fn qubo_to_ising(qubo: &QuboMatrix) -> IsingCoefficients {
    let n = qubo.n();
    let mut h = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, n);
    let mut constant = 0.0;
    for i in 0..n {
        let d = qubo.get(i, i);
        h[i] -= d / 2.0;
        constant += d / 2.0;
        for k in i + 1..n {
            let c = qubo.get(i, k) / 4.0;
            j[(i, k)] += c;
            h[i] -= c;
            h[k] -= c;
            constant += c;
        }
    }
    IsingCoefficients {
        h,
        j,
        constant,
        offset: qubo.offset(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec3::Assignment;

    #[test]
    fn six_bit_entries() {
        let q = build_qubo(&Ec3Instance::six_bit_example());
        // bit 3 sits in four clauses; bits 3 and 6 share three
        assert_eq!(q.get(2, 2), -4.0);
        assert_eq!(q.get(2, 5), 6.0);
        assert_eq!(q.get(5, 2), 0.0);
        assert_eq!(q.offset(), 5.0);
    }

    #[test]
    fn qubo_plus_offset_is_objective() {
        for inst in [Ec3Instance::six_bit_example(), Ec3Instance::four_bit_example()] {
            let q = build_qubo(&inst);
            for x in 0..inst.dim() {
                let f = crate::ec3::objective(&inst, &Assignment::from_index(x, inst.n())).unwrap();
                assert_eq!(q.evaluate_index(x) + q.offset(), f as f64);
            }
        }
    }

    #[test]
    fn single_variable_ising() {
        let c = -3.0;
        let q = QuboMatrix::from_upper(DMatrix::from_element(1, 1, c), 0.0);
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.h[0], -c / 2.0);
        assert_eq!(ising.constant, c / 2.0);
    }

    #[test]
    fn zero_qubo_gives_zero_ising() {
        let ising = qubo_to_ising(&QuboMatrix::from_upper(DMatrix::zeros(3, 3), 0.0));
        assert!(ising.h.iter().all(|&v| v == 0.0));
        assert!(ising.j.iter().all(|&v| v == 0.0));
        assert_eq!(ising.constant, 0.0);
    }

    #[test]
    fn ising_reproduces_qubo_exhaustively() {
        let q = build_qubo(&Ec3Instance::six_bit_example());
        let ising = qubo_to_ising(&q);
        for x in 0..64 {
            assert_eq!(ising.evaluate_index(x), q.evaluate_index(x));
        }
        for i in 0..6 {
            for k in 0..=i {
                assert_eq!(ising.j[(i, k)], 0.0);
            }
        }
    }

    #[test]
    fn from_upper_folds_lower_entries() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let q = QuboMatrix::from_upper(m, 0.0);
        assert_eq!(q.get(0, 1), 5.0);
        assert_eq!(q.get(1, 0), 0.0);
    }
}
