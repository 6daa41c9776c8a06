//! Pure states and density matrices over labeled registers.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::linalg::{self, CMat, CVec, ONE, ZERO};
use crate::register::Register;
use crate::{Error, Result};

/// Unit vector over a register, indexed in register order.
#[derive(Debug, Clone)]
pub struct PureState {
    register: Register,
    amplitudes: CVec,
}

impl PureState {
    /// Builds a pure state; the amplitude vector must be unit within 1e-10.
    pub fn new(register: Register, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::Shape(format!(
                "state length {} does not match register dimension {}",
                amplitudes.len(),
                register.dim()
            )));
        }
        let norm = linalg::vec_norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::State(format!("vector norm {norm} is not 1")));
        }
        Ok(PureState { register, amplitudes })
    }

    /// Basis state |index> on the register.
    pub fn basis(register: Register, index: usize) -> Result<Self> {
        let mut amp = Array1::from_elem(register.dim(), ZERO);
        amp[index] = ONE;
        PureState::new(register, amp)
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        linalg::vec_inner(&self.amplitudes, &other.amplitudes)
    }

    /// Tensor product, concatenating registers.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = self.register.concat(other.register())?;
        let n = other.amplitudes.len();
        let mut amp = Array1::from_elem(register.dim(), ZERO);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.amplitudes.iter().enumerate() {
                amp[i * n + j] = a * b;
            }
        }
        PureState::new(register, amp)
    }

    /// Reorders the parts into `new_order`, moving amplitudes accordingly.
    ///
    /// Same effect as pushing through a subsystem-permutation unitary, but
    /// O(dim) and without materializing the operator, so it stays usable on
    /// registers far too large for a dense matrix.
    pub fn reorder_parts(&self, new_order: &[&str]) -> Result<PureState> {
        // positions() sorts, which would erase the requested order
        let mut old_pos = Vec::with_capacity(new_order.len());
        for l in new_order {
            let p = self
                .register
                .position(l)
                .ok_or_else(|| Error::Register(format!("unknown label {l}")))?;
            old_pos.push(p);
        }
        let mut seen = vec![false; self.register.len()];
        for &p in &old_pos {
            seen[p] = true;
        }
        if old_pos.len() != self.register.len() || seen.contains(&false) {
            return Err(Error::Register("reorder must list every part exactly once".into()));
        }
        let output =
            Register::new(old_pos.iter().map(|&p| self.register.parts()[p].clone()).collect())?;
        let mut amp = Array1::from_elem(self.amplitudes.len(), ZERO);
        for (g, &a) in self.amplitudes.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let digits = self.register.digits(g);
            let new_digits: Vec<usize> = old_pos.iter().map(|&p| digits[p]).collect();
            amp[output.index(&new_digits)] = a;
        }
        PureState::new(output, amp)
    }

    /// Full density matrix |psi><psi|.
    pub fn density(&self) -> DensityMatrix {
        let n = self.amplitudes.len();
        let mut m = Array2::from_elem((n, n), ZERO);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in self.amplitudes.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        DensityMatrix { register: self.register.clone(), matrix: m }
    }

    /// Reduced density matrix on `keep`, traced directly from the vector.
    ///
    /// Amplitudes are grouped by the traced-out sub-index, so sparse states
    /// (permutation Choi states in particular) reduce far below the dense
    /// O(dim^2) cost.
    pub fn reduced_density(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let kept_positions = self.register.positions(keep)?;
        let sub = self.register.keep(keep)?;
        let kept_dim = sub.dim();
        // ordered so that the accumulation order, and with it the exact
        // floating-point result, is identical on every run
        let mut groups: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (g, &a) in self.amplitudes.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let (k, t) = self.register.split_index(g, &kept_positions);
            groups.entry(t).or_default().push((k, a));
        }
        let mut m = Array2::from_elem((kept_dim, kept_dim), ZERO);
        for entries in groups.values() {
            for &(ki, ai) in entries {
                for &(kj, aj) in entries {
                    m[(ki, kj)] += ai * aj.conj();
                }
            }
        }
        DensityMatrix::new(sub, m)
    }

    /// Schmidt decomposition across `left` versus the remaining parts.
    pub fn schmidt(&self, left: &[&str]) -> Result<Schmidt> {
        let left_reg = self.register.keep(left)?;
        let right_reg = self.register.drop(left)?;
        if right_reg.is_empty() {
            return Err(Error::State("schmidt cut leaves no right side".into()));
        }
        let (dl, dr) = (left_reg.dim(), right_reg.dim());
        let left_positions = self.register.positions(left)?;
        let mut m = Array2::from_elem((dl, dr), ZERO);
        for (g, &a) in self.amplitudes.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let (k, t) = self.register.split_index(g, &left_positions);
            m[(k, t)] = a;
        }
        // Eigendecompose the smaller Gram matrix and lift the other side.
        let k = dl.min(dr);
        let (mut coefficients, left_vectors, right_vectors);
        if dl <= dr {
            let gram = m.dot(&linalg::dagger(&m)); // dl x dl
            let eig = linalg::eig_hermitian(&gram)?;
            coefficients = eig.values.iter().take(k).map(|v| v.max(0.0).sqrt()).collect::<Vec<_>>();
            left_vectors = eig.vectors.slice(ndarray::s![.., ..k]).to_owned();
            let mut rv = Array2::from_elem((dr, k), ZERO);
            for j in 0..k {
                if coefficients[j] > 1e-12 {
                    // M† u_k = c_k v_k; stored right vectors are conj(v_k)
                    // so that psi[l,r] = sum_k c_k L[l,k] R[r,k].
                    let col = linalg::dagger(&m).dot(&left_vectors.column(j).to_owned());
                    let col = col.mapv(|v| (v / coefficients[j]).conj());
                    rv.column_mut(j).assign(&col);
                }
            }
            right_vectors = rv;
        } else {
            let gram = linalg::dagger(&m).dot(&m); // dr x dr
            let eig = linalg::eig_hermitian(&gram)?;
            coefficients = eig.values.iter().take(k).map(|v| v.max(0.0).sqrt()).collect::<Vec<_>>();
            right_vectors = eig.vectors.slice(ndarray::s![.., ..k]).mapv(|v| v.conj());
            let mut lv = Array2::from_elem((dl, k), ZERO);
            for j in 0..k {
                if coefficients[j] > 1e-12 {
                    // stored right vectors are conj(v_k); M v_k = c_k u_k
                    let col = m.dot(&right_vectors.column(j).mapv(|v| v.conj()))
                        .mapv(|v| v / coefficients[j]);
                    lv.column_mut(j).assign(&col);
                }
            }
            left_vectors = lv;
        }
        for c in coefficients.iter_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        Ok(Schmidt { coefficients, left_vectors, right_vectors, left_register: left_reg, right_register: right_reg })
    }
}

/// Result of a Schmidt decomposition: `psi = sum_k c_k |l_k>|r_k>` with
/// nonnegative coefficients in descending order.
#[derive(Debug, Clone)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    /// Left Schmidt vectors as columns.
    pub left_vectors: CMat,
    /// Right Schmidt vectors as columns; `psi[l,r] = sum_k c_k L[l,k] R[r,k]`.
    pub right_vectors: CMat,
    pub left_register: Register,
    pub right_register: Register,
}

impl Schmidt {
    /// Reassembles the state vector over (left, right) index order.
    pub fn reconstruct(&self) -> CVec {
        let (dl, dr) = (self.left_register.dim(), self.right_register.dim());
        let mut amp = Array1::from_elem(dl * dr, ZERO);
        for (k, &c) in self.coefficients.iter().enumerate() {
            if c <= 1e-14 {
                continue;
            }
            for l in 0..dl {
                for r in 0..dr {
                    amp[l * dr + r] += self.left_vectors[(l, k)] * self.right_vectors[(r, k)] * c;
                }
            }
        }
        amp
    }
}

/// Maximally entangled pair (1/sqrt(d)) sum_i |i>_a |i>_b.
pub fn maximally_entangled(a: (&str, usize), b: (&str, usize)) -> Result<PureState> {
    if a.1 != b.1 {
        return Err(Error::Shape("maximally entangled parts need equal dims".into()));
    }
    let d = a.1;
    let register = Register::from_dims(&[(a.0, d), (b.0, d)])?;
    let mut amp = Array1::from_elem(d * d, ZERO);
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        amp[i * d + i] = w;
    }
    PureState::new(register, amp)
}

/// Hermitian, unit-trace matrix over a register.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    register: Register,
    matrix: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace within 1e-10. Positivity is
    /// enforced where spectra are actually computed (entropies clamp
    /// eigenvalues in [-1e-10, 0] to zero and reject anything lower).
    pub fn new(register: Register, matrix: CMat) -> Result<Self> {
        let d = register.dim();
        if matrix.dim() != (d, d) {
            return Err(Error::Shape(format!(
                "density matrix {}x{} does not match register dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                d
            )));
        }
        if !linalg::is_hermitian(&matrix, 1e-10) {
            return Err(Error::NotHermitian);
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::State(format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { register, matrix })
    }

    pub fn maximally_mixed(register: Register) -> Self {
        let d = register.dim();
        let m = Array2::from_diag_elem(d, Complex64::new(1.0 / d as f64, 0.0));
        DensityMatrix { register, matrix: m }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.register.dim()
    }

    /// Partial trace keeping `keep` (register order preserved).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let kept_positions = self.register.positions(keep)?;
        let sub = self.register.keep(keep)?;
        let kept_dim = sub.dim();
        let traced_dim = self.register.dim() / kept_dim;
        // Row/column index maps from global to (kept, traced) sub-indices.
        let mut kept_of = vec![0usize; self.register.dim()];
        let mut traced_of = vec![0usize; self.register.dim()];
        for g in 0..self.register.dim() {
            let (k, t) = self.register.split_index(g, &kept_positions);
            kept_of[g] = k;
            traced_of[g] = t;
        }
        let mut by_traced: Vec<Vec<usize>> = vec![Vec::new(); traced_dim];
        for g in 0..self.register.dim() {
            by_traced[traced_of[g]].push(g);
        }
        let mut m = Array2::from_elem((kept_dim, kept_dim), ZERO);
        for group in &by_traced {
            for &gi in group {
                for &gj in group {
                    m[(kept_of[gi], kept_of[gj])] += self.matrix[(gi, gj)];
                }
            }
        }
        DensityMatrix::new(sub, m)
    }

    /// Trace distance helper: (1/2)||rho - sigma||_1 is left to callers;
    /// this returns the full trace norm of the difference.
    pub fn trace_norm_diff(&self, other: &DensityMatrix) -> Result<f64> {
        if self.register.dim() != other.register.dim() {
            return Err(Error::Shape("trace norm of unequal dimensions".into()));
        }
        linalg::trace_norm(&(&self.matrix - &other.matrix))
    }

    pub fn frobenius_diff(&self, other: &DensityMatrix) -> f64 {
        linalg::frobenius(&(&self.matrix - &other.matrix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_entangled_reduces_to_mixed() {
        let phi = maximally_entangled(("A", 3), ("B", 3)).unwrap();
        let rho_a = phi.reduced_density(&["A"]).unwrap();
        let tau = DensityMatrix::maximally_mixed(Register::from_dims(&[("A", 3)]).unwrap());
        assert!(rho_a.frobenius_diff(&tau) < 1e-12);
    }

    #[test]
    fn reorder_parts_moves_digits_and_inverts() {
        use crate::random::Prng;
        let mut rng = Prng::seeded(4);
        let reg = Register::from_dims(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let raw = Array1::from_shape_fn(reg.dim(), |_| rng.complex_gaussian());
        let norm = linalg::vec_norm(&raw);
        let psi = PureState::new(reg.clone(), raw.mapv(|v| v / norm)).unwrap();
        let moved = psi.reorder_parts(&["C", "A", "B"]).unwrap();
        assert_eq!(moved.register().labels(), vec!["C", "A", "B"]);
        // digit (a=1, b=2, c=0) lands at (c=0, a=1, b=2)
        let src = reg.index(&[1, 2, 0]);
        let dst = moved.register().index(&[0, 1, 2]);
        assert_eq!(moved.amplitudes()[dst], psi.amplitudes()[src]);
        // marginals are unaffected and the reorder inverts cleanly
        let back = moved.reorder_parts(&["A", "B", "C"]).unwrap();
        assert!(linalg::vec_norm(&(back.amplitudes() - psi.amplitudes())) < 1e-14);
        assert!(psi
            .reduced_density(&["B"])
            .unwrap()
            .frobenius_diff(&moved.reduced_density(&["B"]).unwrap())
            < 1e-14);
        // partial lists are rejected
        assert!(psi.reorder_parts(&["A", "B"]).is_err());
    }

    #[test]
    fn reduced_density_matches_dense_partial_trace() {
        use crate::random::Prng;
        let mut rng = Prng::seeded(3);
        let reg = Register::from_dims(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let raw = Array1::from_shape_fn(reg.dim(), |_| rng.complex_gaussian());
        let norm = linalg::vec_norm(&raw);
        let psi = PureState::new(reg, raw.mapv(|v| v / norm)).unwrap();
        let fast = psi.reduced_density(&["A", "C"]).unwrap();
        let dense = psi.density().partial_trace(&["A", "C"]).unwrap();
        assert!(fast.frobenius_diff(&dense) < 1e-12);
        assert_eq!(fast.register().labels(), vec!["A", "C"]);
    }

    #[test]
    fn partial_trace_composes() {
        use crate::random::Prng;
        let mut rng = Prng::seeded(5);
        let reg = Register::from_dims(&[("A", 2), ("B", 2), ("C", 3)]).unwrap();
        let raw = Array1::from_shape_fn(reg.dim(), |_| rng.complex_gaussian());
        let norm = linalg::vec_norm(&raw);
        let psi = PureState::new(reg, raw.mapv(|v| v / norm)).unwrap();
        let rho = psi.density();
        let ab_then_a = rho.partial_trace(&["A", "B"]).unwrap().partial_trace(&["A"]).unwrap();
        let a_direct = rho.partial_trace(&["A"]).unwrap();
        assert!(ab_then_a.frobenius_diff(&a_direct) < 1e-12);
    }

    #[test]
    fn schmidt_of_ghz_across_first_cut() {
        // (|000> + |111>)/sqrt(2) across A : (C D)
        let reg = Register::from_dims(&[("A", 2), ("C", 2), ("D", 2)]).unwrap();
        let mut amp = Array1::from_elem(8, ZERO);
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amp[0] = w;
        amp[7] = w;
        let psi = PureState::new(reg, amp).unwrap();
        let schmidt = psi.schmidt(&["A"]).unwrap();
        assert_eq!(schmidt.coefficients.len(), 2);
        for c in &schmidt.coefficients {
            assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // coefficients^2 match reduced eigenvalues
        let rho = psi.reduced_density(&["A"]).unwrap();
        let vals = linalg::eigenvalues_hermitian(rho.matrix()).unwrap();
        for (c, v) in schmidt.coefficients.iter().zip(vals) {
            assert!((c * c - v).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_reconstructs_random_state() {
        use crate::random::Prng;
        let mut rng = Prng::seeded(9);
        let reg = Register::from_dims(&[("A", 3), ("B", 2), ("C", 2)]).unwrap();
        let raw = Array1::from_shape_fn(reg.dim(), |_| rng.complex_gaussian());
        let norm = linalg::vec_norm(&raw);
        let psi = PureState::new(reg.clone(), raw.mapv(|v| v / norm)).unwrap();
        // Cut B : (A C): reconstruction must match the permuted amplitudes.
        let schmidt = psi.schmidt(&["B"]).unwrap();
        let rec = schmidt.reconstruct();
        let positions = reg.positions(&["B"]).unwrap();
        for g in 0..reg.dim() {
            let (l, r) = reg.split_index(g, &positions);
            let got = rec[l * schmidt.right_register.dim() + r];
            assert!((got - psi.amplitudes()[g]).norm() < 1e-10);
        }
        let sum_sq: f64 = schmidt.coefficients.iter().map(|c| c * c).sum();
        assert!((sum_sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_state_has_single_coefficient() {
        let a = PureState::basis(Register::from_dims(&[("A", 3)]).unwrap(), 1).unwrap();
        let b = PureState::basis(Register::from_dims(&[("B", 4)]).unwrap(), 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let schmidt = ab.schmidt(&["A"]).unwrap();
        assert!((schmidt.coefficients[0] - 1.0).abs() < 1e-12);
        for c in &schmidt.coefficients[1..] {
            assert!(c.abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_unnormalized() {
        let reg = Register::from_dims(&[("A", 2)]).unwrap();
        let amp = Array1::from(vec![ONE, ONE]);
        assert!(PureState::new(reg, amp).is_err());
    }
}
