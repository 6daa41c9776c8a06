//! Isometries between labeled registers.

use ndarray::{Array1, Array2};

use crate::linalg::{self, CMat, ONE, ZERO};
use crate::register::{Part, Register};
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result};

/// An isometry from `input` to `output` (square matrices are unitary).
///
/// Constructors that build basis permutations also record the underlying
/// index permutation so fast paths and tests can use it directly.
#[derive(Debug, Clone)]
pub struct UnitaryOp {
    input: Register,
    output: Register,
    matrix: CMat,
    permutation: Option<Vec<usize>>,
}

impl UnitaryOp {
    /// Validates `matrix† matrix = I` within 1e-10 (isometry condition).
    pub fn new(input: Register, output: Register, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != output.dim() || matrix.ncols() != input.dim() {
            return Err(Error::Shape(format!(
                "matrix {}x{} does not map dim {} into dim {}",
                matrix.nrows(),
                matrix.ncols(),
                input.dim(),
                output.dim()
            )));
        }
        if matrix.ncols() > matrix.nrows() {
            return Err(Error::NotIsometry("more columns than rows".into()));
        }
        let gram = linalg::dagger(&matrix).dot(&matrix);
        let dev = linalg::frobenius(&(&gram - &linalg::identity(matrix.ncols())));
        if dev > 1e-10 * (matrix.ncols() as f64).sqrt().max(1.0) {
            return Err(Error::NotIsometry(format!("gram deviation {dev:.3e}")));
        }
        Ok(UnitaryOp { input, output, matrix, permutation: None })
    }

    /// Basis permutation: column `i` has its 1 in row `perm[i]`.
    pub fn from_permutation(input: Register, output: Register, perm: Vec<usize>) -> Result<Self> {
        let d = input.dim();
        if output.dim() != d || perm.len() != d {
            return Err(Error::Shape("permutation length mismatch".into()));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::NotIsometry("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut m = Array2::from_elem((d, d), ZERO);
        for (col, &row) in perm.iter().enumerate() {
            m[(row, col)] = ONE;
        }
        Ok(UnitaryOp { input, output, matrix: m, permutation: Some(perm) })
    }

    pub fn input(&self) -> &Register {
        &self.input
    }

    pub fn output(&self) -> &Register {
        &self.output
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// The stored index permutation, when the operator is a basis permutation.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    /// Applies to a pure state over the input register (labels must match).
    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.register() != &self.input {
            return Err(Error::Register("state register does not match input".into()));
        }
        let out = self.apply_vec(psi.amplitudes());
        PureState::new(self.output.clone(), out)
    }

    /// Applies to the raw amplitude vector (permutation-aware).
    pub fn apply_vec(&self, amp: &linalg::CVec) -> linalg::CVec {
        if let Some(perm) = &self.permutation {
            let mut out = Array1::from_elem(self.output.dim(), ZERO);
            for (i, &a) in amp.iter().enumerate() {
                out[perm[i]] = a;
            }
            out
        } else {
            self.matrix.dot(amp)
        }
    }

    /// Applies the operator to a contiguous run of parts inside a larger
    /// state, starting at `first_part`. The run must match the input register
    /// part for part; it is replaced in place by the output parts.
    pub fn apply_to_run(&self, psi: &PureState, first_part: &str) -> Result<PureState> {
        let reg = psi.register();
        let pos = reg
            .position(first_part)
            .ok_or_else(|| Error::Register(format!("no part {first_part}")))?;
        let k = self.input.len();
        if pos + k > reg.len() {
            return Err(Error::Register("operator run extends past the register".into()));
        }
        for (offset, part) in self.input.parts().iter().enumerate() {
            let have = &reg.parts()[pos + offset];
            if have != part {
                return Err(Error::Register(format!(
                    "part {}(dim {}) does not match operator input {}(dim {})",
                    have.label, have.dim, part.label, part.dim
                )));
            }
        }
        let mut new_parts: Vec<Part> = reg.parts()[..pos].to_vec();
        new_parts.extend(self.output.parts().iter().cloned());
        new_parts.extend(reg.parts()[pos + k..].iter().cloned());
        let new_register = Register::new(new_parts)?;

        let mid_in = self.input.dim();
        let mid_out = self.output.dim();
        let right: usize = reg.parts()[pos + k..].iter().map(|p| p.dim).product();
        let left = reg.dim() / (mid_in * right);
        let amp = psi.amplitudes();
        let mut out = Array1::from_elem(new_register.dim(), ZERO);
        if let Some(perm) = &self.permutation {
            for l in 0..left {
                for m in 0..mid_in {
                    let dst = (l * mid_out + perm[m]) * right;
                    let src = (l * mid_in + m) * right;
                    for r in 0..right {
                        out[dst + r] = amp[src + r];
                    }
                }
            }
        } else {
            for l in 0..left {
                for r in 0..right {
                    for row in 0..mid_out {
                        let mut acc = ZERO;
                        for m in 0..mid_in {
                            acc += self.matrix[(row, m)] * amp[(l * mid_in + m) * right + r];
                        }
                        out[(l * mid_out + row) * right + r] = acc;
                    }
                }
            }
        }
        PureState::new(new_register, out)
    }

    /// U rho U† for a density matrix over the input register.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.register() != &self.input {
            return Err(Error::Register("state register does not match input".into()));
        }
        let m = if let Some(perm) = &self.permutation {
            let src = rho.matrix();
            let mut out = Array2::from_elem(src.dim(), ZERO);
            for i in 0..perm.len() {
                for j in 0..perm.len() {
                    out[(perm[i], perm[j])] = src[(i, j)];
                }
            }
            out
        } else {
            self.matrix.dot(rho.matrix()).dot(&linalg::dagger(&self.matrix))
        };
        DensityMatrix::new(self.output.clone(), m)
    }

    /// `self ∘ earlier`: applies `earlier` first. Register dims per part must
    /// match; labels are taken from `earlier.input` and `self.output`.
    pub fn compose(&self, earlier: &UnitaryOp) -> Result<UnitaryOp> {
        let mid_out: Vec<usize> = earlier.output.parts().iter().map(|p| p.dim).collect();
        let mid_in: Vec<usize> = self.input.parts().iter().map(|p| p.dim).collect();
        if mid_out != mid_in {
            return Err(Error::Shape("composition registers do not match".into()));
        }
        let permutation = match (&self.permutation, &earlier.permutation) {
            (Some(second), Some(first)) => Some(first.iter().map(|&i| second[i]).collect()),
            _ => None,
        };
        let matrix = self.matrix.dot(&earlier.matrix);
        Ok(UnitaryOp { input: earlier.input.clone(), output: self.output.clone(), matrix, permutation })
    }

    /// Adjoint of a square unitary (input and output swap).
    pub fn adjoint(&self) -> Result<UnitaryOp> {
        if !self.is_square() {
            return Err(Error::NotIsometry("adjoint of a strict isometry".into()));
        }
        let permutation = self.permutation.as_ref().map(|perm| {
            let mut inv = vec![0usize; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inv[p] = i;
            }
            inv
        });
        Ok(UnitaryOp {
            input: self.output.clone(),
            output: self.input.clone(),
            matrix: linalg::dagger(&self.matrix),
            permutation,
        })
    }

    /// Tensor product of operators, concatenating registers left to right.
    pub fn tensor(factors: &[&UnitaryOp]) -> Result<UnitaryOp> {
        if factors.is_empty() {
            return Err(Error::Shape("tensor of zero factors".into()));
        }
        let mut input = factors[0].input.clone();
        let mut output = factors[0].output.clone();
        for f in &factors[1..] {
            input = input.concat(&f.input)?;
            output = output.concat(&f.output)?;
        }
        let all_perms: Option<Vec<&[usize]>> =
            factors.iter().map(|f| f.permutation.as_deref()).collect();
        if let Some(perms) = all_perms {
            // index arithmetic instead of a dense kron
            let in_dims: Vec<usize> = factors.iter().map(|f| f.input.dim()).collect();
            let out_dims: Vec<usize> = factors.iter().map(|f| f.output.dim()).collect();
            let total_in: usize = in_dims.iter().product();
            let mut perm = vec![0usize; total_in];
            for g in 0..total_in {
                let mut rest = g;
                let mut digits = vec![0usize; factors.len()];
                for i in (0..factors.len()).rev() {
                    digits[i] = rest % in_dims[i];
                    rest /= in_dims[i];
                }
                let mut out = 0usize;
                for i in 0..factors.len() {
                    out = out * out_dims[i] + perms[i][digits[i]];
                }
                perm[g] = out;
            }
            return UnitaryOp::from_permutation(input, output, perm);
        }
        let mats: Vec<&CMat> = factors.iter().map(|f| &f.matrix).collect();
        let matrix = linalg::kron_all(&mats);
        UnitaryOp { input, output, matrix, permutation: None }.validated()
    }

    fn validated(self) -> Result<UnitaryOp> {
        UnitaryOp::new(self.input, self.output, self.matrix)
    }
}

/// Identity unitary on a register (same labels in and out).
pub fn identity_op(register: &Register) -> UnitaryOp {
    let d = register.dim();
    UnitaryOp::from_permutation(register.clone(), register.clone(), (0..d).collect())
        .expect("identity permutation")
}

/// Unitary that reorders the parts of `register` into `new_order`.
///
/// The output register lists the parts in the new order; amplitudes move
/// accordingly (a pure subsystem relabeling).
pub fn subsystem_permutation(register: &Register, new_order: &[&str]) -> Result<UnitaryOp> {
    let positions = register.positions(new_order)?;
    if positions.len() != register.len() {
        return Err(Error::Register("subsystem permutation must list every part".into()));
    }
    // new_order[k] sits at old position old_pos[k]
    let mut old_pos = Vec::with_capacity(new_order.len());
    for l in new_order {
        old_pos.push(register.position(l).expect("validated above"));
    }
    let output = Register::new(
        old_pos.iter().map(|&p| register.parts()[p].clone()).collect(),
    )?;
    let d = register.dim();
    let mut perm = vec![0usize; d];
    for g in 0..d {
        let digits = register.digits(g);
        let new_digits: Vec<usize> = old_pos.iter().map(|&p| digits[p]).collect();
        perm[g] = output.index(&new_digits);
    }
    UnitaryOp::from_permutation(register.clone(), output, perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn permutation_roundtrip() {
        let reg = Register::from_dims(&[("A", 3)]).unwrap();
        let u = UnitaryOp::from_permutation(reg.clone(), reg.clone(), vec![1, 2, 0]).unwrap();
        let psi = PureState::basis(reg.clone(), 0).unwrap();
        let out = u.apply(&psi).unwrap();
        assert_eq!(out.amplitudes()[1], ONE);
        let back = u.adjoint().unwrap().apply(&out).unwrap();
        assert_eq!(back.amplitudes()[0], ONE);
    }

    #[test]
    fn conjugate_permutation_path_matches_dense() {
        let reg = Register::from_dims(&[("A", 2), ("B", 2)]).unwrap();
        let perm = UnitaryOp::from_permutation(reg.clone(), reg.clone(), vec![2, 0, 3, 1]).unwrap();
        let dense = UnitaryOp::new(reg.clone(), reg.clone(), perm.matrix().clone()).unwrap();
        let amps = Array1::from_shape_fn(4, |i| Complex64::new(0.5, 0.0) * Complex64::i().powu(i as u32));
        let rho = PureState::new(reg, amps).unwrap().density();
        let fast = perm.conjugate(&rho).unwrap();
        let slow = dense.conjugate(&rho).unwrap();
        assert!(fast.frobenius_diff(&slow) < 1e-12);
    }

    #[test]
    fn rejects_non_isometry() {
        let reg = Register::from_dims(&[("A", 2)]).unwrap();
        let m = Array2::from_elem((2, 2), ONE);
        assert!(UnitaryOp::new(reg.clone(), reg, m).is_err());
    }

    #[test]
    fn isometry_accepted() {
        // |0> -> |00>, |1> -> |11>
        let input = Register::from_dims(&[("A", 2)]).unwrap();
        let output = Register::from_dims(&[("C", 2), ("D", 2)]).unwrap();
        let mut m = Array2::from_elem((4, 2), ZERO);
        m[(0, 0)] = ONE;
        m[(3, 1)] = ONE;
        let v = UnitaryOp::new(input, output, m).unwrap();
        assert!(!v.is_square());
    }

    #[test]
    fn subsystem_permutation_moves_digits() {
        let reg = Register::from_dims(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let u = subsystem_permutation(&reg, &["C", "A", "B"]).unwrap();
        assert_eq!(u.output().labels(), vec!["C", "A", "B"]);
        // |a=1, b=2, c=0> maps to |c=0, a=1, b=2>
        let src = reg.index(&[1, 2, 0]);
        let dst = u.output().index(&[0, 1, 2]);
        assert_eq!(u.permutation().unwrap()[src], dst);
    }

    #[test]
    fn tensor_of_permutations_is_permutation() {
        let reg2 = Register::from_dims(&[("A", 2)]).unwrap();
        let reg3 = Register::from_dims(&[("B", 3)]).unwrap();
        let u = UnitaryOp::from_permutation(reg2.clone(), reg2.clone(), vec![1, 0]).unwrap();
        let v = UnitaryOp::from_permutation(reg3.clone(), reg3.clone(), vec![2, 0, 1]).unwrap();
        let uv = UnitaryOp::tensor(&[&u, &v]).unwrap();
        assert!(uv.permutation().is_some());
        // (a=0,b=0) -> (a=1,b=2) = index 5
        assert_eq!(uv.permutation().unwrap()[0], 5);
    }

    #[test]
    fn compose_tracks_permutations() {
        let reg = Register::from_dims(&[("A", 4)]).unwrap();
        let u = UnitaryOp::from_permutation(reg.clone(), reg.clone(), vec![1, 2, 3, 0]).unwrap();
        let uu = u.compose(&u).unwrap();
        assert_eq!(uu.permutation().unwrap(), &[2, 3, 0, 1]);
    }

    #[test]
    fn apply_to_run_permutes_middle_part() {
        let reg = Register::from_dims(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let breg = Register::from_dims(&[("B", 3)]).unwrap();
        let u = UnitaryOp::from_permutation(breg.clone(), breg, vec![1, 2, 0]).unwrap();
        let psi = PureState::basis(reg.clone(), reg.index(&[1, 0, 1])).unwrap();
        let out = u.apply_to_run(&psi, "B").unwrap();
        assert_eq!(out.amplitudes()[reg.index(&[1, 1, 1])], ONE);
        // mismatched label is rejected
        assert!(u.apply_to_run(&psi, "A").is_err());
    }

    #[test]
    fn apply_to_run_grows_register_for_isometries() {
        let reg = Register::from_dims(&[("A", 2), ("B", 2)]).unwrap();
        let input = Register::from_dims(&[("B", 2)]).unwrap();
        let output = Register::from_dims(&[("X", 2), ("Y", 2)]).unwrap();
        let mut m = Array2::from_elem((4, 2), ZERO);
        m[(0, 0)] = ONE;
        m[(3, 1)] = ONE;
        let v = UnitaryOp::new(input, output, m).unwrap();
        let psi = PureState::basis(reg.clone(), reg.index(&[1, 1])).unwrap();
        let out = v.apply_to_run(&psi, "B").unwrap();
        assert_eq!(out.register().labels(), vec!["A", "X", "Y"]);
        assert_eq!(out.amplitudes()[out.register().index(&[1, 1, 1])], ONE);
    }

    #[test]
    fn dense_apply_matches_matrix() {
        let reg = Register::from_dims(&[("A", 2)]).unwrap();
        let h = Array2::from_shape_fn((2, 2), |(i, j)| {
            let sign = if i == 1 && j == 1 { -1.0 } else { 1.0 };
            Complex64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0)
        });
        let u = UnitaryOp::new(reg.clone(), reg.clone(), h).unwrap();
        let psi = PureState::basis(reg, 0).unwrap();
        let out = u.apply(&psi).unwrap();
        assert!((out.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
