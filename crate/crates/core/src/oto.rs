//! Infinite-temperature out-of-time-order correlators averaged over complete
//! operator bases, and their relationship to the Rényi-2 tripartite
//! information.
//!
//! Basis operators are normalized to tr(O_i†O_j) = d·δ_ij. The averaged
//! correlator uses the daggered ordering tr[O_out(t)† O_in† O_out(t) O_in]/d,
//! which is what the orthogonality normalization makes basis-independent for
//! non-Hermitian (unitary) bases such as the clock-shift family.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::choi_state;
use crate::info;
use crate::linalg::{self, CMat, ZERO};
use crate::register::Register;
use crate::unitary::UnitaryOp;
use crate::{Error, Result};

/// Compensated (Kahan) accumulator for complex sums, so the basis-pair
/// reduction is deterministic to well below 1e-10 regardless of length.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
}

impl KahanSum {
    fn add(&mut self, v: Complex64) {
        let y = v.re - self.c_re;
        let t = self.sum_re + y;
        self.c_re = (t - self.sum_re) - y;
        self.sum_re = t;
        let y = v.im - self.c_im;
        let t = self.sum_im + y;
        self.c_im = (t - self.sum_im) - y;
        self.sum_im = t;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re, self.sum_im)
    }
}

/// A complete orthogonal operator basis for one d-dimensional part:
/// d² matrices with tr(O_i† O_j) = d·δ_ij.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<CMat>,
}

impl OperatorBasis {
    pub fn new(dim: usize, elements: Vec<CMat>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(Error::Shape(format!(
                "need {} elements for dimension {dim}, got {}",
                dim * dim,
                elements.len()
            )));
        }
        for (i, a) in elements.iter().enumerate() {
            if a.dim() != (dim, dim) {
                return Err(Error::Shape("basis element has wrong shape".into()));
            }
            for (j, b) in elements.iter().enumerate() {
                let inner = linalg::trace(&linalg::dagger(a).dot(b));
                let expect = if i == j { dim as f64 } else { 0.0 };
                if (inner - Complex64::new(expect, 0.0)).norm() > 1e-9 {
                    return Err(Error::State(format!(
                        "basis elements {i},{j} break orthogonality: tr = {inner}"
                    )));
                }
            }
        }
        Ok(OperatorBasis { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    /// The basis conjugated element-wise by a unitary; orthogonality is
    /// preserved exactly.
    pub fn rotated(&self, v: &CMat) -> Result<OperatorBasis> {
        if v.dim() != (self.dim, self.dim) {
            return Err(Error::Shape("rotation has wrong shape".into()));
        }
        let vd = linalg::dagger(v);
        let elements = self.elements.iter().map(|o| v.dot(o).dot(&vd)).collect();
        OperatorBasis::new(self.dim, elements)
    }
}

/// Clock-shift basis X^p Z^q with X|y> = |y+1 mod d>, Z|y> = ω^y |y>,
/// ω = e^{2πi/d}. Unitary, hence tr(O†O) = d; distinct elements are
/// trace-orthogonal.
pub fn heisenberg_weyl_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::Shape(format!("basis needs dimension >= 2, got {d}")));
    }
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
    let mut elements = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            let mut m = Array2::from_elem((d, d), ZERO);
            for y in 0..d {
                m[((y + p) % d, y)] = omega.powu((q * y) as u32);
            }
            elements.push(m);
        }
    }
    OperatorBasis::new(d, elements)
}

/// Embeds a single-part operator into the full register (identity on the
/// other parts).
fn embed(op: &CMat, register: &Register, label: &str) -> Result<CMat> {
    let pos = register
        .position(label)
        .ok_or_else(|| Error::Register(format!("no part {label}")))?;
    let d = register.parts()[pos].dim;
    if op.dim() != (d, d) {
        return Err(Error::Shape(format!("operator does not fit part {label} (dim {d})")));
    }
    let left: usize = register.parts()[..pos].iter().map(|p| p.dim).product();
    let right: usize = register.parts()[pos + 1..].iter().map(|p| p.dim).product();
    let mut m = linalg::kron(&linalg::identity(left), op);
    if right > 1 {
        m = linalg::kron(&m, &linalg::identity(right));
    }
    Ok(m)
}

/// (1/dim) tr[O_out(t)† O_in† O_out(t) O_in] with O_out(t) = U† O_out U,
/// for single-part operators on an input and an output part of `u`.
pub fn single_correlator(
    u: &UnitaryOp,
    in_part: &str,
    out_part: &str,
    op_in: &CMat,
    op_out: &CMat,
) -> Result<Complex64> {
    if !u.is_square() {
        return Err(Error::Shape("correlators need a square unitary".into()));
    }
    let in_full = embed(op_in, u.input(), in_part)?;
    let out_full = embed(op_out, u.output(), out_part)?;
    let ud = linalg::dagger(u.matrix());
    let out_t = ud.dot(&out_full).dot(u.matrix());
    Ok(correlator_term(&out_t, &in_full))
}

fn correlator_term(out_t: &CMat, in_full: &CMat) -> Complex64 {
    // tr[T† A† T A] = <A·T, T·A> in the Frobenius inner product
    let left = in_full.dot(out_t);
    let right = out_t.dot(in_full);
    let mut acc = KahanSum::default();
    for (a, b) in left.iter().zip(right.iter()) {
        acc.add(a.conj() * b);
    }
    acc.value() / Complex64::new(in_full.nrows() as f64, 0.0)
}

/// Averaged correlator over explicit operator bases for the two parts.
pub fn average_oto_with(
    u: &UnitaryOp,
    in_part: &str,
    out_part: &str,
    basis_in: &OperatorBasis,
    basis_out: &OperatorBasis,
) -> Result<f64> {
    if !u.is_square() {
        return Err(Error::Shape("correlators need a square unitary".into()));
    }
    let ud = linalg::dagger(u.matrix());
    let embedded_in: Vec<CMat> = basis_in
        .elements()
        .iter()
        .map(|o| embed(o, u.input(), in_part))
        .collect::<Result<_>>()?;
    let mut acc = KahanSum::default();
    for o_out in basis_out.elements() {
        let out_full = embed(o_out, u.output(), out_part)?;
        let out_t = ud.dot(&out_full).dot(u.matrix());
        for in_full in &embedded_in {
            acc.add(correlator_term(&out_t, in_full));
        }
    }
    let pairs = (basis_in.elements().len() * basis_out.elements().len()) as f64;
    Ok((acc.value() / pairs).norm())
}

/// Averaged correlator over the clock-shift bases of the named parts.
pub fn average_oto(u: &UnitaryOp, in_part: &str, out_part: &str) -> Result<f64> {
    let d_in = part_dim(u.input(), in_part)?;
    let d_out = part_dim(u.output(), out_part)?;
    let basis_in = heisenberg_weyl_basis(d_in)?;
    let basis_out = heisenberg_weyl_basis(d_out)?;
    average_oto_with(u, in_part, out_part, &basis_in, &basis_out)
}

fn part_dim(register: &Register, label: &str) -> Result<usize> {
    register
        .position(label)
        .map(|p| register.parts()[p].dim)
        .ok_or_else(|| Error::Register(format!("no part {label}")))
}

/// Number of clock-shift basis pairs whose correlator sits within `tol` of
/// the maximal value 1 (a reported diagnostic, no semantics asserted).
/// The real part is compared: anticommuting pairs land at -1 and should not
/// count. |corr| <= 1 for unitary bases, so re >= 1-tol pins the whole value.
pub fn count_near_maximal(u: &UnitaryOp, in_part: &str, out_part: &str, tol: f64) -> Result<usize> {
    let basis_in = heisenberg_weyl_basis(part_dim(u.input(), in_part)?)?;
    let basis_out = heisenberg_weyl_basis(part_dim(u.output(), out_part)?)?;
    let mut count = 0;
    for o_out in basis_out.elements() {
        for o_in in basis_in.elements() {
            let c = single_correlator(u, in_part, out_part, o_in, o_out)?;
            if c.re >= 1.0 - tol {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Operators of the form I ⊕ Õ: identity on the first `block` levels, an
/// orthogonal-basis element on the rest. Each satisfies tr(O†O) = d, which
/// is the normalization the correlator bound needs (the family itself is not
/// mutually orthogonal).
pub fn block_identity_operators(d: usize, block: usize) -> Result<Vec<CMat>> {
    if block == 0 || block >= d {
        return Err(Error::Shape(format!("block must satisfy 0 < block < d, got ({d}, {block})")));
    }
    let tail = heisenberg_weyl_basis(d - block)?;
    let mut out = Vec::with_capacity(tail.elements().len());
    for o in tail.elements() {
        let mut m = linalg::identity(d);
        for i in 0..d - block {
            for j in 0..d - block {
                m[(block + i, block + j)] = o[(i, j)];
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Summary of the averaged correlators of a bipartite unitary and their
/// comparison against 2^{I3^(2)}.
#[derive(Clone, Debug, Serialize)]
pub struct OtoReport {
    pub avg_ac: f64,
    pub avg_ad: f64,
    pub product: f64,
    pub i3_renyi2: f64,
    pub ratio: f64,
}

/// Builds the report for a unitary with input parts A, B and output parts
/// C, D. `ratio = avg_AC·avg_AD / 2^{I3^(2)}`; for fixed part dimensions it
/// is the same for every unitary.
pub fn oto_report(u: &UnitaryOp) -> Result<OtoReport> {
    let avg_ac = average_oto(u, "A", "C")?;
    let avg_ad = average_oto(u, "A", "D")?;
    let product = avg_ac * avg_ad;
    let choi = choi_state(u)?;
    let i3_renyi2 = info::renyi2_tripartite(&choi, &["A"], &["B"], &["C"], &["D"])?;
    let ratio = product / i3_renyi2.exp2();
    Ok(OtoReport { avg_ac, avg_ad, product, i3_renyi2, ratio })
}

/// Both tripartite informations of a bipartite unitary's Choi state and
/// their gap (Rényi-2 value minus von Neumann value, always ≥ 0 up to
/// numerics).
pub fn renyi_gap(u: &UnitaryOp) -> Result<(f64, f64, f64)> {
    let choi = choi_state(u)?;
    let i3 = info::tripartite_information(&choi, &["A"], &["C"], &["D"])?;
    let i3_renyi2 = info::renyi2_tripartite(&choi, &["A"], &["B"], &["C"], &["D"])?;
    Ok((i3, i3_renyi2, i3_renyi2 - i3))
}
