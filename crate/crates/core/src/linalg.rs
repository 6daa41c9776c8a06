//! Dense complex linear algebra: Kronecker products, a cyclic Jacobi
//! Hermitian eigensolver, trace and operator norms.
//!
//! The eigensolver first splits the matrix into connected components of its
//! exact nonzero pattern (an exact transformation, cheap for structured
//! states) and then runs cyclic Jacobi rotations per block: convergence
//! threshold 1e-12 on the off-diagonal Frobenius mass, at most 100 sweeps.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Identity matrix of size n.
pub fn identity(n: usize) -> CMat {
    Array2::from_diag_elem(n, ONE)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    let mut out = Array2::from_elem((m.ncols(), m.nrows()), ZERO);
    for ((r, c), v) in m.indexed_iter() {
        out[(c, r)] = v.conj();
    }
    out
}

/// Kronecker product; the left factor is the more significant index block.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for ((i, j), &av) in a.indexed_iter() {
        if av == ZERO {
            continue;
        }
        for ((k, l), &bv) in b.indexed_iter() {
            out[(i * br + k, j * bc + l)] = av * bv;
        }
    }
    out
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(mats: &[&CMat]) -> CMat {
    let mut out = identity(1);
    for m in mats {
        out = kron(&out, m);
    }
    out
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diag().iter().sum()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub struct Eig {
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

/// Full eigendecomposition `m = V diag(values) V†`.
///
/// Errors if `m` is not Hermitian within 1e-8 or Jacobi fails to converge.
pub fn eig_hermitian(m: &CMat) -> Result<Eig> {
    let (values, vectors) = eig_hermitian_inner(m, true)?;
    Ok(Eig { values, vectors: vectors.expect("vectors requested") })
}

/// Eigenvalues only (descending); cheaper when vectors are not needed.
pub fn eigenvalues_hermitian(m: &CMat) -> Result<Vec<f64>> {
    Ok(eig_hermitian_inner(m, false)?.0)
}

fn eig_hermitian_inner(m: &CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("eig on {}x{} matrix", n, m.ncols())));
    }
    if !is_hermitian(m, 1e-8) {
        return Err(Error::NotHermitian);
    }
    // Connected components of the exact nonzero pattern; entries that are
    // exactly zero couple nothing, so per-block diagonalization is exact.
    let comps = zero_pattern_components(m);
    let mut values = vec![0.0f64; n];
    let mut vectors = want_vectors.then(|| Array2::from_elem((n, n), ZERO));
    for comp in &comps {
        let k = comp.len();
        let mut block = Array2::from_elem((k, k), ZERO);
        for (bi, &gi) in comp.iter().enumerate() {
            for (bj, &gj) in comp.iter().enumerate() {
                block[(bi, bj)] = m[(gi, gj)];
            }
        }
        let (vals, vecs) = jacobi(&mut block, want_vectors)?;
        for (bi, &gi) in comp.iter().enumerate() {
            values[gi] = vals[bi];
            if let (Some(v), Some(bv)) = (vectors.as_mut(), vecs.as_ref()) {
                for (bj, &gj) in comp.iter().enumerate() {
                    v[(gj, gi)] = bv[(bj, bi)];
                }
            }
        }
    }
    // Global descending sort with matching column permutation.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = vectors.map(|v| {
        let mut out = Array2::from_elem((n, n), ZERO);
        for (new, &old) in order.iter().enumerate() {
            for r in 0..n {
                out[(r, new)] = v[(r, old)];
            }
        }
        out
    });
    Ok((sorted_values, sorted_vectors))
}

fn zero_pattern_components(m: &CMat) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort_by_key(|g| g[0]);
    groups
}

/// In-place cyclic Jacobi on a Hermitian block. Returns eigenvalues
/// (unsorted) and optionally the accumulated rotation matrix.
fn jacobi(a: &mut CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = a.nrows();
    // Symmetrize once so tiny Hermiticity violations cannot accumulate.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let scale = frobenius(a).max(1.0);
    let tol = 1e-12 * scale;
    let pivot_tol = tol / (n.max(2) as f64);
    let mut v = want_vectors.then(|| identity(n));
    for _sweep in 0..100 {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += 2.0 * a[(i, j)].norm_sqr();
                }
            }
            s.sqrt()
        };
        if off <= tol {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= pivot_tol {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * r);
                // Smaller-magnitude root of t^2 - 2 tau t - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_conj_phase = phase.conj() * s;
                let s_phase = phase * s;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = akp * c + akq * s_conj_phase;
                    let new_kq = akq * c - akp * s_phase;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp.conj();
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq.conj();
                }
                let new_pp = alpha * c * c + beta * t * t * c * c + 2.0 * s * c * r;
                a[(p, p)] = Complex64::new(new_pp, 0.0);
                a[(q, q)] = Complex64::new(alpha + beta - new_pp, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c + vkq * s_conj_phase;
                        v[(k, q)] = vkq * c - vkp * s_phase;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence)
}

/// Trace norm (sum of singular values). Hermitian inputs take the
/// eigenvalue path; general square matrices go through `m† m`.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    if m.nrows() == m.ncols() && is_hermitian(m, 1e-8) {
        let vals = eigenvalues_hermitian(m)?;
        return Ok(vals.iter().map(|v| v.abs()).sum());
    }
    let gram = dagger(m).dot(m);
    let vals = eigenvalues_hermitian(&gram)?;
    Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum())
}

/// Operator 2-norm (largest singular value).
pub fn two_norm(m: &CMat) -> Result<f64> {
    let gram = dagger(m).dot(m);
    let vals = eigenvalues_hermitian(&gram)?;
    Ok(vals.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let eig = eig_hermitian(m)?;
    let n = m.nrows();
    let mut out = Array2::from_elem((n, n), ZERO);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let flambda = f(lambda);
        if flambda == 0.0 {
            continue;
        }
        let col = eig.vectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += col[i] * col[j].conj() * flambda;
            }
        }
    }
    Ok(out)
}

/// 2-norm of `a - e^{i theta} b` with the phase fixed so the
/// largest-magnitude entry of `b` matches `a` there.
pub fn diff_norm_mod_phase(a: &CMat, b: &CMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape("phase-aligned comparison of unequal shapes".into()));
    }
    let mut best = (0usize, 0usize);
    let mut best_mag = -1.0;
    for ((i, j), v) in b.indexed_iter() {
        if v.norm() > best_mag {
            best_mag = v.norm();
            best = (i, j);
        }
    }
    let phase = if best_mag > 0.0 && a[best].norm() > 0.0 {
        let ratio = a[best] / b[best];
        ratio / ratio.norm()
    } else {
        ONE
    };
    let diff = a - &b.mapv(|v| v * phase);
    two_norm(&diff)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Returns an
/// orthonormal basis of the span, dropping vectors whose residual falls
/// below `tol` times their original norm.
pub fn orthonormalize(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let original = vec_norm(v);
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let coeff = vec_inner(b, &w);
                w = &w - &b.mapv(|x| x * coeff);
            }
        }
        let res = vec_norm(&w);
        if res > tol * original.max(1e-300) {
            basis.push(w.mapv(|x| x / res));
        }
    }
    basis
}
