//! Constructors for the structured unitaries used throughout the crate.
//!
//! Bipartite unitaries map input parts A, B to output parts C, D. All of the
//! arithmetic constructors are basis permutations and record their index
//! permutation alongside the dense matrix.

use ndarray::Array2;

use crate::linalg::{self, CMat, ZERO};
use crate::random::Prng;
use crate::register::Register;
use crate::unitary::{subsystem_permutation, UnitaryOp};
use crate::{Error, Result};

fn bipartite_registers(da: usize, db: usize) -> Result<(Register, Register)> {
    Ok((
        Register::from_dims(&[("A", da), ("B", db)])?,
        Register::from_dims(&[("C", da), ("D", db)])?,
    ))
}

/// Two-register scrambler |i>|j> -> |i+j>|i-j> (mod d, d odd).
///
/// Its square acts as |i>|j> -> |2i>|2j>, a product of local permutations.
pub fn u_scrambler(d: usize) -> Result<UnitaryOp> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::State(format!("scrambler needs odd d >= 3, got {d}")));
    }
    let (input, output) = bipartite_registers(d, d)?;
    let mut perm = vec![0usize; d * d];
    for i in 0..d {
        for j in 0..d {
            let c = (i + j) % d;
            let dd = (i + d - j) % d;
            perm[i * d + j] = c * d + dd;
        }
    }
    UnitaryOp::from_permutation(input, output, perm)
}

/// Block scrambler on dimension d: acts as `u_scrambler(d_s)` on the
/// subspace where both digits are below `d_s` and as identity elsewhere.
pub fn u_counter(d: usize, d_s: usize) -> Result<UnitaryOp> {
    if d_s > d || d_s % 2 == 0 || d_s < 1 {
        return Err(Error::State(format!("block scrambler needs odd d_s <= d, got ({d}, {d_s})")));
    }
    let (input, output) = bipartite_registers(d, d)?;
    let mut perm = vec![0usize; d * d];
    for a in 0..d {
        for b in 0..d {
            perm[a * d + b] = if a < d_s && b < d_s {
                let c = (a + b) % d_s;
                let dd = (a + d_s - b) % d_s;
                c * d + dd
            } else {
                a * d + b
            };
        }
    }
    UnitaryOp::from_permutation(input, output, perm)
}

/// Capacity-gap permutation: swaps the two digits exactly when they straddle
/// the `d0` boundary (one digit below `d0`, the other at or above it).
pub fn u_capacity_gap(d: usize, d0: usize) -> Result<UnitaryOp> {
    if d0 == 0 || d0 >= d {
        return Err(Error::State(format!("capacity gap needs 0 < d0 < d, got ({d}, {d0})")));
    }
    let (input, output) = bipartite_registers(d, d)?;
    let mut perm = vec![0usize; d * d];
    for a in 0..d {
        for b in 0..d {
            let straddle = (a < d0) != (b < d0);
            perm[a * d + b] = if straddle { b * d + a } else { a * d + b };
        }
    }
    UnitaryOp::from_permutation(input, output, perm)
}

/// Swap of two equal-dimension registers.
pub fn u_swap(d: usize) -> Result<UnitaryOp> {
    let (input, output) = bipartite_registers(d, d)?;
    let mut perm = vec![0usize; d * d];
    for a in 0..d {
        for b in 0..d {
            perm[a * d + b] = b * d + a;
        }
    }
    UnitaryOp::from_permutation(input, output, perm)
}

/// Identity on a bipartite register.
pub fn u_identity(da: usize, db: usize) -> Result<UnitaryOp> {
    let (input, output) = bipartite_registers(da, db)?;
    let d = input.dim();
    UnitaryOp::from_permutation(input, output, (0..d).collect())
}

/// Product-form bipartite unitary from four factors
/// A_L->C_L, A_R->D_L, B_L->C_R, B_R->D_R.
///
/// Inputs are single-part operators; dims set the split A = A_L x A_R,
/// B = B_L x B_R, C = C_L x C_R, D = D_L x D_R. The returned operator maps
/// A, B to C, D with the outputs gathered in that order.
pub fn u_crisscross(
    a_to_c: &UnitaryOp,
    a_to_d: &UnitaryOp,
    b_to_c: &UnitaryOp,
    b_to_d: &UnitaryOp,
) -> Result<UnitaryOp> {
    for f in [a_to_c, a_to_d, b_to_c, b_to_d] {
        if !f.is_square() {
            return Err(Error::Shape("criss-cross factors must be square".into()));
        }
    }
    let (al, ar) = (a_to_c.input().dim(), a_to_d.input().dim());
    let (bl, br) = (b_to_c.input().dim(), b_to_d.input().dim());
    let input = Register::from_dims(&[("A", al * ar), ("B", bl * br)])?;
    let output = Register::from_dims(&[("C", al * bl), ("D", ar * br)])?;

    // Work on the refined register, then reorder output slots C_L D_L C_R D_R
    // into C_L C_R D_L D_R and forget the fine-grained structure.
    let fine_in = Register::from_dims(&[("AL", al), ("AR", ar), ("BL", bl), ("BR", br)])?;
    let fine_out_raw =
        Register::from_dims(&[("CL", al), ("DL", ar), ("CR", bl), ("DR", br)])?;
    let relabel = |u: &UnitaryOp, in_label: &str, out_label: &str| -> Result<UnitaryOp> {
        UnitaryOp::new(
            Register::from_dims(&[(in_label, u.input().dim())])?,
            Register::from_dims(&[(out_label, u.output().dim())])?,
            u.matrix().clone(),
        )
    };
    let f1 = relabel(a_to_c, "AL", "CL")?;
    let f2 = relabel(a_to_d, "AR", "DL")?;
    let f3 = relabel(b_to_c, "BL", "CR")?;
    let f4 = relabel(b_to_d, "BR", "DR")?;
    let product = UnitaryOp::tensor(&[&f1, &f2, &f3, &f4])?;
    let reorder = subsystem_permutation(&fine_out_raw, &["CL", "CR", "DL", "DR"])?;
    let assembled = reorder.compose(&product)?;
    debug_assert_eq!(assembled.input().dim(), fine_in.dim());
    UnitaryOp::new(input, output, assembled.matrix().clone())
}

/// Repetition isometry |0> -> |00>, |1> -> |11> from one qubit into two.
pub fn ghz_isometry() -> Result<UnitaryOp> {
    let input = Register::from_dims(&[("A", 2)])?;
    let output = Register::from_dims(&[("C", 2), ("D", 2)])?;
    let mut m = Array2::from_elem((4, 2), ZERO);
    m[(0, 0)] = linalg::ONE;
    m[(3, 1)] = linalg::ONE;
    UnitaryOp::new(input, output, m)
}

/// Haar-random unitary matrix of size n (Ginibre sample + Gram-Schmidt QR;
/// the positive-diagonal R normalization makes the distribution exactly
/// Haar).
pub fn haar_matrix(n: usize, rng: &mut Prng) -> CMat {
    let mut g = Array2::from_shape_fn((n, n), |_| rng.complex_gaussian());
    // Modified Gram-Schmidt with a second pass for orthogonality at 1e-14.
    for col in 0..n {
        for _ in 0..2 {
            for prev in 0..col {
                let mut coeff = ZERO;
                for r in 0..n {
                    coeff += g[(r, prev)].conj() * g[(r, col)];
                }
                for r in 0..n {
                    let sub = g[(r, prev)] * coeff;
                    g[(r, col)] -= sub;
                }
            }
        }
        let norm: f64 = (0..n).map(|r| g[(r, col)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            g[(r, col)] /= norm;
        }
    }
    g
}

/// Haar-random bipartite unitary on parts of dimension (da, db).
pub fn haar_unitary(da: usize, db: usize, rng: &mut Prng) -> Result<UnitaryOp> {
    let (input, output) = bipartite_registers(da, db)?;
    let m = haar_matrix(da * db, rng);
    UnitaryOp::new(input, output, m)
}

/// Haar-random pure state vector of dimension n (normalized Ginibre column).
pub fn haar_state(n: usize, rng: &mut Prng) -> linalg::CVec {
    let v = ndarray::Array1::from_shape_fn(n, |_| rng.complex_gaussian());
    let norm = linalg::vec_norm(&v);
    v.mapv(|x| x / norm)
}

#[cfg(test)]
mod tests {
    // permutation asserts spell indices as row * width + column on purpose
    #![allow(clippy::erasing_op, clippy::identity_op)]
    use super::*;

    #[test]
    fn scrambler_example_entries() {
        // d=3: |1>|2> -> |0>|2> since 1+2=0 and 1-2=2 mod 3.
        let u = u_scrambler(3).unwrap();
        let perm = u.permutation().unwrap();
        assert_eq!(perm[1 * 3 + 2], 0 * 3 + 2);
        assert_eq!(perm[0], 0);
    }

    #[test]
    fn scrambler_rejects_even_dims() {
        assert!(u_scrambler(4).is_err());
        assert!(u_scrambler(1).is_err());
    }

    #[test]
    fn scrambler_square_is_doubling_map() {
        let u = u_scrambler(5).unwrap();
        let uu = u.compose(&u).unwrap();
        let perm = uu.permutation().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(perm[i * 5 + j], ((2 * i) % 5) * 5 + (2 * j) % 5);
            }
        }
    }

    #[test]
    fn counter_restricts_to_scrambler_and_identity() {
        let d = 7;
        let ds = 3;
        let u = u_counter(d, ds).unwrap();
        let small = u_scrambler(ds).unwrap();
        let perm = u.permutation().unwrap();
        for a in 0..d {
            for b in 0..d {
                let target = perm[a * d + b];
                if a < ds && b < ds {
                    let small_target = small.permutation().unwrap()[a * ds + b];
                    let (c, dd) = (small_target / ds, small_target % ds);
                    assert_eq!(target, c * d + dd);
                } else {
                    assert_eq!(target, a * d + b);
                }
            }
        }
    }

    #[test]
    fn capacity_gap_swaps_straddling_pairs() {
        let u = u_capacity_gap(4, 2).unwrap();
        let perm = u.permutation().unwrap();
        assert_eq!(perm[0 * 4 + 3], 3 * 4 + 0); // straddles
        assert_eq!(perm[0 * 4 + 1], 0 * 4 + 1); // both below
        assert_eq!(perm[2 * 4 + 3], 2 * 4 + 3); // both above
    }

    #[test]
    fn crisscross_of_identities_reorders_nothing() {
        let f = |d: usize, li: &str, lo: &str| {
            UnitaryOp::new(
                Register::from_dims(&[(li, d)]).unwrap(),
                Register::from_dims(&[(lo, d)]).unwrap(),
                linalg::identity(d),
            )
            .unwrap()
        };
        let u = u_crisscross(&f(2, "a", "c"), &f(3, "a", "c"), &f(2, "a", "c"), &f(1, "a", "c"))
            .unwrap();
        assert_eq!(u.input().dim(), 12);
        // |A=(al,ar), B=(bl,br)> -> |C=(al,bl), D=(ar,br)>
        // a = al*3+ar, b = bl; index in = a*2 + bl
        for al in 0..2 {
            for ar in 0..3 {
                for bl in 0..2 {
                    let inp = (al * 3 + ar) * 2 + bl;
                    let outp = (al * 2 + bl) * 3 + ar;
                    let col = u.matrix().column(inp);
                    assert_eq!(col[outp], linalg::ONE);
                }
            }
        }
    }

    #[test]
    fn ghz_isometry_shape() {
        let v = ghz_isometry().unwrap();
        assert_eq!(v.matrix().dim(), (4, 2));
    }

    #[test]
    fn haar_is_unitary_and_seeded() {
        let mut rng = Prng::seeded(1);
        let u = haar_unitary(2, 3, &mut rng).unwrap();
        assert_eq!(u.matrix().dim(), (6, 6));
        let mut rng2 = Prng::seeded(1);
        let u2 = haar_unitary(2, 3, &mut rng2).unwrap();
        assert_eq!(
            u.matrix()[(0, 0)].re.to_bits(),
            u2.matrix()[(0, 0)].re.to_bits()
        );
        let mut rng3 = Prng::seeded(2);
        let u3 = haar_unitary(2, 3, &mut rng3).unwrap();
        assert!((u.matrix()[(0, 0)] - u3.matrix()[(0, 0)]).norm() > 1e-12);
    }

    #[test]
    fn haar_state_is_unit() {
        let mut rng = Prng::seeded(4);
        let v = haar_state(17, &mut rng);
        assert!((linalg::vec_norm(&v) - 1.0).abs() < 1e-12);
    }
}
