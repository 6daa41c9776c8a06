//! Square matrices over the integers mod a prime, and the permutation
//! unitaries they induce on collections of d-dimensional registers.

use crate::random::Prng;
use crate::register::Register;
use crate::unitary::UnitaryOp;
use crate::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Multiplicative inverse of a mod m (extended Euclid). Errors if m is not
/// prime or a is divisible by m.
pub fn scalar_inverse(a: u64, m: u64) -> Result<u64> {
    if !is_prime(m) {
        return Err(Error::Modular(format!("modulus {m} is not prime")));
    }
    let a = a % m;
    if a == 0 {
        return Err(Error::Modular(format!("0 has no inverse mod {m}")));
    }
    // Extended Euclid on (a, m) in signed arithmetic.
    let (mut r0, mut r1) = (a as i64, m as i64);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    Ok(s0.rem_euclid(m as i64) as u64)
}

/// Row-major square matrix with entries reduced mod `modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    n: usize,
    modulus: u64,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn new(n: usize, modulus: u64, entries: Vec<u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Modular(format!("modulus must be >= 2, got {modulus}")));
        }
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        let entries = entries.into_iter().map(|e| e % modulus).collect();
        Ok(Self { n, modulus, entries })
    }

    pub fn identity(n: usize, modulus: u64) -> Result<Self> {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Self::new(n, modulus, entries)
    }

    /// Identity plus the all-ones matrix. Determinant is n+1 mod modulus, so
    /// this is singular exactly when the modulus divides n+1.
    pub fn counter(n: usize, modulus: u64) -> Result<Self> {
        let mut entries = vec![1; n * n];
        for i in 0..n {
            entries[i * n + i] = 2;
        }
        Self::new(n, modulus, entries)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.modulus != other.modulus {
            return Err(Error::Shape("matrix product needs matching size and modulus".into()));
        }
        let n = self.n;
        let m = self.modulus;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc = (acc + self.get(i, k) * other.get(k, j)) % m;
                }
                entries[i * n + j] = acc;
            }
        }
        Self::new(n, m, entries)
    }

    pub fn map_vector(&self, x: &[u64]) -> Vec<u64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = 0u64;
                for j in 0..n {
                    acc = (acc + self.get(i, j) * (x[j] % self.modulus)) % self.modulus;
                }
                acc
            })
            .collect()
    }

    /// Determinant mod the (prime) modulus, by Gaussian elimination.
    pub fn det(&self) -> Result<u64> {
        if !is_prime(self.modulus) {
            return Err(Error::Modular(format!("modulus {} is not prime", self.modulus)));
        }
        let n = self.n;
        let p = self.modulus;
        let mut a = self.entries.clone();
        let mut det = 1u64;
        for col in 0..n {
            let pivot_row = match (col..n).find(|&r| a[r * n + col] != 0) {
                Some(r) => r,
                None => return Ok(0),
            };
            if pivot_row != col {
                for j in 0..n {
                    a.swap(pivot_row * n + j, col * n + j);
                }
                det = p - det; // det is a unit so far, never 0
            }
            let pivot = a[col * n + col];
            det = det * pivot % p;
            let inv = scalar_inverse(pivot, p)?;
            for row in col + 1..n {
                let factor = a[row * n + col] * inv % p;
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let sub = factor * a[col * n + j] % p;
                    a[row * n + j] = (a[row * n + j] + p - sub) % p;
                }
            }
        }
        Ok(det)
    }

    /// Inverse mod the prime modulus (Gauss-Jordan on the augmented matrix).
    pub fn inverse(&self) -> Result<Self> {
        if !is_prime(self.modulus) {
            return Err(Error::Modular(format!("modulus {} is not prime", self.modulus)));
        }
        let n = self.n;
        let p = self.modulus;
        let mut a = self.entries.clone();
        let mut b = Self::identity(n, p)?.entries;
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| a[r * n + col] != 0).ok_or_else(|| {
                Error::Modular(format!("matrix is singular mod {p}"))
            })?;
            if pivot_row != col {
                for j in 0..n {
                    a.swap(pivot_row * n + j, col * n + j);
                    b.swap(pivot_row * n + j, col * n + j);
                }
            }
            let inv = scalar_inverse(a[col * n + col], p)?;
            for j in 0..n {
                a[col * n + j] = a[col * n + j] * inv % p;
                b[col * n + j] = b[col * n + j] * inv % p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row * n + col];
                if factor == 0 {
                    continue;
                }
                for j in 0..n {
                    let sub_a = factor * a[col * n + j] % p;
                    let sub_b = factor * b[col * n + j] % p;
                    a[row * n + j] = (a[row * n + j] + p - sub_a) % p;
                    b[row * n + j] = (b[row * n + j] + p - sub_b) % p;
                }
            }
        }
        Self::new(n, p, b)
    }

    /// Determinant of the submatrix obtained by deleting `row` and `col`,
    /// computed (up to sign, which cannot change zeroness) as the determinant
    /// of the matrix with that row replaced by the indicator of that column.
    pub fn first_minor(&self, row: usize, col: usize) -> Result<u64> {
        let n = self.n;
        let mut replaced = self.clone();
        for j in 0..n {
            replaced.entries[row * n + j] = u64::from(j == col);
        }
        replaced.det()
    }
}

/// The three structural conditions a mod-matrix must meet for its induced
/// permutation to scramble every sender against every receiver: invertibility,
/// no zero entries, and no vanishing first minors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MimoCriteria {
    pub invertible: bool,
    pub entries_nonzero: bool,
    pub minors_nonzero: bool,
}

impl MimoCriteria {
    pub fn all(&self) -> bool {
        self.invertible && self.entries_nonzero && self.minors_nonzero
    }
}

pub fn mimo_criteria(m: &ModMatrix) -> Result<MimoCriteria> {
    let n = m.size();
    let invertible = m.det()? != 0;
    let entries_nonzero = m.entries().iter().all(|&e| e != 0);
    let mut minors_nonzero = true;
    'outer: for i in 0..n {
        for j in 0..n {
            if m.first_minor(i, j)? == 0 {
                minors_nonzero = false;
                break 'outer;
            }
        }
    }
    Ok(MimoCriteria { invertible, entries_nonzero, minors_nonzero })
}

/// Random search for an n x n matrix mod d satisfying all of
/// [`mimo_criteria`]. Entries are drawn uniformly from 1..d so the
/// nonzero-entries condition holds by construction.
pub fn find_mimo_matrix(n: usize, d: u64, rng: &mut Prng) -> Result<ModMatrix> {
    if !is_prime(d) {
        return Err(Error::Modular(format!("modulus {d} is not prime")));
    }
    if d < 2 + 1 {
        return Err(Error::Modular(format!(
            "no all-nonzero invertible matrices with all minors nonzero exist mod {d} for n > 1"
        )));
    }
    const ATTEMPTS: usize = 20_000;
    for _ in 0..ATTEMPTS {
        let entries: Vec<u64> =
            (0..n * n).map(|_| 1 + rng.uniform_range((d - 1) as usize) as u64).collect();
        let m = ModMatrix::new(n, d, entries)?;
        if mimo_criteria(&m)?.all() {
            return Ok(m);
        }
    }
    Err(Error::Modular(format!(
        "no {n}x{n} matrix mod {d} satisfying all scrambling criteria found in {ATTEMPTS} samples"
    )))
}

/// Permutation unitary |x> -> |Mx mod d> acting on n input registers
/// A1..An of dimension d each, producing output registers C1..Cn.
pub fn u_mimo(m: &ModMatrix) -> Result<UnitaryOp> {
    let n = m.size();
    let d = m.modulus() as usize;
    if m.det()? == 0 {
        return Err(Error::Modular(format!(
            "matrix is singular mod {}, so |x> -> |Mx> is not a bijection",
            m.modulus()
        )));
    }
    let labels_in: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let labels_out: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
    let dims_in: Vec<(&str, usize)> = labels_in.iter().map(|l| (l.as_str(), d)).collect();
    let dims_out: Vec<(&str, usize)> = labels_out.iter().map(|l| (l.as_str(), d)).collect();
    let input = Register::from_dims(&dims_in)?;
    let output = Register::from_dims(&dims_out)?;
    let total = input.dim();
    let mut perm = vec![0usize; total];
    for idx in 0..total {
        let digits: Vec<u64> = input.digits(idx).into_iter().map(|v| v as u64).collect();
        let image = m.map_vector(&digits);
        let image_digits: Vec<usize> = image.into_iter().map(|v| v as usize).collect();
        perm[idx] = output.index(&image_digits);
    }
    UnitaryOp::from_permutation(input, output, perm)
}

#[cfg(test)]
mod tests {
    // permutation asserts spell indices as row * width + column on purpose
    #![allow(clippy::erasing_op, clippy::identity_op)]
    use super::*;

    #[test]
    fn counter_inverse_matches_closed_form() {
        // (I + E)^-1 = I - E/(n+1); for n=2 mod 5 that is [[4,3],[3,4]].
        let m = ModMatrix::counter(2, 5).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv.entries(), &[4, 3, 3, 4]);
        assert_eq!(m.mul(&inv).unwrap(), ModMatrix::identity(2, 5).unwrap());

        for (n, p) in [(3usize, 7u64), (4, 11), (5, 13)] {
            let m = ModMatrix::counter(n, p).unwrap();
            let inv_scale = scalar_inverse(n as u64 + 1, p).unwrap();
            let inv = m.inverse().unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j {
                        (1 + p - inv_scale % p) % p
                    } else {
                        (p - inv_scale % p) % p
                    };
                    assert_eq!(inv.get(i, j), expect, "({n},{p}) entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn counter_determinant_is_n_plus_one() {
        for (n, p) in [(2usize, 5u64), (3, 5), (4, 5), (6, 7), (4, 3)] {
            let m = ModMatrix::counter(n, p).unwrap();
            assert_eq!(m.det().unwrap(), (n as u64 + 1) % p, "n={n} p={p}");
        }
        // d | n+1 makes it singular.
        assert!(ModMatrix::counter(4, 5).unwrap().inverse().is_err());
    }

    #[test]
    fn non_prime_modulus_rejected_for_inversion() {
        let m = ModMatrix::identity(2, 6).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Modular(_))));
        assert!(matches!(scalar_inverse(5, 6), Err(Error::Modular(_))));
        assert_eq!(scalar_inverse(3, 7).unwrap(), 5);
    }

    #[test]
    fn criteria_on_counter_matrices() {
        // mod 5: det 3, entries {2,1,1,2}, minors are the entries themselves.
        let good = ModMatrix::counter(2, 5).unwrap();
        let c = mimo_criteria(&good).unwrap();
        assert!(c.invertible && c.entries_nonzero && c.minors_nonzero && c.all());

        // mod 3: det = n+1 = 0, so invertibility fails.
        let bad = ModMatrix::counter(2, 3).unwrap();
        let c = mimo_criteria(&bad).unwrap();
        assert!(!c.invertible && c.entries_nonzero && c.minors_nonzero && !c.all());
    }

    #[test]
    fn minor_matches_direct_cofactor() {
        let m = ModMatrix::new(3, 7, vec![1, 2, 3, 4, 5, 6, 2, 3, 5]).unwrap();
        // minor(0,0) = det [[5,6],[3,5]] = 25-18 = 7 = 0 mod 7
        assert_eq!(m.first_minor(0, 0).unwrap(), 0);
        // minor(0,1) = det [[4,6],[2,5]] = 20-12 = 8 = 1 mod 7; sign may flip
        let got = m.first_minor(0, 1).unwrap();
        assert!(got == 1 || got == 6, "got {got}");
        assert_ne!(got, 0);
    }

    #[test]
    fn searched_matrix_meets_criteria() {
        let mut rng = Prng::seeded(7);
        let m = find_mimo_matrix(4, 5, &mut rng).unwrap();
        assert!(mimo_criteria(&m).unwrap().all());
        assert!(m.entries().iter().all(|&e| (1..5).contains(&e)));
    }

    #[test]
    fn mimo_unitary_maps_indices() {
        let m = ModMatrix::counter(2, 5).unwrap();
        let u = u_mimo(&m).unwrap();
        let perm = u.permutation().unwrap();
        // x = (1, 0): Mx = (2, 1). Leftmost digit most significant.
        assert_eq!(perm[1 * 5 + 0], 2 * 5 + 1);
        // x = (3, 4): Mx = (2*3+4, 3+2*4) = (10, 11) = (0, 1) mod 5.
        assert_eq!(perm[3 * 5 + 4], 0 * 5 + 1);
    }

    #[test]
    fn mimo_unitary_inverse_round_trip() {
        let m = ModMatrix::counter(3, 7).unwrap();
        let u = u_mimo(&m).unwrap();
        let v = u_mimo(&m.inverse().unwrap()).unwrap();
        let round = v.compose(&u).unwrap();
        let perm = round.permutation().unwrap();
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(i, p);
        }
    }
}
