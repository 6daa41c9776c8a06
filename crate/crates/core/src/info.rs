//! Entropies and derived information quantities, all in bits.
//!
//! Everything here reduces to subsystem entropies of a state. The
//! `EntropySource` trait lets the same formulas run on density matrices and
//! on pure states; pure states route through the smaller side of each cut,
//! which keeps eigenproblems at the Schmidt rank even for wide marginals.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::linalg;
use crate::register::Register;
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Spectrum values below this (negative) are hard errors, not artifacts.
const EIGEN_TOL: f64 = 1e-10;
/// Reported quantities in [-ARTIFACT_TOL, 0) snap to zero.
pub const ARTIFACT_TOL: f64 = 1e-9;

fn clamped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let mut vals = linalg::eigenvalues_hermitian(rho.matrix())?;
    for v in &mut vals {
        if *v < 0.0 {
            if *v < -EIGEN_TOL {
                return Err(Error::NegativeEigenvalue(*v));
            }
            *v = 0.0;
        }
    }
    Ok(vals)
}

/// Von Neumann entropy −Σ λ log₂ λ.
pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for v in clamped_spectrum(rho)? {
        if v > 0.0 {
            s -= v * v.log2();
        }
    }
    Ok(s)
}

/// Rényi-2 entropy −log₂ tr ρ².
pub fn renyi2(rho: &DensityMatrix) -> f64 {
    // tr ρ² = ‖ρ‖_F² for Hermitian ρ
    -linalg::frobenius(rho.matrix()).powi(2).log2()
}

/// Subsystem-entropy provider for the information quantities below.
pub trait EntropySource {
    fn register(&self) -> &Register;
    fn marginal(&self, labels: &[&str]) -> Result<DensityMatrix>;
    fn subsystem_entropy(&self, labels: &[&str]) -> Result<f64>;
    fn subsystem_renyi2(&self, labels: &[&str]) -> Result<f64>;
}

impl EntropySource for DensityMatrix {
    fn register(&self) -> &Register {
        DensityMatrix::register(self)
    }

    fn marginal(&self, labels: &[&str]) -> Result<DensityMatrix> {
        self.partial_trace(labels)
    }

    fn subsystem_entropy(&self, labels: &[&str]) -> Result<f64> {
        von_neumann(&self.partial_trace(labels)?)
    }

    fn subsystem_renyi2(&self, labels: &[&str]) -> Result<f64> {
        Ok(renyi2(&self.partial_trace(labels)?))
    }
}

impl PureState {
    /// Labels of the complement of `labels`, in register order.
    fn complement_labels(&self, labels: &[&str]) -> Vec<String> {
        self.register()
            .labels()
            .into_iter()
            .filter(|l| !labels.contains(l))
            .map(str::to_string)
            .collect()
    }

    /// The requested marginal or its complement, whichever is smaller.
    /// Pure-state cuts share their nonzero spectrum across both sides.
    fn smaller_cut(&self, labels: &[&str]) -> Result<Option<DensityMatrix>> {
        let keep_dim: usize = self.register().keep(labels)?.dim();
        let total = self.register().dim();
        if keep_dim == total || keep_dim == 1 {
            return Ok(None); // the whole state or a trivial cut: entropy 0
        }
        if keep_dim * keep_dim <= total {
            Ok(Some(self.reduced_density(labels)?))
        } else {
            let comp = self.complement_labels(labels);
            let comp_refs: Vec<&str> = comp.iter().map(String::as_str).collect();
            Ok(Some(self.reduced_density(&comp_refs)?))
        }
    }
}

impl EntropySource for PureState {
    fn register(&self) -> &Register {
        PureState::register(self)
    }

    fn marginal(&self, labels: &[&str]) -> Result<DensityMatrix> {
        self.reduced_density(labels)
    }

    fn subsystem_entropy(&self, labels: &[&str]) -> Result<f64> {
        match self.smaller_cut(labels)? {
            Some(m) => von_neumann(&m),
            None => Ok(0.0),
        }
    }

    fn subsystem_renyi2(&self, labels: &[&str]) -> Result<f64> {
        match self.smaller_cut(labels)? {
            Some(m) => Ok(renyi2(&m)),
            None => Ok(0.0),
        }
    }
}

fn ensure_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for l in *g {
            if seen.contains(l) {
                return Err(Error::Register(format!("label {l} appears in two groups")));
            }
            seen.push(l);
        }
    }
    Ok(())
}

fn union<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// I(A;B) = S(A) + S(B) − S(AB).
pub fn mutual_information<T: EntropySource>(state: &T, a: &[&str], b: &[&str]) -> Result<f64> {
    ensure_disjoint(&[a, b])?;
    Ok(state.subsystem_entropy(a)? + state.subsystem_entropy(b)?
        - state.subsystem_entropy(&union(&[a, b]))?)
}

/// I(A;B|C) = S(AC) + S(BC) − S(C) − S(ABC).
pub fn cmi<T: EntropySource>(state: &T, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    ensure_disjoint(&[a, b, c])?;
    Ok(state.subsystem_entropy(&union(&[a, c]))? + state.subsystem_entropy(&union(&[b, c]))?
        - state.subsystem_entropy(c)?
        - state.subsystem_entropy(&union(&[a, b, c]))?)
}

/// I₃(A;B;C) = I(A;B) + I(A;C) − I(A;BC), expanded into its symmetric
/// seven-entropy form.
pub fn tripartite_information<T: EntropySource>(
    state: &T,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    ensure_disjoint(&[a, b, c])?;
    Ok(state.subsystem_entropy(a)? + state.subsystem_entropy(b)? + state.subsystem_entropy(c)?
        - state.subsystem_entropy(&union(&[a, b]))?
        - state.subsystem_entropy(&union(&[a, c]))?
        - state.subsystem_entropy(&union(&[b, c]))?
        + state.subsystem_entropy(&union(&[a, b, c]))?)
}

/// Rényi-2 analogue of the tripartite information for a four-part state with
/// input groups (a, b) and output groups (c, d):
/// S₂(A) + S₂(B) − S₂(AC) − S₂(AD).
pub fn renyi2_tripartite<T: EntropySource>(
    state: &T,
    a: &[&str],
    b: &[&str],
    c: &[&str],
    d: &[&str],
) -> Result<f64> {
    ensure_disjoint(&[a, b, c, d])?;
    Ok(state.subsystem_renyi2(a)? + state.subsystem_renyi2(b)?
        - state.subsystem_renyi2(&union(&[a, c]))?
        - state.subsystem_renyi2(&union(&[a, d]))?)
}

/// Tripartite information I₃(A_i; A_i^c; C_j) of a multi-register Choi state
/// with parts A1..An, C1..Cm, for 1-based input index `i` and output index
/// `j`. Also evaluates both conditional-mutual-information forms of its
/// negation and errors if they disagree beyond 1e-9.
pub fn mimo_tripartite<T: EntropySource>(state: &T, i: usize, j: usize) -> Result<f64> {
    let labels = state.register().labels();
    let n = labels.iter().filter(|l| l.starts_with('A')).count();
    let m = labels.len() - n;
    if n == 0 || m == 0 || labels[..n].iter().any(|l| !l.starts_with('A')) {
        return Err(Error::Register("expected parts A1..An followed by C1..Cm".into()));
    }
    if i == 0 || i > n || j == 0 || j > m {
        return Err(Error::Register(format!(
            "indices ({i},{j}) out of range for {n} inputs, {m} outputs"
        )));
    }
    let a_i = format!("A{i}");
    let c_j = format!("C{j}");
    let a_rest: Vec<&str> = labels[..n].iter().copied().filter(|l| *l != a_i.as_str()).collect();
    let c_rest: Vec<&str> = labels[n..].iter().copied().filter(|l| *l != c_j.as_str()).collect();
    let ai: &[&str] = &[&a_i];
    let cj: &[&str] = &[&c_j];

    let i3 = tripartite_information(state, ai, &a_rest, cj)?;
    let form_a = cmi(state, ai, &a_rest, cj)?;
    let form_c = cmi(state, cj, &c_rest, ai)?;
    if (form_a - form_c).abs() > ARTIFACT_TOL {
        return Err(Error::State(format!(
            "conditional mutual information forms disagree: {form_a} vs {form_c}"
        )));
    }
    Ok(i3)
}

/// Binary entropy with the 0·log 0 = 0 convention at the endpoints.
pub fn binary_entropy(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
    }
}

/// Entropy-continuity bound T log₂(D−1) + h(T) for half trace distance T
/// between states of dimension D.
pub fn fannes_audenaert_bound(t: f64, dim: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::State(format!("half trace distance {t} outside [0,1]")));
    }
    if dim < 2 {
        return Err(Error::State(format!("dimension {dim} below 2")));
    }
    Ok(t * ((dim - 1) as f64).log2() + binary_entropy(t))
}

/// Trace-norm bound √(2 ln 2 · mi) on ‖ρ_AB − ρ_A⊗ρ_B‖₁ from the mutual
/// information (relative-entropy form of Pinsker's inequality).
pub fn pinsker_bound(mi: f64) -> Result<f64> {
    if mi < 0.0 {
        if mi < -ARTIFACT_TOL {
            return Err(Error::State(format!("mutual information {mi} is negative")));
        }
        return Ok(0.0);
    }
    Ok((2.0 * std::f64::consts::LN_2 * mi).sqrt())
}

/// Communication rates for re-routing the A-share of a four-part pure state
/// with parts A, B, C, D: qubit rate ½ I(A;B|D) and ebit rate
/// ½ I(A;C) − ½ I(A;D) (negative means net ebit gain).
pub fn redistribution_rates(psi: &PureState) -> Result<(f64, f64)> {
    for l in ["A", "B", "C", "D"] {
        if psi.register().position(l).is_none() {
            return Err(Error::Register(format!("expected part {l}")));
        }
    }
    let qubit = 0.5 * cmi(psi, &["A"], &["B"], &["D"])?;
    let ebit = 0.5 * mutual_information(psi, &["A"], &["C"])?
        - 0.5 * mutual_information(psi, &["A"], &["D"])?;
    Ok((qubit, ebit))
}

/// Flat map of named quantities in bits. Values inserted through
/// [`InfoReport::insert_nonnegative`] snap tiny negative artifacts (within
/// 1e-9 of zero) to exactly zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InfoReport {
    values: BTreeMap<String, f64>,
}

impl InfoReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// For quantities that are nonnegative up to numerical noise.
    pub fn insert_nonnegative(&mut self, key: impl Into<String>, value: f64) {
        let v = if (-ARTIFACT_TOL..0.0).contains(&value) { 0.0 } else { value };
        self.values.insert(key.into(), v);
    }

    /// For signed quantities.
    pub fn insert(&mut self, key: impl Into<String>, value: f64) {
        self.values.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

/// Full entropic profile of a four-part pure state with parts A, B, C, D:
/// single and pairwise entropies, the mutual informations between inputs and
/// outputs, the tripartite information with its Rényi-2 analogue, and all
/// four conditional-mutual-information forms of −I₃.
pub fn four_part_report(psi: &PureState) -> Result<InfoReport> {
    for l in ["A", "B", "C", "D"] {
        if psi.register().position(l).is_none() {
            return Err(Error::Register(format!("expected part {l}")));
        }
    }
    let mut ent: BTreeMap<&str, f64> = BTreeMap::new();
    for (key, labels) in [
        ("A", vec!["A"]),
        ("B", vec!["B"]),
        ("C", vec!["C"]),
        ("D", vec!["D"]),
        ("AB", vec!["A", "B"]),
        ("AC", vec!["A", "C"]),
        ("AD", vec!["A", "D"]),
        ("BC", vec!["B", "C"]),
        ("BD", vec!["B", "D"]),
        ("CD", vec!["C", "D"]),
    ] {
        ent.insert(key, psi.subsystem_entropy(&labels)?);
    }
    // Purity of the global state supplies the three-part entropies.
    let (sa, sb, sc, sd) = (ent["A"], ent["B"], ent["C"], ent["D"]);
    let s_abc = sd;
    let s_abd = sc;
    let s_acd = sb;
    let s_bcd = sa;

    let mut report = InfoReport::new();
    for (k, v) in &ent {
        report.insert_nonnegative(format!("S({k})"), *v);
    }
    let i_ac = sa + sc - ent["AC"];
    let i_ad = sa + sd - ent["AD"];
    let i_bc = sb + sc - ent["BC"];
    let i_bd = sb + sd - ent["BD"];
    let i_a_cd = sa + ent["CD"] - s_acd;
    report.insert_nonnegative("I(A;C)", i_ac);
    report.insert_nonnegative("I(A;D)", i_ad);
    report.insert_nonnegative("I(B;C)", i_bc);
    report.insert_nonnegative("I(B;D)", i_bd);
    report.insert_nonnegative("I(A;CD)", i_a_cd);
    report.insert_nonnegative("I(A;B|C)", ent["AC"] + ent["BC"] - sc - s_abc);
    report.insert_nonnegative("I(A;B|D)", ent["AD"] + ent["BD"] - sd - s_abd);
    report.insert_nonnegative("I(C;D|A)", ent["AC"] + ent["AD"] - sa - s_acd);
    report.insert_nonnegative("I(C;D|B)", ent["BC"] + ent["BD"] - sb - s_bcd);
    report.insert("I3", i_ac + i_ad - i_a_cd);
    report.insert(
        "I3_renyi2",
        renyi2_tripartite(psi, &["A"], &["B"], &["C"], &["D"])?,
    );
    Ok(report)
}
