//! Channels represented by their (normalized) Choi states, plus the
//! constructions built from them: Choi states of isometries, residual
//! channels obtained by fixing one input, reference channels, the Petz
//! transpose recovery map, channel-distance witnesses, and coherent
//! information.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::info;
use crate::linalg::{self, CMat, ZERO};
use crate::register::{Part, Register};
use crate::state::{maximally_entangled, DensityMatrix, PureState};
use crate::unitary::UnitaryOp;
use crate::{Error, Result};

/// Pure Choi state of an isometry: one maximally entangled reference per
/// input part, pushed through the operator. The returned register lists the
/// input parts (now playing the reference role) followed by the output parts.
pub fn choi_state(u: &UnitaryOp) -> Result<PureState> {
    let register = u.input().concat(u.output())?;
    let d_in = u.input().dim();
    let d_out = u.output().dim();
    let scale = Complex64::new(1.0 / (d_in as f64).sqrt(), 0.0);
    let mut amp = Array1::from_elem(d_in * d_out, ZERO);
    if let Some(perm) = u.permutation() {
        for (x, &y) in perm.iter().enumerate() {
            amp[x * d_out + y] = scale;
        }
    } else {
        for x in 0..d_in {
            for y in 0..d_out {
                let v = u.matrix()[(y, x)];
                if v != ZERO {
                    amp[x * d_out + y] = v * scale;
                }
            }
        }
    }
    PureState::new(register, amp)
}

/// Choi state of a multi-input multi-output isometry; same construction and
/// register convention as [`choi_state`] (parts A1..An then C1..Cm).
pub fn mimo_choi(u: &UnitaryOp) -> Result<PureState> {
    choi_state(u)
}

/// A completely positive map stored as its normalized Choi state.
///
/// `weight` is the trace of the unnormalized-but-for-1/d_in Choi; it is 1 for
/// trace-preserving channels and rank/dim for maps that preserve trace only
/// on a support subspace (Petz recovery from a rank-deficient conditioner).
#[derive(Debug, Clone)]
pub struct Channel {
    in_register: Register,
    out_register: Register,
    choi: DensityMatrix,
    weight: f64,
}

fn canonical_choi_register(input: &Register, output: &Register) -> Result<Register> {
    let mut parts = Vec::with_capacity(input.len() + output.len());
    for (i, p) in input.parts().iter().enumerate() {
        parts.push(Part::new(format!("in{i}"), p.dim));
    }
    for (i, p) in output.parts().iter().enumerate() {
        parts.push(Part::new(format!("out{i}"), p.dim));
    }
    Register::new(parts)
}

impl Channel {
    /// Wraps a Choi matrix over input⊗output (input index most significant).
    /// Validates that the output-traced marginal is a projector divided by
    /// the input dimension, which is trace preservation up to support.
    pub fn new(in_register: Register, out_register: Register, choi: CMat) -> Result<Self> {
        let canon = canonical_choi_register(&in_register, &out_register)?;
        let trace = linalg::trace(&choi);
        if trace.im.abs() > 1e-10 || trace.re <= 1e-12 {
            return Err(Error::Channel(format!("choi trace {trace} is not a positive real")));
        }
        let weight = trace.re;
        let normalized = if (weight - 1.0).abs() <= 1e-12 {
            choi
        } else {
            choi.mapv(|v| v / weight)
        };
        let choi = DensityMatrix::new(canon, normalized)?;
        let ch = Channel { in_register, out_register, choi, weight };
        ch.validate_trace_preservation()?;
        Ok(ch)
    }

    fn validate_trace_preservation(&self) -> Result<()> {
        let in_labels: Vec<String> = (0..self.in_register.len()).map(|i| format!("in{i}")).collect();
        let refs: Vec<&str> = in_labels.iter().map(String::as_str).collect();
        let marginal = self.choi.partial_trace(&refs)?;
        let scale = self.weight * self.in_register.dim() as f64;
        let p = marginal.matrix().mapv(|v| v * scale);
        let dev = linalg::frobenius(&(&p.dot(&p) - &p));
        if dev > 1e-8 * (self.in_register.dim() as f64).sqrt().max(1.0) {
            return Err(Error::Channel(format!(
                "output-traced choi marginal is not a scaled projector (deviation {dev:.3e})"
            )));
        }
        Ok(())
    }

    pub fn in_register(&self) -> &Register {
        &self.in_register
    }

    pub fn out_register(&self) -> &Register {
        &self.out_register
    }

    /// Normalized Choi state (trace 1).
    pub fn choi(&self) -> &DensityMatrix {
        &self.choi
    }

    /// Unnormalized Choi matrix: d_in times the stored state (times the
    /// support weight when the map is support-restricted).
    pub fn choi_matrix(&self) -> CMat {
        let scale = self.weight * self.in_register.dim() as f64;
        self.choi.matrix().mapv(|v| v * scale)
    }

    /// Applies the channel to the trailing parts of `rho`, which must match
    /// the input register part for part; leading parts ride along unchanged.
    pub fn apply_with_reference(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let reg = rho.register();
        let k = self.in_register.len();
        if reg.len() < k {
            return Err(Error::Register("state has fewer parts than the channel input".into()));
        }
        let split = reg.len() - k;
        for (offset, part) in self.in_register.parts().iter().enumerate() {
            if reg.parts()[split + offset] != *part {
                return Err(Error::Register(format!(
                    "state part {} does not match channel input {}",
                    reg.parts()[split + offset].label,
                    part.label
                )));
            }
        }
        let mut parts = reg.parts()[..split].to_vec();
        parts.extend(self.out_register.parts().iter().cloned());
        let out_reg = Register::new(parts)?;

        let d_in = self.in_register.dim();
        let d_out = self.out_register.dim();
        let d_ref = reg.dim() / d_in;
        let scale = Complex64::new(self.weight * d_in as f64, 0.0);
        let jm = self.choi.matrix();
        let rm = rho.matrix();
        let mut out = Array2::from_elem((d_ref * d_out, d_ref * d_out), ZERO);
        for r in 0..d_ref {
            for rp in 0..d_ref {
                for y in 0..d_out {
                    for yp in 0..d_out {
                        let mut acc = ZERO;
                        for x in 0..d_in {
                            for xp in 0..d_in {
                                acc += jm[(x * d_out + y, xp * d_out + yp)]
                                    * rm[(r * d_in + x, rp * d_in + xp)];
                            }
                        }
                        out[(r * d_out + y, rp * d_out + yp)] = acc * scale;
                    }
                }
            }
        }
        DensityMatrix::new(out_reg, out)
    }

    /// Applies the channel to a state on exactly the input register.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.register() != &self.in_register {
            return Err(Error::Register("state register does not match channel input".into()));
        }
        self.apply_with_reference(rho)
    }
}

/// Channel from the remaining input parts of `u` to the kept output parts,
/// obtained by fixing `fixed` on input part `fixed_label` and tracing out
/// `traced_outputs` after applying `u`.
pub fn residual_channel(
    u: &UnitaryOp,
    fixed_label: &str,
    fixed: &DensityMatrix,
    traced_outputs: &[&str],
) -> Result<Channel> {
    let in_reg = u.input();
    let fixed_pos = in_reg
        .position(fixed_label)
        .ok_or_else(|| Error::Register(format!("no input part {fixed_label}")))?;
    let fixed_dim = in_reg.parts()[fixed_pos].dim;
    if fixed.register().len() != 1 || fixed.dim() != fixed_dim {
        return Err(Error::Register(format!(
            "fixed input must be a single part of dimension {fixed_dim}"
        )));
    }
    let free_parts: Vec<Part> =
        in_reg.parts().iter().filter(|p| p.label != fixed_label).cloned().collect();
    if free_parts.is_empty() {
        return Err(Error::Register("no free input part remains".into()));
    }
    for t in traced_outputs {
        if u.output().position(t).is_none() {
            return Err(Error::Register(format!("no output part {t}")));
        }
    }
    let kept_parts: Vec<Part> = u
        .output()
        .parts()
        .iter()
        .filter(|p| !traced_outputs.contains(&p.label.as_str()))
        .cloned()
        .collect();
    if kept_parts.is_empty() {
        return Err(Error::Register("no output part remains".into()));
    }

    // Purify the fixed input on an environment part, pair every free part
    // with a reference, push through u, and read the channel's Choi state
    // off the (references, kept outputs) marginal.
    let env_label = format!("{fixed_label}_env");
    let eig = linalg::eig_hermitian(fixed.matrix())?;
    let mut pur = Array1::from_elem(fixed_dim * fixed_dim, ZERO);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let root = lambda.sqrt();
        for s in 0..fixed_dim {
            pur[s * fixed_dim + k] += eig.vectors.column(k)[s] * root;
        }
    }
    let purified = PureState::new(
        Register::from_dims(&[(fixed_label, fixed_dim), (env_label.as_str(), fixed_dim)])?,
        pur,
    )?;

    let mut assembled: Option<PureState> = None;
    let mut ref_labels: Vec<String> = Vec::new();
    for part in in_reg.parts() {
        let next = if part.label == fixed_label {
            purified.clone()
        } else {
            let r = format!("{}_ref", part.label);
            ref_labels.push(r.clone());
            maximally_entangled((r.as_str(), part.dim), (part.label.as_str(), part.dim))?
        };
        assembled = Some(match assembled {
            None => next,
            Some(prev) => prev.tensor(&next)?,
        });
    }
    let assembled = assembled.expect("at least one input part");

    // Sort parts into [references, u inputs in order, environment].
    let mut order: Vec<&str> = ref_labels.iter().map(String::as_str).collect();
    for p in in_reg.parts() {
        order.push(p.label.as_str());
    }
    order.push(env_label.as_str());
    let sorted = assembled.reorder_parts(&order)?;
    let pushed = u.apply_to_run(&sorted, in_reg.parts()[0].label.as_str())?;

    let mut keep: Vec<&str> = ref_labels.iter().map(String::as_str).collect();
    for p in &kept_parts {
        keep.push(p.label.as_str());
    }
    let choi = pushed.reduced_density(&keep)?;
    Channel::new(
        Register::new(free_parts)?,
        Register::new(kept_parts)?,
        choi.matrix().clone(),
    )
}

/// Channel sending every input state to the maximally mixed output state.
pub fn depolarizing(input: (&str, usize), output: (&str, usize)) -> Result<Channel> {
    let n = input.1 * output.1;
    let choi = linalg::identity(n).mapv(|v| v / n as f64);
    Channel::new(Register::from_dims(&[input])?, Register::from_dims(&[output])?, choi)
}

/// Channel erasing all off-diagonal matrix elements in the computational
/// basis.
pub fn dephasing(input: (&str, usize), out_label: &str) -> Result<Channel> {
    let d = input.1;
    let mut choi = Array2::from_elem((d * d, d * d), ZERO);
    for i in 0..d {
        choi[(i * d + i, i * d + i)] = Complex64::new(1.0 / d as f64, 0.0);
    }
    Channel::new(Register::from_dims(&[input])?, Register::from_dims(&[(out_label, d)])?, choi)
}

/// The identity channel (as a relabeling from `input` to `out_label`).
pub fn identity_channel(input: (&str, usize), out_label: &str) -> Result<Channel> {
    let d = input.1;
    let mut choi = Array2::from_elem((d * d, d * d), ZERO);
    let amp = Complex64::new(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            choi[(i * d + i, j * d + j)] = amp;
        }
    }
    Channel::new(Register::from_dims(&[input])?, Register::from_dims(&[(out_label, d)])?, choi)
}

/// Petz transpose recovery for a bipartite state ρ over parts (B, D):
/// the map X ↦ ρ_BD^{1/2} (I_B ⊗ ρ_D^{−1/2}) (I_B ⊗ X) (I_B ⊗ ρ_D^{−1/2}) ρ_BD^{1/2}
/// from D back to B⊗D. Exact on extensions ρ_ABD whose conditional mutual
/// information I(A;B|D) vanishes. ρ_D eigendirections below 1e-12 are
/// treated as outside the support.
pub fn petz_recovery(
    rho_bd: &DensityMatrix,
    b_labels: &[&str],
    d_labels: &[&str],
) -> Result<Channel> {
    let reg = rho_bd.register();
    let expect: Vec<&str> = b_labels.iter().chain(d_labels.iter()).copied().collect();
    if reg.labels() != expect {
        return Err(Error::Register(
            "state register must list the B parts then the D parts, in order".into(),
        ));
    }
    let d_b: usize = reg.keep(b_labels)?.dim();
    let d_d: usize = reg.keep(d_labels)?.dim();
    let rho_d = rho_bd.partial_trace(d_labels)?;

    let sqrt_bd = linalg::hermitian_function(rho_bd.matrix(), |l| l.max(0.0).sqrt())?;
    let dinv_sqrt = linalg::hermitian_function(rho_d.matrix(), |l| {
        if l < 1e-12 {
            0.0
        } else {
            1.0 / l.sqrt()
        }
    })?;
    let k = sqrt_bd.dot(&linalg::kron(&linalg::identity(d_b), &dinv_sqrt));

    // Choi columns: w_b = Σ_d' |d'⟩ ⊗ K|b,d'⟩; choi = (Σ_b w_b w_b†)/d_D.
    let mut w = Array2::from_elem((d_d * d_b * d_d, d_b), ZERO);
    for dp in 0..d_d {
        for bd in 0..d_b * d_d {
            for b in 0..d_b {
                w[(dp * d_b * d_d + bd, b)] = k[(bd, b * d_d + dp)];
            }
        }
    }
    let choi = w.dot(&linalg::dagger(&w)).mapv(|v| v / d_d as f64);

    let in_parts: Vec<Part> = reg.keep(d_labels)?.parts().to_vec();
    let out_parts: Vec<Part> = reg.parts().to_vec();
    Channel::new(Register::new(in_parts)?, Register::new(out_parts)?, choi)
}

/// Trace-norm separation of two channels at a probe state; always a lower
/// bound on the diamond-norm distance. The probe's trailing parts feed the
/// channels; leading parts act as a reference carried through both.
pub fn diamond_witness(ch1: &Channel, ch2: &Channel, probe: &DensityMatrix) -> Result<f64> {
    if ch1.in_register() != ch2.in_register() {
        return Err(Error::Register("channels take different inputs".into()));
    }
    if ch1.out_register().dim() != ch2.out_register().dim() {
        return Err(Error::Register("channels produce different output dimensions".into()));
    }
    let o1 = ch1.apply_with_reference(probe)?;
    let o2 = ch2.apply_with_reference(probe)?;
    linalg::trace_norm(&(o1.matrix() - o2.matrix()))
}

/// The same witness for two unitaries compared as channels, evaluated by
/// direct conjugation so that large permutation operators stay cheap.
pub fn unitary_diamond_witness(
    u1: &UnitaryOp,
    u2: &UnitaryOp,
    probe: &DensityMatrix,
) -> Result<f64> {
    let o1 = u1.conjugate(probe)?;
    let o2 = u2.conjugate(probe)?;
    linalg::trace_norm(&(o1.matrix() - o2.matrix()))
}

/// Coherent information S(out) − S(reference, out) after sending the
/// trailing parts of `input` through the channel.
pub fn coherent_information(ch: &Channel, input: &PureState) -> Result<f64> {
    let sigma = ch.apply_with_reference(&input.density())?;
    let out_labels: Vec<&str> = ch.out_register().labels();
    let s_out = info::von_neumann(&sigma.partial_trace(&out_labels)?)?;
    let s_all = info::von_neumann(&sigma)?;
    Ok(s_out - s_all)
}

/// Frobenius-ball sufficient condition for separability of a two-part state:
/// ‖ρ − τ‖_F ≤ 1/(d₁d₂) guarantees ρ is separable.
pub fn gurvits_separable(rho: &DensityMatrix) -> Result<bool> {
    if rho.register().len() != 2 {
        return Err(Error::Register("separability ball applies to two-part states".into()));
    }
    let n = rho.dim();
    let diff = rho.matrix() - &linalg::identity(n).mapv(|v| v / n as f64);
    Ok(linalg::frobenius(&diff) <= 1.0 / n as f64)
}
