//! Named experiment runners. Each returns its table together with the list
//! of per-row assertion failures; an empty list means every recorded bound
//! held.
//!
//! All stochastic runs derive one RNG substream per trial from the given
//! seed, so rows are reproducible and order-independent.

use scramblab_core::analysis;
use scramblab_core::channel;
use scramblab_core::info;
use scramblab_core::linalg::{self, CMat, CVec, ONE, ZERO};
use scramblab_core::modmat;
use scramblab_core::oto;
use scramblab_core::random::Prng;
use scramblab_core::register::Register;
use scramblab_core::state::{DensityMatrix, PureState};
use scramblab_core::unitary::UnitaryOp;
use scramblab_core::zoo;

use crate::registry::{
    build_unitary, check_bipartite_cap, config_err, run_err, CliError, UnitaryParams, MIMO_CAP,
};
use crate::report::{sig12, Cell, Table};

/// Names, parameters, and descriptions of the registered experiments.
pub const EXPERIMENTS: &[(&str, &str, &str)] = &[
    (
        "prop2",
        "--ds --d-min --d-max",
        "small-block counter family: Choi distance to the identity wiring plus a distance witness against criss-cross candidates",
    ),
    (
        "prop4",
        "--d0 --d-min --d-max",
        "large-block counter family: near-maximal marginals, distance witness to the depolarizing channel, and a working code subspace",
    ),
    (
        "renyi-gap",
        "--d-min --d-max",
        "gap between the Renyi-2 and von Neumann tripartite information on the counter family with d0 ~ d^(1/4)",
    ),
    (
        "typicality",
        "--n --d --trials --epsilon --seed",
        "trace distance of the first-wire Choi state of a modular scrambler under random environment inputs",
    ),
    (
        "redistribution",
        "--unitary plus its parameters",
        "qubit and ebit rates for redistributing register A of the Choi state",
    ),
];

pub type Outcome = (Table, Vec<String>);

fn herm_trace_norm(m: &CMat) -> Result<f64, CliError> {
    let vals = linalg::eigenvalues_hermitian(m).map_err(run_err)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

fn dist_to_mixed(rho: &DensityMatrix) -> Result<f64, CliError> {
    let tau = DensityMatrix::maximally_mixed(rho.register().clone());
    rho.trace_norm_diff(&tau).map_err(run_err)
}

fn basis_vec(dim: usize, k: usize) -> CVec {
    let mut v = CVec::from_elem(dim, ZERO);
    v[k] = ONE;
    v
}

/// C-marginal of `u` applied to the probe `|0><0|_A (x) tau_B`.
fn probe_c_marginal(u: &UnitaryOp) -> CMat {
    let db = u.input().parts()[1].dim;
    let dc = u.output().parts()[0].dim;
    let dd = u.output().parts()[1].dim;
    let m = u.matrix();
    let mut out = CMat::from_elem((dc, dc), ZERO);
    for b in 0..db {
        for c in 0..dc {
            for c2 in 0..dc {
                let mut acc = ZERO;
                for e in 0..dd {
                    acc += m[(c * dd + e, b)] * m[(c2 * dd + e, b)].conj();
                }
                out[(c, c2)] += acc;
            }
        }
    }
    out.mapv(|v| v / db as f64)
}

fn identity_wire(dim: usize) -> Result<UnitaryOp, CliError> {
    UnitaryOp::new(
        Register::from_dims(&[("P", dim)]).map_err(run_err)?,
        Register::from_dims(&[("Q", dim)]).map_err(run_err)?,
        linalg::identity(dim),
    )
    .map_err(run_err)
}

/// Smallest probe distance between `u` and the enumerable criss-cross
/// candidates at total dimension d per register: identity factors for every
/// divisor profile (g, d/g, d/g, g), plus the extracted form when `u` itself
/// is minimal. The probe fixes A to `|0>` inside the scrambler block and B
/// to the maximally mixed state, and compares C-marginals.
fn crisscross_probe_witness(u: &UnitaryOp, i3: f64) -> Result<f64, CliError> {
    let d = u.input().parts()[0].dim;
    let sigma_u = probe_c_marginal(u);
    let mut candidates: Vec<UnitaryOp> = Vec::new();
    for g in 1..=d {
        if d % g != 0 {
            continue;
        }
        let v = zoo::u_crisscross(
            &identity_wire(g)?,
            &identity_wire(d / g)?,
            &identity_wire(d / g)?,
            &identity_wire(g)?,
        )
        .map_err(run_err)?;
        candidates.push(v);
    }
    if i3.abs() <= 1e-6 {
        if let Ok(form) = analysis::extract_crisscross(u) {
            candidates.push(form.reassemble().map_err(run_err)?);
        }
    }
    let mut best = f64::INFINITY;
    for v in &candidates {
        let sigma_v = probe_c_marginal(v);
        let dist = herm_trace_norm(&(&sigma_u - &sigma_v))?;
        best = best.min(dist);
    }
    Ok(best)
}

/// Counter family at fixed small block ds: per-d Choi distance to the
/// identity wiring against the 4 ds/d envelope, and the criss-cross distance
/// witness against the (2 + 2 log ds)/log d envelope.
pub fn run_prop2(
    d_min: usize,
    d_max: usize,
    ds: usize,
    unsafe_large: bool,
) -> Result<Outcome, CliError> {
    if ds % 2 == 0 {
        return Err(config_err(format!("ds = {ds} must be odd")));
    }
    if d_min < ds {
        return Err(config_err(format!("d range must start at ds = {ds} or above")));
    }
    if d_min > d_max {
        return Err(config_err("empty d range"));
    }
    check_bipartite_cap(d_max, unsafe_large)?;
    let mut table = Table::new(
        "prop2",
        &["d", "i3", "choi_dist", "bound_4ds_over_d", "diamond_witness", "bound_lemma1"],
    );
    let mut failures = Vec::new();
    let mut i3_first_last: Option<(f64, f64)> = None;
    for d in d_min..=d_max {
        let u = zoo::u_counter(d, ds).map_err(run_err)?;
        let choi = channel::choi_state(&u).map_err(run_err)?;
        let target =
            channel::choi_state(&zoo::u_identity(d, d).map_err(run_err)?).map_err(run_err)?;
        let ov = choi.overlap(&target).norm();
        let choi_dist = 2.0 * (1.0 - ov * ov).max(0.0).sqrt();
        let i3 = info::tripartite_information(&choi, &["A"], &["C"], &["D"]).map_err(run_err)?;
        let witness = crisscross_probe_witness(&u, i3)?;
        let bound_dist = 4.0 * ds as f64 / d as f64;
        let bound_lemma1 = 1.0 - (2.0 + 2.0 * (ds as f64).log2()) / (d as f64).log2();
        if choi_dist > bound_dist {
            failures.push(format!("d={d}: choi_dist {} exceeds {}", sig12(choi_dist), sig12(bound_dist)));
        }
        if bound_lemma1 > 0.0 && witness < bound_lemma1 {
            failures.push(format!("d={d}: witness {} below {}", sig12(witness), sig12(bound_lemma1)));
        }
        i3_first_last = Some(match i3_first_last {
            None => (i3, i3),
            Some((first, _)) => (first, i3),
        });
        table.push(vec![
            Cell::Int(d as i64),
            Cell::Num(i3),
            Cell::Num(choi_dist),
            Cell::Num(bound_dist),
            Cell::Num(witness),
            Cell::Num(bound_lemma1),
        ]);
    }
    if let Some((first, last)) = i3_first_last {
        if table.rows.len() >= 2 && last <= first {
            failures.push(format!(
                "i3 did not move toward zero across the range ({} to {})",
                sig12(first),
                sig12(last)
            ));
        }
    }
    Ok((table, failures))
}

/// Counter family at fixed d0 = d - ds: exact A-D marginal, the 8 d0/d
/// envelope on the A-C marginal, the probe witness against the completely
/// depolarizing channel, and the code subspace of rate log d0.
pub fn run_prop4(
    d_min: usize,
    d_max: usize,
    d0: usize,
    unsafe_large: bool,
) -> Result<Outcome, CliError> {
    if d0 < 1 {
        return Err(config_err("d0 must be at least 1"));
    }
    if d_min > d_max {
        return Err(config_err("empty d range"));
    }
    check_bipartite_cap(d_max, unsafe_large)?;
    let ds_of = |d: usize| d.checked_sub(d0).filter(|ds| ds % 2 == 1 && *ds >= 3);
    if !(d_min..=d_max).any(|d| ds_of(d).is_some()) {
        return Err(config_err(format!(
            "no d in {d_min}..={d_max} gives an odd block d - {d0} of size at least 3"
        )));
    }
    let mut table = Table::new(
        "prop4",
        &[
            "d",
            "i3_plus_2logd",
            "rho_ad_dist",
            "rho_ac_dist",
            "bound_8d0_over_d",
            "diamond_to_depol",
            "code_rate_log_d0",
        ],
    );
    let mut failures = Vec::new();
    let mut drift_first_last: Option<(f64, f64)> = None;
    for d in d_min..=d_max {
        let Some(ds) = ds_of(d) else { continue };
        let u = zoo::u_counter(d, ds).map_err(run_err)?;
        let choi = channel::choi_state(&u).map_err(run_err)?;
        let i3 = info::tripartite_information(&choi, &["A"], &["C"], &["D"]).map_err(run_err)?;
        let drift = i3 + 2.0 * (d as f64).log2();
        let rho_ad = choi.reduced_density(&["A", "D"]).map_err(run_err)?;
        let ad_dist = dist_to_mixed(&rho_ad)?;
        let rho_ac = choi.reduced_density(&["A", "C"]).map_err(run_err)?;
        let ac_dist = dist_to_mixed(&rho_ac)?;
        let bound_ac = 8.0 * d0 as f64 / d as f64;
        let tau_b = DensityMatrix::maximally_mixed(Register::from_dims(&[("B", d)]).map_err(run_err)?);
        let residual = channel::residual_channel(&u, "B", &tau_b, &["D"]).map_err(run_err)?;
        let depol = channel::depolarizing(("A", d), ("C", d)).map_err(run_err)?;
        // pass-through probe: a basis state outside the scrambler block
        let mut probe_mat = CMat::from_elem((d, d), ZERO);
        probe_mat[(d - 1, d - 1)] = ONE;
        let probe =
            DensityMatrix::new(Register::from_dims(&[("A", d)]).map_err(run_err)?, probe_mat)
                .map_err(run_err)?;
        let witness = channel::diamond_witness(&residual, &depol, &probe).map_err(run_err)?;
        let bound_witness = 2.0 - 2.0 / d as f64;
        let code: Vec<CVec> = (ds..d).map(|k| basis_vec(d, k)).collect();
        let code_ok =
            analysis::verify_subspace_code(&u, ("B", &tau_b), &code, &["C"]).map_err(run_err)?;
        let rate = (d0 as f64).log2();
        if ad_dist > 1e-9 {
            failures.push(format!("d={d}: rho_AD distance {} not within 1e-9", sig12(ad_dist)));
        }
        if ac_dist > bound_ac {
            failures.push(format!("d={d}: rho_AC distance {} exceeds {}", sig12(ac_dist), sig12(bound_ac)));
        }
        if witness < bound_witness - 1e-9 {
            failures.push(format!("d={d}: depolarizing witness {} below {}", sig12(witness), sig12(bound_witness)));
        }
        if !code_ok {
            failures.push(format!("d={d}: code subspace of dimension {d0} failed"));
        }
        drift_first_last = Some(match drift_first_last {
            None => (drift, drift),
            Some((first, _)) => (first, drift),
        });
        table.push(vec![
            Cell::Int(d as i64),
            Cell::Num(drift),
            Cell::Num(ad_dist),
            Cell::Num(ac_dist),
            Cell::Num(bound_ac),
            Cell::Num(witness),
            Cell::Num(rate),
        ]);
    }
    if let Some((first, last)) = drift_first_last {
        if table.rows.len() >= 2 && last >= first {
            failures.push(format!(
                "i3 + 2 log d did not shrink across the range ({} to {})",
                sig12(first),
                sig12(last)
            ));
        }
    }
    Ok((table, failures))
}

/// Block size for the Renyi gap family: round(d^(1/4)), bumped by +1 when
/// d - d0 is even and pulled back by 2 if that leaves no room for a
/// scrambler block of size 3.
pub fn renyi_block(d: usize) -> Result<usize, CliError> {
    let mut d0 = (d as f64).powf(0.25).round() as i64;
    if (d as i64 - d0) % 2 == 0 {
        d0 += 1;
    }
    if d as i64 - d0 < 3 {
        d0 -= 2;
    }
    if d0 < 1 || d as i64 - d0 < 3 {
        return Err(config_err(format!("no valid block size near {d}^(1/4)")));
    }
    Ok(d0 as usize)
}

fn snap_tiny_negative(v: f64) -> f64 {
    if v >= -1e-9 && v < 0.0 {
        0.0
    } else {
        v
    }
}

/// Renyi-2 versus von Neumann tripartite information on the counter family
/// with d0 ~ d^(1/4). The first row is the identity sanity case (block size
/// one), then one row per d in the range.
pub fn run_renyi_gap(d_min: usize, d_max: usize, unsafe_large: bool) -> Result<Outcome, CliError> {
    if d_min < 4 || d_min > d_max {
        return Err(config_err("d range must lie within 4..."));
    }
    check_bipartite_cap(d_max, unsafe_large)?;
    let mut table = Table::new("renyi-gap", &["d", "d0", "i3", "i3_2", "gap"]);
    let mut failures = Vec::new();
    let push_row = |table: &mut Table,
                        failures: &mut Vec<String>,
                        d: usize,
                        d0: usize|
     -> Result<(f64, f64), CliError> {
        let u = zoo::u_counter(d, d - d0).map_err(run_err)?;
        let (i3, i3_2, gap) = oto::renyi_gap(&u).map_err(run_err)?;
        let gap = snap_tiny_negative(gap);
        if gap < 0.0 {
            failures.push(format!("d={d}: negative gap {}", sig12(gap)));
        }
        table.push(vec![
            Cell::Int(d as i64),
            Cell::Int(d0 as i64),
            Cell::Num(i3),
            Cell::Num(i3_2),
            Cell::Num(gap),
        ]);
        Ok((i3_2, gap))
    };
    push_row(&mut table, &mut failures, d_min, d_min - 1)?;
    let mut family: Option<(f64, f64)> = None; // (first gap, last gap)
    let mut last_i3_2 = 0.0;
    for d in d_min..=d_max {
        let d0 = renyi_block(d)?;
        let (i3_2, gap) = push_row(&mut table, &mut failures, d, d0)?;
        last_i3_2 = i3_2;
        family = Some(match family {
            None => (gap, gap),
            Some((first, _)) => (first, gap),
        });
    }
    if let Some((first, last)) = family {
        if d_min < d_max && last <= first {
            failures.push(format!(
                "gap did not grow across the range ({} to {})",
                sig12(first),
                sig12(last)
            ));
        }
    }
    let floor = -1.5 * (d_max as f64).log2() - 0.5;
    if last_i3_2 < floor {
        failures.push(format!(
            "i3_2 at d={d_max} fell below the -1.5 log d - 0.5 floor ({} < {})",
            sig12(last_i3_2),
            sig12(floor)
        ));
    }
    Ok((table, failures))
}

/// Random environment inputs on a maximal modular scrambler: fraction of
/// trials where the first-wire Choi state stays within epsilon trace
/// distance of maximally mixed, against the |A||C| / (eps^2 |D|) envelope.
pub fn run_typicality(
    n: usize,
    d: usize,
    trials: usize,
    epsilon: f64,
    seed: Option<u64>,
    unsafe_large: bool,
) -> Result<Outcome, CliError> {
    let seed = seed.ok_or_else(|| config_err("typicality is stochastic and requires --seed"))?;
    if n < 2 {
        return Err(config_err("typicality needs at least two registers"));
    }
    if trials == 0 {
        return Err(config_err("trials must be positive"));
    }
    if !(epsilon > 0.0) {
        return Err(config_err("epsilon must be positive"));
    }
    let choi_dim = (d as f64).powi(2 * n as i32);
    if choi_dim > MIMO_CAP as f64 && !unsafe_large {
        return Err(config_err(format!(
            "d^2n = {choi_dim:.0} exceeds the MIMO cap {MIMO_CAP}; pass --unsafe-large to override"
        )));
    }
    let mut search_rng = Prng::substream(seed, 0);
    let matrix = modmat::find_mimo_matrix(n, d as u64, &mut search_rng)
        .map_err(|e| config_err(e.to_string()))?;
    let u = modmat::u_mimo(&matrix).map_err(run_err)?;
    let env_dim = d.pow(n as u32 - 1);
    let bound = 1.0 - (d * d) as f64 / (epsilon * epsilon * env_dim as f64);
    let slack = 2.0 / (trials as f64).sqrt();
    let mut table = Table::new("typicality", &["trial", "dist", "pass", "gurvits_separable"]);
    let mut failures = Vec::new();
    let labels: Vec<String> = std::iter::once("R".to_string())
        .chain((1..=n).map(|i| format!("A{i}")))
        .collect();
    let dims: Vec<(&str, usize)> = labels.iter().map(|l| (l.as_str(), d)).collect();
    let register = Register::from_dims(&dims).map_err(run_err)?;
    let scale = 1.0 / (d as f64).sqrt();
    let mut passes = 0usize;
    for trial in 0..trials {
        let mut rng = Prng::substream(seed, trial as u64 + 1);
        let sigma = zoo::haar_state(env_dim, &mut rng);
        let mut amp = CVec::from_elem(d * d.pow(n as u32), ZERO);
        for r in 0..d {
            for (b, &sv) in sigma.iter().enumerate() {
                amp[r * d.pow(n as u32) + r * env_dim + b] = sv * scale;
            }
        }
        let psi = PureState::new(register.clone(), amp).map_err(run_err)?;
        let out = u.apply_to_run(&psi, "A1").map_err(run_err)?;
        let rho = out.reduced_density(&["R", "C1"]).map_err(run_err)?;
        let dist = dist_to_mixed(&rho)?;
        let pass = dist <= epsilon;
        if pass {
            passes += 1;
        }
        let separable = channel::gurvits_separable(&rho).map_err(run_err)?;
        table.push(vec![
            Cell::Int(trial as i64),
            Cell::Num(dist),
            Cell::Bool(pass),
            Cell::Bool(separable),
        ]);
    }
    let empirical = passes as f64 / trials as f64;
    table.summary.insert("empirical_rate".into(), empirical);
    table.summary.insert("bound".into(), bound);
    table.summary.insert("binomial_slack".into(), slack);
    if empirical < bound - slack {
        failures.push(format!(
            "empirical pass rate {} fell below bound {} minus slack {}",
            sig12(empirical),
            sig12(bound),
            sig12(slack)
        ));
    }
    Ok((table, failures))
}

/// Qubit and ebit rates for redistributing register A of the Choi state of
/// a named two-register unitary.
pub fn run_redistribution(
    name: &str,
    params: &UnitaryParams,
    unsafe_large: bool,
) -> Result<Outcome, CliError> {
    let u = build_unitary(name, params, unsafe_large)?;
    if u.input().len() != 2 || u.output().len() != 2 {
        return Err(config_err("redistribution needs a two-register unitary"));
    }
    let choi = channel::choi_state(&u).map_err(run_err)?;
    let (qubit, ebit) = info::redistribution_rates(&choi).map_err(run_err)?;
    let mut table = Table::new("redistribution", &["qubit_rate", "ebit_rate"]);
    table.push(vec![Cell::Num(qubit), Cell::Num(ebit)]);
    Ok((table, Vec::new()))
}
