//! Named unitary constructors shared by the `analyze`, `oto`, and
//! `experiment redistribution` subcommands, plus the desk-scale size caps.

use scramblab_core::modmat::{u_mimo, ModMatrix};
use scramblab_core::random::Prng;
use scramblab_core::unitary::UnitaryOp;
use scramblab_core::zoo;

/// `Config` maps to exit code 2, `Run` to exit code 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Core errors inside a validated run are runtime failures, not config
/// problems.
pub fn run_err(e: scramblab_core::Error) -> CliError {
    CliError::Run(e.to_string())
}

/// Largest per-register dimension for two-register families without
/// `--unsafe-large`.
pub const BIPARTITE_CAP: usize = 25;
/// Largest Choi-state dimension (d^2n) for MIMO families.
pub const MIMO_CAP: usize = 1_000_000;
/// Largest per-register dimension for correlator averages.
pub const OTO_CAP: usize = 7;

pub fn check_bipartite_cap(d: usize, unsafe_large: bool) -> Result<(), CliError> {
    if d > BIPARTITE_CAP && !unsafe_large {
        return Err(config_err(format!(
            "d = {d} exceeds the bipartite cap {BIPARTITE_CAP}; pass --unsafe-large to override"
        )));
    }
    Ok(())
}

fn check_mimo_cap(n: usize, d: usize, unsafe_large: bool) -> Result<(), CliError> {
    let choi_dim = (d as f64).powi(2 * n as i32);
    if choi_dim > MIMO_CAP as f64 && !unsafe_large {
        return Err(config_err(format!(
            "d^2n = {choi_dim:.0} exceeds the MIMO cap {MIMO_CAP}; pass --unsafe-large to override"
        )));
    }
    Ok(())
}

/// Parameters accepted by the named unitary constructors; unused ones must
/// stay unset so typos surface as errors.
#[derive(Clone, Debug, Default)]
pub struct UnitaryParams {
    pub d: Option<usize>,
    pub ds: Option<usize>,
    pub d0: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

/// Names, required parameters, and descriptions of the built-in unitaries.
pub const UNITARIES: &[(&str, &str, &str)] = &[
    ("scrambler", "--d (odd)", "permutation with the most negative tripartite information"),
    ("counter", "--d --ds", "scrambler on the leading ds-block, identity elsewhere"),
    ("capacity-gap", "--d --d0", "swaps inputs exactly when they straddle the d0 boundary"),
    ("swap", "--d", "exchanges the two input registers"),
    ("identity", "--d", "identity on two d-dimensional registers"),
    ("mimo", "--n --d (prime)", "multi-register modular scrambler |x> -> |Mx> with M = I + E"),
    ("haar", "--d --seed", "seeded Haar-random bipartite unitary"),
];

pub fn build_unitary(
    name: &str,
    params: &UnitaryParams,
    unsafe_large: bool,
) -> Result<UnitaryOp, CliError> {
    let need_d = || params.d.ok_or_else(|| config_err(format!("{name} requires --d")));
    let reject = |key: &str, set: bool| {
        if set {
            Err(config_err(format!("parameter {key} does not apply to {name}")))
        } else {
            Ok(())
        }
    };
    match name {
        "scrambler" => {
            let d = need_d()?;
            reject("--ds", params.ds.is_some())?;
            reject("--d0", params.d0.is_some())?;
            reject("--n", params.n.is_some())?;
            check_bipartite_cap(d, unsafe_large)?;
            zoo::u_scrambler(d).map_err(|e| config_err(e.to_string()))
        }
        "counter" => {
            let d = need_d()?;
            let ds = params.ds.ok_or_else(|| config_err("counter requires --ds"))?;
            reject("--d0", params.d0.is_some())?;
            reject("--n", params.n.is_some())?;
            check_bipartite_cap(d, unsafe_large)?;
            zoo::u_counter(d, ds).map_err(|e| config_err(e.to_string()))
        }
        "capacity-gap" => {
            let d = need_d()?;
            let d0 = params.d0.ok_or_else(|| config_err("capacity-gap requires --d0"))?;
            reject("--ds", params.ds.is_some())?;
            reject("--n", params.n.is_some())?;
            check_bipartite_cap(d, unsafe_large)?;
            zoo::u_capacity_gap(d, d0).map_err(|e| config_err(e.to_string()))
        }
        "swap" => {
            let d = need_d()?;
            check_bipartite_cap(d, unsafe_large)?;
            zoo::u_swap(d).map_err(|e| config_err(e.to_string()))
        }
        "identity" => {
            let d = need_d()?;
            check_bipartite_cap(d, unsafe_large)?;
            zoo::u_identity(d, d).map_err(|e| config_err(e.to_string()))
        }
        "mimo" => {
            let d = need_d()?;
            let n = params.n.unwrap_or(2);
            check_mimo_cap(n, d, unsafe_large)?;
            let m = ModMatrix::counter(n, d as u64).map_err(|e| config_err(e.to_string()))?;
            u_mimo(&m).map_err(|e| config_err(e.to_string()))
        }
        "haar" => {
            let d = need_d()?;
            let seed = params
                .seed
                .ok_or_else(|| config_err("haar requires --seed (stochastic construction)"))?;
            check_bipartite_cap(d, unsafe_large)?;
            let mut rng = Prng::seeded(seed);
            zoo::haar_unitary(d, d, &mut rng).map_err(run_err)
        }
        other => Err(config_err(format!(
            "unknown unitary {other}; `scramblab list` shows the registry"
        ))),
    }
}
