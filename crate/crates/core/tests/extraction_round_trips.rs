//! Wire extraction exercised end to end on randomized product gates: build
//! a gate from known factors, extract, and compare against the original.

use scramblab_core::analysis::{extract_crisscross, extract_mimo_factors};
use scramblab_core::channel::choi_state;
use scramblab_core::info;
use scramblab_core::linalg;
use scramblab_core::random::Prng;
use scramblab_core::register::Register;
use scramblab_core::unitary::UnitaryOp;
use scramblab_core::zoo::{haar_matrix, u_crisscross};

fn haar_factor(d: usize, rng: &mut Prng) -> UnitaryOp {
    UnitaryOp::new(
        Register::from_dims(&[("P", d)]).unwrap(),
        Register::from_dims(&[("Q", d)]).unwrap(),
        haar_matrix(d, rng),
    )
    .unwrap()
}

#[test]
fn random_crisscross_profiles_round_trip() {
    let mut rng = Prng::seeded(7201);
    for &(d1, d2, d3, d4) in &[(2usize, 2usize, 2usize, 2usize), (3, 2, 2, 3), (2, 4, 4, 2)] {
        let u = u_crisscross(
            &haar_factor(d1, &mut rng),
            &haar_factor(d2, &mut rng),
            &haar_factor(d3, &mut rng),
            &haar_factor(d4, &mut rng),
        )
        .unwrap();
        let form = extract_crisscross(&u).unwrap();
        assert_eq!(form.dims(), (d1, d2, d3, d4), "profile ({d1},{d2},{d3},{d4})");
        let re = form.reassemble().unwrap();
        let residual = linalg::diff_norm_mod_phase(u.matrix(), re.matrix()).unwrap();
        assert!(residual < 1e-8, "profile ({d1},{d2},{d3},{d4}): residual {residual}");

        // wire dimensions are fixed by the Choi mutual informations alone
        let choi = choi_state(&u).unwrap();
        let i_ac = info::mutual_information(&choi, &["A"], &["C"]).unwrap();
        let i_ad = info::mutual_information(&choi, &["A"], &["D"]).unwrap();
        assert!(((d1 as f64).log2() - 0.5 * i_ac).abs() < 1e-6);
        assert!(((d2 as f64).log2() - 0.5 * i_ad).abs() < 1e-6);
    }
}

#[test]
fn rectangular_mimo_factors_round_trip() {
    let mut rng = Prng::seeded(7202);
    let u = u_crisscross(
        &haar_factor(3, &mut rng),
        &haar_factor(2, &mut rng),
        &haar_factor(2, &mut rng),
        &haar_factor(3, &mut rng),
    )
    .unwrap();
    let dec = extract_mimo_factors(&u).unwrap();
    assert_eq!(dec.dims(), &[vec![3, 2], vec![2, 3]]);
    let re = dec.reassemble().unwrap();
    assert!(linalg::diff_norm_mod_phase(u.matrix(), re.matrix()).unwrap() < 1e-8);
}

#[test]
fn extraction_is_deterministic_across_runs() {
    let build = || {
        let mut rng = Prng::seeded(7203);
        u_crisscross(
            &haar_factor(2, &mut rng),
            &haar_factor(3, &mut rng),
            &haar_factor(3, &mut rng),
            &haar_factor(2, &mut rng),
        )
        .unwrap()
    };
    let dump_a = serde_json::to_string(&extract_crisscross(&build()).unwrap().dump()).unwrap();
    let dump_b = serde_json::to_string(&extract_crisscross(&build()).unwrap().dump()).unwrap();
    assert_eq!(dump_a, dump_b);
    assert!(!dump_a.is_empty());
}
