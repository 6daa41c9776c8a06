//! End-to-end gate for the whole workspace: closed-form floors, envelope
//! bounds with their declared slack, extraction round trips, and the seeded
//! stochastic sweeps, each under a wall-clock budget. Every tolerance is
//! pinned here as a literal so a regression in the library constants cannot
//! silently loosen the gate.

use std::time::{Duration, Instant};

use scramblab_cli::experiments::{run_prop2, run_prop4, run_renyi_gap, run_typicality};
use scramblab_cli::report::Cell;
use scramblab_core::analysis::{self, Classification};
use scramblab_core::channel::{self, petz_recovery};
use scramblab_core::linalg::{CVec, ONE, ZERO};
use scramblab_core::modmat::{self, ModMatrix};
use scramblab_core::oto;
use scramblab_core::random::Prng;
use scramblab_core::register::Register;
use scramblab_core::state::PureState;
use scramblab_core::unitary::UnitaryOp;
use scramblab_core::zoo;

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Num(v) => *v,
        Cell::Int(v) => *v as f64,
        other => panic!("expected a numeric cell, got {other:?}"),
    }
}

fn haar_factor(dim: usize, rng: &mut Prng) -> UnitaryOp {
    UnitaryOp::new(
        Register::from_dims(&[("P", dim)]).unwrap(),
        Register::from_dims(&[("Q", dim)]).unwrap(),
        zoo::haar_matrix(dim, rng),
    )
    .unwrap()
}

#[test]
fn a01_scrambler_sits_on_the_floor_and_its_square_factorizes() {
    let t0 = Instant::now();
    for d in [3usize, 5, 7] {
        let u = zoo::u_scrambler(d).unwrap();
        let verdict = analysis::classify(&u).unwrap();
        let floor = -2.0 * (d as f64).log2();
        assert!(
            (verdict.i3 - floor).abs() <= 1e-9,
            "d={d}: i3 = {} instead of {floor}",
            verdict.i3
        );
        assert_eq!(verdict.classification, Classification::Maximal, "d={d}");

        // one more pass through the same permutation undoes all scrambling
        let squared = u.compose(&u).unwrap();
        let v2 = analysis::classify(&squared).unwrap();
        assert!(v2.i3.abs() <= 1e-9, "d={d}: squared i3 = {}", v2.i3);
        let form = analysis::extract_crisscross(&squared).unwrap();
        assert!(form.residual() <= 1e-8, "d={d}: residual {}", form.residual());
        assert_eq!(form.dims(), (d, 1, 1, d), "d={d}: wire split");
    }
    assert!(t0.elapsed() < Duration::from_secs(10), "took {:?}", t0.elapsed());
}

#[test]
fn a02_random_crisscross_unitaries_round_trip_through_extraction() {
    let t0 = Instant::now();
    // (|A_L|, |A_R|, |B_L|, |B_R|) profiles, overall dimension at most 64
    let profiles =
        [(2usize, 2usize, 2usize, 2usize), (3, 2, 2, 3), (2, 3, 3, 2), (2, 4, 4, 2), (4, 2, 2, 4)];
    let mut rng = Prng::seeded(9002);
    for k in 0..100 {
        let (al, ar, bl, br) = profiles[k % profiles.len()];
        assert!(al * ar * bl * br <= 64);
        let u = zoo::u_crisscross(
            &haar_factor(al, &mut rng),
            &haar_factor(ar, &mut rng),
            &haar_factor(bl, &mut rng),
            &haar_factor(br, &mut rng),
        )
        .unwrap();
        let verdict = analysis::classify(&u).unwrap();
        assert_eq!(verdict.classification, Classification::Minimal, "sample {k}");

        let form = analysis::extract_crisscross(&u).unwrap();
        assert!(form.residual() <= 1e-8, "sample {k}: residual {}", form.residual());
        let back = form.reassemble().unwrap();
        assert_eq!(back.input().dim(), u.input().dim(), "sample {k}");

        // recovered wire sizes must agree with the mutual-information split
        let (e1, e2, _, _) = form.dims();
        let iac = verdict.witnesses.get("I(A;C)").unwrap();
        let iad = verdict.witnesses.get("I(A;D)").unwrap();
        assert!(
            ((e1 as f64).log2() - 0.5 * iac).abs() <= 1e-6,
            "sample {k}: left wire {e1} vs I(A;C) = {iac}"
        );
        assert!(
            ((e2 as f64).log2() - 0.5 * iad).abs() <= 1e-6,
            "sample {k}: right wire {e2} vs I(A;D) = {iad}"
        );
    }
    assert!(t0.elapsed() < Duration::from_secs(60), "took {:?}", t0.elapsed());
}

#[test]
fn a03_small_block_family_stays_inside_the_identity_envelopes() {
    let t0 = Instant::now();
    let (table, failures) = run_prop2(4, 24, 3, false).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(table.rows.len(), 21);
    for row in &table.rows {
        let d = num(&row[0]);
        assert!(
            num(&row[2]) <= num(&row[3]),
            "d={d}: distance {} above 4 ds / d = {}",
            num(&row[2]),
            num(&row[3])
        );
        let (witness, envelope) = (num(&row[4]), num(&row[5]));
        if envelope > 0.0 {
            assert!(witness >= envelope, "d={d}: witness {witness} below {envelope}");
        }
    }
    assert!(t0.elapsed() < Duration::from_secs(60), "took {:?}", t0.elapsed());
}

#[test]
fn a04_near_full_block_family_passes_through_a_clean_code_subspace() {
    let t0 = Instant::now();
    let (table, failures) = run_prop4(4, 12, 1, false).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(table.rows.len(), 5); // d = 4, 6, 8, 10, 12
    for row in &table.rows {
        let d = num(&row[0]);
        assert!(num(&row[2]) <= 1e-9, "d={d}: A-D marginal strayed from maximally mixed");
        assert!(num(&row[3]) <= num(&row[4]), "d={d}: A-C marginal outside 8 d0 / d");
        assert!(
            num(&row[5]) >= 2.0 - 2.0 / d - 1e-9,
            "d={d}: depolarizing witness {} too small",
            num(&row[5])
        );
        assert!(num(&row[6]) >= 0.0, "d={d}: negative code rate");
    }

    // with a two-level pass-through block the protected rate is exactly one bit
    let (table2, failures2) = run_prop4(5, 9, 2, false).unwrap();
    assert!(failures2.is_empty(), "{failures2:?}");
    assert_eq!(table2.rows.len(), 3); // d = 5, 7, 9
    for row in &table2.rows {
        assert_eq!(num(&row[6]), 1.0, "d={}: code rate", num(&row[0]));
    }
    assert!(t0.elapsed() < Duration::from_secs(60), "took {:?}", t0.elapsed());
}

#[test]
fn a05_residual_leg_of_the_small_scrambler_carries_positive_coherent_information() {
    let t0 = Instant::now();
    let u = zoo::u_scrambler(3).unwrap();
    // fixing B to an unbalanced superposition instead of a basis state turns
    // the difference-digit leg into a channel with positive quantum capacity
    let w = (1.0 / 3f64).sqrt();
    let mut beta = CVec::from_elem(3, ZERO);
    beta[0] = ONE * w;
    beta[1] = ONE * (2.0 / 3f64).sqrt();
    let beta = PureState::new(Register::from_dims(&[("B", 3)]).unwrap(), beta).unwrap().density();
    let leg = channel::residual_channel(&u, "B", &beta, &["C"]).unwrap();

    let mut probe = CVec::from_elem(9, ZERO);
    probe[0] = ONE * w; // |00>
    probe[4] = ONE * (2.0 / 3f64).sqrt(); // |11>
    let probe =
        PureState::new(Register::from_dims(&[("R", 3), ("A", 3)]).unwrap(), probe).unwrap();

    let ic = channel::coherent_information(&leg, &probe).unwrap();
    let expect = 12.0 / 9.0 - (5.0 / 9.0) * 5f64.log2();
    assert!((ic - expect).abs() <= 1e-9, "ic = {ic}, expected {expect}");
    assert!(ic > 0.0);
    assert!(t0.elapsed() < Duration::from_secs(1), "took {:?}", t0.elapsed());
}

#[test]
fn a06_modular_scramblers_are_maximal_for_every_sender_receiver_pair() {
    let t0 = Instant::now();
    for (n, d) in [(2usize, 5u64), (2, 7), (3, 5)] {
        let m = ModMatrix::counter(n, d).unwrap();
        let crit = modmat::mimo_criteria(&m).unwrap();
        assert!(crit.invertible, "(n={n}, d={d}) matrix not invertible");
        assert!(crit.entries_nonzero, "(n={n}, d={d}) zero entry");
        assert!(crit.minors_nonzero, "(n={n}, d={d}) vanishing first minor");

        let u = modmat::u_mimo(&m).unwrap();
        let verdict = analysis::classify_mimo(&u).unwrap();
        let floor = -2.0 * (d as f64).log2();
        for (i, row) in verdict.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!(
                    (v - floor).abs() <= 1e-9,
                    "(n={n}, d={d}) pair ({i},{j}): {v} instead of {floor}"
                );
            }
        }
    }
    assert!(t0.elapsed() < Duration::from_secs(120), "took {:?}", t0.elapsed());
}

#[test]
fn a07_haar_bipartite_choi_states_respect_the_information_inequalities() {
    let t0 = Instant::now();
    let profiles = [(2usize, 2usize), (2, 3), (3, 3)];
    let mut rng = Prng::seeded(9007);
    let mut samples: Vec<UnitaryOp> =
        (0..510).map(|k| profiles[k % profiles.len()]).map(|(da, db)| {
            zoo::haar_unitary(da, db, &mut rng).unwrap()
        }).collect();
    // identity wiring decouples A from B given D exactly, so the recovery
    // branch below is guaranteed to run at least once
    samples.push(zoo::u_identity(3, 3).unwrap());

    let mut recovered = 0usize;
    for (k, u) in samples.iter().enumerate() {
        let verdict = analysis::classify(u).unwrap();
        let report = &verdict.witnesses;
        let i3 = verdict.i3;
        assert!(i3 <= 1e-9, "sample {k}: positive i3 = {i3}");
        let min_dim =
            u.input().parts().iter().chain(u.output().parts()).map(|p| p.dim).min().unwrap();
        let floor = -2.0 * (min_dim as f64).log2();
        assert!(i3 >= floor - 1e-9, "sample {k}: i3 = {i3} below {floor}");
        let i3_2 = report.get("I3_renyi2").unwrap();
        assert!(i3_2 >= i3 - 1e-9, "sample {k}: order-2 value {i3_2} below {i3}");

        let forms = ["I(A;B|C)", "I(A;B|D)", "I(C;D|A)", "I(C;D|B)"]
            .map(|key| report.get(key).unwrap());
        let lo = forms.iter().cloned().fold(f64::MAX, f64::min);
        let hi = forms.iter().cloned().fold(f64::MIN, f64::max);
        assert!(hi - lo <= 1e-9, "sample {k}: conditional forms spread {}", hi - lo);

        if report.get("I(A;B|D)").unwrap() <= 1e-10 {
            let choi = channel::choi_state(u).unwrap();
            let rho_bd = choi.reduced_density(&["B", "D"]).unwrap();
            let rec = petz_recovery(&rho_bd, &["B"], &["D"]).unwrap();
            let rebuilt =
                rec.apply_with_reference(&choi.reduced_density(&["A", "D"]).unwrap()).unwrap();
            let err = rebuilt
                .trace_norm_diff(&choi.reduced_density(&["A", "B", "D"]).unwrap())
                .unwrap();
            assert!(err <= 1e-8, "sample {k}: recovery error {err}");
            recovered += 1;
        }
    }
    assert!(recovered >= 1, "the recovery branch never ran");
    assert!(t0.elapsed() < Duration::from_secs(300), "took {:?}", t0.elapsed());
}

#[test]
fn a08_renyi_gap_widens_as_the_dimension_grows() {
    let t0 = Instant::now();
    let (table, failures) = run_renyi_gap(8, 24, false).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(table.rows.len(), 1 + 17); // sanity row, then d = 8..=24
    for row in &table.rows {
        assert!(num(&row[4]) >= 0.0, "d={}: negative gap", num(&row[0]));
    }
    let first = &table.rows[1];
    let last = table.rows.last().unwrap();
    assert_eq!(num(&first[0]), 8.0);
    assert_eq!(num(&last[0]), 24.0);
    assert!(
        num(&last[4]) > num(&first[4]),
        "gap {} at d=24 not above gap {} at d=8",
        num(&last[4]),
        num(&first[4])
    );
    assert!(
        num(&last[3]) >= -1.5 * 24f64.log2() - 0.5,
        "order-2 value {} fell through the slack floor",
        num(&last[3])
    );
    assert!(t0.elapsed() < Duration::from_secs(120), "took {:?}", t0.elapsed());
}

#[test]
fn a09_random_environments_keep_the_first_wire_near_maximally_mixed() {
    let t0 = Instant::now();
    let (table, failures) = run_typicality(4, 5, 200, 1.0, Some(1), false).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(table.rows.len(), 200);
    let bound = table.summary["bound"];
    assert!((bound - 0.8).abs() <= 1e-12, "bound = {bound}, expected 1 - 25/125");
    let empirical = table.summary["empirical_rate"];
    assert!(
        empirical >= 0.8 - 2.0 / (200f64).sqrt(),
        "empirical pass rate {empirical} below the slacked bound"
    );
    assert!(t0.elapsed() < Duration::from_secs(300), "took {:?}", t0.elapsed());
}

#[test]
fn a10_pass_through_operators_commute_and_the_oto_ratio_is_constant() {
    let t0 = Instant::now();
    // operators that are identity on the scrambled block slide through the
    // counter unchanged, so every correlator against them is exactly one
    let u = zoo::u_counter(6, 3).unwrap();
    let block_ops = oto::block_identity_operators(6, 3).unwrap();
    let basis = oto::heisenberg_weyl_basis(6).unwrap();
    for (i, o) in block_ops.iter().enumerate() {
        for (j, a) in basis.elements().iter().enumerate() {
            let c = oto::single_correlator(&u, "A", "D", a, o).unwrap();
            assert!(
                (c.re - 1.0).abs() <= 1e-9 && c.im.abs() <= 1e-9,
                "ops ({i},{j}): correlator {c}"
            );
        }
    }

    let mut ratios = vec![oto::oto_report(&zoo::u_scrambler(3).unwrap()).unwrap().ratio];
    let mut rng = Prng::seeded(9010);
    for _ in 0..5 {
        let h = zoo::haar_unitary(3, 3, &mut rng).unwrap();
        ratios.push(oto::oto_report(&h).unwrap().ratio);
    }
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    assert!(hi - lo <= 1e-6, "ratio spread {} across the six unitaries", hi - lo);
    for r in &ratios {
        // equal dimensions collapse the ratio to d_B / (d_A d_C d_D) = 1/9
        assert!((r - 1.0 / 9.0).abs() <= 1e-6, "ratio {r} away from 1/9");
    }
    assert!(t0.elapsed() < Duration::from_secs(300), "took {:?}", t0.elapsed());
}
