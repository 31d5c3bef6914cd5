use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::qlinalg::{bell_basis, phi_plus, HermitianOperator, SubsystemShape};
use crate::scenario::random::random_strategy;
use crate::scenario::*;
use crate::sepset::SepRelaxation;

const PPT: SepRelaxation = SepRelaxation::Ppt;

fn werner(p: f64) -> Scenario<f64> {
    named_scenario("werner", p, None, None).unwrap()
}

fn werner_partial(p: f64) -> Scenario<f64> {
    named_scenario("werner", p, Some(MeasurementKind::PartialBsm), None).unwrap()
}

fn upb_sum() -> HermitianOperator<f64> {
    let shape = SubsystemShape::bipartite(3, 3);
    tiles_vectors::<f64>()
        .iter()
        .fold(HermitianOperator::zeros(shape.clone()), |acc, v| &acc + &HermitianOperator::projector(v, shape.clone()).unwrap())
}

fn fidelity(s: &Scenario<f64>) -> f64 {
    average_fidelity(&s.assemblage, s.measurement.corrections()).unwrap()
}

#[test]
fn perfect_teleportation_has_robustness_d() {
    let s = werner(1.0);
    let r = teleportation_robustness(&s.assemblage, PPT).unwrap();
    assert!((r.value - 2.0).abs() < 1e-6, "{}", r.value);
    assert!(r.exact);
    assert_eq!(r.diagnostics.status, crate::sdp::SolveStatus::Optimal);
    let ops = r.channel_operators().unwrap();
    assert!(teleportation_constraint_residual(ops, r.value, &s.assemblage).unwrap() < 1e-8);
    for m in ops {
        assert!(m.min_eigenvalue() > -1e-8);
        assert!(m.partial_transpose(0).unwrap().min_eigenvalue() > -1e-8);
    }
}

#[test]
fn werner_robustness_follows_the_separability_boundary() {
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let r = teleportation_robustness(&werner(p).assemblage, PPT).unwrap();
        let expect = (3.0 * p - 1.0).max(0.0);
        assert!((r.value - expect).abs() < 1e-6, "p = {p}: {} vs {expect}", r.value);
        assert!(r.value >= -1e-9);
    }
}

#[test]
fn dual_matches_primal_and_witness_is_feasible() {
    for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let s = werner(p);
        let primal = teleportation_robustness(&s.assemblage, PPT).unwrap();
        let dual = teleportation_robustness_dual(&s.assemblage, PPT).unwrap();
        assert!((primal.value - dual.value).abs() < 1e-6, "p = {p}");
        let w = dual.witness().unwrap();
        assert_eq!(w.detection_direction(), DetectionDirection::PositiveDetects);
        assert_eq!(w.classical_threshold(), 0.0);
        assert!((evaluate_witness(w, &s.assemblage).unwrap() - dual.value).abs() < 1e-7);
        let check = dual.witness_check.as_ref().unwrap();
        assert!(check.holds(1e-8, 1e-7), "{check:?}");
        assert_eq!(w.detects(dual.value), p > 1.0 / 3.0 + 1e-3);
    }
}

#[test]
fn entanglement_robustness_examples() {
    let s22 = SubsystemShape::bipartite(2, 2);
    let phi = HermitianOperator::projector(&phi_plus::<f64>(2), s22.clone()).unwrap();
    let r = entanglement_random_robustness(&phi, PPT).unwrap();
    assert!((r.value - 2.0).abs() < 1e-6);
    let mixed = HermitianOperator::<f64>::maximally_mixed(s22);
    assert!(entanglement_random_robustness(&mixed, PPT).unwrap().value.abs() < 1e-7);
    for p in [0.1, 0.4, 0.7] {
        let v = entanglement_random_robustness(&werner_state::<f64>(p).unwrap(), PPT).unwrap().value;
        assert!((v - (3.0 * p - 1.0).max(0.0)).abs() < 1e-6);
    }
    assert!(entanglement_random_robustness(&HermitianOperator::<f64>::maximally_mixed(SubsystemShape::single(4)), PPT).is_err());
}

#[test]
fn full_and_partial_bsm_relate_to_state_robustness() {
    for p in [0.4, 0.6, 0.8, 1.0] {
        let er = entanglement_random_robustness(&werner_state::<f64>(p).unwrap(), PPT).unwrap().value;
        let full = teleportation_robustness(&werner(p).assemblage, PPT).unwrap().value;
        let partial = teleportation_robustness(&werner_partial(p).assemblage, PPT).unwrap().value;
        assert!((full - er).abs() < 1e-6);
        assert!((partial - 2.0 * er / 4.0).abs() < 1e-6);
    }
}

#[test]
fn table1_witness() {
    let w = builtin_witness_table1::<f64>();
    let id3 = HermitianOperator::<f64>::identity(SubsystemShape::single(2)).scaled(1.0 / 3.0);
    let x = HermitianOperator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]], SubsystemShape::single(2)).unwrap();
    assert!(w.f(0, 0).max_abs_diff(&(&id3 - &x)) < 1e-15);
    assert_eq!(w.detection_direction(), DetectionDirection::NegativeDetects);
    for i in 0..=6 {
        let p = i as f64 / 6.0;
        let v = evaluate_witness(&w, &werner(p).assemblage).unwrap();
        assert!((v - 6.0 * (1.0 / 3.0 - p)).abs() < 1e-12);
        assert_eq!(w.detects(v), p > 1.0 / 3.0 + 1e-9);
    }
    // Σ_x ω_x ⊗ F_{a|x} is four times a Bell projector.
    let bell = bell_basis::<f64>(2).unwrap();
    let ens = standard_qubit_inputs::<f64>();
    for (a, b) in [3, 2, 1, 0].into_iter().enumerate() {
        let c = w.combined(a, &ens).unwrap();
        assert!(c.max_abs_diff(&bell[b].scaled(4.0)) < 1e-12);
    }
    let cb = classical_bound(&w, &ens, PPT).unwrap();
    assert!(cb.value.abs() < 1e-7 && cb.exact);
}

#[test]
fn table2_witness() {
    let eps = 0.02;
    let w = builtin_witness_table2::<f64>(eps).unwrap();
    let tiles = named_scenario::<f64>("tiles", 0.0, None, None).unwrap();
    let v = evaluate_witness(&w, &tiles.assemblage).unwrap();
    assert!((v + eps / 3.0).abs() < 1e-12);
    assert!(w.detects(v));
    let target = &upb_sum() - &HermitianOperator::identity(SubsystemShape::bipartite(3, 3)).scaled(eps);
    assert!(w.combined(0, tiles.ensemble()).unwrap().max_abs_diff(&target) < 1e-12);
    assert!(w.combined(1, tiles.ensemble()).unwrap().max_abs() == 0.0);
    for bad in [0.0, -0.01, 0.0285, f64::NAN] {
        assert!(builtin_witness_table2::<f64>(bad).is_err());
    }
    assert!(builtin_witness_table2::<f64>(TILES_EPSILON_MAX).is_ok());
}

#[test]
fn witness_shape_mismatch_is_rejected() {
    let w = builtin_witness_table1::<f64>();
    let tiles = named_scenario::<f64>("tiles", 0.0, None, None).unwrap();
    assert!(evaluate_witness(&w, &tiles.assemblage).is_err());
    assert!(classical_bound(&w, tiles.ensemble(), PPT).is_err());
    let ragged = vec![vec![HermitianOperator::<f64>::identity(SubsystemShape::single(2)); 2], vec![]];
    assert!(TeleportationWitness::new(ragged, HermitianOperator::zeros(SubsystemShape::bipartite(2, 2)), DetectionDirection::PositiveDetects, 0.0).is_err());
}

#[test]
fn zero_witness() {
    let ens = standard_qubit_inputs::<f64>();
    let zero = HermitianOperator::<f64>::zeros(SubsystemShape::single(2));
    let w = TeleportationWitness::new(
        vec![vec![zero; 6]; 4],
        HermitianOperator::zeros(SubsystemShape::bipartite(2, 2)),
        DetectionDirection::PositiveDetects,
        0.0,
    )
    .unwrap();
    assert_eq!(evaluate_witness(&w, &werner(0.7).assemblage).unwrap(), 0.0);
    assert!(classical_bound(&w, &ens, PPT).unwrap().value.abs() < 1e-7);
}

#[test]
fn classical_average_fidelity_is_two_thirds() {
    let s = werner(1.0);
    let w = average_fidelity_witness(s.ensemble(), s.measurement.corrections(), 2).unwrap();
    assert!((w.classical_threshold() - 2.0 / 3.0).abs() < 1e-15);
    let cb = classical_bound(&w, s.ensemble(), PPT).unwrap();
    assert!((cb.value - 2.0 / 3.0).abs() < 1e-6, "{}", cb.value);
    for p in [0.2, 0.9] {
        let sp = werner(p);
        assert!((evaluate_witness(&w, &sp.assemblage).unwrap() - fidelity(&sp)).abs() < 1e-12);
    }
}

#[test]
fn dual_witnesses_are_classically_bounded_by_zero() {
    for p in [0.5, 1.0] {
        let s = werner(p);
        let dual = teleportation_robustness_dual(&s.assemblage, PPT).unwrap();
        let cb = classical_bound(dual.witness().unwrap(), s.ensemble(), PPT).unwrap();
        assert!(cb.value <= 1e-7, "{}", cb.value);
    }
}

#[test]
fn fidelity_bound_examples() {
    assert!((fidelity_robustness_bound(1.0f64, 2.0 / 3.0, 2).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(fidelity_robustness_bound(0.7, 0.7, 2).unwrap(), 0.0);
    assert!(fidelity_robustness_bound(0.7, 0.5, 2).is_err());
    let s = werner(0.8);
    let f = fidelity(&s);
    assert!((f - 0.9).abs() < 1e-12);
    let bound = fidelity_robustness_bound(f, 2.0 / 3.0, 2).unwrap();
    assert!((bound - 1.4).abs() < 1e-9);
    let r = teleportation_robustness(&s.assemblage, PPT).unwrap().value;
    assert!((r - bound).abs() < 1e-6);
}

#[test]
fn fidelity_bound_holds_on_both_noise_families() {
    for id in ["werner", "phi01"] {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let s = named_scenario::<f64>(id, p, None, None).unwrap();
            let r = teleportation_robustness(&s.assemblage, PPT).unwrap().value;
            let bound = fidelity_robustness_bound(fidelity(&s), 2.0 / 3.0, 2).unwrap();
            assert!(r >= bound - 1e-6, "{id} p = {p}: {r} < {bound}");
        }
    }
}

#[test]
fn self_mixing_recertifies_classical() {
    for s in [werner(0.9), named_scenario::<f64>("phi01", 0.6, None, None).unwrap(), werner_partial(0.7)] {
        let r = teleportation_robustness(&s.assemblage, PPT).unwrap().value;
        let mixed = s.assemblage.mixed_with_noise(r).unwrap();
        assert!(teleportation_robustness(&mixed, PPT).unwrap().value < 1e-6);
    }
}

#[test]
fn phi01_is_more_robust_than_werner_at_equal_fidelity() {
    // F = (1+p)/2 for Werner and (1+2p)/3 for the second family.
    for f in [0.75, 0.85, 0.95] {
        let r1 = teleportation_robustness(&werner(2.0 * f - 1.0).assemblage, PPT).unwrap().value;
        let s2 = named_scenario::<f64>("phi01", (3.0 * f - 1.0) / 2.0, None, None).unwrap();
        assert!((fidelity(&s2) - f).abs() < 1e-12);
        let r2 = teleportation_robustness(&s2.assemblage, PPT).unwrap().value;
        assert!(r2 > r1 + 1e-6, "F = {f}: {r2} vs {r1}");
    }
}

#[test]
fn json_roundtrips() {
    let w = builtin_witness_table2::<f64>(0.01).unwrap();
    let back = TeleportationWitness::<f64>::from_json_str(&w.to_json_string()).unwrap();
    assert_eq!(back, w);
    let v: serde_json::Value = serde_json::from_str(&w.to_json_string()).unwrap();
    assert_eq!(v["detection_direction"], "negative_detects");
    assert!(TeleportationWitness::<f64>::from_json_str("{\"f\": []}").is_err());

    let r = teleportation_robustness_dual(&werner(1.0).assemblage, PPT).unwrap();
    let j = r.to_json();
    assert_eq!(j["relaxation"], "ppt");
    assert_eq!(j["certificate"]["kind"], "witness");
    assert_eq!(j["diagnostics"]["status"], "optimal");
    assert!(j["diagnostics"]["iterations"].as_u64().unwrap() > 0);
    let p = teleportation_robustness(&werner(1.0).assemblage, PPT).unwrap().to_json();
    assert_eq!(p["certificate"]["operators"].as_array().unwrap().len(), 4);
}

#[test]
fn single_precision_smoke() {
    let s = named_scenario::<f32>("werner", 1.0, None, None).unwrap();
    let opts = crate::sdp::SolveOptions { tol: 1e-5, ..Default::default() };
    let r = teleportation_robustness_with(&s.assemblage, PPT, &opts).unwrap();
    assert!((r.value - 2.0).abs() < 1e-3, "{}", r.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classical_data_has_zero_robustness(seed in any::<u64>(), qutrit in any::<bool>(), n_lambda in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, ens) = if qutrit { (3, tiles_inputs::<f64>()) } else { (2, standard_qubit_inputs::<f64>()) };
        let strat = random_strategy::<f64, _>(&mut rng, d, d, if qutrit { 2 } else { 4 }, n_lambda);
        let asm = classical_assemblage(&strat, &ens).unwrap();
        prop_assert!(asm.no_signalling_residual() <= 1e-10);
        let r = teleportation_robustness(&asm, PPT).unwrap();
        prop_assert!(r.value <= 1e-7, "{}", r.value);
    }

    #[test]
    fn robustness_is_monotone_in_noise(p in 0.34f64..1.0, dp in 0.01f64..0.3) {
        let lo = teleportation_robustness(&werner(p * (1.0 - dp)).assemblage, PPT).unwrap().value;
        let hi = teleportation_robustness(&werner(p).assemblage, PPT).unwrap().value;
        prop_assert!(lo <= hi + 1e-7);
    }
}
