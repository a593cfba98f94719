use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use latticedesign::circuit::{Circuit, Gate, GateKind};
use latticedesign::clifford::{CliffordTableau, PauliString};
use latticedesign::compiler::compile_to_grid;
use latticedesign::gluing::{xi_min, GluingPlan, Layout, PlanOptions};
use latticedesign::graphs::{grid, grid_with_sides, lightcone, line_graph, VertexSet};
use latticedesign::mixing::{grid_mixing_ensemble, mixing_distribution, tv_to_uniform, Mode};
use latticedesign::rng::SeedStream;
use latticedesign::routing::{route_graph, verify_schedule, Permutation, Router};

fn shuffled(n: usize, seed: u64) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(&mut SeedStream::new(seed).substream(0));
    Permutation::from_images(images).unwrap()
}

fn clifford_circuit(n: usize, layers: usize, seed: u64) -> Circuit {
    let mut rng = SeedStream::new(seed).substream(1);
    let mut c = Circuit::new(n);
    for _ in 0..layers {
        let mut qs: Vec<usize> = (0..n).collect();
        qs.shuffle(&mut rng);
        let pairs = rng.gen_range(0..=n / 2);
        let mut layer: Vec<Gate> = qs[..2 * pairs]
            .chunks(2)
            .map(|p| Gate::two(GateKind::C2(rng.gen_range(0..11520)), p[0], p[1]))
            .collect();
        layer.extend(qs[2 * pairs..].iter().map(|&q| Gate::one(GateKind::C1(rng.gen_range(0..24)), q)));
        c.push_layer(layer).unwrap();
    }
    c
}

fn sides() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1usize..10).prop_map(|l| vec![l]),
        (1usize..5, 1usize..5).prop_map(|(a, b)| vec![a, b]),
        Just(vec![2, 2, 2]),
        Just(vec![2, 3, 2]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routed_schedules_verify_within_bound(s in sides(), seed in any::<u64>()) {
        let g = grid_with_sides(&s).unwrap();
        let pi = shuffled(g.num_vertices(), seed);
        let sched = route_graph(&g, &pi).unwrap();
        let check = verify_schedule(&g, &pi, &sched);
        prop_assert!(check.ok, "{:?}", check.violation);
        prop_assert!(sched.num_rounds() <= Router::for_graph(&g).unwrap().bound());
    }

    #[test]
    fn inverse_routes_back(seed in any::<u64>()) {
        let g = grid(2, 3).unwrap();
        let pi = shuffled(9, seed);
        let there = route_graph(&g, &pi).unwrap();
        let back = route_graph(&g, &pi.inverse()).unwrap();
        prop_assert!(verify_schedule(&g, &pi.inverse(), &back).ok);
        prop_assert!(pi.inverse().after(&pi).is_identity());
        prop_assert!(there.num_rounds() <= 9 && back.num_rounds() <= 9);
    }

    #[test]
    fn conjugation_is_a_homomorphism(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).substream(0);
        let u = CliffordTableau::sample_uniform(n, &mut rng).unwrap();
        prop_assert!(u.is_symplectic());
        let p = PauliString::random_nonidentity(n, &mut rng).unwrap();
        let q = PauliString::random_nonidentity(n, &mut rng).unwrap();
        let (up, uq) = (u.conjugate(&p).unwrap(), u.conjugate(&q).unwrap());
        prop_assert_eq!(u.conjugate(&p.mul(&q)).unwrap(), up.mul(&uq));
        prop_assert_eq!(p.commutes(&q), up.commutes(&uq));
        prop_assert_eq!(u.inverse().conjugate(&up).unwrap(), p);
        let id = CliffordTableau::compose(&u, &u.inverse()).unwrap();
        prop_assert_eq!(id, CliffordTableau::identity(n));
    }

    #[test]
    fn compiled_clifford_circuits_keep_their_tableau(seed in any::<u64>(), layers in 1usize..5, which in 0usize..4) {
        let (n, g) = [
            (4, grid(2, 2).unwrap()),
            (6, grid_with_sides(&[2, 3]).unwrap()),
            (7, line_graph(7).unwrap()),
            (9, grid(2, 3).unwrap()),
        ][which].clone();
        let c = clifford_circuit(n, layers, seed);
        let r = compile_to_grid(&c, &g).unwrap();
        prop_assert!(r.report.within_bound);
        r.circuit.check_graph(&g).unwrap();
        prop_assert_eq!(r.circuit.tableau().unwrap(), c.tableau().unwrap());
    }

    #[test]
    fn circuit_json_round_trips(n in 1usize..8, layers in 0usize..5, seed in any::<u64>()) {
        let c = clifford_circuit(n, layers, seed);
        let text = serde_json::to_string(&c).unwrap();
        let back: Circuit = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn heisenberg_support_stays_in_the_backward_cone(seed in any::<u64>(), layers in 0usize..4, q in 0usize..9) {
        let c = clifford_circuit(9, layers, seed);
        let mut p = PauliString::identity(9);
        p.set_letter(q, latticedesign::clifford::Letter::Z);
        let image = c.heisenberg(&p).unwrap();
        let cone = c.backward_lightcone(&VertexSet::new([q]));
        for site in image.support().sites() {
            prop_assert!(cone.contains(site));
        }
    }

    #[test]
    fn graph_balls_grow_with_depth(s in sides(), d in 0usize..4) {
        let g = grid_with_sides(&s).unwrap();
        let seed = VertexSet::new([0]);
        let small = lightcone(&g, &seed, d).unwrap();
        let big = lightcone(&g, &seed, d + 1).unwrap();
        prop_assert!(small.is_subset(&big));
        prop_assert!(small.len() as f64 <= ((2 * d + 1) as f64).powi(s.len() as i32));
    }

    #[test]
    fn exact_mixing_laws_are_normalised(k in 1u64..256) {
        let spec = grid_mixing_ensemble(2, 2).unwrap();
        let q = PauliString::from_index(4, k);
        let d = mixing_distribution(&spec, &q, Mode::Exact, &SeedStream::new(0)).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let tv = tv_to_uniform(&d);
        prop_assert!((0.0..=1.0).contains(&tv.tv));
        prop_assert_eq!(tv.allowance, 0.0);
    }

    #[test]
    fn gluing_blocks_partition_the_patches(m in 1usize..10, xi in 1usize..5, wrap in any::<bool>()) {
        let n = 2 * m * xi;
        let opts = PlanOptions { wraparound: Some(wrap), ..PlanOptions::default() };
        let p = GluingPlan::new(Layout::AllToAll { n }, xi, Some(2), 0.1, &opts).unwrap();
        prop_assert_eq!(p.steps.len(), 4);
        for step in &p.steps[1..3] {
            let mut seen = vec![false; p.m];
            for block in &step.patches {
                for &patch in block {
                    prop_assert!(!std::mem::replace(&mut seen[patch], true));
                }
            }
        }
        let covered: usize = p.steps[1].patches.iter().map(|b| p.block_sites(b).unwrap().len()).sum();
        prop_assert_eq!(covered, n);
    }

    #[test]
    fn xi_grows_with_n_and_precision(n in 2usize..5000, k in 1usize..8) {
        let a = xi_min(n, k, 0.1, 0).unwrap().xi;
        prop_assert!(xi_min(2 * n, k, 0.1, 0).unwrap().xi >= a);
        prop_assert!(xi_min(n, k, 0.01, 0).unwrap().xi >= a);
        prop_assert!(xi_min(n, 2 * k, 0.1, 0).unwrap().xi >= a);
    }
}
