//! Property tests across module boundaries.

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use graphiq::encoding::{multiplexed_rotation, prepare, synthesize_state_prep, AmplitudeVector, Axis, CircuitFragment};
use graphiq::graphs::delaunay::{edges, triangulate};
use graphiq::graphs::{AdjacencyVector, WeightedGraph};
use graphiq::landmarks::Point;
use graphiq::simulator::{self, Circuit, Gate, Statevector};

fn simulate(frag: &CircuitFragment) -> Statevector {
    let mut circuit = Circuit::with_qubits(frag.num_qubits());
    circuit.extend(frag.gates().iter().cloned()).unwrap();
    simulator::run(&circuit).unwrap()
}

fn complex_target() -> impl Strategy<Value = Vec<Complex64>> {
    (1usize..=4).prop_flat_map(|q| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << q).prop_filter_map("non-zero", |v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| v.iter().map(|&(a, b)| Complex64::new(a / norm, b / norm)).collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn complex_targets_are_reached_up_to_phase(target in complex_target()) {
        let out = simulate(&prepare(&target).unwrap());
        let overlap: Complex64 = out.amplitudes().iter().zip(&target).map(|(o, t)| o.conj() * t).sum();
        prop_assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn real_encodings_are_reached_exactly(values in prop::collection::vec(0.0f64..50.0, 1..40)) {
        prop_assume!(values.iter().any(|v| *v > 1e-6));
        let state = AmplitudeVector::normalize(&values).unwrap();
        let out = simulate(&synthesize_state_prep(&state).unwrap());
        for (a, t) in out.amplitudes().iter().zip(state.amplitudes()) {
            prop_assert!((a - t).norm() < 1e-10);
        }
    }

    #[test]
    fn multiplexors_preserve_norm(angles in prop::collection::vec(-7.0f64..7.0, 8), seed in any::<u64>()) {
        let gates = multiplexed_rotation(&angles, Axis::Z, 1, &[0, 2, 3]).unwrap();
        let mut circuit = Circuit::with_qubits(4);
        // spread the input over all basis states first
        for q in 0..4 {
            circuit.push(Gate::ry((seed >> (8 * q)) as u8 as f64 / 40.0, q)).unwrap();
        }
        circuit.extend(gates).unwrap();
        prop_assert!((simulator::run(&circuit).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangulation_ignores_input_order(
        coords in prop::collection::hash_set((0i32..8, 0i32..8), 3..25),
        rotate in 0usize..25,
    ) {
        let points: Vec<Point> = coords.iter().map(|&(x, y)| Point::new(x as f64, y as f64)).collect();
        let Ok(tris) = triangulate(&points) else {
            // every point on one line
            return Ok(());
        };
        let shift = rotate % points.len();
        let mut rotated = points.clone();
        rotated.rotate_left(shift);
        let back = |i: usize| (i + shift) % points.len();
        let mut other: Vec<(usize, usize)> = edges(&triangulate(&rotated).unwrap())
            .into_iter()
            .map(|(i, j)| (back(i).min(back(j)), back(i).max(back(j))))
            .collect();
        other.sort_unstable();
        prop_assert_eq!(edges(&tris), other);
    }

    #[test]
    fn adjacency_vectors_round_trip(n in 2usize..12, seed in any::<u64>()) {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = ((seed.rotate_left((i * n + j) as u32) % 1000) as f64) / 10.0;
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        let graph = WeightedGraph::from_matrix(n, weights).unwrap();
        let v = AdjacencyVector::from_graph(&graph);
        prop_assert_eq!(v.len(), n * (n - 1) / 2);
        prop_assert_eq!(v.to_graph().unwrap(), graph);
    }

    #[test]
    fn circuit_text_round_trips(target in complex_target()) {
        let frag = prepare(&target).unwrap();
        let parsed: CircuitFragment = frag.to_string().parse().unwrap();
        prop_assert_eq!(parsed, frag);
    }
}

#[test]
fn symmetric_matrix_norm_is_root_two_times_vector_distance() {
    let a = AdjacencyVector::from_entries(vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0]).unwrap();
    let b = AdjacencyVector::from_entries(vec![2.0, 7.0, 1.0, 8.0, 2.0, 8.0]).unwrap();
    let vector = graphiq::classifier::frobenius_distance(a.entries(), b.entries()).unwrap();
    let (ga, gb) = (a.to_graph().unwrap(), b.to_graph().unwrap());
    let matrix = ga
        .weights()
        .iter()
        .zip(gb.weights())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    assert_abs_diff_eq!(matrix, 2f64.sqrt() * vector, epsilon = 1e-12);
}
