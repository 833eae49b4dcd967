//! Classifies one test face against a (sad, happy) pair with every backend,
//! and shows the circuit layout and the probability behind the quantum call.
//!
//! cargo run --example classify_item -- [n]

use graphiq::classifier::{build_classifier_circuit, exact_probabilities};
use graphiq::experiments::{Backend, FaceGraph, TrainingPair};
use graphiq::graphs::Strategy;
use graphiq::landmarks::{extract_mouth, synthesize_face, Expression, VertexSelection, MOUTH_WIDTH};
use graphiq::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(6);
    let mut rng = rng::stream(&[rng::DEFAULT_SEED]);
    let noise = 0.03 * MOUTH_WIDTH;
    let test = synthesize_face(Expression::Happy, noise, &mut rng)?;
    let sad = synthesize_face(Expression::Sad, noise, &mut rng)?;
    let happy = synthesize_face(Expression::Happy, noise, &mut rng)?;
    let selection = VertexSelection::sample(n, &mut rng)?;

    for strategy in Strategy::ALL {
        let graph = |f| FaceGraph::build(&extract_mouth(f)?, &selection, strategy, true);
        let (t, s, h) = (graph(&test)?, graph(&sad)?, graph(&happy)?);
        let pair = TrainingPair::new(&s, &h, true)?;

        let train = pair.quantum_set().expect("built with circuits");
        let layout = build_classifier_circuit(t.prepared.as_ref().unwrap(), train)?;
        let p = exact_probabilities(t.prepared.as_ref().unwrap(), train)?;
        println!(
            "{strategy}: {} qubits, {} gates, p(c=0 | a=0) = {:.6}, p(a=0) = {:.4}",
            layout.num_qubits(),
            layout.circuit.len(),
            p.class0,
            p.ancilla0
        );
        for backend in [Backend::Classical, Backend::ClassicalNormalized, Backend::QuantumExact, Backend::QuantumShots] {
            let verdict = pair.classify(&t, backend, 1024, &mut rng::stream(&[1]))?;
            println!("  {backend:<21} {verdict}");
        }
    }
    Ok(())
}

