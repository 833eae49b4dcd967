//! Amplitude-encodes an adjacency vector, synthesizes its preparation circuit,
//! prints the gate listing and checks the simulated state against the target.
//!
//! cargo run --example state_prep

use graphiq::encoding::{encode, synthesize_state_prep};
use graphiq::graphs::{adjacency_vector, complete_graph};
use graphiq::landmarks::{extract_mouth, synthesize_face, Expression, VertexSelection};
use graphiq::rng;
use graphiq::simulator::{run, Circuit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rng::stream(&[rng::DEFAULT_SEED]);
    let face = synthesize_face(Expression::Sad, 0.0, &mut rng)?;
    let mouth = VertexSelection::sample(4, &mut rng)?.apply(&extract_mouth(&face)?)?;
    let vector = adjacency_vector(&complete_graph(&mouth)?);
    let state = encode(&vector)?;
    println!("edge weights: {:?}", vector.entries());
    println!("gamma = {:.4}, {} qubits", state.gamma(), state.num_qubits());

    let prep = synthesize_state_prep(&state)?;
    print!("{prep}");

    let mut circuit = Circuit::with_qubits(prep.num_qubits());
    circuit.extend(prep.gates().iter().cloned())?;
    let out = run(&circuit)?;
    let error = out
        .amplitudes()
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("max amplitude error: {error:.2e}");
    Ok(())
}
