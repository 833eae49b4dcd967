//! Estimates the class probability from shots and compares it with the exact
//! value for growing shot counts.
//!
//! cargo run --release --example shot_sampling

use graphiq::classifier::{classify_quantum, exact_class_probability, ClassLabel, Mode, PreparedState, QuantumTrainingSet};
use graphiq::encoding::encode;
use graphiq::graphs::{adjacency_vector, Strategy};
use graphiq::landmarks::{extract_mouth, synthesize_face, Expression, VertexSelection, MOUTH_WIDTH};
use graphiq::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rng::stream(&[rng::DEFAULT_SEED]);
    let selection = VertexSelection::sample(8, &mut rng)?;
    let mut prepare = |kind| -> Result<PreparedState, Box<dyn std::error::Error>> {
        let face = synthesize_face(kind, 0.03 * MOUTH_WIDTH, &mut rng)?;
        let graph = Strategy::Meshed.build(&selection.apply(&extract_mouth(&face)?)?)?;
        Ok(PreparedState::new(encode(&adjacency_vector(&graph))?)?)
    };
    let test = prepare(Expression::Sad)?;
    let train = QuantumTrainingSet::new(vec![
        (prepare(Expression::Happy)?, ClassLabel::Plus),
        (prepare(Expression::Sad)?, ClassLabel::Minus),
    ])?;

    let exact = exact_class_probability(&test, &train)?;
    println!("exact p(c=0 | a=0) = {exact:.5}");
    for shots in [64, 256, 1024, 4096, 16384] {
        let out = classify_quantum(&test, &train, Mode::Shots(shots), &mut rng::stream(&[shots as u64]))?;
        let sigma = (exact * (1.0 - exact) / out.shots_kept as f64).sqrt();
        println!(
            "{shots:>6} shots: kept {:>6}, p = {:.5}, |error| = {:.2} sigma, decision {:?}",
            out.shots_kept,
            out.p_class0,
            (out.p_class0 - exact).abs() / sigma,
            out.decision
        );
    }
    Ok(())
}
