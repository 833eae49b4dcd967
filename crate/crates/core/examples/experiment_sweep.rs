//! Full accuracy sweep on a synthetic dataset: every n, both strategies,
//! classical and exact quantum backends. Prints the summary table.
//!
//! cargo run --release --example experiment_sweep -- [per_class] [noise_fraction]

use std::time::Instant;

use graphiq::experiments::{run_experiment, Backend, Dataset, ExperimentConfig};
use graphiq::graphs::Strategy;
use graphiq::landmarks::{synthesize_face, Expression, MOUTH_WIDTH};
use graphiq::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let per_class: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(20);
    let noise: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.03);

    let mut rng = rng::stream(&[rng::DEFAULT_SEED, 0xface]);
    let mut faces = Vec::new();
    for kind in [Expression::Happy, Expression::Sad] {
        for _ in 0..per_class {
            faces.push(synthesize_face(kind, noise * MOUTH_WIDTH, &mut rng)?);
        }
    }
    let dataset = Dataset::from_faces(&faces)?;

    let config = ExperimentConfig {
        backends: vec![Backend::Classical, Backend::QuantumExact],
        strategies: Strategy::ALL.to_vec(),
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let report = run_experiment(&config, &dataset)?;
    print!("{}", report.summary_table());
    println!("finished in {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
