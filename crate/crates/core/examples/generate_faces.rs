//! Synthesizes a few happy and sad faces, prints their mouth landmarks and
//! writes the whole set as landmark CSV to standard output.
//!
//! cargo run --example generate_faces

use graphiq::landmarks::{extract_mouth, synthesize_face, write_landmarks, Expression, MOUTH_WIDTH};
use graphiq::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rng::stream(&[rng::DEFAULT_SEED]);
    let noise = 0.03 * MOUTH_WIDTH;
    let mut faces = Vec::new();
    for kind in [Expression::Happy, Expression::Sad] {
        for _ in 0..2 {
            faces.push(synthesize_face(kind, noise, &mut rng)?);
        }
    }

    for face in &faces {
        let mouth = extract_mouth(face)?;
        let corners = (mouth.points()[0], mouth.points()[6]);
        eprintln!(
            "{:<5} corners ({:.1}, {:.1}) to ({:.1}, {:.1}), width {:.1} px",
            face.label(),
            corners.0.x,
            corners.0.y,
            corners.1.x,
            corners.1.y,
            corners.0.distance(&corners.1)
        );
    }
    write_landmarks(std::io::stdout().lock(), &faces)?;
    Ok(())
}
