//! Builds the complete and the Delaunay-meshed graph of one mouth and prints
//! their sizes, the mesh edges and the graph as JSON.
//!
//! cargo run --example delaunay_mesh -- [n]

use graphiq::graphs::{adjacency_vector, complete_graph, delaunay_graph};
use graphiq::landmarks::{extract_mouth, synthesize_face, Expression, VertexSelection};
use graphiq::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(10);
    let mut rng = rng::stream(&[rng::DEFAULT_SEED]);
    let face = synthesize_face(Expression::Happy, 1.5, &mut rng)?;
    let mouth = VertexSelection::sample(n, &mut rng)?.apply(&extract_mouth(&face)?)?;

    let complete = complete_graph(&mouth)?;
    let mesh = delaunay_graph(&mouth)?;
    println!("vertices (face landmark ids): {:?}", mouth.landmarks());
    println!("complete graph: {} edges", complete.edge_count());
    println!("meshed graph:   {} edges (at most {})", mesh.edge_count(), 3 * n - 6);
    for (i, j, w) in mesh.edges() {
        println!("  {i:>2} - {j:>2}  {w:7.2} px");
    }
    let v = adjacency_vector(&mesh);
    let zeros = v.entries().iter().filter(|w| **w == 0.0).count();
    println!("adjacency vector: {} entries, {zeros} zero", v.len());
    println!("{}", serde_json::to_string(&mesh)?);
    Ok(())
}
