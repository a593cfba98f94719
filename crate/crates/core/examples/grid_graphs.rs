//! Grids as Cartesian products of lines, their snake order, and lightcones.

use latticedesign::graphs::{cartesian_product, grid, grid_with_sides, lightcone, line_graph, VertexSet};
use latticedesign::routing::rt_bound;

fn main() -> latticedesign::Result<()> {
    let l3 = line_graph(3)?;
    let g = cartesian_product(&l3, &l3)?;
    assert_eq!(g, grid(2, 3)?);
    println!("3x3 grid: {} vertices, {} edges, routing bound {}", g.num_vertices(), g.num_edges(), rt_bound(&g)?);
    println!("snake order: {:?}", g.snake_order());

    let g = grid_with_sides(&[2, 4])?;
    println!("2x4 rows along axis 0: {:?}", g.copies(&[0])?);

    // a depth-d lightcone on a D-grid sits inside a radius-d ball
    let g = grid(2, 5)?;
    let centre = g.vertex(&[2, 2])?;
    for d in 0..=3 {
        let cone = lightcone(&g, &VertexSet::new([centre]), d)?;
        println!("depth {d}: {} sites (ball bound (2d+1)^2 = {})", cone.len(), (2 * d + 1).pow(2));
    }
    Ok(())
}
