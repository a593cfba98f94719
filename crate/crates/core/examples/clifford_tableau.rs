//! Uniform random Cliffords as tableaux, Pauli conjugation, and synthesis
//! into a nearest-neighbour line circuit that reproduces the tableau exactly.

use latticedesign::clifford::{compose, line_clifford_depth, synthesize_line, CliffordTableau, PauliString};
use latticedesign::graphs::line_graph;
use latticedesign::rng::SeedStream;

fn main() -> latticedesign::Result<()> {
    let mut rng = SeedStream::new(11).substream(0);
    let u = CliffordTableau::sample_uniform(5, &mut rng)?;
    for p in ["ZIIII", "IIXII", "YYIIZ"] {
        let q: PauliString = p.parse()?;
        println!("U {p} U† = {}", u.conjugate(&q)?);
    }

    let c = synthesize_line(&u);
    c.check_graph(&line_graph(5)?)?;
    assert_eq!(c.tableau()?, u);
    println!("line circuit: depth {} (fixed {}), {} gates", c.depth(), line_clifford_depth(5), c.gate_count());

    let id = compose(&u, &u.inverse())?;
    assert_eq!(id, CliffordTableau::identity(5));
    println!("|tr U|^2 = {}", u.trace_norm_sq()?);
    Ok(())
}
