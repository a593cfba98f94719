//! Compiling an all-to-all circuit onto a grid and checking it against the
//! source with the statevector simulator.

use latticedesign::circuit::{Circuit, Gate, GateKind};
use latticedesign::compiler::compile_to_grid;
use latticedesign::graphs::grid;
use latticedesign::rng::SeedStream;
use latticedesign::verify::{haar_unitary, unitary_equivalent};
use rand::seq::SliceRandom;

fn main() -> latticedesign::Result<()> {
    let g = grid(2, 3)?;
    let mut corner = Circuit::new(9);
    corner.push_layer(vec![Gate::two(GateKind::CX, 0, 8)])?;
    let out = compile_to_grid(&corner, &g)?;
    println!("corner CNOT: {}", serde_json::to_string(&out.report)?);
    let eq = unitary_equivalent(&corner, &out.circuit, 20, 1e-10, &SeedStream::new(1))?;
    println!("equivalent {} (min fidelity {:.12})", eq.equivalent, eq.min_fidelity);

    // a random depth-4 circuit with Haar two-qubit payloads
    let seeds = SeedStream::new(2);
    let mut rng = seeds.substream(0);
    let mut c = Circuit::new(9);
    for _ in 0..4 {
        let mut qs: Vec<usize> = (0..9).collect();
        qs.shuffle(&mut rng);
        c.push_layer(qs.chunks_exact(2).map(|p| Gate::two(GateKind::Unitary(Box::new(haar_unitary(4, &mut rng))), p[0], p[1])).collect())?;
    }
    let out = compile_to_grid(&c, &g)?;
    let eq = unitary_equivalent(&c, &out.circuit, 50, 1e-10, &seeds)?;
    println!(
        "random depth 4: compiled depth {} (bound {}), routing rounds {:?} + reset {}, equivalent {}",
        out.report.compiled_depth, out.report.depth_bound, out.report.routing_rounds, out.report.reset_rounds, eq.equivalent
    );
    Ok(())
}
