//! The layered circuit IR: building, JSON round trip, inversion and lightcones.

use latticedesign::circuit::{Circuit, Gate, GateKind};
use latticedesign::graphs::VertexSet;
use latticedesign::rng::SeedStream;
use latticedesign::verify::unitary_equivalent;

fn main() -> latticedesign::Result<()> {
    let gates = vec![
        Gate::one(GateKind::H, 0),
        Gate::two(GateKind::CX, 0, 1),
        Gate::two(GateKind::CZ, 2, 3),
        Gate::two(GateKind::Swap, 1, 2),
        Gate::one(GateKind::S, 3),
    ];
    let c = Circuit::from_gates_asap(4, gates)?;
    let text = serde_json::to_string(&c)?;
    println!("{text}");
    let back: Circuit = serde_json::from_str(&text)?;
    assert_eq!(back, c);
    println!("depth {}, gates {}, clifford {}", c.depth(), c.gate_count(), c.is_clifford());
    println!("forward lightcone of qubit 0: {:?}", c.lightcone(&VertexSet::new([0])).0);

    let mut twice = c.clone();
    twice.append(&c.inverse()?)?;
    let eq = unitary_equivalent(&twice, &Circuit::new(4), 10, 1e-12, &SeedStream::new(0))?;
    println!("C C^-1 is the identity: {}", eq.equivalent);
    Ok(())
}
