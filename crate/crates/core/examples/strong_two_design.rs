//! Grid strong 2-designs: Pauli mixing followed by the weak-design placeholder.

use latticedesign::gluing::{strong2design_floor, strong2design_grid, strong2design_report};
use latticedesign::rng::SeedStream;

fn main() -> latticedesign::Result<()> {
    let mut rng = SeedStream::new(5).substream(0);
    let (c, r) = strong2design_grid(1, 6, 0.01, 1.0, None, &mut rng)?;
    println!("D=1 side 6: depth {} eps_1 {} error {}", c.depth(), r.eps_1, r.error);

    for side in [8, 16, 32, 64] {
        let floor = strong2design_floor(2, side);
        let eps = (2.0 * floor).max(1e-3);
        let r = strong2design_report(2, side, eps, 1.0, None)?;
        println!(
            "D=2 side {side}: floor {floor:.3e}, mixing depth {}, placeholder {}, error max(eps1, 2 eps2) = {:.3e}",
            r.mixing_depth, r.placeholder_depth, r.error
        );
    }
    match strong2design_report(2, 8, 1e-9, 1.0, None) {
        Err(e) => println!("below the floor: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
