//! Pauli mixing of grid product ensembles: exact support-pattern oracle,
//! Monte Carlo estimate, and the product bounds.

use latticedesign::clifford::PauliString;
use latticedesign::mixing::{
    concentration_allowance, grid_mixing_ensemble, grid_mixing_error, mixing_distribution, mixing_report, tv_distance, worst_case_mixing_error,
    Mode, Strategy,
};
use latticedesign::rng::SeedStream;

fn main() -> latticedesign::Result<()> {
    let spec = grid_mixing_ensemble(2, 3)?;
    println!("2D mixing on 3x3: depth {}, {} layers", spec.declared_depth(), spec.layers().len());

    let q: PauliString = "ZIIIIIIII".parse()?;
    let exact = mixing_report(&spec, &q, Mode::Exact, 1)?;
    println!("TV to uniform, exact: {:.5}", exact.tv);
    // 20k samples cannot resolve 4^9 cells, but they do resolve the 2^9 support patterns
    let n = 20_000;
    let oracle = mixing_distribution(&spec, &q, Mode::Exact, &SeedStream::new(1))?;
    let mc = mixing_distribution(&spec, &q, Mode::Samples(n), &SeedStream::new(1))?;
    let gap = tv_distance(&oracle.pattern_marginal(), &mc.pattern_marginal());
    println!("pattern TV between oracle and {n} samples: {gap:.5} (allowance {:.5})", concentration_allowance(n as u64, 511, 1e-3));
    println!("general bound {:?}, simplified {:?}", exact.bound_general, exact.bound_simplified);

    let small = grid_mixing_ensemble(2, 2)?;
    let w = worst_case_mixing_error(&small, Strategy::Exhaustive, Mode::Exact, &SeedStream::new(2))?;
    println!("2x2 worst case over all {} Q: {:.5} at {}", w.evaluated, w.tv, w.argmax);

    for side in [4, 8, 16, 32] {
        println!("3D grid side {side}: error bound {:.3e}", grid_mixing_error(3, side * side * side));
    }
    Ok(())
}
