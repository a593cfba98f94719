//! Shallow circuits cannot scramble: the M-experiment stays below the
//! lightcone fraction, while Haar unitaries sit near 1/2.

use latticedesign::graphs::grid;
use latticedesign::mixing::{EnsembleSpec, LayerKind};
use latticedesign::rng::SeedStream;
use latticedesign::verify::{haar_lightcone_value, haar_reference, lightcone_experiment, EvalPath};

fn main() -> latticedesign::Result<()> {
    let seeds = SeedStream::new(7);
    for side in [3, 4] {
        let g = grid(2, side)?;
        for depth in 0..=3 {
            let ens = EnsembleSpec::global(g.clone(), LayerKind::Brickwork { depth })?;
            let r = lightcone_experiment(&ens, &g, 500, EvalPath::Clifford, &seeds)?;
            println!(
                "{side}x{side} depth {depth}: estimate {:.4}, max lightcone fraction {:.4}, pass {}",
                r.estimate, r.bounds["max_lightcone_fraction"], r.pass
            );
        }
    }
    for n in [2, 4, 6] {
        let r = haar_reference(n, 2_000, &seeds)?;
        println!("Haar n={n}: {:.4} ± {:.4} (exact {:.4})", r.estimate, r.allowance, haar_lightcone_value(n));
    }
    Ok(())
}
