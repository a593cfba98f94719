//! Frame potentials: Cliffords are exact 2-designs, so the k=2 value is 2.

use latticedesign::gluing::{ExactCliffordBuilder, GluedEnsemble, GluingPlan, Layout, PlanOptions};
use latticedesign::rng::SeedStream;
use latticedesign::verify::{frame_potential, CliffordEnsemble, HaarEnsemble};

fn main() -> latticedesign::Result<()> {
    let seeds = SeedStream::new(6);
    for n in [1, 2, 3] {
        let r = frame_potential(&CliffordEnsemble(n), 2, 50_000, &seeds)?;
        println!("Clifford n={n}: F2 = {:.4} ± {:.4}", r.estimate, r.allowance);
    }
    let r = frame_potential(&CliffordEnsemble(2), 4, 50_000, &seeds)?;
    println!("Clifford n=2, k=4: F4 = {:.3} (Haar 24; Cliffords are not 4-designs)", r.estimate);
    let r = frame_potential(&HaarEnsemble(2), 2, 5_000, &seeds)?;
    println!("Haar n=2: F2 = {:.4} ± {:.4}", r.estimate, r.allowance);

    let plan = GluingPlan::new(Layout::AllToAll { n: 3 }, 1, Some(2), 0.1, &PlanOptions::default())?;
    let glued = GluedEnsemble { plan: &plan, global: &ExactCliffordBuilder, patch: &ExactCliffordBuilder };
    let r = frame_potential(&glued, 2, 5_000, &seeds)?;
    println!("glued exact Cliffords n=3: F2 = {:.4} ± {:.4}", r.estimate, r.allowance);
    Ok(())
}
