//! The gluing protocol: plan, staggered patch blocks, and exact depth accounting.

use latticedesign::gluing::{
    build_gluing_circuit, gluing_error, kdesign_grid_plan, xi_min, ExactCliffordBuilder, GluingErrorParams, GluingPlan, IdentityBuilder,
    KDesignOptions, Layout, PlanOptions,
};
use latticedesign::rng::SeedStream;

fn main() -> latticedesign::Result<()> {
    println!("xi_min(16, 2, 0.1) = {}", xi_min(16, 2, 0.1, 0)?.xi);
    let e = gluing_error(&GluingErrorParams { eps_ab: 0.01, eps_bc: 0.01, eps_2: 0.0, k: 2, xi: 64 }, 1.0, 1.0)?;
    println!("gluing error example: {e:.6}");

    let plan = GluingPlan::new(Layout::AllToAll { n: 8 }, 2, Some(2), 0.1, &PlanOptions::default())?;
    for (i, s) in plan.steps.iter().enumerate() {
        let blocks: Vec<Vec<usize>> = s.patches.iter().map(|b| plan.block_sites(b)).collect::<Result<_, _>>()?;
        println!("step {}: {:?} eps {:.4} blocks {:?}", i + 1, s.kind, s.eps_target, blocks);
    }
    let built = build_gluing_circuit(&plan, &IdentityBuilder, &ExactCliffordBuilder, &SeedStream::new(4))?;
    let depths: Vec<usize> = built.steps.iter().map(|s| s.depth).collect();
    println!("step depths {depths:?}, total {}", built.circuit.depth());

    for side in [64, 256, 1024] {
        let kp = kdesign_grid_plan(1, side, 2, 0.1, &KDesignOptions::default())?;
        println!(
            "line n={side}: xi {} m {} total depth {} global share {:.3} flags {:?}",
            kp.plan.xi, kp.plan.m, kp.depth.total, kp.depth.global_share, kp.plan.flags
        );
    }
    Ok(())
}
