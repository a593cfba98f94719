//! Routing permutations on grids with SWAP rounds and checking the schedule.

use latticedesign::graphs::grid;
use latticedesign::rng::SeedStream;
use latticedesign::routing::{route_graph, rt_bound, schedule_to_circuit, verify_schedule, Permutation};
use rand::seq::SliceRandom;

fn main() -> latticedesign::Result<()> {
    let g = grid(2, 3)?;
    let pi = Permutation::reversal(9);
    let s = route_graph(&g, &pi)?;
    let check = verify_schedule(&g, &pi, &s);
    println!("reversal on 3x3: {} rounds, {} swaps, bound {}, ok {}", s.num_rounds(), s.num_swaps(), rt_bound(&g)?, check.ok);
    for (i, r) in s.rounds.iter().enumerate() {
        println!("  round {i}: {r:?}");
    }
    let c = schedule_to_circuit(&s, 9)?;
    assert_eq!(c.depth(), s.num_rounds());

    let cyc = Permutation::parse("(0 8)(1 5 7)", 9)?;
    println!("{cyc} routes in {} rounds", route_graph(&g, &cyc)?.num_rounds());

    let g = grid(3, 3)?;
    let mut rng = SeedStream::new(3).substream(0);
    let mut worst = 0;
    for _ in 0..200 {
        let mut img: Vec<usize> = (0..27).collect();
        img.shuffle(&mut rng);
        let pi = Permutation::from_images(img)?;
        let s = route_graph(&g, &pi)?;
        assert!(verify_schedule(&g, &pi, &s).ok);
        worst = worst.max(s.num_rounds());
    }
    println!("3x3x3, 200 random permutations: worst {worst} rounds, bound {}", rt_bound(&g)?);
    Ok(())
}
