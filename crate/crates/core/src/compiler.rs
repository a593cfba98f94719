//! Compile all-to-all layered circuits onto a grid by routing each layer's
//! interacting pairs next to each other before applying the layer.
//!
//! Positions are tracked incrementally, so each routing permutation starts
//! from wherever the previous layer left the qubits. A final permutation
//! returns every qubit to its own site. Gates are moved, never interpreted.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::graphs::ConnectivityGraph;
use crate::routing::{graph_ref, Permutation, Router};

/// Disjoint interacting pairs of one layer, plus the qubits left unpaired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub singles: Vec<usize>,
}

impl Matching {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut used = vec![false; n];
        for &(a, b) in &pairs {
            for q in [a, b] {
                if q >= n {
                    return Err(Error::InvalidArgument(format!("qubit {q} out of range for {n}")));
                }
                if std::mem::replace(&mut used[q], true) {
                    return Err(Error::InvalidArgument(format!("qubit {q} appears in two pairs")));
                }
            }
        }
        let singles = (0..n).filter(|&q| !used[q]).collect();
        Ok(Self { pairs, singles })
    }
}

/// One matching per layer, in order.
pub fn decompose_layers(c: &Circuit) -> Result<Vec<Matching>> {
    c.layers()
        .iter()
        .map(|layer| {
            let mut pairs = Vec::new();
            for g in layer {
                match g.qubits.len() {
                    1 => {}
                    2 => pairs.push((g.qubits[0], g.qubits[1])),
                    k => return Err(Error::UnsupportedGate(format!("{}-qubit gate {}", k, g.label()))),
                }
            }
            Matching::new(c.num_qubits(), pairs)
        })
        .collect()
}

fn snake_path(grid: &ConnectivityGraph) -> Result<Vec<usize>> {
    let s = grid.snake_order();
    if !grid.is_path(&s) {
        return Err(Error::InvalidArgument("target graph has no snake Hamiltonian path; use a grid".into()));
    }
    Ok(s)
}

/// Placement `q ↦ site`: pair `j` lands on snake sites `2j, 2j+1`. An unpaired
/// qubit stays on its own site when that site is free; the rest fill the
/// remaining free sites in increasing order.
pub fn placement_for_matching(m: &Matching, grid: &ConnectivityGraph) -> Result<Permutation> {
    let n = grid.num_vertices();
    if 2 * m.pairs.len() + m.singles.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: 2 * m.pairs.len() + m.singles.len() });
    }
    let snake = snake_path(grid)?;
    let mut place = vec![usize::MAX; n];
    for (j, &(a, b)) in m.pairs.iter().enumerate() {
        place[a] = snake[2 * j];
        place[b] = snake[2 * j + 1];
    }
    let mut taken = vec![false; n];
    for &site in &snake[..2 * m.pairs.len()] {
        taken[site] = true;
    }
    let mut displaced = Vec::new();
    for &q in &m.singles {
        if taken[q] {
            displaced.push(q);
        } else {
            taken[q] = true;
            place[q] = q;
        }
    }
    let mut free = (0..n).filter(|&s| !taken[s]);
    for q in displaced {
        place[q] = free.next().expect("counts match");
    }
    Permutation::from_images(place)
}

/// `d(V)·(2D·side + 1) + 2D·side`, with `side` the longest grid side.
pub fn compile_depth_bound(source_depth: usize, grid: &ConnectivityGraph) -> usize {
    let dims = grid.num_axes();
    let side = grid.factor_sizes().into_iter().max().unwrap_or(1);
    source_depth * (2 * dims * side + 1) + 2 * dims * side
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileReport {
    pub n: usize,
    pub grid: String,
    pub source_depth: usize,
    pub compiled_depth: usize,
    pub gate_count: usize,
    pub swap_count: usize,
    /// Rounds of the routing block before each source layer.
    pub routing_rounds: Vec<usize>,
    pub reset_rounds: usize,
    pub depth_bound: usize,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub circuit: Circuit,
    /// Routing permutations on sites, the reset last.
    pub permutations: Vec<Permutation>,
    pub report: CompileReport,
}

/// Interleave routing blocks and relabeled layers; ends with the reset block.
pub fn compile_to_grid(c: &Circuit, grid: &ConnectivityGraph) -> Result<Compiled> {
    let n = c.num_qubits();
    if grid.num_vertices() != n {
        return Err(Error::DimensionMismatch { expected: grid.num_vertices(), actual: n });
    }
    let router = Router::for_graph(grid)?;
    let matchings = decompose_layers(c)?;
    let mut out = Circuit::new(n);
    let mut pos: Vec<usize> = (0..n).collect();
    let mut permutations = Vec::with_capacity(matchings.len() + 1);
    let mut routing_rounds = Vec::with_capacity(matchings.len());
    let mut swap_count = 0;
    let mut route_to = |out: &mut Circuit, pos: &mut Vec<usize>, place: &[usize]| -> Result<usize> {
        // the pebble at site pos[q] must reach place[q]
        let mut images = vec![0; n];
        for q in 0..n {
            images[pos[q]] = place[q];
        }
        let pi = Permutation::from_images(images)?;
        let rounds = router.route(pi.images())?;
        for r in &rounds {
            swap_count += r.len();
            out.push_layer(r.iter().map(|&(u, v)| Gate::swap(u, v)).collect())?;
        }
        permutations.push(pi);
        pos.copy_from_slice(place);
        Ok(rounds.len())
    };
    for (layer, m) in c.layers().iter().zip(&matchings) {
        let place = placement_for_matching(m, grid)?;
        routing_rounds.push(route_to(&mut out, &mut pos, place.images())?);
        out.push_layer(layer.iter().map(|g| Gate::new(g.kind.clone(), g.qubits.iter().map(|&q| pos[q]).collect())).collect())?;
    }
    let home: Vec<usize> = (0..n).collect();
    let reset_rounds = route_to(&mut out, &mut pos, &home)?;
    out.check_graph(grid)?;
    let depth_bound = compile_depth_bound(c.depth(), grid);
    let report = CompileReport {
        n,
        grid: graph_ref(grid),
        source_depth: c.depth(),
        compiled_depth: out.depth(),
        gate_count: out.gate_count(),
        swap_count,
        routing_rounds,
        reset_rounds,
        depth_bound,
        within_bound: out.depth() <= depth_bound,
    };
    Ok(Compiled { circuit: out, permutations, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::graphs::{grid, grid_with_sides, line_graph, VertexSet};
    use crate::rng::SeedStream;
    use crate::verify::{haar_unitary, unitary_equivalent};
    use rand::seq::SliceRandom;

    #[test]
    fn decompose_examples() {
        assert!(decompose_layers(&Circuit::new(3)).unwrap().is_empty());
        let mut c = Circuit::new(6);
        c.push_layer(vec![Gate::two(GateKind::CX, 0, 5), Gate::two(GateKind::CZ, 1, 2)]).unwrap();
        let m = decompose_layers(&c).unwrap();
        assert_eq!(m[0].pairs, vec![(0, 5), (1, 2)]);
        assert_eq!(m[0].singles, vec![3, 4]);
    }

    #[test]
    fn placement_examples() {
        let g = grid(2, 3).unwrap();
        let empty = Matching::new(9, vec![]).unwrap();
        assert!(placement_for_matching(&empty, &g).unwrap().is_identity());
        let corner = Matching::new(9, vec![(0, 8)]).unwrap();
        let p = placement_for_matching(&corner, &g).unwrap();
        assert_eq!((p.apply(0), p.apply(8)), (g.vertex(&[0, 0]).unwrap(), g.vertex(&[0, 1]).unwrap()));
        let g4 = grid(2, 4).unwrap();
        let mut qs: Vec<usize> = (0..16).collect();
        qs.shuffle(&mut SeedStream::new(1).substream(0));
        let full = Matching::new(16, qs.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap();
        let p = placement_for_matching(&full, &g4).unwrap();
        for &(a, b) in &full.pairs {
            assert!(g4.has_edge(p.apply(a), p.apply(b)));
        }
    }

    #[test]
    fn empty_circuit_compiles_to_empty() {
        let r = compile_to_grid(&Circuit::new(4), &grid(2, 2).unwrap()).unwrap();
        assert_eq!(r.circuit.depth(), 0);
        assert_eq!(r.report.reset_rounds, 0);
    }

    #[test]
    fn corner_cnot_on_3x3() {
        let g = grid(2, 3).unwrap();
        let mut c = Circuit::new(9);
        c.push_layer(vec![Gate::two(GateKind::CX, 0, 8)]).unwrap();
        let r = compile_to_grid(&c, &g).unwrap();
        assert!(r.report.compiled_depth <= 19, "{:?}", r.report);
        assert!(r.report.within_bound);
        let eq = unitary_equivalent(&c, &r.circuit, 20, 1e-10, &SeedStream::new(2)).unwrap();
        assert!(eq.equivalent, "{eq:?}");
        // every qubit's lightcone through the compiled circuit stays on the grid
        assert!(crate::graphs::circuit_lightcone(&g, &r.circuit, &VertexSet::new([0])).is_ok());
    }

    #[test]
    fn permutations_compose_to_identity() {
        let g = grid_with_sides(&[2, 3]).unwrap();
        let seeds = SeedStream::new(3);
        let mut rng = seeds.substream(0);
        let mut gates = Vec::new();
        for _ in 0..4 {
            let mut qs: Vec<usize> = (0..6).collect();
            qs.shuffle(&mut rng);
            for p in qs.chunks(2) {
                gates.push(Gate::two(GateKind::CZ, p[0], p[1]));
            }
        }
        let c = Circuit::from_gates_asap(6, gates).unwrap();
        let r = compile_to_grid(&c, &g).unwrap();
        let total = r.permutations.iter().fold(Permutation::identity(6), |acc, p| p.after(&acc));
        assert!(total.is_identity());
    }

    #[test]
    fn random_brickwork_on_2x4() {
        let g = grid_with_sides(&[2, 4]).unwrap();
        let seeds = SeedStream::new(4);
        let mut rng = seeds.substream(0);
        let mut c = Circuit::new(8);
        for t in 0..3 {
            let mut qs: Vec<usize> = (0..8).collect();
            qs.shuffle(&mut rng);
            let layer = qs[..if t == 1 { 6 } else { 8 }]
                .chunks(2)
                .map(|p| Gate::two(GateKind::Unitary(Box::new(haar_unitary(4, &mut rng))), p[0], p[1]))
                .collect();
            c.push_layer(layer).unwrap();
        }
        let r = compile_to_grid(&c, &g).unwrap();
        assert!(r.report.within_bound);
        assert!(unitary_equivalent(&c, &r.circuit, 50, 1e-10, &seeds).unwrap().equivalent);
        let line = compile_to_grid(&c, &line_graph(8).unwrap()).unwrap();
        assert!(unitary_equivalent(&c, &line.circuit, 50, 1e-10, &seeds).unwrap().equivalent);
    }

    #[test]
    fn size_mismatch() {
        assert!(compile_to_grid(&Circuit::new(3), &grid(2, 2).unwrap()).is_err());
    }
}
