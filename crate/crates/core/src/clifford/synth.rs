//! Fixed-shape synthesis of Clifford unitaries into nearest-neighbour
//! circuits on a line.
//!
//! Every tableau on `ℓ` qubits is emitted with the same gate skeleton
//! (identity elements included), so the depth depends on `ℓ` only and a
//! layer of independently sampled Cliffords has a known, uniform depth.

use std::sync::OnceLock;

use super::pauli::{Letter, PauliString};
use super::small::{one_qubit, two_qubit};
use super::tableau::CliffordTableau;
use crate::circuit::{Circuit, Gate, GateKind};

struct Tables {
    /// 2-qubit Pauli index → sign-free gate whose image has `I` on the second qubit.
    clear_second: [u16; 16],
    /// (index of a, index of b) → sign-free gate mapping `a ↦ ±XI`, `b ↦ ±ZI`.
    to_xz: Vec<u16>,
    /// (index of a, index of b) → sign-free 1-qubit gate mapping `a ↦ ±X`, `b ↦ ±Z`.
    to_xz_1: [u16; 16],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let g2 = two_qubit();
        let g1 = one_qubit();
        let mut clear_second = [0u16; 16];
        for (k, slot) in clear_second.iter_mut().enumerate() {
            let p = PauliString::from_index(2, k as u64);
            *slot = g2.find_sign_free(|t| t.conjugate_unchecked(&p).letter(1) == Letter::I).unwrap() as u16;
        }
        let xi = PauliString::from_index(2, 0b1000);
        let zi = PauliString::from_index(2, 0b0100);
        let mut to_xz = vec![u16::MAX; 256];
        for i in g2.sign_free().iter().copied() {
            let inv = g2.tableau(i).inverse();
            let a = inv.conjugate_unchecked(&xi).index() as usize;
            let b = inv.conjugate_unchecked(&zi).index() as usize;
            let slot = &mut to_xz[a * 16 + b];
            if *slot == u16::MAX {
                *slot = i as u16;
            }
        }
        let mut to_xz_1 = [u16::MAX; 16];
        for i in g1.sign_free().iter().copied() {
            let inv = g1.tableau(i).inverse();
            let a = inv.x_image(0).index() as usize;
            let b = inv.z_image(0).index() as usize;
            let slot = &mut to_xz_1[a * 4 + b];
            if *slot == u16::MAX {
                *slot = i as u16;
            }
        }
        Tables { clear_second, to_xz, to_xz_1 }
    })
}

// The skeleton as (qubit, role) slots; role decides which table picks the gate.
#[derive(Clone, Copy)]
enum Slot {
    ClearX { j: usize, i: usize },
    ClearZ { j: usize, i: usize },
    Final2 { i: usize },
    Final1 { i: usize },
}

fn skeleton(l: usize) -> Vec<Slot> {
    let mut out = Vec::new();
    for i in 0..l {
        if i + 1 == l {
            out.push(Slot::Final1 { i });
            continue;
        }
        for j in (i..l - 1).rev() {
            out.push(Slot::ClearX { j, i });
        }
        for j in (i + 1..l - 1).rev() {
            out.push(Slot::ClearZ { j, i });
        }
        out.push(Slot::Final2 { i });
    }
    out
}

/// Nearest-neighbour circuit on qubits `0..ℓ` whose tableau equals `u`,
/// signs included. Depth equals [`line_clifford_depth`]`(ℓ)`.
pub fn synthesize_line(u: &CliffordTableau) -> Circuit {
    let l = u.num_qubits();
    let tb = tables();
    let g2 = two_qubit();
    let g1 = one_qubit();
    // reduce t = u⁻¹ to a Pauli: g_m ⋯ g_1 t = w, hence u = w g_m ⋯ g_1
    let mut t = u.inverse();
    let mut gates = Vec::new();
    for slot in skeleton(l) {
        let (idx, sites): (GateKind, Vec<usize>) = match slot {
            Slot::ClearX { j, i } => {
                let p = t.x_image(i).restrict(&[j, j + 1]);
                (GateKind::C2(tb.clear_second[p.index() as usize]), vec![j, j + 1])
            }
            Slot::ClearZ { j, i } => {
                let p = t.z_image(i).restrict(&[j, j + 1]);
                (GateKind::C2(tb.clear_second[p.index() as usize]), vec![j, j + 1])
            }
            Slot::Final2 { i } => {
                let a = t.x_image(i).restrict(&[i, i + 1]).index() as usize;
                let b = t.z_image(i).restrict(&[i, i + 1]).index() as usize;
                let k = tb.to_xz[a * 16 + b];
                debug_assert_ne!(k, u16::MAX);
                (GateKind::C2(k), vec![i, i + 1])
            }
            Slot::Final1 { i } => {
                let a = t.x_image(i).restrict(&[i]).index() as usize;
                let b = t.z_image(i).restrict(&[i]).index() as usize;
                (GateKind::C1(tb.to_xz_1[a * 4 + b]), vec![i])
            }
        };
        let gt = match idx {
            GateKind::C2(k) => g2.tableau(k as usize),
            GateKind::C1(k) => g1.tableau(k as usize),
            _ => unreachable!(),
        };
        t.left_apply(gt, &sites);
        gates.push(Gate::new(idx, sites));
    }
    // t is now a Pauli w; w maps X_j ↦ s X_j, Z_j ↦ r Z_j
    for j in 0..l {
        debug_assert_eq!(t.x_image(j).weight(), 1);
        let s = t.x_image(j).phase() == 2;
        let r = t.z_image(j).phase() == 2;
        let letter = match (s, r) {
            (false, false) => Letter::I,
            (true, false) => Letter::Z,
            (false, true) => Letter::X,
            (true, true) => Letter::Y,
        };
        let k = g1.pauli_index(&PauliString::single(1, 0, letter));
        gates.push(Gate::one(GateKind::C1(k as u16), j));
    }
    Circuit::from_gates_asap(l, gates).expect("skeleton is well formed")
}

/// Depth of every circuit produced by [`synthesize_line`] on `ℓ` qubits.
pub fn line_clifford_depth(l: usize) -> usize {
    static CACHE: OnceLock<std::sync::Mutex<Vec<usize>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    {
        let c = cache.lock().unwrap();
        if let Some(&d) = c.get(l) {
            if d != usize::MAX {
                return d;
            }
        }
    }
    let d = synthesize_line(&CliffordTableau::identity(l)).depth();
    let mut c = cache.lock().unwrap();
    if c.len() <= l {
        c.resize(l + 1, usize::MAX);
    }
    c[l] = d;
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::line_graph;
    use crate::rng::SeedStream;

    #[test]
    fn synthesis_reproduces_tableau_exactly() {
        let s = SeedStream::new(21);
        for l in 1..=7 {
            let mut rng = s.substream(l as u64);
            let g = line_graph(l).unwrap();
            for _ in 0..40 {
                let u = CliffordTableau::sample_uniform(l, &mut rng).unwrap();
                let c = synthesize_line(&u);
                c.check_graph(&g).unwrap();
                assert_eq!(c.tableau().unwrap(), u);
                assert_eq!(c.depth(), line_clifford_depth(l));
            }
        }
    }

    #[test]
    fn tables_are_complete() {
        let tb = tables();
        for a in 1..16usize {
            for b in 1..16usize {
                let pa = PauliString::from_index(2, a as u64);
                let pb = PauliString::from_index(2, b as u64);
                let ok = tb.to_xz[a * 16 + b] != u16::MAX;
                // reachable iff a, b anticommute and b's restriction can be cleared under a = P⊗I
                if pa.letter(1) == Letter::I && pa.anticommutes(&pb) {
                    assert!(ok, "{pa} {pb}");
                }
            }
        }
    }

    #[test]
    fn depth_grows_linearly() {
        let d: Vec<usize> = (1..=10).map(line_clifford_depth).collect();
        assert_eq!(d[0], 2);
        for l in 2..=10 {
            assert!(d[l - 1] <= 6 * l, "{d:?}");
        }
    }
}
