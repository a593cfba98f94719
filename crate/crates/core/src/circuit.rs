//! Layered circuit IR shared by routing, compilation, gluing and verification.
//!
//! A circuit is a list of layers; gates inside a layer act on disjoint
//! qubits, so `depth = layers.len()`. Gates are 1- or 2-qubit and carry
//! either a named Clifford, an index into the enumerated 1-/2-qubit Clifford
//! groups, an explicit unitary matrix, or an opaque label that only the
//! structural passes understand.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::small::{one_qubit, two_qubit};
use crate::clifford::tableau::conjugate_on_sites;
use crate::clifford::{CliffordTableau, PauliString};
use crate::error::{Error, Result};
use crate::graphs::{ConnectivityGraph, VertexSet};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    I,
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    CX,
    CZ,
    Swap,
    /// Element of the enumerated one-qubit Clifford group.
    C1(u16),
    /// Element of the enumerated two-qubit Clifford group.
    C2(u16),
    /// Dense unitary on one (2×2) or two (4×4) qubits; the first listed
    /// qubit is the more significant index.
    Unitary(Box<DMatrix<C64>>),
    /// Gate with no semantics known to this crate.
    Opaque { label: String, params: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

fn named_index(kind: &GateKind) -> Option<(usize, usize)> {
    struct Table {
        one: [usize; 7],
        two: [usize; 3],
    }
    static T: OnceLock<Table> = OnceLock::new();
    let t = T.get_or_init(|| {
        let g1 = one_qubit();
        let g2 = two_qubit();
        let p = |s: &str| s.parse::<PauliString>().unwrap();
        let t1 = |x: &str, z: &str| g1.index_of(&CliffordTableau::from_images(vec![p(x)], vec![p(z)]).unwrap()).unwrap();
        let t2 = |x: [&str; 2], z: [&str; 2]| {
            g2.index_of(&CliffordTableau::from_images(vec![p(x[0]), p(x[1])], vec![p(z[0]), p(z[1])]).unwrap()).unwrap()
        };
        Table {
            one: [t1("X", "Z"), t1("Z", "X"), t1("Y", "Z"), t1("-Y", "Z"), t1("X", "-Z"), t1("-X", "-Z"), t1("-X", "Z")],
            two: [t2(["XX", "IX"], ["ZI", "ZZ"]), t2(["XZ", "ZX"], ["ZI", "IZ"]), t2(["IX", "XI"], ["IZ", "ZI"])],
        }
    });
    Some(match kind {
        GateKind::I => (1, t.one[0]),
        GateKind::H => (1, t.one[1]),
        GateKind::S => (1, t.one[2]),
        GateKind::Sdg => (1, t.one[3]),
        GateKind::X => (1, t.one[4]),
        GateKind::Y => (1, t.one[5]),
        GateKind::Z => (1, t.one[6]),
        GateKind::CX => (2, t.two[0]),
        GateKind::CZ => (2, t.two[1]),
        GateKind::Swap => (2, t.two[2]),
        GateKind::C1(i) => (1, *i as usize),
        GateKind::C2(i) => (2, *i as usize),
        _ => return None,
    })
}

fn named_matrix(kind: &GateKind) -> Option<DMatrix<C64>> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let m2 = |v: [C64; 4]| DMatrix::from_row_slice(2, 2, &v);
    Some(match kind {
        GateKind::I => m2([l, o, o, l]),
        GateKind::H => m2([h, h, h, -h]),
        GateKind::S => m2([l, o, o, i]),
        GateKind::Sdg => m2([l, o, o, -i]),
        GateKind::X => m2([o, l, l, o]),
        GateKind::Y => m2([o, -i, i, o]),
        GateKind::Z => m2([l, o, o, -l]),
        GateKind::CX | GateKind::CZ | GateKind::Swap => {
            let mut m = DMatrix::zeros(4, 4);
            let perm: [usize; 4] = match kind {
                GateKind::CX => [0, 1, 3, 2],
                GateKind::Swap => [0, 2, 1, 3],
                _ => [0, 1, 2, 3],
            };
            for (r, &c) in perm.iter().enumerate() {
                m[(r, c)] = l;
            }
            if *kind == GateKind::CZ {
                m[(3, 3)] = -l;
            }
            m
        }
        _ => return None,
    })
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits }
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![q])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self::new(kind, vec![a, b])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::two(GateKind::Swap, a, b)
    }

    pub fn label(&self) -> &str {
        match &self.kind {
            GateKind::I => "i",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::Swap => "swap",
            GateKind::C1(_) => "c1",
            GateKind::C2(_) => "c2",
            GateKind::Unitary(m) if m.nrows() == 2 => "u1",
            GateKind::Unitary(_) => "u2",
            GateKind::Opaque { label, .. } => label,
        }
    }

    /// Number of qubits the gate kind requires (`None` for opaque gates).
    pub fn required_arity(&self) -> Option<usize> {
        match &self.kind {
            GateKind::Unitary(m) => Some(if m.nrows() == 2 { 1 } else { 2 }),
            GateKind::Opaque { .. } => None,
            k => named_index(k).map(|(a, _)| a),
        }
    }

    pub fn is_clifford(&self) -> bool {
        named_index(&self.kind).is_some()
    }

    /// Conjugation action `P ↦ g P g†` on the gate's own qubits.
    pub fn tableau(&self) -> Option<&'static CliffordTableau> {
        named_index(&self.kind).map(|(a, i)| if a == 1 { one_qubit().tableau(i) } else { two_qubit().tableau(i) })
    }

    pub fn matrix(&self) -> Option<DMatrix<C64>> {
        match &self.kind {
            GateKind::Unitary(m) => Some((**m).clone()),
            GateKind::Opaque { .. } => None,
            k => named_matrix(k).or_else(|| named_index(k).map(|(a, i)| if a == 1 { one_qubit().matrix(i).clone() } else { two_qubit().matrix(i).clone() })),
        }
    }

    pub fn inverse(&self) -> Result<Gate> {
        let kind = match &self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::C1(_) | GateKind::C2(_) => {
                let (a, _) = named_index(&self.kind).unwrap();
                let inv = self.tableau().unwrap().inverse();
                let g = if a == 1 { one_qubit() } else { two_qubit() };
                let j = g.index_of(&inv).expect("group closed under inverse") as u16;
                if a == 1 {
                    GateKind::C1(j)
                } else {
                    GateKind::C2(j)
                }
            }
            GateKind::Unitary(m) => GateKind::Unitary(Box::new(m.adjoint())),
            GateKind::Opaque { label, .. } => {
                return Err(Error::UnsupportedGate(format!("cannot invert opaque gate {label}")));
            }
            k => k.clone(),
        };
        Ok(Gate::new(kind, self.qubits.clone()))
    }

    fn relabel(&self, map: &[usize]) -> Gate {
        Gate::new(self.kind.clone(), self.qubits.iter().map(|&q| map[q]).collect())
    }
}

/// Layered circuit on `n` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, layers: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    fn check_gate(&self, g: &Gate) -> Result<()> {
        if g.qubits.is_empty() || g.qubits.len() > 2 {
            return Err(Error::UnsupportedGate(format!("{} acts on {} qubits; only 1- and 2-qubit gates are supported", g.label(), g.qubits.len())));
        }
        if let Some(a) = g.required_arity() {
            if a != g.qubits.len() {
                return Err(Error::InvalidCircuit(format!("gate {} needs {a} qubits, got {}", g.label(), g.qubits.len())));
            }
        }
        if let GateKind::Unitary(m) = &g.kind {
            if !(m.nrows() == m.ncols() && (m.nrows() == 2 || m.nrows() == 4)) {
                return Err(Error::InvalidCircuit(format!("matrix payload of shape {}x{}", m.nrows(), m.ncols())));
            }
        }
        for &q in &g.qubits {
            if q >= self.n {
                return Err(Error::InvalidCircuit(format!("gate {} on qubit {q} >= {}", g.label(), self.n)));
            }
        }
        if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
            return Err(Error::InvalidCircuit(format!("gate {} repeats qubit {}", g.label(), g.qubits[0])));
        }
        Ok(())
    }

    /// Append a layer; its gates must act on pairwise disjoint qubits.
    pub fn push_layer(&mut self, gates: Vec<Gate>) -> Result<()> {
        let mut used = vec![false; self.n];
        for g in &gates {
            self.check_gate(g)?;
            for &q in &g.qubits {
                if std::mem::replace(&mut used[q], true) {
                    return Err(Error::InvalidCircuit(format!("qubit {q} used twice in one layer")));
                }
            }
        }
        self.layers.push(gates);
        Ok(())
    }

    /// Schedule `gates` as-soon-as-possible, preserving their order on every qubit.
    pub fn from_gates_asap(n: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(n);
        let mut next = vec![0usize; n];
        for g in gates {
            c.check_gate(&g)?;
            let l = g.qubits.iter().map(|&q| next[q]).max().unwrap_or(0);
            if l == c.layers.len() {
                c.layers.push(Vec::new());
            }
            for &q in &g.qubits {
                next[q] = l + 1;
            }
            c.layers[l].push(g);
        }
        Ok(c)
    }

    /// Sequential composition: `other` runs after `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: other.n });
        }
        self.layers.extend(other.layers.iter().cloned());
        Ok(())
    }

    /// Run `other` in parallel, starting at layer `start`; supports must not collide.
    pub fn overlay(&mut self, other: &Circuit, start: usize) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: other.n });
        }
        while self.layers.len() < start + other.layers.len() {
            self.layers.push(Vec::new());
        }
        for (i, layer) in other.layers.iter().enumerate() {
            let target = &mut self.layers[start + i];
            for g in layer {
                if target.iter().any(|h| h.qubits.iter().any(|q| g.qubits.contains(q))) {
                    return Err(Error::InvalidCircuit(format!("overlay collides at layer {}", start + i)));
                }
                target.push(g.clone());
            }
        }
        Ok(())
    }

    /// Relabel local qubit `i` to `sites[i]` inside an `n_total`-qubit register.
    pub fn embed(&self, sites: &[usize], n_total: usize) -> Result<Circuit> {
        if sites.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: sites.len() });
        }
        crate::clifford::tableau::check_sites(sites, n_total)?;
        Ok(Circuit { n: n_total, layers: self.layers.iter().map(|l| l.iter().map(|g| g.relabel(sites)).collect()).collect() })
    }

    /// Relabel qubits by a permutation `map` (qubit `q` → `map[q]`).
    pub fn relabel(&self, map: &[usize]) -> Result<Circuit> {
        self.embed(map, self.n)
    }

    pub fn inverse(&self) -> Result<Circuit> {
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|l| l.iter().map(Gate::inverse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { n: self.n, layers })
    }

    /// Remove layers that contain no gates.
    pub fn trim(&mut self) {
        self.layers.retain(|l| !l.is_empty());
    }

    pub fn is_clifford(&self) -> bool {
        self.gates().all(Gate::is_clifford)
    }

    /// Every two-qubit gate sits on an edge of `g` and the qubit counts agree.
    pub fn check_graph(&self, g: &ConnectivityGraph) -> Result<()> {
        if g.num_vertices() != self.n {
            return Err(Error::DimensionMismatch { expected: g.num_vertices(), actual: self.n });
        }
        for (l, layer) in self.layers.iter().enumerate() {
            for gate in layer {
                if gate.qubits.len() == 2 && !g.has_edge(gate.qubits[0], gate.qubits[1]) {
                    return Err(Error::InvalidCircuit(format!(
                        "layer {l}: gate {} on ({},{}) is not on a graph edge",
                        gate.label(),
                        gate.qubits[0],
                        gate.qubits[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Forward support of `seeds`: a gate touching the current set adds all its qubits.
    pub fn lightcone(&self, seeds: &VertexSet) -> VertexSet {
        let mut inside = vec![false; self.n];
        for s in seeds.iter().filter(|&s| s < self.n) {
            inside[s] = true;
        }
        for layer in &self.layers {
            for g in layer {
                if g.qubits.iter().any(|&q| inside[q]) {
                    g.qubits.iter().for_each(|&q| inside[q] = true);
                }
            }
        }
        VertexSet::new((0..self.n).filter(|&q| inside[q]))
    }

    /// Support of `U† P U` for `P` supported on `seeds` (gates walked last to first).
    pub fn backward_lightcone(&self, seeds: &VertexSet) -> VertexSet {
        let rev = Circuit { n: self.n, layers: self.layers.iter().rev().cloned().collect() };
        rev.lightcone(seeds)
    }

    /// Tableau of the whole circuit; fails on non-Clifford gates.
    pub fn tableau(&self) -> Result<CliffordTableau> {
        let mut t = CliffordTableau::identity(self.n);
        for g in self.gates() {
            let gt = g.tableau().ok_or_else(|| Error::UnsupportedGate(format!("{} is not Clifford", g.label())))?;
            t.left_apply(gt, &g.qubits);
        }
        Ok(t)
    }

    /// `U P U†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: p.num_qubits() });
        }
        let mut out = p.clone();
        for g in self.gates() {
            let gt = g.tableau().ok_or_else(|| Error::UnsupportedGate(format!("{} is not Clifford", g.label())))?;
            conjugate_on_sites(gt, &g.qubits, &mut out);
        }
        Ok(out)
    }

    /// `U† P U`.
    pub fn heisenberg(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: p.num_qubits() });
        }
        let mut out = p.clone();
        for layer in self.layers.iter().rev() {
            for g in layer {
                let inv = g.inverse()?;
                let gt = inv.tableau().ok_or_else(|| Error::UnsupportedGate(format!("{} is not Clifford", g.label())))?;
                conjugate_on_sites(gt, &g.qubits, &mut out);
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    g: String,
    q: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    layers: Vec<Vec<GateJson>>,
}

impl From<&Gate> for GateJson {
    fn from(g: &Gate) -> Self {
        let (p, m) = match &g.kind {
            GateKind::C1(i) | GateKind::C2(i) => (Some(vec![*i as f64]), None),
            GateKind::Unitary(m) => {
                let dim = m.nrows();
                let mut flat = Vec::with_capacity(dim * dim);
                for r in 0..dim {
                    for c in 0..dim {
                        flat.push([m[(r, c)].re, m[(r, c)].im]);
                    }
                }
                (None, Some(flat))
            }
            GateKind::Opaque { params, .. } if !params.is_empty() => (Some(params.clone()), None),
            _ => (None, None),
        };
        GateJson { g: g.label().to_string(), q: g.qubits.clone(), p, m }
    }
}

impl TryFrom<GateJson> for Gate {
    type Error = Error;

    fn try_from(j: GateJson) -> Result<Self> {
        let index = |limit: usize| -> Result<u16> {
            let v = j.p.as_ref().and_then(|p| p.first().copied()).ok_or_else(|| Error::Parse(format!("gate {} needs an index parameter", j.g)))?;
            if v < 0.0 || v.fract() != 0.0 || v as usize >= limit {
                return Err(Error::Parse(format!("gate {} index {v} out of range", j.g)));
            }
            Ok(v as u16)
        };
        let kind = match j.g.as_str() {
            "i" | "id" => GateKind::I,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "cx" | "cnot" => GateKind::CX,
            "cz" => GateKind::CZ,
            "swap" => GateKind::Swap,
            "c1" => GateKind::C1(index(one_qubit().len())?),
            "c2" => GateKind::C2(index(two_qubit().len())?),
            "u1" | "u2" | "u" => {
                let flat = j.m.as_ref().ok_or_else(|| Error::Parse(format!("gate {} needs a matrix payload", j.g)))?;
                let dim = match flat.len() {
                    4 => 2,
                    16 => 4,
                    k => return Err(Error::Parse(format!("matrix payload with {k} entries"))),
                };
                let m = DMatrix::from_row_iterator(dim, dim, flat.iter().map(|e| C64::new(e[0], e[1])));
                GateKind::Unitary(Box::new(m))
            }
            other => GateKind::Opaque { label: other.to_string(), params: j.p.clone().unwrap_or_default() },
        };
        Ok(Gate::new(kind, j.q))
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitJson { n: self.n, layers: self.layers.iter().map(|l| l.iter().map(GateJson::from).collect()).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CircuitJson::deserialize(d)?;
        let mut c = Circuit::new(j.n);
        for layer in j.layers {
            let gates = layer.into_iter().map(Gate::try_from).collect::<Result<Vec<_>>>().map_err(serde::de::Error::custom)?;
            c.push_layer(gates).map_err(serde::de::Error::custom)?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gates_have_expected_actions() {
        let conj = |k: GateKind, qs: Vec<usize>, p: &str| {
            let n = qs.iter().max().unwrap() + 1;
            let mut c = Circuit::new(n);
            c.push_layer(vec![Gate::new(k, qs)]).unwrap();
            c.conjugate(&p.parse().unwrap()).unwrap().to_string()
        };
        assert_eq!(conj(GateKind::H, vec![0], "Z"), "X");
        assert_eq!(conj(GateKind::S, vec![0], "X"), "Y");
        assert_eq!(conj(GateKind::Sdg, vec![0], "X"), "-Y");
        assert_eq!(conj(GateKind::X, vec![0], "Z"), "-Z");
        assert_eq!(conj(GateKind::CX, vec![0, 1], "XI"), "XX");
        assert_eq!(conj(GateKind::CX, vec![1, 0], "IX"), "XX");
        assert_eq!(conj(GateKind::CZ, vec![0, 1], "XI"), "XZ");
        assert_eq!(conj(GateKind::Swap, vec![0, 1], "XZ"), "ZX");
    }

    #[test]
    fn named_matrices_match_tableaux() {
        use crate::clifford::small::pauli_matrix;
        let kinds = [GateKind::I, GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y, GateKind::Z, GateKind::CX, GateKind::CZ, GateKind::Swap];
        for k in kinds {
            let g = Gate::new(k.clone(), if named_index(&k).unwrap().0 == 1 { vec![0] } else { vec![0, 1] });
            let n = g.qubits.len();
            let m = g.matrix().unwrap();
            for idx in 1..(1u64 << (2 * n)) {
                let p = PauliString::from_index(n, idx);
                let lhs = &m * pauli_matrix(&p) * m.adjoint();
                let rhs = pauli_matrix(&g.tableau().unwrap().conjugate(&p).unwrap());
                assert!((lhs - rhs).norm() < 1e-12, "{k:?} on {p}");
            }
        }
    }

    #[test]
    fn layer_disjointness_enforced() {
        let mut c = Circuit::new(4);
        assert!(c.push_layer(vec![Gate::two(GateKind::CX, 0, 1), Gate::two(GateKind::CZ, 1, 2)]).is_err());
        assert!(c.push_layer(vec![Gate::two(GateKind::CX, 0, 0)]).is_err());
        assert!(c.push_layer(vec![Gate::one(GateKind::H, 4)]).is_err());
        assert!(c.push_layer(vec![Gate::new(GateKind::Opaque { label: "ccx".into(), params: vec![] }, vec![0, 1, 2])]).is_err());
        c.push_layer(vec![Gate::two(GateKind::CX, 0, 1), Gate::two(GateKind::CZ, 2, 3)]).unwrap();
        assert_eq!((c.depth(), c.gate_count()), (1, 2));
    }

    #[test]
    fn asap_scheduling() {
        let c = Circuit::from_gates_asap(3, [Gate::two(GateKind::CX, 0, 1), Gate::one(GateKind::H, 2), Gate::two(GateKind::CX, 1, 2)]).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.layers()[0].len(), 2);
    }

    #[test]
    fn heisenberg_inverts_conjugation() {
        let c = Circuit::from_gates_asap(
            3,
            [Gate::one(GateKind::H, 0), Gate::two(GateKind::CX, 0, 1), Gate::one(GateKind::S, 1), Gate::two(GateKind::C2(1234), 1, 2)],
        )
        .unwrap();
        for k in 1..64u64 {
            let p = PauliString::from_index(3, k);
            assert_eq!(c.heisenberg(&c.conjugate(&p).unwrap()).unwrap(), p);
        }
        let t = c.tableau().unwrap();
        let p: PauliString = "XYZ".parse().unwrap();
        assert_eq!(t.conjugate(&p).unwrap(), c.conjugate(&p).unwrap());
        assert_eq!(c.inverse().unwrap().conjugate(&p).unwrap(), c.heisenberg(&p).unwrap());
    }

    #[test]
    fn lightcones() {
        let mut c = Circuit::new(4);
        assert_eq!(c.lightcone(&VertexSet::new([1])), VertexSet::new([1]));
        c.push_layer(vec![Gate::two(GateKind::CX, 0, 1), Gate::two(GateKind::CX, 2, 3)]).unwrap();
        c.push_layer(vec![Gate::two(GateKind::CX, 1, 2)]).unwrap();
        assert_eq!(c.lightcone(&VertexSet::new([0])), VertexSet::new([0, 1, 2]));
        assert_eq!(c.backward_lightcone(&VertexSet::new([0])), VertexSet::new([0, 1]));
    }

    #[test]
    fn json_round_trip() {
        let mut c = Circuit::new(3);
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        c.push_layer(vec![Gate::two(GateKind::C2(77), 0, 2), Gate::one(GateKind::Unitary(Box::new(m)), 1)]).unwrap();
        c.push_layer(vec![Gate::new(GateKind::Opaque { label: "pru".into(), params: vec![0.5] }, vec![0, 1])]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.starts_with(r#"{"n":3,"layers":[[{"g":"c2","q":[0,2],"p":[77.0]}"#));
        let back: Circuit = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"n":2,"layers":[[{"g":"cx","q":[0,1]},{"g":"h","q":[1]}]]}"#;
        assert!(serde_json::from_str::<Circuit>(bad).is_err());
    }
}
