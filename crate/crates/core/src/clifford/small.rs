//! Explicit enumerations of the one- and two-qubit Clifford groups (modulo
//! global phase), with a unitary matrix for every element.
//!
//! Elements are indexed in breadth-first order from the identity over the
//! generators `{H, S}` (one qubit) and `{H⊗I, I⊗H, S⊗I, I⊗S, CX}` (two
//! qubits), so indices are stable across runs and serialisable in circuits.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::pauli::PauliString;
use super::tableau::CliffordTableau;

pub struct SmallCliffordGroup {
    n: usize,
    elements: Vec<CliffordTableau>,
    matrices: Vec<DMatrix<C64>>,
    index: HashMap<u32, usize>,
    sign_free: Vec<usize>,
}

impl SmallCliffordGroup {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn tableau(&self, i: usize) -> &CliffordTableau {
        &self.elements[i]
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<C64> {
        &self.matrices[i]
    }

    pub fn index_of(&self, t: &CliffordTableau) -> Option<usize> {
        if t.num_qubits() != self.n {
            return None;
        }
        self.index.get(&pack(t)).copied()
    }

    /// One element per symplectic class: those whose images all carry sign `+`.
    pub fn sign_free(&self) -> &[usize] {
        &self.sign_free
    }

    /// First sign-free element (in index order) satisfying `pred`.
    pub fn find_sign_free(&self, pred: impl Fn(&CliffordTableau) -> bool) -> Option<usize> {
        self.sign_free.iter().copied().find(|&i| pred(&self.elements[i]))
    }

    /// Index of the element equal to the Pauli operator `p` (as a unitary).
    pub fn pauli_index(&self, p: &PauliString) -> usize {
        let mut t = CliffordTableau::identity(self.n);
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for j in 0..self.n {
            let mut x = t.x_image(j).clone();
            let mut z = t.z_image(j).clone();
            if x.anticommutes(p) {
                x.negate();
            }
            if z.anticommutes(p) {
                z.negate();
            }
            xs.push(x);
            zs.push(z);
        }
        t = CliffordTableau::from_images(xs, zs).expect("Pauli conjugation is symplectic");
        self.index_of(&t).expect("group contains all Paulis")
    }
}

fn pack(t: &CliffordTableau) -> u32 {
    let n = t.num_qubits();
    let mut key = 0u32;
    for j in 0..n {
        for p in [t.x_image(j), t.z_image(j)] {
            key = (key << 2 * n as u32) | (p.index() as u32);
            key = (key << 1) | (p.phase() == 2) as u32;
        }
    }
    key
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn hadamard_matrix() -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub(crate) fn phase_matrix() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

pub(crate) fn cx_matrix() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

pub(crate) fn hadamard_tableau() -> CliffordTableau {
    CliffordTableau::from_images(vec!["Z".parse().unwrap()], vec!["X".parse().unwrap()]).unwrap()
}

pub(crate) fn phase_tableau() -> CliffordTableau {
    CliffordTableau::from_images(vec!["Y".parse().unwrap()], vec!["Z".parse().unwrap()]).unwrap()
}

pub(crate) fn cx_tableau() -> CliffordTableau {
    let p = |s: &str| s.parse::<PauliString>().unwrap();
    CliffordTableau::from_images(vec![p("XX"), p("IX")], vec![p("ZI"), p("ZZ")]).unwrap()
}

fn build(n: usize, generators: Vec<(CliffordTableau, DMatrix<C64>)>) -> SmallCliffordGroup {
    let dim = 1 << n;
    let mut elements = vec![CliffordTableau::identity(n)];
    let mut matrices = vec![DMatrix::<C64>::identity(dim, dim)];
    let mut index = HashMap::new();
    index.insert(pack(&elements[0]), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (gt, gm) in &generators {
            let t = CliffordTableau::compose(gt, &elements[i]).unwrap();
            let key = pack(&t);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
                e.insert(elements.len());
                matrices.push(gm * &matrices[i]);
                elements.push(t);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    let sign_free = (0..elements.len()).filter(|&i| elements[i].phases().iter().all(|s| !s)).collect();
    SmallCliffordGroup { n, elements, matrices, index, sign_free }
}

pub fn one_qubit() -> &'static SmallCliffordGroup {
    static G: OnceLock<SmallCliffordGroup> = OnceLock::new();
    G.get_or_init(|| build(1, vec![(hadamard_tableau(), hadamard_matrix()), (phase_tableau(), phase_matrix())]))
}

pub fn two_qubit() -> &'static SmallCliffordGroup {
    static G: OnceLock<SmallCliffordGroup> = OnceLock::new();
    G.get_or_init(|| {
        let id = DMatrix::<C64>::identity(2, 2);
        let h = hadamard_matrix();
        let s = phase_matrix();
        let gens = vec![
            (hadamard_tableau().embed(&[0], 2).unwrap(), h.kronecker(&id)),
            (hadamard_tableau().embed(&[1], 2).unwrap(), id.kronecker(&h)),
            (phase_tableau().embed(&[0], 2).unwrap(), s.kronecker(&id)),
            (phase_tableau().embed(&[1], 2).unwrap(), id.kronecker(&s)),
            (cx_tableau(), cx_matrix()),
        ];
        build(2, gens)
    })
}

/// Dense matrix of a Pauli string (qubit 0 most significant).
#[cfg(test)]
pub(crate) fn pauli_matrix(p: &PauliString) -> DMatrix<C64> {
    let x = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let y = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let i2 = DMatrix::<C64>::identity(2, 2);
    let mut m = DMatrix::<C64>::identity(1, 1);
    for q in 0..p.num_qubits() {
        let l = match p.letter(q) {
            super::Letter::I => &i2,
            super::Letter::X => &x,
            super::Letter::Y => &y,
            super::Letter::Z => &z,
        };
        m = m.kronecker(l);
    }
    let ph = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase() as usize];
    m * ph
}
