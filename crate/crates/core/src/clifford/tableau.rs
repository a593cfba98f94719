use rand::Rng;

use super::pauli::{Letter, PauliString};
use crate::error::{Error, Result};

/// Clifford unitary `U` stored by its conjugation action: the signed images
/// `U X_j U†` and `U Z_j U†` of the single-qubit generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    xs: Vec<PauliString>,
    zs: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            xs: (0..n).map(|j| PauliString::single(n, j, Letter::X)).collect(),
            zs: (0..n).map(|j| PauliString::single(n, j, Letter::Z)).collect(),
        }
    }

    /// Tableau from generator images; fails unless the images are Hermitian
    /// and satisfy the symplectic (commutation) conditions.
    pub fn from_images(xs: Vec<PauliString>, zs: Vec<PauliString>) -> Result<Self> {
        let n = xs.len();
        if zs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: zs.len() });
        }
        for p in xs.iter().chain(&zs) {
            if p.num_qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: p.num_qubits() });
            }
            if p.sign().is_none() {
                return Err(Error::InvalidArgument(format!("image {p} is not Hermitian")));
            }
        }
        let t = Self { n, xs, zs };
        if !t.is_symplectic() {
            return Err(Error::InvalidArgument("images violate the symplectic condition".into()));
        }
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, j: usize) -> &PauliString {
        &self.xs[j]
    }

    pub fn z_image(&self, j: usize) -> &PauliString {
        &self.zs[j]
    }

    /// `M Ω Mᵀ = Ω` over GF(2), checked pairwise on the rows.
    pub fn is_symplectic(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if self.xs[i].anticommutes(&self.xs[j]) || self.zs[i].anticommutes(&self.zs[j]) {
                    return false;
                }
                if self.xs[i].anticommutes(&self.zs[j]) != (i == j) {
                    return false;
                }
            }
        }
        true
    }

    /// The 2n×2n binary matrix: row `j` is the image of `X_j`, row `n+j` of `Z_j`,
    /// columns are `[x_0..x_{n-1} | z_0..z_{n-1}]`.
    pub fn symplectic_matrix(&self) -> Vec<Vec<bool>> {
        self.xs
            .iter()
            .chain(&self.zs)
            .map(|p| (0..self.n).map(|q| p.x_bit(q)).chain((0..self.n).map(|q| p.z_bit(q))).collect())
            .collect()
    }

    /// Row phases (`true` = negative sign), same row order as [`Self::symplectic_matrix`].
    pub fn phases(&self) -> Vec<bool> {
        self.xs.iter().chain(&self.zs).map(|p| p.phase() == 2).collect()
    }

    /// `U P U†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: p.num_qubits() });
        }
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity(self.n);
        // σ(1,1) = Y = i·X·Z
        let mut extra = p.phase() as u32;
        for j in 0..self.n {
            let (xb, zb) = (p.x_bit(j), p.z_bit(j));
            if xb {
                out.mul_assign_right(&self.xs[j]);
            }
            if zb {
                out.mul_assign_right(&self.zs[j]);
            }
            if xb && zb {
                extra += 1;
            }
        }
        out.set_phase(((out.phase() as u32 + extra) % 4) as u8);
        out
    }

    /// Composition `t1 ∘ t2`: conjugating by the result equals conjugating
    /// by `t2` first, then by `t1`.
    pub fn compose(t1: &Self, t2: &Self) -> Result<Self> {
        if t1.n != t2.n {
            return Err(Error::DimensionMismatch { expected: t1.n, actual: t2.n });
        }
        Ok(Self {
            n: t1.n,
            xs: t2.xs.iter().map(|p| t1.conjugate_unchecked(p)).collect(),
            zs: t2.zs.iter().map(|p| t1.conjugate_unchecked(p)).collect(),
        })
    }

    /// Apply a Clifford acting on `sites` after this one: `self ← g ∘ self`.
    pub fn left_apply(&mut self, g: &CliffordTableau, sites: &[usize]) {
        for row in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            conjugate_on_sites(g, sites, row);
        }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        let build = |from_x: bool, j: usize| {
            // rows of Ω Mᵀ Ω: for X_j read the z_j column, for Z_j the x_j column
            let mut r = PauliString::identity(n);
            for i in 0..n {
                let (a, b) = if from_x {
                    (self.zs[i].z_bit(j), self.xs[i].z_bit(j))
                } else {
                    (self.zs[i].x_bit(j), self.xs[i].x_bit(j))
                };
                r.set_letter(i, Letter::from_bits(a, b));
            }
            let img = self.conjugate_unchecked(&r);
            if img.phase() == 2 {
                r.negate();
            }
            debug_assert!(img.phase() % 2 == 0);
            r
        };
        Self { n, xs: (0..n).map(|j| build(true, j)).collect(), zs: (0..n).map(|j| build(false, j)).collect() }
    }

    /// Acts as `self` on `sites` (local qubit `i` ↦ `sites[i]`), identity elsewhere.
    pub fn embed(&self, sites: &[usize], n_total: usize) -> Result<Self> {
        if sites.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: sites.len() });
        }
        check_sites(sites, n_total)?;
        let mut out = Self::identity(n_total);
        out.left_apply(self, sites);
        Ok(out)
    }

    /// `|tr U|²`, via `|tr U|² = 2⁻ⁿ Σ_P tr(U P U† P)` over all `4ⁿ` Paulis.
    pub fn trace_norm_sq(&self) -> Result<f64> {
        if self.n > 10 {
            return Err(Error::UnsupportedSize(format!("trace by enumeration needs n <= 10, got {}", self.n)));
        }
        let mut acc: i64 = 0;
        for k in 0..(1u64 << (2 * self.n)) {
            let p = PauliString::from_index(self.n, k);
            let img = self.conjugate_unchecked(&p);
            if img.unsigned_eq(&p) {
                acc += if img.phase() == 0 { 1 } else { -1 };
            }
        }
        Ok(acc as f64)
    }

    /// Uniform sample from the `n`-qubit Clifford group (modulo global phase).
    ///
    /// Generator images are drawn as successive uniformly random hyperbolic
    /// pairs `(a_j, b_j)`, each in the symplectic complement of the earlier
    /// pairs; the sign of every image is an independent fair bit. Each stage
    /// is uniform over its admissible choices and the choices are in
    /// bijection with the group, so the result is exactly uniform.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("Clifford sampling needs n >= 1".into()));
        }
        let w = n.div_ceil(64);
        let mut xs: Vec<PauliString> = Vec::with_capacity(n);
        let mut zs: Vec<PauliString> = Vec::with_capacity(n);
        let draw = |xs: &[PauliString], zs: &[PauliString], rng: &mut R| {
            let mut v = PauliString::from_bits(n, (0..w).map(|_| rng.gen()).collect(), (0..w).map(|_| rng.gen()).collect());
            project_out(&mut v, xs, zs);
            v
        };
        for _ in 0..n {
            let a = loop {
                let v = draw(&xs, &zs, rng);
                if !v.is_identity() {
                    break v;
                }
            };
            let b = loop {
                let v = draw(&xs, &zs, rng);
                if v.anticommutes(&a) {
                    break v;
                }
            };
            xs.push(a);
            zs.push(b);
        }
        for p in xs.iter_mut().chain(zs.iter_mut()) {
            p.set_phase(0);
            if rng.gen::<bool>() {
                p.negate();
            }
        }
        Ok(Self { n, xs, zs })
    }
}

/// `v ← v + Σ_k (⟨v,b_k⟩ a_k + ⟨v,a_k⟩ b_k)`, the projection onto the
/// symplectic complement of the hyperbolic pairs `(a_k, b_k)`.
fn project_out(v: &mut PauliString, xs: &[PauliString], zs: &[PauliString]) {
    for (a, b) in xs.iter().zip(zs) {
        let vb = v.anticommutes(b);
        let va = v.anticommutes(a);
        if vb {
            v.mul_assign_right(a);
        }
        if va {
            v.mul_assign_right(b);
        }
    }
    v.set_phase(0);
}

pub(crate) fn check_sites(sites: &[usize], n_total: usize) -> Result<()> {
    let mut seen = vec![false; n_total];
    for &s in sites {
        if s >= n_total {
            return Err(Error::InvalidArgument(format!("site {s} out of range for {n_total} qubits")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidArgument(format!("site {s} repeated")));
        }
    }
    Ok(())
}

/// `p ← g p g†` where `g` acts on `sites` of `p`.
pub(crate) fn conjugate_on_sites(g: &CliffordTableau, sites: &[usize], p: &mut PauliString) {
    if sites.iter().all(|&s| p.letter(s) == Letter::I) {
        return;
    }
    let sub = p.restrict(sites);
    let img = g.conjugate_unchecked(&sub);
    p.splice(sites, &img);
}
