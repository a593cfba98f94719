//! Cartesian-product Pauli-mixing ensembles and their distance to uniform
//! Pauli mixing.
//!
//! An ensemble is a list of layers. Each layer applies independent draws of
//! a sub-ensemble to every copy of a sub-product (a set of factor axes); the
//! copies tile the graph. The distribution of `U Q U†` over `P*_n` is
//! computed exactly when every non-trivial layer is the uniform Clifford
//! ensemble, and estimated by sampling otherwise.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::clifford::small::two_qubit;
use crate::clifford::tableau::conjugate_on_sites;
use crate::clifford::{line_clifford_depth, synthesize_line, CliffordTableau, Letter, PauliString};
use crate::error::{Error, Result};
use crate::graphs::{grid, ConnectivityGraph, Factor};
use crate::rng::SeedStream;

/// Largest system for the exact support-pattern oracle.
pub const EXACT_MAX_QUBITS: usize = 12;
/// Largest system for exhaustive worst-case search over all `Q`.
pub const EXHAUSTIVE_MAX_QUBITS: usize = 4;
/// Failure probability behind the Monte Carlo allowances.
pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind {
    /// Uniform Clifford on each copy (an exact 2-design).
    ExactClifford,
    /// `depth` layers of uniformly random 2-qubit Cliffords in a brickwork pattern.
    Brickwork { depth: usize },
    Identity,
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::ExactClifford => "exact_clifford",
            LayerKind::Brickwork { .. } => "brickwork",
            LayerKind::Identity => "identity",
        }
    }

    fn is_exact_or_trivial(&self) -> bool {
        !matches!(self, LayerKind::Brickwork { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleLayer {
    /// Factor axes the sub-ensemble acts on; copies range over the others.
    pub axes: Vec<usize>,
    pub kind: LayerKind,
    pub copies: usize,
}

/// Row/column sizes and sub-ensemble errors of a two-factor product, kept for the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductMeta {
    pub n_r: usize,
    pub n_c: usize,
    pub eps_r: f64,
    pub eps_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    graph: ConnectivityGraph,
    layers: Vec<EnsembleLayer>,
    copy_sites: Vec<Vec<Vec<usize>>>,
    product: Option<ProductMeta>,
}

/// Sub-ensemble on one factor of a product.
#[derive(Debug, Clone)]
pub enum SubEnsemble {
    Kind(LayerKind),
    /// A full ensemble on the factor graph; its layers are re-indexed into the product.
    Spec(EnsembleSpec),
}

impl SubEnsemble {
    fn error(&self) -> f64 {
        match self {
            SubEnsemble::Kind(LayerKind::ExactClifford) => 0.0,
            SubEnsemble::Kind(_) => 1.0,
            SubEnsemble::Spec(s) => s.declared_error(),
        }
    }
}

impl EnsembleSpec {
    pub fn new(graph: ConnectivityGraph, layers: Vec<(Vec<usize>, LayerKind)>) -> Result<Self> {
        let mut out = Vec::with_capacity(layers.len());
        let mut copy_sites = Vec::with_capacity(layers.len());
        for (axes, kind) in layers {
            if axes.is_empty() {
                return Err(Error::InvalidArgument("layer with no axes".into()));
            }
            let copies = graph.copies(&axes)?;
            if let LayerKind::Brickwork { .. } = kind {
                let factors = graph.factor_list();
                if let Some(&a) = axes.iter().find(|&&a| !factors[a].is_line()) {
                    return Err(Error::FactorMismatch(format!("brickwork needs line factors, axis {a} is a general graph")));
                }
            }
            out.push(EnsembleLayer { axes, kind, copies: copies.len() });
            copy_sites.push(copies);
        }
        Ok(Self { graph, layers: out, copy_sites, product: None })
    }

    /// Single layer acting on the whole system.
    pub fn global(graph: ConnectivityGraph, kind: LayerKind) -> Result<Self> {
        let axes = (0..graph.num_axes()).collect();
        Self::new(graph, vec![(axes, kind)])
    }

    pub fn graph(&self) -> &ConnectivityGraph {
        &self.graph
    }

    pub fn layers(&self) -> &[EnsembleLayer] {
        &self.layers
    }

    pub fn num_qubits(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn product_meta(&self) -> Option<ProductMeta> {
        self.product
    }

    /// Sites of every copy in layer `i`, each in snake order.
    pub fn copy_sites(&self, i: usize) -> &[Vec<usize>] {
        &self.copy_sites[i]
    }

    pub fn layer_depth(&self, i: usize) -> usize {
        let l = &self.layers[i];
        match l.kind {
            LayerKind::ExactClifford => self.copy_sites[i].iter().map(|c| line_clifford_depth(c.len())).max().unwrap_or(0),
            LayerKind::Brickwork { depth } => depth,
            LayerKind::Identity => 0,
        }
    }

    /// Depth of every sampled circuit.
    pub fn declared_depth(&self) -> usize {
        (0..self.layers.len()).map(|i| self.layer_depth(i)).sum()
    }

    /// Whether the exact support-pattern oracle applies.
    pub fn is_exact(&self) -> bool {
        self.layers.iter().all(|l| l.kind.is_exact_or_trivial())
    }

    /// Mixing error known for the ensemble by construction: 0 when some layer
    /// is a global exact Clifford, the product bound when built as a product, else 1.
    pub fn declared_error(&self) -> f64 {
        let n = self.num_qubits();
        if self.layers.iter().zip(&self.copy_sites).any(|(l, c)| l.kind == LayerKind::ExactClifford && c.len() == 1 && c[0].len() == n) {
            return 0.0;
        }
        match self.product {
            Some(m) if m.eps_c <= 0.25 => {
                mixing_bound_simplified(&MixingBoundParams::new(m.n_r, m.n_c, m.eps_r, m.eps_c)).unwrap_or(1.0).min(1.0)
            }
            _ => 1.0,
        }
    }

    fn draw_layer<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> LayerDraw {
        let layer = &self.layers[i];
        match layer.kind {
            LayerKind::Identity => LayerDraw::Identity,
            LayerKind::ExactClifford => LayerDraw::Exact(
                self.copy_sites[i]
                    .iter()
                    .map(|sites| (sites.clone(), CliffordTableau::sample_uniform(sites.len(), rng).expect("copy is nonempty")))
                    .collect(),
            ),
            LayerKind::Brickwork { depth } => {
                let g2 = two_qubit().len();
                let mut layers = Vec::with_capacity(depth);
                for t in 0..depth {
                    let axis = layer.axes[t % layer.axes.len()];
                    let parity = (t / layer.axes.len()) % 2;
                    let pairs = self.graph.axis_matching(axis, parity).expect("validated at construction");
                    layers.push(pairs.into_iter().map(|(u, v)| Gate::two(GateKind::C2(rng.gen_range(0..g2) as u16), u, v)).collect());
                }
                LayerDraw::Gates(layers)
            }
        }
    }

    /// One sampled circuit; sampling order matches [`propagate`], so equal
    /// streams give the same unitary.
    pub fn sample_circuit<R: Rng + ?Sized>(&self, rng: &mut R) -> Circuit {
        let n = self.num_qubits();
        let mut c = Circuit::new(n);
        for i in 0..self.layers.len() {
            let start = c.depth();
            match self.draw_layer(i, rng) {
                LayerDraw::Identity => {}
                LayerDraw::Exact(blocks) => {
                    let d = self.layer_depth(i);
                    for (sites, t) in blocks {
                        let local = synthesize_line(&t);
                        c.overlay(&local.embed(&sites, n).expect("copy sites are distinct"), start).expect("copies are disjoint");
                    }
                    while c.depth() < start + d {
                        c.push_layer(Vec::new()).unwrap();
                    }
                }
                LayerDraw::Gates(layers) => {
                    for l in layers {
                        c.push_layer(l).expect("matching is disjoint");
                    }
                }
            }
        }
        c
    }
}

enum LayerDraw {
    Identity,
    Exact(Vec<(Vec<usize>, CliffordTableau)>),
    Gates(Vec<Vec<Gate>>),
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    axis: Vec<usize>,
    kind: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    copies: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    graph: ConnectivityGraph,
    layers: Vec<LayerJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product: Option<ProductMeta>,
}

impl Serialize for EnsembleSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut params = BTreeMap::new();
                if let LayerKind::Brickwork { depth } = l.kind {
                    params.insert("depth".to_string(), depth as f64);
                }
                LayerJson { axis: l.axes.clone(), kind: l.kind.name().to_string(), params, copies: l.copies }
            })
            .collect();
        SpecJson { graph: self.graph.clone(), layers, product: self.product }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnsembleSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SpecJson::deserialize(d)?;
        let mut layers = Vec::new();
        let mut declared = Vec::new();
        for l in j.layers {
            let kind = match l.kind.as_str() {
                "exact_clifford" => LayerKind::ExactClifford,
                "identity" => LayerKind::Identity,
                "brickwork" => {
                    let depth = *l.params.get("depth").ok_or_else(|| D::Error::custom("brickwork layer needs params.depth"))?;
                    if depth < 0.0 || depth.fract() != 0.0 {
                        return Err(D::Error::custom(format!("brickwork depth {depth} is not a count")));
                    }
                    LayerKind::Brickwork { depth: depth as usize }
                }
                other => return Err(D::Error::custom(format!("unknown layer kind {other}"))),
            };
            declared.push(l.copies);
            layers.push((l.axis, kind));
        }
        let mut spec = EnsembleSpec::new(j.graph, layers).map_err(D::Error::custom)?;
        for (i, (l, c)) in spec.layers.iter().zip(declared).enumerate() {
            if l.copies != c {
                return Err(D::Error::custom(format!("layer {i}: {c} copies declared, {} tile the graph", l.copies)));
            }
        }
        spec.product = j.product;
        Ok(spec)
    }
}

/// Three-layer product ensemble on `g_r × g_c`: rows, then columns, then rows.
/// Rows are the copies of `g_r` (first factor axes).
pub fn build_product_ensemble(g_r: &ConnectivityGraph, g_c: &ConnectivityGraph, sub_r: SubEnsemble, sub_c: SubEnsemble) -> Result<EnsembleSpec> {
    for (name, g, sub) in [("row", g_r, &sub_r), ("column", g_c, &sub_c)] {
        if let SubEnsemble::Spec(s) = sub {
            if s.graph.num_vertices() != g.num_vertices() || s.graph.factor_sizes() != g.factor_sizes() {
                return Err(Error::FactorMismatch(format!("{name} sub-ensemble graph does not match the {name} factor")));
            }
        }
    }
    let factors: Vec<Factor> = g_r.factor_list().into_iter().chain(g_c.factor_list()).collect();
    let graph = ConnectivityGraph::from_factors(factors)?;
    let ar = g_r.num_axes();
    let ac = g_c.num_axes();
    let rows: Vec<usize> = (0..ar).collect();
    let cols: Vec<usize> = (ar..ar + ac).collect();
    let expand = |sub: &SubEnsemble, axes: &[usize]| -> Vec<(Vec<usize>, LayerKind)> {
        match sub {
            SubEnsemble::Kind(k) => vec![(axes.to_vec(), k.clone())],
            SubEnsemble::Spec(s) => s.layers.iter().map(|l| (l.axes.iter().map(|&a| axes[a]).collect(), l.kind.clone())).collect(),
        }
    };
    let mut layers = expand(&sub_r, &rows);
    layers.extend(expand(&sub_c, &cols));
    layers.extend(expand(&sub_r, &rows));
    let mut spec = EnsembleSpec::new(graph, layers)?;
    spec.product = Some(ProductMeta { n_r: g_r.num_vertices(), n_c: g_c.num_vertices(), eps_r: sub_r.error(), eps_c: sub_c.error() });
    Ok(spec)
}

/// Iterated product on `grid(D, side)`: each added line is the row factor
/// wrapped around the previous grid, which acts as the column factor.
pub fn grid_mixing_ensemble(dims: usize, side: usize) -> Result<EnsembleSpec> {
    if side < 2 {
        return Err(Error::InvalidSize(format!("grid mixing needs side >= 2, got {side}")));
    }
    if dims == 0 {
        return Err(Error::InvalidSize("grid mixing needs D >= 1".into()));
    }
    let g = grid(dims, side)?;
    // axis order: [D-1, …, 1, 0, 1, …, D-1]
    let mut axes: Vec<usize> = vec![0];
    for a in 1..dims {
        let mut next = vec![a];
        next.extend(axes.iter().copied());
        next.push(a);
        axes = next;
    }
    let mut spec = EnsembleSpec::new(g, axes.into_iter().map(|a| (vec![a], LayerKind::ExactClifford)).collect())?;
    if dims > 1 {
        let n_c = side.pow(dims as u32 - 1);
        let eps_c = grid_mixing_error(dims - 1, n_c);
        spec.product = Some(ProductMeta { n_r: side, n_c, eps_r: 0.0, eps_c });
    }
    Ok(spec)
}

/// `2(n+1) e^{−n^{1/D} ln2 / 3}`; zero for `D = 1` (a single exact Clifford).
pub fn grid_mixing_error(dims: usize, n: usize) -> f64 {
    if dims <= 1 {
        return 0.0;
    }
    let side = (n as f64).powf(1.0 / dims as f64);
    2.0 * (n as f64 + 1.0) * (-side * std::f64::consts::LN_2 / 3.0).exp()
}

/// `U Q U†` for one sampled `U`.
pub fn propagate<R: Rng + ?Sized>(spec: &EnsembleSpec, q: &PauliString, rng: &mut R) -> Result<PauliString> {
    if q.num_qubits() != spec.num_qubits() {
        return Err(Error::DimensionMismatch { expected: spec.num_qubits(), actual: q.num_qubits() });
    }
    if q.is_identity() {
        return Err(Error::InvalidArgument("propagation needs a non-identity Pauli".into()));
    }
    let mut p = q.clone();
    for i in 0..spec.layers.len() {
        match spec.draw_layer(i, rng) {
            LayerDraw::Identity => {}
            LayerDraw::Exact(blocks) => {
                for (sites, t) in blocks {
                    conjugate_on_sites(&t, &sites, &mut p);
                }
            }
            LayerDraw::Gates(layers) => {
                for g in layers.iter().flatten() {
                    conjugate_on_sites(g.tableau().expect("brickwork gates are Clifford"), &g.qubits, &mut p);
                }
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "count")]
pub enum Mode {
    Exact,
    Samples(usize),
}

/// Distribution of `U Q U†` over the unsigned Paulis `P*_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum PauliDistribution {
    /// All mass on one Pauli.
    Point(PauliString),
    /// Exact law that is uniform within each support pattern; entry `S`
    /// (bit `q` set iff qubit `q` is in the support) is the pattern's mass.
    Patterns { n: usize, probs: Vec<f64> },
    /// Empirical law keyed by Pauli index.
    Samples { n: usize, counts: BTreeMap<u64, u64>, total: u64 },
}

impl PauliDistribution {
    pub fn num_qubits(&self) -> usize {
        match self {
            PauliDistribution::Point(p) => p.num_qubits(),
            PauliDistribution::Patterns { n, .. } | PauliDistribution::Samples { n, .. } => *n,
        }
    }

    pub fn num_samples(&self) -> Option<u64> {
        match self {
            PauliDistribution::Samples { total, .. } => Some(*total),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, PauliDistribution::Samples { .. })
    }

    pub fn probability(&self, p: &PauliString) -> f64 {
        if p.is_identity() {
            return 0.0;
        }
        match self {
            PauliDistribution::Point(q) => (q.unsigned_eq(p)) as u8 as f64,
            PauliDistribution::Patterns { probs, .. } => probs[pattern_mask(p) as usize] / 3f64.powi(p.weight() as i32),
            PauliDistribution::Samples { counts, total, .. } => *counts.get(&p.index()).unwrap_or(&0) as f64 / *total as f64,
        }
    }

    /// Mass of every support pattern, `2^n` entries (entry 0 is always 0).
    pub fn pattern_marginal(&self) -> Vec<f64> {
        let n = self.num_qubits();
        let mut out = vec![0.0; 1usize << n];
        match self {
            PauliDistribution::Point(q) => out[pattern_mask(q) as usize] = 1.0,
            PauliDistribution::Patterns { probs, .. } => out.copy_from_slice(probs),
            PauliDistribution::Samples { counts, total, .. } => {
                for (&k, &c) in counts {
                    out[index_pattern(n, k) as usize] += c as f64 / *total as f64;
                }
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.pattern_marginal().iter().sum()
    }
}

/// Support mask of `p`, bit `q` for qubit `q`.
pub fn pattern_mask(p: &PauliString) -> u64 {
    p.support().mask()
}

fn index_pattern(n: usize, k: u64) -> u64 {
    let mut s = 0u64;
    for q in 0..n {
        if (k >> (2 * (n - 1 - q))) & 3 != 0 {
            s |= 1 << q;
        }
    }
    s
}

/// Pattern marginal of the uniform law on `P*_n`: `3^{|S|} / (4^n − 1)`.
pub fn uniform_pattern_law(n: usize) -> Vec<f64> {
    let denom = 4f64.powi(n as i32) - 1.0;
    (0..1u64 << n).map(|s| if s == 0 { 0.0 } else { 3f64.powi(s.count_ones() as i32) / denom }).collect()
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `½√(K/N) + √(ln(1/δ) / 2N)`: with probability at least `1 − δ` the TV
/// between an `N`-sample empirical law on `K` cells and the true law is below
/// this (mean bound by Cauchy–Schwarz, deviation by McDiarmid).
pub fn concentration_allowance(samples: u64, cells: u64, delta: f64) -> f64 {
    let n = samples as f64;
    0.5 * (cells as f64 / n).sqrt() + ((1.0 / delta).ln() / (2.0 * n)).sqrt()
}

/// Distribution of `U Q U†`.
pub fn mixing_distribution(spec: &EnsembleSpec, q: &PauliString, mode: Mode, seeds: &SeedStream) -> Result<PauliDistribution> {
    let n = spec.num_qubits();
    if q.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: q.num_qubits() });
    }
    if q.is_identity() {
        return Err(Error::InvalidArgument("mixing distribution needs a non-identity Q".into()));
    }
    match mode {
        Mode::Exact => exact_distribution(spec, q),
        Mode::Samples(count) => {
            if count == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            if n > 31 {
                return Err(Error::UnsupportedSize(format!("sampled distributions index Paulis with n <= 31, got {n}")));
            }
            let keys: Vec<u64> = (0..count as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seeds.substream(i);
                    propagate(spec, q, &mut rng).map(|p| p.index())
                })
                .collect::<Result<_>>()?;
            let mut counts = BTreeMap::new();
            for k in keys {
                *counts.entry(k).or_insert(0) += 1;
            }
            Ok(PauliDistribution::Samples { n, counts, total: count as u64 })
        }
    }
}

fn exact_distribution(spec: &EnsembleSpec, q: &PauliString) -> Result<PauliDistribution> {
    let n = spec.num_qubits();
    if !spec.is_exact() {
        return Err(Error::UnsupportedMode("exact mode needs every layer to be an exact Clifford or identity".into()));
    }
    if n > EXACT_MAX_QUBITS {
        return Err(Error::UnsupportedSize(format!("exact oracle supports n <= {EXACT_MAX_QUBITS}, got {n}")));
    }
    let mut probs: Option<Vec<f64>> = None;
    let start = pattern_mask(q) as usize;
    for (layer, copies) in spec.layers.iter().zip(&spec.copy_sites) {
        if layer.kind != LayerKind::ExactClifford {
            continue;
        }
        let mut cur = probs.take().unwrap_or_else(|| {
            let mut v = vec![0.0; 1 << n];
            v[start] = 1.0;
            v
        });
        for sites in copies {
            let mask: usize = sites.iter().map(|&s| 1usize << s).sum();
            let m = sites.len() as i32;
            let denom = 4f64.powi(m) - 1.0;
            let mut next = vec![0.0; 1 << n];
            for (s, &p) in cur.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                if s & mask == 0 {
                    next[s] += p;
                    continue;
                }
                let rest = s & !mask;
                let mut sub = mask;
                while sub != 0 {
                    next[rest | sub] += p * 3f64.powi(sub.count_ones() as i32) / denom;
                    sub = (sub - 1) & mask;
                }
            }
            cur = next;
        }
        probs = Some(cur);
    }
    Ok(match probs {
        None => PauliDistribution::Point(q.unsigned()),
        Some(probs) => {
            let total: f64 = probs.iter().sum();
            debug_assert!((total - 1.0).abs() < 1e-12, "mass {total}");
            PauliDistribution::Patterns { n, probs }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvBasis {
    /// Over the individual Paulis of `P*_n`.
    Pauli,
    /// Over support patterns only (a lower bound on the Pauli-level TV).
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub tv: f64,
    /// Zero in exact mode; in sample mode, a `1 − δ` upper bound on `|tv − true tv|`.
    pub allowance: f64,
    pub basis: TvBasis,
}

/// Largest `4^n − 1` for which sampled TV is taken over individual Paulis.
pub const EXPLICIT_MAX_CELLS: u64 = 1 << 20;

/// TV distance to the uniform law on `P*_n`.
pub fn tv_to_uniform(d: &PauliDistribution) -> TvEstimate {
    let n = d.num_qubits();
    let cells = 4f64.powi(n as i32) - 1.0;
    match d {
        PauliDistribution::Point(_) => TvEstimate { tv: 1.0 - 1.0 / cells, allowance: 0.0, basis: TvBasis::Pauli },
        PauliDistribution::Patterns { probs, .. } => {
            // uniform within patterns, so the Pauli-level TV equals the pattern-level one
            TvEstimate { tv: tv_distance(probs, &uniform_pattern_law(n)), allowance: 0.0, basis: TvBasis::Pauli }
        }
        PauliDistribution::Samples { counts, total, .. } => {
            let nn = *total as f64;
            if (cells as u64) <= EXPLICIT_MAX_CELLS {
                let u = 1.0 / cells;
                let seen: f64 = counts.values().map(|&c| (c as f64 / nn - u).abs()).sum();
                let unseen = (cells - counts.len() as f64) * u;
                TvEstimate { tv: 0.5 * (seen + unseen), allowance: concentration_allowance(*total, cells as u64, DEFAULT_DELTA), basis: TvBasis::Pauli }
            } else {
                TvEstimate {
                    tv: tv_distance(&d.pattern_marginal(), &uniform_pattern_law(n)),
                    allowance: concentration_allowance(*total, (1u64 << n) - 1, DEFAULT_DELTA),
                    basis: TvBasis::Pattern,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingBoundParams {
    pub n_r: usize,
    pub n_c: usize,
    pub eps_r: f64,
    pub eps_c: f64,
    pub a: f64,
}

impl MixingBoundParams {
    /// Parameters with `a = 3`.
    pub fn new(n_r: usize, n_c: usize, eps_r: f64, eps_c: f64) -> Self {
        Self { n_r, n_c, eps_r, eps_c, a: 3.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 4.0 / 3.0) {
            return Err(Error::Domain(format!("a must exceed 4/3, got {}", self.a)));
        }
        for (name, e) in [("eps_r", self.eps_r), ("eps_c", self.eps_c)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {e}")));
            }
        }
        if self.n_r == 0 || self.n_c == 0 {
            return Err(Error::Domain("n_r and n_c must be positive".into()));
        }
        Ok(())
    }
}

/// `(n_C+1)ε_R + n_C(1/4 + ε_C)^{n_R/a} + (4/3)e^{−(9n_R/8)(1 − 4/(3a))²} + n_C/4^{n_R}`.
pub fn mixing_bound(p: &MixingBoundParams) -> Result<f64> {
    p.validate()?;
    let (nr, nc) = (p.n_r as f64, p.n_c as f64);
    Ok((nc + 1.0) * p.eps_r
        + nc * (0.25 + p.eps_c).powf(nr / p.a)
        + (4.0 / 3.0) * (-(9.0 * nr / 8.0) * (1.0 - 4.0 / (3.0 * p.a)).powi(2)).exp()
        + nc / 4f64.powf(nr))
}

/// `(n_C + 1)(ε_R + 2e^{−n_R ln2 / 3})`, valid for `ε_C ≤ 1/4` with `a = 3`.
pub fn mixing_bound_simplified(p: &MixingBoundParams) -> Result<f64> {
    p.validate()?;
    if p.eps_c > 0.25 {
        return Err(Error::Domain(format!("simplified bound needs eps_c <= 1/4, got {}", p.eps_c)));
    }
    if p.a != 3.0 {
        return Err(Error::Domain(format!("simplified bound fixes a = 3, got {}", p.a)));
    }
    // e^{−n ln2/3} = 2^{−n/3}, written so integer exponents evaluate exactly
    Ok((p.n_c as f64 + 1.0) * (p.eps_r + 2.0 * 2f64.powf(-(p.n_r as f64) / 3.0)))
}

/// A bound of at least 1 says nothing about a TV distance.
pub fn is_vacuous(bound: f64) -> bool {
    bound >= 1.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "strategy", content = "count")]
pub enum Strategy {
    /// Every `Q ∈ P*_n`.
    Exhaustive,
    /// Weight-one `Q` only (one per site in exact mode, one per site and letter otherwise).
    Weight1,
    /// `count` uniformly random `Q`.
    Sampled(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub strategy: Strategy,
    pub mode: Mode,
    pub tv: f64,
    pub allowance: f64,
    pub argmax: PauliString,
    pub evaluated: usize,
}

/// The `Q` set a strategy evaluates.
pub fn candidate_qs(spec: &EnsembleSpec, strategy: &Strategy, mode: Mode, seeds: &SeedStream) -> Result<Vec<PauliString>> {
    let n = spec.num_qubits();
    Ok(match strategy {
        Strategy::Exhaustive => {
            if n > EXHAUSTIVE_MAX_QUBITS {
                return Err(Error::UnsupportedSize(format!("exhaustive search supports n <= {EXHAUSTIVE_MAX_QUBITS}, got {n}")));
            }
            (1..1u64 << (2 * n)).map(|k| PauliString::from_index(n, k)).collect()
        }
        Strategy::Weight1 => {
            let letters: &[Letter] = if mode == Mode::Exact { &[Letter::Z] } else { &[Letter::X, Letter::Y, Letter::Z] };
            (0..n).flat_map(|q| letters.iter().map(move |&l| PauliString::single(n, q, l))).collect()
        }
        Strategy::Sampled(count) => {
            let mut rng = seeds.child(u64::MAX).substream(0);
            (0..*count).map(|_| PauliString::random_nonidentity(n, &mut rng)).collect::<Result<_>>()?
        }
    })
}

/// `max_Q TV(E(·, Q), uniform)` over the strategy's `Q` set.
pub fn worst_case_mixing_error(spec: &EnsembleSpec, strategy: Strategy, mode: Mode, seeds: &SeedStream) -> Result<WorstCase> {
    let qs = candidate_qs(spec, &strategy, mode, seeds)?;
    let mut best: Option<(TvEstimate, PauliString)> = None;
    for (i, q) in qs.iter().enumerate() {
        let d = mixing_distribution(spec, q, mode, &seeds.child(i as u64))?;
        let tv = tv_to_uniform(&d);
        if best.as_ref().is_none_or(|(b, _)| tv.tv > b.tv) {
            best = Some((tv, q.clone()));
        }
    }
    let (tv, argmax) = best.ok_or_else(|| Error::InvalidArgument("no Q to evaluate".into()))?;
    Ok(WorstCase { strategy, mode, tv: tv.tv, allowance: tv.allowance, argmax, evaluated: qs.len() })
}

/// Mixing measurement for one `Q`, with the product bounds when the spec carries them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub spec: EnsembleSpec,
    #[serde(rename = "Q")]
    pub q: PauliString,
    pub mode: Mode,
    pub tv: f64,
    pub allowance: f64,
    pub bound_general: Option<f64>,
    pub bound_simplified: Option<f64>,
    pub samples: Option<u64>,
    pub seed: u64,
}

impl MixingReport {
    /// Whether the measured TV respects every available bound within the allowance.
    pub fn within_bounds(&self) -> bool {
        [self.bound_general, self.bound_simplified].iter().flatten().all(|&b| self.tv - self.allowance <= b)
    }
}

pub fn product_bounds(spec: &EnsembleSpec) -> (Option<f64>, Option<f64>) {
    match spec.product {
        None => (None, None),
        Some(m) => {
            let p = MixingBoundParams::new(m.n_r, m.n_c, m.eps_r, m.eps_c);
            (mixing_bound(&p).ok(), mixing_bound_simplified(&p).ok())
        }
    }
}

pub fn mixing_report(spec: &EnsembleSpec, q: &PauliString, mode: Mode, seed: u64) -> Result<MixingReport> {
    let d = mixing_distribution(spec, q, mode, &SeedStream::new(seed))?;
    let tv = tv_to_uniform(&d);
    let (bound_general, bound_simplified) = product_bounds(spec);
    Ok(MixingReport {
        spec: spec.clone(),
        q: q.unsigned(),
        mode,
        tv: tv.tv,
        allowance: tv.allowance,
        bound_general,
        bound_simplified,
        samples: d.num_samples(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::line_graph;

    fn spec_2x2() -> EnsembleSpec {
        let l = line_graph(2).unwrap();
        build_product_ensemble(&l, &l, SubEnsemble::Kind(LayerKind::ExactClifford), SubEnsemble::Kind(LayerKind::ExactClifford)).unwrap()
    }

    #[test]
    fn product_shape_and_depth() {
        let s = spec_2x2();
        assert_eq!(s.layers().len(), 3);
        assert!(s.layers().iter().all(|l| l.copies == 2));
        let d = line_clifford_depth(2);
        assert_eq!(s.declared_depth(), 2 * d + d);
        let mut rng = SeedStream::new(0).substream(0);
        let c = s.sample_circuit(&mut rng);
        assert_eq!(c.depth(), s.declared_depth());
        c.check_graph(s.graph()).unwrap();

        let l3 = line_graph(3).unwrap();
        let s3 = build_product_ensemble(&l3, &l3, SubEnsemble::Kind(LayerKind::ExactClifford), SubEnsemble::Kind(LayerKind::ExactClifford)).unwrap();
        assert!(s3.layers().iter().all(|l| l.copies == 3));

        let single = line_graph(1).unwrap();
        let deg = build_product_ensemble(&l3, &single, SubEnsemble::Kind(LayerKind::ExactClifford), SubEnsemble::Kind(LayerKind::Identity)).unwrap();
        assert_eq!(deg.layers()[0].copies, 1);
        assert_eq!(deg.declared_depth(), 2 * line_clifford_depth(3));
    }

    #[test]
    fn propagate_matches_sampled_circuit() {
        let s = grid_mixing_ensemble(2, 3).unwrap();
        let q: PauliString = "IIIIZIIII".parse().unwrap();
        for i in 0..20 {
            let a = propagate(&s, &q, &mut SeedStream::new(4).substream(i)).unwrap();
            let c = s.sample_circuit(&mut SeedStream::new(4).substream(i));
            assert_eq!(c.conjugate(&q).unwrap(), a);
        }
    }

    #[test]
    fn identity_layers_leave_q_alone() {
        let l = line_graph(2).unwrap();
        let s = build_product_ensemble(&l, &l, SubEnsemble::Kind(LayerKind::Identity), SubEnsemble::Kind(LayerKind::Identity)).unwrap();
        let q: PauliString = "XIZY".parse().unwrap();
        assert_eq!(propagate(&s, &q, &mut SeedStream::new(1).substream(0)).unwrap(), q);
        let d = mixing_distribution(&s, &q, Mode::Exact, &SeedStream::new(1)).unwrap();
        assert!((tv_to_uniform(&d).tv - (1.0 - 1.0 / 255.0)).abs() < 1e-15);
        assert!(propagate(&s, &PauliString::identity(4), &mut SeedStream::new(1).substream(0)).is_err());
    }

    #[test]
    fn first_exact_layer_randomises_the_touched_row() {
        let l = line_graph(3).unwrap();
        let s = build_product_ensemble(&l, &l, SubEnsemble::Kind(LayerKind::ExactClifford), SubEnsemble::Kind(LayerKind::Identity)).unwrap();
        let one = EnsembleSpec::new(s.graph().clone(), vec![(vec![0], LayerKind::ExactClifford)]).unwrap();
        // Z on vertex 0 sits in the row copies(axis 0)[0] = {0, 3, 6}
        let q = PauliString::single(9, 0, Letter::Z);
        let row = &one.copy_sites(0)[0];
        assert_eq!(row, &vec![0, 3, 6]);
        let n = 40_000;
        let mut counts = vec![0usize; 64];
        let seeds = SeedStream::new(8);
        for i in 0..n {
            let p = propagate(&one, &q, &mut seeds.substream(i)).unwrap();
            counts[p.restrict(row).index() as usize] += 1;
            assert_eq!(p.restrict(&[1, 2, 4, 5, 7, 8]).weight(), 0);
        }
        let u = 1.0 / 63.0;
        let sigma = (u * (1.0 - u) / n as f64).sqrt();
        assert_eq!(counts[0], 0);
        let worst = counts[1..].iter().map(|&c| (c as f64 / n as f64 - u).abs() / sigma).fold(0.0, f64::max);
        // max of 63 roughly normal deviations
        assert!(worst < 4.0, "{worst}");
    }

    #[test]
    fn exact_full_clifford_is_uniform() {
        for n in 1..=4 {
            let s = EnsembleSpec::global(line_graph(n).unwrap(), LayerKind::ExactClifford).unwrap();
            let w = worst_case_mixing_error(&s, Strategy::Exhaustive, Mode::Exact, &SeedStream::new(0)).unwrap();
            assert_eq!(w.tv, 0.0);
            assert_eq!(w.evaluated, (1 << (2 * n)) - 1);
        }
    }

    #[test]
    fn point_mass_tv() {
        let d = PauliDistribution::Point("X".parse().unwrap());
        assert!((tv_to_uniform(&d).tv - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_pattern_oracle_on_2x2_by_brute_enumeration() {
        // independent oracle: push the full Pauli-level law through each layer
        // by averaging over every two-qubit Clifford
        let s = spec_2x2();
        let g2 = two_qubit();
        let q = PauliString::single(4, 1, Letter::Z);
        let mut law: BTreeMap<u64, f64> = BTreeMap::from([(q.index(), 1.0)]);
        for i in 0..3 {
            for sites in s.copy_sites(i) {
                let mut next = BTreeMap::new();
                for (&k, &p) in &law {
                    let pk = PauliString::from_index(4, k);
                    for e in 0..g2.len() {
                        let mut img = pk.clone();
                        conjugate_on_sites(g2.tableau(e), sites, &mut img);
                        *next.entry(img.unsigned().index()).or_insert(0.0) += p / g2.len() as f64;
                    }
                }
                law = next;
            }
        }
        let d = mixing_distribution(&s, &q, Mode::Exact, &SeedStream::new(0)).unwrap();
        for k in 1..256u64 {
            let p = PauliString::from_index(4, k);
            let a = law.get(&k).copied().unwrap_or(0.0);
            assert!((a - d.probability(&p)).abs() < 1e-12, "{p}: {a} vs {}", d.probability(&p));
        }
        let brute_tv = 0.5 * (1..256u64).map(|k| (law.get(&k).copied().unwrap_or(0.0) - 1.0 / 255.0).abs()).sum::<f64>();
        assert!((tv_to_uniform(&d).tv - brute_tv).abs() < 1e-12);
    }

    #[test]
    fn distribution_depends_on_support_only() {
        let s = grid_mixing_ensemble(2, 3).unwrap();
        let a = mixing_distribution(&s, &PauliString::single(9, 4, Letter::X), Mode::Exact, &SeedStream::new(0)).unwrap();
        let b = mixing_distribution(&s, &PauliString::single(9, 4, Letter::Y), Mode::Exact, &SeedStream::new(0)).unwrap();
        assert_eq!(a, b);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_permutation_symmetry() {
        let s = spec_2x2();
        // rows are {0,2} and {1,3}; swapping them maps qubit 0 ↔ 1, 2 ↔ 3
        let q: PauliString = "XIZI".parse().unwrap();
        let qp: PauliString = "IXIZ".parse().unwrap();
        let a = mixing_distribution(&s, &q, Mode::Exact, &SeedStream::new(0)).unwrap().pattern_marginal();
        let b = mixing_distribution(&s, &qp, Mode::Exact, &SeedStream::new(0)).unwrap().pattern_marginal();
        let swap = |m: usize| ((m & 0b0101) << 1) | ((m & 0b1010) >> 1);
        for m in 0..16 {
            assert!((a[m] - b[swap(m)]).abs() < 1e-15);
        }
    }

    #[test]
    fn final_global_layer_clears_error() {
        let base = grid_mixing_ensemble(2, 2).unwrap();
        let mut layers: Vec<(Vec<usize>, LayerKind)> = base.layers().iter().map(|l| (l.axes.clone(), l.kind.clone())).collect();
        layers.push((vec![0, 1], LayerKind::ExactClifford));
        let s = EnsembleSpec::new(base.graph().clone(), layers).unwrap();
        let w = worst_case_mixing_error(&s, Strategy::Exhaustive, Mode::Exact, &SeedStream::new(0)).unwrap();
        assert!(w.tv < 1e-15);
        let w0 = worst_case_mixing_error(&base, Strategy::Exhaustive, Mode::Exact, &SeedStream::new(0)).unwrap();
        assert!(w0.tv > 0.0);
    }

    #[test]
    fn weight1_never_exceeds_exhaustive() {
        let s = spec_2x2();
        let seeds = SeedStream::new(0);
        let ex = worst_case_mixing_error(&s, Strategy::Exhaustive, Mode::Exact, &seeds).unwrap();
        let w1 = worst_case_mixing_error(&s, Strategy::Weight1, Mode::Exact, &seeds).unwrap();
        assert!(w1.tv <= ex.tv + 1e-15);
        assert!(ex.tv <= mixing_bound(&MixingBoundParams::new(2, 2, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn exact_mode_rejects_brickwork() {
        let l = line_graph(2).unwrap();
        let s = build_product_ensemble(&l, &l, SubEnsemble::Kind(LayerKind::Brickwork { depth: 2 }), SubEnsemble::Kind(LayerKind::ExactClifford)).unwrap();
        let q = PauliString::single(4, 0, Letter::Z);
        assert!(matches!(mixing_distribution(&s, &q, Mode::Exact, &SeedStream::new(0)), Err(Error::UnsupportedMode(_))));
        let d = mixing_distribution(&s, &q, Mode::Samples(200), &SeedStream::new(0)).unwrap();
        assert_eq!(d.num_samples(), Some(200));
        assert!(worst_case_mixing_error(&grid_mixing_ensemble(2, 3).unwrap(), Strategy::Exhaustive, Mode::Exact, &SeedStream::new(0)).is_err());
    }

    #[test]
    fn bound_formulas() {
        let p = MixingBoundParams::new(9, 9, 0.0, 0.0);
        assert_eq!(mixing_bound_simplified(&p).unwrap(), 2.5);
        let g = mixing_bound(&p).unwrap();
        let expected = 9.0 * 4f64.powi(-3) + (4.0 / 3.0) * (-25.0f64 / 8.0).exp() + 9.0 * 4f64.powi(-9);
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 0.199).abs() < 1e-3);
        assert!(is_vacuous(mixing_bound(&MixingBoundParams::new(5, 5, 1.0, 0.0)).unwrap()));
        assert!(mixing_bound(&MixingBoundParams { a: 1.3, ..p }).is_err());
        assert!(mixing_bound_simplified(&MixingBoundParams { eps_c: 0.3, ..p }).is_err());
        assert!(mixing_bound_simplified(&MixingBoundParams { a: 4.0, ..p }).is_err());
    }

    #[test]
    fn bound_monotonicity_sweep() {
        let grid_eps = [0.0, 0.01, 0.1, 0.2, 0.25];
        for nr in 1..12 {
            for nc in 1..6 {
                for w in grid_eps.windows(2) {
                    let lo = MixingBoundParams::new(nr, nc, w[0], 0.1);
                    let hi = MixingBoundParams::new(nr, nc, w[1], 0.1);
                    assert!(mixing_bound(&lo).unwrap() <= mixing_bound(&hi).unwrap());
                    let lo = MixingBoundParams::new(nr, nc, 0.1, w[0]);
                    let hi = MixingBoundParams::new(nr, nc, 0.1, w[1]);
                    assert!(mixing_bound(&lo).unwrap() <= mixing_bound(&hi).unwrap());
                }
                let small = MixingBoundParams::new(nr, nc, 0.0, 0.0);
                let big = MixingBoundParams::new(nr + 1, nc, 0.0, 0.0);
                assert!(mixing_bound(&big).unwrap() <= mixing_bound(&small).unwrap());
                assert!(mixing_bound_simplified(&big).unwrap() <= mixing_bound_simplified(&small).unwrap());
            }
        }
    }

    #[test]
    fn grid_constructor() {
        let s1 = grid_mixing_ensemble(1, 5).unwrap();
        assert_eq!(s1.layers().len(), 1);
        assert_eq!(grid_mixing_error(1, 5), 0.0);
        let s2 = grid_mixing_ensemble(2, 4).unwrap();
        assert_eq!(s2.layers().iter().map(|l| l.axes[0]).collect::<Vec<_>>(), vec![1, 0, 1]);
        assert!((grid_mixing_error(2, 16) - 34.0 * (-4.0 * std::f64::consts::LN_2 / 3.0).exp()).abs() < 1e-12);
        let s3 = grid_mixing_ensemble(3, 2).unwrap();
        assert_eq!(s3.layers().iter().map(|l| l.axes[0]).collect::<Vec<_>>(), vec![2, 1, 0, 1, 2]);
        assert_eq!(s3.declared_depth(), 2 * line_clifford_depth(2) * 2 + line_clifford_depth(2));
        assert!(grid_mixing_ensemble(2, 1).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let l = line_graph(3).unwrap();
        let s = build_product_ensemble(&l, &line_graph(2).unwrap(), SubEnsemble::Kind(LayerKind::Brickwork { depth: 3 }), SubEnsemble::Kind(LayerKind::ExactClifford)).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: EnsembleSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let bad = j.replacen("\"copies\":2", "\"copies\":5", 1);
        assert!(serde_json::from_str::<EnsembleSpec>(&bad).is_err());
    }

    #[test]
    fn nested_sub_spec_flattens() {
        let l = line_graph(2).unwrap();
        let inner = grid_mixing_ensemble(2, 2).unwrap();
        let outer = build_product_ensemble(&l, inner.graph(), SubEnsemble::Kind(LayerKind::ExactClifford), SubEnsemble::Spec(inner.clone())).unwrap();
        assert_eq!(outer.layers().len(), 5);
        assert_eq!(outer.layers().iter().map(|l| l.axes[0]).collect::<Vec<_>>(), vec![0, 2, 1, 2, 0]);
    }
}
