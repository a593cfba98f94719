//! Gluing small strong designs into a large one.
//!
//! The protocol sandwiches two staggered layers of patch k-designs between
//! two global 2-designs. Patches are consecutive runs of the snake order, so
//! a block on two neighbouring patches is a path in the grid and a 1D block
//! laid along it needs no routing. Blocks that are not paths (the wrapped
//! block on a grid, or all-to-all payloads) are compiled with the router.
//!
//! Hidden constants are explicit in [`GluingConstants`] and stamped into
//! every plan.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::clifford::{line_clifford_depth, small::two_qubit, synthesize_line, CliffordTableau};
use crate::compiler::compile_to_grid;
use crate::error::{Error, Result};
use crate::graphs::{grid, line_graph, ConnectivityGraph};
use crate::mixing::{grid_mixing_ensemble, grid_mixing_error, EnsembleSpec, LayerKind};
use crate::rng::{SeedStream, Stream};
use crate::verify::{Draw, UnitaryEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingConstants {
    /// Additive slack on the patch size.
    pub slack: usize,
    /// Weight of the `k² 2^{−3ξ/16}` term.
    pub c1: f64,
    /// Weight of the `k^{5/8} ε₂^{1/8}` term.
    pub c2: f64,
    /// Prefactor of the 1D block depth.
    pub c3: f64,
    /// Prefactor of the weak-design placeholder depth.
    pub c_weak: f64,
}

impl Default for GluingConstants {
    fn default() -> Self {
        Self { slack: 0, c1: 1.0, c2: 1.0, c3: 1.0, c_weak: 1.0 }
    }
}

impl GluingConstants {
    fn check(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("c_weak", self.c_weak)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("constant {name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiChoice {
    pub xi: usize,
    /// `(16/3)·log₂(nk²/ε)` before rounding.
    pub raw: f64,
    /// The formula gave no positive size and was clamped to 1.
    pub vacuous: bool,
}

/// `⌈(16/3)·log₂(nk²/ε)⌉ + slack`, clamped to at least 1.
pub fn xi_min(n: usize, k: usize, eps: f64, slack: usize) -> Result<XiChoice> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if n == 0 || k == 0 {
        return Err(Error::Domain("n and k must be at least 1".into()));
    }
    let raw = 16.0 / 3.0 * ((n as f64) * (k as f64).powi(2) / eps).log2();
    let xi = raw.ceil() as i64 + slack as i64;
    Ok(XiChoice { xi: xi.max(1) as usize, raw, vacuous: raw <= 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingErrorParams {
    pub eps_ab: f64,
    pub eps_bc: f64,
    pub eps_2: f64,
    pub k: usize,
    pub xi: usize,
}

/// `ε_ab + ε_bc + c1·k²·2^{−3ξ/16} + c2·k^{5/8}·ε₂^{1/8}`.
pub fn gluing_error(p: &GluingErrorParams, c1: f64, c2: f64) -> Result<f64> {
    if c1 < 0.0 || c2 < 0.0 {
        return Err(Error::Domain(format!("constants must be nonnegative, got c1={c1}, c2={c2}")));
    }
    if p.eps_ab < 0.0 || p.eps_bc < 0.0 || p.eps_2 < 0.0 {
        return Err(Error::Domain("errors must be nonnegative".into()));
    }
    let k = p.k as f64;
    Ok(p.eps_ab + p.eps_bc + c1 * k * k * 2f64.powf(-3.0 * p.xi as f64 / 16.0) + c2 * k.powf(0.625) * p.eps_2.powf(0.125))
}

/// Union bound over the iterated protocol: `m` patch blocks at `eps_block`
/// each, and `m − 1` gluings.
pub fn iterated_gluing_error(m: usize, k: usize, xi: usize, eps_block: f64, eps_2: f64, c: &GluingConstants) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("no patches".into()));
    }
    let glue = gluing_error(&GluingErrorParams { eps_ab: 0.0, eps_bc: 0.0, eps_2, k, xi }, c.c1, c.c2)?;
    Ok(m as f64 * eps_block + (m - 1) as f64 * glue)
}

/// Depth of the 1D strong k-design block on `qubits` qubits:
/// `⌈c3·max(log₂k, 1)^7·(qubits·k + ln(3n/ε))⌉`.
pub fn block_depth(qubits: usize, k: usize, n: usize, eps: f64, c3: f64) -> usize {
    let lk = (k as f64).log2().max(1.0);
    let tail = (3.0 * n as f64 / eps).ln().max(0.0);
    (c3 * lk.powi(7) * ((qubits * k) as f64 + tail)).ceil() as usize
}

/// `⌈c_weak·log₂(n/ε)⌉`, the depth of the weak-design placeholder.
pub fn placeholder_depth(n: usize, eps: f64, c_weak: f64) -> usize {
    (c_weak * (n as f64 / eps).log2().max(0.0)).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    #[serde(rename = "global-2-design")]
    Global2Design,
    PatchKDesign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    AllToAll,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStep {
    pub kind: StepKind,
    pub eps_target: f64,
    /// Patch indices of each block, in lay-out order.
    pub patches: Vec<Vec<usize>>,
    pub builder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluingPlan {
    pub n: usize,
    #[serde(rename = "D")]
    pub dims: usize,
    pub side: usize,
    pub connectivity: Connectivity,
    pub k: Option<usize>,
    pub eps: f64,
    pub xi: usize,
    pub m: usize,
    /// Qubits of each patch, in snake order.
    pub patch_sites: Vec<Vec<usize>>,
    /// Whether the second patch layer pairs the last patch with the first.
    pub wraparound: bool,
    pub steps: Vec<PlanStep>,
    pub constants: GluingConstants,
    pub flags: Vec<String>,
}

/// Where a plan lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    AllToAll { n: usize },
    Grid { dims: usize, side: usize },
}

impl Layout {
    pub fn num_qubits(&self) -> usize {
        match *self {
            Layout::AllToAll { n } => n,
            Layout::Grid { dims, side } => side.pow(dims as u32),
        }
    }

    fn graph(&self) -> Result<ConnectivityGraph> {
        match *self {
            Layout::AllToAll { n } => line_graph(n),
            Layout::Grid { dims, side } => grid(dims, side),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOptions {
    pub constants: GluingConstants,
    /// `None` wraps on all-to-all layouts and whenever `m = 2`.
    pub wraparound: Option<bool>,
    pub global_builder: String,
    pub patch_builder: String,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { constants: GluingConstants::default(), wraparound: None, global_builder: "exact-clifford".into(), patch_builder: "exact-clifford".into() }
    }
}

fn split_even(order: &[usize], m: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    let (q, r) = (n / m, n % m);
    let mut out = Vec::with_capacity(m);
    let mut at = 0;
    for i in 0..m {
        let len = q + usize::from(i < r);
        out.push(order[at..at + len].to_vec());
        at += len;
    }
    out
}

impl GluingPlan {
    /// Four-step plan with patches of at least `xi` qubits. With fewer than
    /// two patches the plan degenerates to one k-design on the whole system.
    pub fn new(layout: Layout, xi: usize, k: Option<usize>, eps: f64, opts: &PlanOptions) -> Result<Self> {
        opts.constants.check()?;
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        let n = layout.num_qubits();
        if n == 0 || xi == 0 {
            return Err(Error::InvalidSize("plan needs n >= 1 and xi >= 1".into()));
        }
        let g = layout.graph()?;
        let (dims, side, connectivity) = match layout {
            Layout::AllToAll { n } => (1, n, Connectivity::AllToAll),
            Layout::Grid { dims, side } => (dims, side, Connectivity::Grid),
        };
        let mut flags = Vec::new();
        let mut m = n / xi;
        if m < 2 {
            flags.push("patch-exceeds-system".to_string());
            return Ok(Self {
                n,
                dims,
                side,
                connectivity,
                k,
                eps,
                xi,
                m: 1,
                patch_sites: vec![g.snake_order()],
                wraparound: false,
                steps: vec![PlanStep { kind: StepKind::PatchKDesign, eps_target: eps, patches: vec![vec![0]], builder: opts.patch_builder.clone() }],
                constants: opts.constants,
                flags,
            });
        }
        if m % 2 == 1 {
            m -= 1;
            flags.push("odd-patch-count-merged".to_string());
        }
        if n % m != 0 {
            flags.push("uneven-patches".to_string());
        }
        let wraparound = opts.wraparound.unwrap_or(connectivity == Connectivity::AllToAll || m == 2);
        flags.push(if wraparound { "wraparound" } else { "open-chain" }.to_string());
        let patch_sites = split_even(&g.snake_order(), m);
        let even: Vec<Vec<usize>> = (0..m / 2).map(|i| vec![2 * i, 2 * i + 1]).collect();
        let odd: Vec<Vec<usize>> = (0..m / 2).filter(|&i| wraparound || 2 * i + 2 < m).map(|i| vec![2 * i + 1, (2 * i + 2) % m]).collect();
        let nf = n as f64;
        let global = |eps_target| PlanStep { kind: StepKind::Global2Design, eps_target, patches: vec![(0..m).collect()], builder: opts.global_builder.clone() };
        let patch = |patches| PlanStep { kind: StepKind::PatchKDesign, eps_target: eps / (3.0 * nf), patches, builder: opts.patch_builder.clone() };
        Ok(Self {
            n,
            dims,
            side,
            connectivity,
            k,
            eps,
            xi,
            m,
            patch_sites,
            wraparound,
            steps: vec![global(eps / 3.0), patch(even), patch(odd), global(eps / 3.0)],
            constants: opts.constants,
            flags,
        })
    }

    fn graph(&self) -> Result<ConnectivityGraph> {
        match self.connectivity {
            Connectivity::AllToAll => line_graph(self.n),
            Connectivity::Grid => grid(self.dims, self.side),
        }
    }

    /// Sites of a block, patch by patch.
    pub fn block_sites(&self, patches: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &p in patches {
            out.extend(self.patch_sites.get(p).ok_or_else(|| Error::InvalidArgument(format!("patch {p} out of range {}", self.m)))?);
        }
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for q in self.patch_sites.iter().flatten() {
            if *q >= self.n || std::mem::replace(&mut seen[*q], true) {
                return Err(Error::InvalidArgument(format!("patches do not partition 0..{}", self.n)));
            }
        }
        if seen.iter().any(|s| !s) || self.patch_sites.len() != self.m {
            return Err(Error::InvalidArgument(format!("patches do not partition 0..{}", self.n)));
        }
        for (i, s) in self.steps.iter().enumerate() {
            let mut used = vec![false; self.m];
            for b in &s.patches {
                for &p in b {
                    if p >= self.m || std::mem::replace(&mut used[p], true) {
                        return Err(Error::InvalidArgument(format!("step {i}: blocks overlap or name a missing patch")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Supplies a circuit for one block. `target` is the block's own geometry:
/// a line for patch blocks, the full graph for global steps.
pub trait BlockBuilder: Sync {
    fn name(&self) -> String;
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit>;
}

fn along_snake(c: &Circuit, target: &ConnectivityGraph) -> Result<Circuit> {
    c.embed(&target.snake_order(), target.num_vertices())
}

fn line_brickwork(len: usize, depth: usize, rng: &mut Stream) -> Result<Circuit> {
    if len < 2 {
        return Ok(Circuit::new(len));
    }
    Ok(EnsembleSpec::global(line_graph(len)?, LayerKind::Brickwork { depth })?.sample_circuit(rng))
}

/// A uniformly random Clifford, synthesized along the snake path.
pub struct ExactCliffordBuilder;

impl BlockBuilder for ExactCliffordBuilder {
    fn name(&self) -> String {
        "exact-clifford".into()
    }
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit> {
        let t = CliffordTableau::sample_uniform(target.num_vertices(), rng)?;
        along_snake(&synthesize_line(&t), target)
    }
}

/// Random two-qubit Clifford brickwork along the snake path.
#[derive(Debug, Clone, PartialEq)]
pub struct BrickworkBuilder {
    pub depth: usize,
}

impl BlockBuilder for BrickworkBuilder {
    fn name(&self) -> String {
        format!("brickwork:{}", self.depth)
    }
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit> {
        along_snake(&line_brickwork(target.num_vertices(), self.depth, rng)?, target)
    }
}

/// Stand-in for the 1D strong k-design: a brickwork whose depth follows
/// [`block_depth`] for the block size it is asked to fill.
#[derive(Debug, Clone, PartialEq)]
pub struct KDesignBrickwork {
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    pub c3: f64,
}

impl BlockBuilder for KDesignBrickwork {
    fn name(&self) -> String {
        format!("kdesign-brickwork:k={}", self.k)
    }
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit> {
        let l = target.num_vertices();
        BrickworkBuilder { depth: block_depth(l, self.k, self.n, self.eps, self.c3) }.build(target, rng)
    }
}

pub struct IdentityBuilder;

impl BlockBuilder for IdentityBuilder {
    fn name(&self) -> String {
        "identity".into()
    }
    fn build(&self, target: &ConnectivityGraph, _rng: &mut Stream) -> Result<Circuit> {
        Ok(Circuit::new(target.num_vertices()))
    }
}

/// Grid Pauli-mixing ensemble followed by the weak-design placeholder.
/// On a line this is a single exact Clifford.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMixingBuilder {
    pub weak_depth: usize,
}

impl BlockBuilder for GridMixingBuilder {
    fn name(&self) -> String {
        format!("grid-mixing+placeholder:{}", self.weak_depth)
    }
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit> {
        let sizes = target.factor_sizes();
        if !target.is_grid() || sizes.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidArgument("grid mixing needs a grid with equal sides".into()));
        }
        if sizes.len() == 1 {
            return ExactCliffordBuilder.build(target, rng);
        }
        let mut c = grid_mixing_ensemble(sizes.len(), sizes[0])?.sample_circuit(rng);
        c.append(&BrickworkBuilder { depth: self.weak_depth }.build(target, rng)?)?;
        Ok(c)
    }
}

/// Opaque all-to-all stand-in for a pseudorandom block: `depth` layers of
/// random two-qubit Cliffords on random perfect matchings.
pub struct AllToAllPlaceholder {
    pub depth: usize,
}

impl BlockBuilder for AllToAllPlaceholder {
    fn name(&self) -> String {
        format!("all-to-all-placeholder:{}", self.depth)
    }
    fn build(&self, target: &ConnectivityGraph, rng: &mut Stream) -> Result<Circuit> {
        let n = target.num_vertices();
        let g2 = two_qubit().len();
        let mut c = Circuit::new(n);
        let mut qs: Vec<usize> = (0..n).collect();
        for _ in 0..self.depth {
            qs.shuffle(rng);
            c.push_layer(qs.chunks_exact(2).map(|p| Gate::two(GateKind::C2(rng.gen_range(0..g2) as u16), p[0], p[1])).collect())?;
        }
        Ok(c)
    }
}

/// A fixed circuit, handed out unchanged.
pub struct FixedBuilder {
    pub label: String,
    pub circuit: Circuit,
}

impl BlockBuilder for FixedBuilder {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn build(&self, target: &ConnectivityGraph, _rng: &mut Stream) -> Result<Circuit> {
        if self.circuit.num_qubits() != target.num_vertices() {
            return Err(Error::DimensionMismatch { expected: target.num_vertices(), actual: self.circuit.num_qubits() });
        }
        Ok(self.circuit.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub patches: Vec<usize>,
    pub sites: Vec<usize>,
    pub depth: usize,
    /// The block was compiled with SWAP routing to fit the connectivity.
    pub routed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: StepKind,
    pub builder: String,
    pub start_layer: usize,
    pub depth: usize,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluingCircuit {
    pub circuit: Circuit,
    pub steps: Vec<StepRecord>,
}

impl GluingCircuit {
    /// Layer range of step `i`.
    pub fn step_layers(&self, i: usize) -> std::ops::Range<usize> {
        let s = &self.steps[i];
        s.start_layer..s.start_layer + s.depth
    }
}

/// Lay `local` (a circuit on `sites.len()` line-ordered qubits) onto `sites`
/// of `g`. Returns the full-width circuit and whether routing was needed.
/// Order in which a 1D block is laid on `g`: the declared order when it is
/// a path, else the snake order of the same sites when that is one.
fn path_layout(sites: &[usize], g: &ConnectivityGraph) -> Option<Vec<usize>> {
    if g.is_path(sites) {
        return Some(sites.to_vec());
    }
    let mut pos = vec![0; g.num_vertices()];
    for (i, v) in g.snake_order().into_iter().enumerate() {
        pos[v] = i;
    }
    let mut sorted = sites.to_vec();
    sorted.sort_by_key(|&v| pos[v]);
    g.is_path(&sorted).then_some(sorted)
}

/// Lay `local` (a circuit on `sites.len()` line-ordered qubits) onto `sites`
/// of `g`. Returns the full-width circuit, the sites in lay-out order, and
/// whether routing was needed.
fn place_block(local: &Circuit, sites: &[usize], g: &ConnectivityGraph, conn: Connectivity) -> Result<(Circuit, Vec<usize>, bool)> {
    let n = g.num_vertices();
    if conn == Connectivity::AllToAll {
        return Ok((local.embed(sites, n)?, sites.to_vec(), false));
    }
    let line = line_graph(sites.len())?;
    match path_layout(sites, g) {
        Some(order) if local.check_graph(&line).is_ok() => Ok((local.embed(&order, n)?, order, false)),
        Some(order) => Ok((compile_to_grid(local, &line)?.circuit.embed(&order, n)?, order, true)),
        None => Ok((compile_to_grid(&local.embed(sites, n)?, g)?.circuit, sites.to_vec(), true)),
    }
}

/// Assemble the plan's circuit. Step `i` draws from substream `i` of
/// `seeds`; blocks within a step use their own child streams.
pub fn build_gluing_circuit(plan: &GluingPlan, global: &dyn BlockBuilder, patch: &dyn BlockBuilder, seeds: &SeedStream) -> Result<GluingCircuit> {
    plan.validate()?;
    let g = plan.graph()?;
    let n = plan.n;
    let mut circuit = Circuit::new(n);
    let mut steps = Vec::with_capacity(plan.steps.len());
    for (i, step) in plan.steps.iter().enumerate() {
        let step_seeds = seeds.child(i as u64);
        let start = circuit.depth();
        let mut blocks = Vec::new();
        let mut body = Circuit::new(n);
        let mut routed_tail = Vec::new();
        match step.kind {
            StepKind::Global2Design => {
                let target = if plan.connectivity == Connectivity::Grid { g.clone() } else { line_graph(n)? };
                let c = global.build(&target, &mut step_seeds.substream(0))?;
                if c.num_qubits() != n {
                    return Err(Error::DimensionMismatch { expected: n, actual: c.num_qubits() });
                }
                let routed = plan.connectivity == Connectivity::Grid && c.check_graph(&g).is_err();
                let c = if routed { compile_to_grid(&c, &g)?.circuit } else { c };
                blocks.push(BlockRecord { patches: step.patches.concat(), sites: (0..n).collect(), depth: c.depth(), routed });
                body = c;
            }
            StepKind::PatchKDesign => {
                for (b, patches) in step.patches.iter().enumerate() {
                    let sites = plan.block_sites(patches)?;
                    let local = patch.build(&line_graph(sites.len())?, &mut step_seeds.substream(b as u64))?;
                    if local.num_qubits() != sites.len() {
                        return Err(Error::DimensionMismatch { expected: sites.len(), actual: local.num_qubits() });
                    }
                    let (placed, order, routed) = place_block(&local, &sites, &g, plan.connectivity)?;
                    let rec = BlockRecord { patches: patches.clone(), sites: order, depth: placed.depth(), routed };
                    if routed && plan.connectivity == Connectivity::Grid && !g.is_path(&rec.sites) {
                        // swaps sweep the whole grid, so run it after the parallel blocks
                        routed_tail.push(placed);
                    } else {
                        body.overlay(&placed, 0)?;
                    }
                    blocks.push(rec);
                }
                for c in routed_tail {
                    body.append(&c)?;
                }
            }
        }
        circuit.append(&body)?;
        steps.push(StepRecord { kind: step.kind, builder: step.builder.clone(), start_layer: start, depth: body.depth(), blocks });
    }
    Ok(GluingCircuit { circuit, steps })
}

/// The ensemble of circuits a plan produces, one fresh seed per draw.
pub struct GluedEnsemble<'a> {
    pub plan: &'a GluingPlan,
    pub global: &'a dyn BlockBuilder,
    pub patch: &'a dyn BlockBuilder,
}

impl UnitaryEnsemble for GluedEnsemble<'_> {
    fn num_qubits(&self) -> usize {
        self.plan.n
    }
    fn draw(&self, rng: &mut Stream) -> Result<Draw> {
        let seed: u64 = rng.gen();
        Ok(Draw::Circuit(build_gluing_circuit(self.plan, self.global, self.patch, &SeedStream::new(seed))?.circuit))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strong2Report {
    #[serde(rename = "D")]
    pub dims: usize,
    pub side: usize,
    pub n: usize,
    pub eps: f64,
    pub eps_1: f64,
    /// Declared by the placeholder, not measured.
    pub eps_2: f64,
    /// `max(ε₁, 2ε₂)`.
    pub error: f64,
    pub mixing_depth: usize,
    pub placeholder_depth: usize,
    pub depth: usize,
    pub placeholder: bool,
    pub c_weak: f64,
}

/// Floor of the grid strong 2-design: `2(n+1)e^{−n^{1/D} ln2/3}`.
pub fn strong2design_floor(dims: usize, side: usize) -> f64 {
    grid_mixing_error(dims, side.pow(dims as u32))
}

/// Depth accounting for [`strong2design_grid`] without sampling.
/// `eps_2` defaults to `eps/2`.
pub fn strong2design_report(dims: usize, side: usize, eps: f64, c_weak: f64, eps_2: Option<f64>) -> Result<Strong2Report> {
    if dims == 0 || side < 2 {
        return Err(Error::InvalidSize(format!("need D >= 1 and side >= 2, got D={dims}, side={side}")));
    }
    if !(c_weak >= 0.0) {
        return Err(Error::Domain(format!("c_weak must be nonnegative, got {c_weak}")));
    }
    let n = side.pow(dims as u32);
    let floor = strong2design_floor(dims, side);
    if !(eps > 0.0) || eps < floor {
        return Err(Error::InfeasibleEpsilon { eps, floor });
    }
    let (eps_1, eps_2, mixing_depth, ph) = if dims == 1 {
        (0.0, 0.0, line_clifford_depth(side), 0)
    } else {
        let e2 = eps_2.unwrap_or(eps / 2.0);
        (floor, e2, grid_mixing_ensemble(dims, side)?.declared_depth(), placeholder_depth(n, eps, c_weak))
    };
    Ok(Strong2Report {
        dims,
        side,
        n,
        eps,
        eps_1,
        eps_2,
        error: eps_1.max(2.0 * eps_2),
        mixing_depth,
        placeholder_depth: ph,
        depth: mixing_depth + ph,
        placeholder: dims > 1,
        c_weak,
    })
}

/// Strong 2-design on `grid(D, side)`: Pauli mixing, then the weak-design
/// placeholder. For `D = 1` the exact line Clifford alone.
pub fn strong2design_grid(dims: usize, side: usize, eps: f64, c_weak: f64, eps_2: Option<f64>, rng: &mut Stream) -> Result<(Circuit, Strong2Report)> {
    let report = strong2design_report(dims, side, eps, c_weak, eps_2)?;
    let c = GridMixingBuilder { weak_depth: report.placeholder_depth }.build(&grid(dims, side)?, rng)?;
    debug_assert_eq!(c.depth(), report.depth);
    Ok((c, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub global_depth: usize,
    pub step_depths: Vec<usize>,
    pub total: usize,
    /// Depth spent in steps 1 and 4.
    pub global_share: f64,
    pub xi: XiChoice,
    pub strong2: Option<Strong2Report>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KDesignOptions {
    pub constants: GluingConstants,
    pub wraparound: Option<bool>,
    /// Use this patch size instead of the formula.
    pub xi: Option<usize>,
}

impl Default for KDesignOptions {
    fn default() -> Self {
        Self { constants: GluingConstants::default(), wraparound: None, xi: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KDesignPlan {
    pub plan: GluingPlan,
    pub depth: DepthReport,
    pub global: GridMixingBuilder,
    pub patch: KDesignBrickwork,
}

impl KDesignPlan {
    pub fn build(&self, seeds: &SeedStream) -> Result<GluingCircuit> {
        build_gluing_circuit(&self.plan, &self.global, &self.patch, seeds)
    }
}

/// Strong k-design plan on `grid(D, side)` with exact depth accounting.
pub fn kdesign_grid_plan(dims: usize, side: usize, k: usize, eps: f64, opts: &KDesignOptions) -> Result<KDesignPlan> {
    opts.constants.check()?;
    if dims == 0 || side < 2 {
        return Err(Error::InvalidSize(format!("need D >= 1 and side >= 2, got D={dims}, side={side}")));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let n = side.pow(dims as u32);
    let floor = 3.0 * strong2design_floor(dims, side);
    if !(eps > 0.0) || eps < floor {
        return Err(Error::InfeasibleEpsilon { eps, floor });
    }
    let mut xi = xi_min(n, k, eps, opts.constants.slack)?;
    if let Some(x) = opts.xi {
        xi.xi = x.max(1);
    }
    let c = &opts.constants;
    let patch = KDesignBrickwork { k, n, eps, c3: c.c3 };
    let s2 = strong2design_report(dims, side, eps / 3.0, c.c_weak, None)?;
    let global = GridMixingBuilder { weak_depth: s2.placeholder_depth };
    let popts = PlanOptions { constants: *c, wraparound: opts.wraparound, global_builder: global.name(), patch_builder: patch.name() };
    let mut plan = GluingPlan::new(Layout::Grid { dims, side }, xi.xi, Some(k), eps, &popts)?;
    if xi.vacuous {
        plan.flags.push("xi-vacuous".into());
    }
    let g = grid(dims, side)?;
    let mut step_depths = Vec::new();
    for step in &plan.steps {
        let d = match step.kind {
            StepKind::Global2Design => s2.depth,
            StepKind::PatchKDesign => {
                let mut parallel = 0;
                let mut tail = 0;
                for b in &step.patches {
                    let sites = plan.block_sites(b)?;
                    let d = block_depth(sites.len(), k, n, eps, c.c3);
                    if path_layout(&sites, &g).is_some() {
                        parallel = parallel.max(d);
                    } else {
                        tail += crate::compiler::compile_depth_bound(d, &g);
                    }
                }
                parallel + tail
            }
        };
        step_depths.push(d);
    }
    let total: usize = step_depths.iter().sum();
    let global_depth = plan.steps.iter().zip(&step_depths).filter(|(s, _)| s.kind == StepKind::Global2Design).map(|(_, d)| d).sum::<usize>();
    let depth = DepthReport {
        global_depth,
        step_depths,
        total,
        global_share: if total == 0 { 0.0 } else { global_depth as f64 / total as f64 },
        xi,
        strong2: Some(s2),
    };
    Ok(KDesignPlan { plan, depth, global, patch })
}

/// `⌈log₂(n)^{2/δ}⌉`.
pub fn pru_patch_size(n: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if n < 2 {
        return Err(Error::InvalidSize("need n >= 2".into()));
    }
    // round away float noise before the ceiling: log₂ 256 ^ 2 must give 64
    let x = (n as f64).log2().powf(2.0 / delta);
    Ok(((x * 1e9).round() / 1e9).ceil() as usize)
}

/// Pseudorandom-block plan on `grid(D, side)`: the four-step shape with the
/// supplied block in steps 2 and 3 and grid 2-designs around them.
pub fn pru_plan(dims: usize, side: usize, delta: f64, block: Option<&dyn BlockBuilder>, opts: &PlanOptions) -> Result<GluingPlan> {
    let block = block.ok_or_else(|| Error::MissingBuilder("pseudorandom block builder".into()))?;
    if dims == 0 || side < 2 {
        return Err(Error::InvalidSize(format!("need D >= 1 and side >= 2, got D={dims}, side={side}")));
    }
    let n = side.pow(dims as u32);
    let xi = pru_patch_size(n, delta)?;
    // negligible error: below every fixed polynomial, and never under the grid floor
    let eps = 2f64.powf(-(xi as f64)).max(3.0 * strong2design_floor(dims, side));
    let mut o = opts.clone();
    o.patch_builder = format!("pru:{}", block.name());
    o.global_builder = "grid-mixing+placeholder".into();
    let mut plan = GluingPlan::new(Layout::Grid { dims, side }, xi, None, eps, &o)?;
    plan.flags.push("pru-blocks-opaque".into());
    Ok(plan)
}
