//! Permutation routing by rounds of disjoint SWAPs.
//!
//! Lines use odd–even transposition sort. Products `G × H` use three
//! stages: inside the `G`-copies, then inside the `H`-copies, then inside
//! the `G`-copies again. The first stage picks intermediate positions from
//! a perfect-matching decomposition so that the middle stage is a
//! permutation inside every `H`-copy. General factor graphs fall back to
//! sequential swaps along a spanning tree.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::graphs::{grid, ConnectivityGraph, Factor};

/// Bijection on `[0, n)`; entry `v` is `π(v)`, the target of the pebble starting at `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// `v ↦ n − 1 − v`.
    pub fn reversal(n: usize) -> Self {
        Self { images: (0..n).rev().collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![usize::MAX; n];
        for (i, &t) in images.iter().enumerate() {
            if t >= n {
                return Err(Error::NotBijection { index: i, reason: format!("image {t} out of range for {n} vertices") });
            }
            if seen[t] != usize::MAX {
                return Err(Error::NotBijection { index: i, reason: format!("image {t} already taken by index {}", seen[t]) });
            }
            seen[t] = i;
        }
        Ok(Self { images })
    }

    /// Cycle notation such as `(0 1 2)(3 4)` on `n` vertices; commas are optional.
    pub fn from_cycles(s: &str, n: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| Error::Parse(format!("expected '(' in cycle notation at {rest:?}")))?;
            let close = open.find(')').ok_or_else(|| Error::Parse("unclosed cycle".into()))?;
            let body = &open[..close];
            let cycle: Vec<usize> = body
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad vertex {t:?} in cycle"))))
                .collect::<Result<_>>()?;
            for &v in &cycle {
                if v >= n {
                    return Err(Error::NotBijection { index: v, reason: format!("vertex {v} out of range for {n} vertices") });
                }
                if std::mem::replace(&mut used[v], true) {
                    return Err(Error::NotBijection { index: v, reason: format!("vertex {v} appears in two cycles") });
                }
            }
            for (i, &v) in cycle.iter().enumerate() {
                images[v] = cycle[(i + 1) % cycle.len()];
            }
            rest = open[close + 1..].trim_start();
        }
        Self::from_images(images)
    }

    /// `reversal`, `identity`, cycle notation, or a comma-separated image array (brackets optional).
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let t = s.trim();
        let p = match t {
            "reversal" | "reverse" => Self::reversal(n),
            "identity" | "id" => Self::identity(n),
            _ if t.starts_with('(') => Self::from_cycles(t, n)?,
            _ => {
                let body = t.trim_start_matches('[').trim_end_matches(']');
                let images = body
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .enumerate()
                    .map(|(i, x)| x.parse::<usize>().map_err(|_| Error::NotBijection { index: i, reason: format!("entry {x:?} is not a vertex id") }))
                    .collect::<Result<Vec<_>>>()?;
                Self::from_images(images)?
            }
        };
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: p.len() });
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, v: usize) -> usize {
        self.images[v]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &t) in self.images.iter().enumerate() {
            inv[t] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Self {
        Self { images: first.images.iter().map(|&t| self.images[t]).collect() }
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::from_images(images).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.images.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", s.join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Image arrays only; other notations need the vertex count, see [`Permutation::parse`].
    fn from_str(s: &str) -> Result<Self> {
        let n = s.split(',').filter(|x| !x.trim().trim_matches(|c| c == '[' || c == ']').is_empty()).count();
        Self::parse(s, n)
    }
}

pub type Rounds = Vec<Vec<(usize, usize)>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSchedule {
    pub graph_ref: String,
    pub permutation: Permutation,
    pub rounds: Rounds,
}

impl SwapSchedule {
    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn num_swaps(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }
}

/// Short description of a graph used in schedule JSON.
pub fn graph_ref(g: &ConnectivityGraph) -> String {
    let f = g.factor_list();
    if f.iter().all(Factor::is_line) {
        let sizes: Vec<String> = f.iter().map(|x| x.size().to_string()).collect();
        format!("grid:{}", sizes.join("x"))
    } else {
        format!("graph:n={},m={}", g.num_vertices(), g.num_edges())
    }
}

/// Routing strategy for a graph, built once and reused across permutations.
#[derive(Debug, Clone)]
pub enum Router {
    Line(usize),
    Tree(TreeRouter),
    /// Rows are copies of the first factor.
    Product { g: Box<Router>, h: Box<Router>, ng: usize, nh: usize },
}

impl Router {
    /// Line factors use odd–even sort, products split off their first factor,
    /// other factors use the spanning-tree fallback.
    pub fn for_graph(g: &ConnectivityGraph) -> Result<Self> {
        let f = g.factor_list();
        match f.len() {
            0 => Err(Error::InvalidArgument("graph without vertices".into())),
            1 => match &f[0] {
                Factor::Line { size } => Ok(Router::Line(*size)),
                other => Ok(Router::Tree(TreeRouter::new(&other.to_graph())?)),
            },
            _ => {
                let first = ConnectivityGraph::from_factors(vec![f[0].clone()])?;
                let rest = ConnectivityGraph::from_factors(f[1..].to_vec())?;
                Ok(Router::Product {
                    g: Box::new(Self::for_graph(&first)?),
                    h: Box::new(Self::for_graph(&rest)?),
                    ng: first.num_vertices(),
                    nh: rest.num_vertices(),
                })
            }
        }
    }

    pub fn num_vertices(&self) -> usize {
        match self {
            Router::Line(l) => *l,
            Router::Tree(t) => t.n,
            Router::Product { ng, nh, .. } => ng * nh,
        }
    }

    /// Guaranteed round count: `ℓ` for lines, `2 rt(G) + rt(H)` for products, `n(n−1)/2` for trees.
    pub fn bound(&self) -> usize {
        match self {
            Router::Line(l) => *l,
            Router::Tree(t) => t.n * (t.n - 1) / 2,
            Router::Product { g, h, .. } => 2 * g.bound() + h.bound(),
        }
    }

    /// Rounds realizing `targets` (pebble at `v` goes to `targets[v]`), empty rounds removed.
    pub fn route(&self, targets: &[usize]) -> Result<Rounds> {
        let mut r = self.route_raw(targets)?;
        r.retain(|x| !x.is_empty());
        Ok(r)
    }

    fn route_raw(&self, targets: &[usize]) -> Result<Rounds> {
        if targets.len() != self.num_vertices() {
            return Err(Error::DimensionMismatch { expected: self.num_vertices(), actual: targets.len() });
        }
        match self {
            Router::Line(_) => Ok(odd_even(targets)),
            Router::Tree(t) => t.route(targets),
            Router::Product { g, h, ng, nh } => route_product_raw(g, h, *ng, *nh, targets),
        }
    }
}

fn odd_even(targets: &[usize]) -> Rounds {
    let l = targets.len();
    let mut cur = targets.to_vec();
    let mut rounds = Vec::with_capacity(l);
    for t in 0..l {
        let mut round = Vec::new();
        let mut i = t % 2;
        while i + 1 < l {
            if cur[i] > cur[i + 1] {
                cur.swap(i, i + 1);
                round.push((i, i + 1));
            }
            i += 2;
        }
        rounds.push(round);
    }
    while rounds.last().is_some_and(Vec::is_empty) {
        rounds.pop();
    }
    rounds
}

/// Run one router on every copy in parallel; `lift(copy, local)` gives the global vertex.
fn parallel_copies(router: &Router, tasks: &[Vec<usize>], lift: impl Fn(usize, usize) -> usize) -> Result<Rounds> {
    let mut out: Rounds = Vec::new();
    for (c, targets) in tasks.iter().enumerate() {
        let r = router.route_raw(targets)?;
        if r.len() > out.len() {
            out.resize(r.len(), Vec::new());
        }
        for (i, round) in r.into_iter().enumerate() {
            out[i].extend(round.into_iter().map(|(u, v)| (lift(c, u), lift(c, v))));
        }
    }
    Ok(out)
}

fn route_product_raw(g: &Router, h: &Router, ng: usize, nh: usize, targets: &[usize]) -> Result<Rounds> {
    // vertex (a, b) = a·nh + b; G-copies fix b, H-copies fix a
    let split = |v: usize| (v / nh, v % nh);
    // pebbles[b][b'] = pebbles in G-copy b whose target column is b', ascending
    let mut pebbles: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); nh]; nh];
    for (v, &t) in targets.iter().enumerate() {
        pebbles[v % nh][t % nh].push(v);
    }
    let mut mid_a = vec![0usize; ng * nh];
    for k in 0..ng {
        let m = perfect_matching(&pebbles, nh).ok_or_else(|| Error::Routing("no perfect matching in the regular column multigraph".into()))?;
        for (b, &bp) in m.iter().enumerate() {
            let v = pebbles[b][bp].remove(0);
            mid_a[v] = k;
        }
    }
    // stage 1: inside G-copy b, pebble at a moves to mid_a
    let stage1: Vec<Vec<usize>> = (0..nh).map(|b| (0..ng).map(|a| mid_a[a * nh + b]).collect()).collect();
    // stage 2: inside H-copy a'', pebble from column b goes to its target column
    let mut stage2 = vec![vec![0usize; nh]; ng];
    // stage 3: inside G-copy b', pebble at row a'' goes to its target row
    let mut stage3 = vec![vec![0usize; ng]; nh];
    for (v, &t) in targets.iter().enumerate() {
        let (_, b) = split(v);
        let (ta, tb) = split(t);
        let k = mid_a[v];
        stage2[k][b] = tb;
        stage3[tb][k] = ta;
    }
    let mut rounds = parallel_copies(g, &stage1, |b, a| a * nh + b)?;
    rounds.extend(parallel_copies(h, &stage2, |a, b| a * nh + b)?);
    rounds.extend(parallel_copies(g, &stage3, |b, a| a * nh + b)?);
    Ok(rounds)
}

/// Kuhn's augmenting-path matching on the support of `pebbles`; lowest ids tried first.
fn perfect_matching(pebbles: &[Vec<Vec<usize>>], n: usize) -> Option<Vec<usize>> {
    fn augment(u: usize, pebbles: &[Vec<Vec<usize>>], seen: &mut [bool], match_r: &mut [usize]) -> bool {
        for v in 0..seen.len() {
            if pebbles[u][v].is_empty() || seen[v] {
                continue;
            }
            seen[v] = true;
            if match_r[v] == usize::MAX || augment(match_r[v], pebbles, seen, match_r) {
                match_r[v] = u;
                return true;
            }
        }
        false
    }
    let mut match_r = vec![usize::MAX; n];
    for u in 0..n {
        let mut seen = vec![false; n];
        if !augment(u, pebbles, &mut seen, &mut match_r) {
            return None;
        }
    }
    let mut m = vec![0; n];
    for (v, &u) in match_r.iter().enumerate() {
        m[u] = v;
    }
    Some(m)
}

/// Fallback router: fill the vertices of a BFS spanning tree leaf by leaf,
/// one swap per round.
#[derive(Debug, Clone)]
pub struct TreeRouter {
    n: usize,
    parent: Vec<usize>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

impl TreeRouter {
    pub fn new(g: &ConnectivityGraph) -> Result<Self> {
        let n = g.num_vertices();
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0; n];
        let mut order = vec![0];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    depth[w] = depth[v] + 1;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Routing("graph is disconnected".into()));
        }
        Ok(Self { n, parent, depth, order })
    }

    fn path(&self, mut u: usize, mut v: usize) -> Vec<usize> {
        let mut up = vec![u];
        let mut down = vec![v];
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
                up.push(u);
            } else {
                v = self.parent[v];
                down.push(v);
            }
        }
        down.pop();
        up.extend(down.into_iter().rev());
        up
    }

    fn route(&self, targets: &[usize]) -> Result<Rounds> {
        // occupant[v] = target of the pebble now at v
        let mut occupant = targets.to_vec();
        let mut rounds = Vec::new();
        for &v in self.order.iter().rev() {
            let w = occupant.iter().position(|&t| t == v).expect("targets form a bijection");
            // the path stays inside the unfilled subtree: v is its deepest-ordered vertex
            let p = self.path(w, v);
            for e in p.windows(2) {
                occupant.swap(e[0], e[1]);
                rounds.push(vec![(e[0].min(e[1]), e[0].max(e[1]))]);
            }
        }
        Ok(rounds)
    }
}

fn schedule(g: &ConnectivityGraph, pi: &Permutation, rounds: Rounds) -> SwapSchedule {
    SwapSchedule { graph_ref: graph_ref(g), permutation: pi.clone(), rounds }
}

fn check_len(pi: &Permutation, n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: pi.len() });
    }
    Ok(())
}

/// Odd–even transposition schedule on the path `0–1–…–(ℓ−1)`.
pub fn route_line(length: usize, pi: &Permutation) -> Result<SwapSchedule> {
    check_len(pi, length)?;
    let g = crate::graphs::line_graph(length)?;
    Ok(schedule(&g, pi, Router::Line(length).route(pi.images())?))
}

/// Three-stage schedule on `g × h`, rows being copies of `g`.
pub fn route_product(g: &ConnectivityGraph, h: &ConnectivityGraph, pi: &Permutation) -> Result<SwapSchedule> {
    let p = crate::graphs::cartesian_product(g, h)?;
    check_len(pi, p.num_vertices())?;
    let router = Router::Product {
        g: Box::new(Router::for_graph(g)?),
        h: Box::new(Router::for_graph(h)?),
        ng: g.num_vertices(),
        nh: h.num_vertices(),
    };
    Ok(schedule(&p, pi, router.route(pi.images())?))
}

/// Schedule on `grid(D, side)`, splitting off one line per level.
pub fn route_grid(dims: usize, side: usize, pi: &Permutation) -> Result<SwapSchedule> {
    route_graph(&grid(dims, side)?, pi)
}

/// Schedule on any graph, using its product structure when present.
pub fn route_graph(g: &ConnectivityGraph, pi: &Permutation) -> Result<SwapSchedule> {
    check_len(pi, g.num_vertices())?;
    Ok(schedule(g, pi, Router::for_graph(g)?.route(pi.images())?))
}

/// The round guarantee of [`route_graph`] on `g`.
pub fn rt_bound(g: &ConnectivityGraph) -> Result<usize> {
    Ok(Router::for_graph(g)?.bound())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// `disjointness`, `off-graph`, `out-of-range` or `placement`.
    pub kind: String,
    pub round: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub ok: bool,
    pub rounds: usize,
    pub violation: Option<Violation>,
}

/// Replays the schedule with pebbles and reports the first violation.
pub fn verify_schedule(g: &ConnectivityGraph, pi: &Permutation, s: &SwapSchedule) -> ScheduleCheck {
    let n = g.num_vertices();
    let fail = |kind: &str, round: Option<usize>, detail: String| ScheduleCheck {
        ok: false,
        rounds: s.rounds.len(),
        violation: Some(Violation { kind: kind.into(), round, detail }),
    };
    if pi.len() != n {
        return fail("placement", None, format!("permutation on {} vertices, graph has {n}", pi.len()));
    }
    let mut at: Vec<usize> = (0..n).collect();
    for (r, round) in s.rounds.iter().enumerate() {
        let mut used = BTreeSet::new();
        for &(u, v) in round {
            if u >= n || v >= n {
                return fail("out-of-range", Some(r), format!("swap ({u},{v}) outside {n} vertices"));
            }
            if !g.has_edge(u, v) {
                return fail("off-graph", Some(r), format!("swap ({u},{v}) is not an edge"));
            }
            if !used.insert(u) || !used.insert(v) {
                return fail("disjointness", Some(r), format!("swap ({u},{v}) shares a vertex with another swap in the round"));
            }
            at.swap(u, v);
        }
    }
    // at[v] = pebble now at v
    for (v, &p) in at.iter().enumerate() {
        if pi.apply(p) != v {
            return fail("placement", None, format!("pebble {p} ended at {v}, expected {}", pi.apply(p)));
        }
    }
    ScheduleCheck { ok: true, rounds: s.rounds.len(), violation: None }
}

/// One layer of SWAP gates per round.
pub fn schedule_to_circuit(s: &SwapSchedule, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for round in &s.rounds {
        c.push_layer(round.iter().map(|&(u, v)| Gate::swap(u, v)).collect())?;
    }
    Ok(c)
}
