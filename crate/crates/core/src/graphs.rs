//! Connectivity graphs, Cartesian products and grids.
//!
//! Vertices are integers in row-major coordinate order: for a product
//! `F_0 × F_1 × … × F_{k-1}` the vertex with coordinates `(c_0, …, c_{k-1})`
//! has id `((c_0·|F_1| + c_1)·|F_2| + c_2)…`, so the last factor varies
//! fastest. The factor list and coordinates are kept so routing and mixing
//! can address rows and columns directly.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// One factor of a product graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// Path graph `0 – 1 – … – (size-1)`.
    Line { size: usize },
    /// Arbitrary graph on `n` vertices.
    Graph { n: usize, edges: Vec<[usize; 2]> },
}

impl Factor {
    pub fn size(&self) -> usize {
        match self {
            Factor::Line { size } => *size,
            Factor::Graph { n, .. } => *n,
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        match self {
            Factor::Line { size } => (1..*size).map(|i| (i - 1, i)).collect(),
            Factor::Graph { edges, .. } => edges.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect(),
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Factor::Line { .. })
    }

    /// The factor as a standalone graph.
    pub fn to_graph(&self) -> ConnectivityGraph {
        match self {
            Factor::Line { size } => line_graph(*size).expect("line factors have size >= 1"),
            Factor::Graph { n, .. } => ConnectivityGraph::from_factors(vec![self.clone()])
                .unwrap_or_else(|_| panic!("factor graph on {n} vertices was validated")),
        }
    }
}

/// Undirected simple graph with optional Cartesian-product structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ConnectivityGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    factors: Option<Vec<Factor>>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<usize>>>,
}

impl TryFrom<GraphJson> for ConnectivityGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let g = match j.factors {
            Some(f) => Self::from_factors(f)?,
            None => Self::new(j.n, j.edges.iter().map(|e| (e[0], e[1])))?,
        };
        if g.n != j.n {
            return Err(Error::DimensionMismatch { expected: g.n, actual: j.n });
        }
        let given: BTreeSet<(usize, usize)> = j.edges.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
        if given != g.edges {
            return Err(Error::InvalidArgument("edge list disagrees with the factor structure".into()));
        }
        if let Some(c) = j.coords {
            if g.factors.is_none() || c != g.all_coords() {
                return Err(Error::InvalidArgument("coordinates disagree with the factor structure".into()));
            }
        }
        Ok(g)
    }
}

impl From<ConnectivityGraph> for GraphJson {
    fn from(g: ConnectivityGraph) -> Self {
        let coords = g.factors.as_ref().map(|_| g.all_coords());
        GraphJson {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
            factors: g.factors,
            coords,
        }
    }
}

impl ConnectivityGraph {
    /// Plain graph without product metadata.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph must have at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u},{v}) references a vertex >= {n}")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Self::assemble(n, set, None))
    }

    /// Product graph whose edge set is derived from `factors`.
    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSize("product needs at least one factor".into()));
        }
        let mut n: usize = 1;
        for f in &factors {
            if f.size() == 0 {
                return Err(Error::InvalidSize("factor of size 0".into()));
            }
            if let Factor::Graph { n: m, edges } = f {
                // validate the factor on its own
                Self::new(*m, edges.iter().map(|e| (e[0], e[1])))?;
            }
            n = n
                .checked_mul(f.size())
                .ok_or_else(|| Error::InvalidSize("vertex count overflows".into()))?;
        }
        let sizes: Vec<usize> = factors.iter().map(Factor::size).collect();
        let strides = strides(&sizes);
        let mut set = BTreeSet::new();
        for (axis, f) in factors.iter().enumerate() {
            let fe = f.edges();
            for v in 0..n {
                let c = (v / strides[axis]) % sizes[axis];
                for &(a, b) in &fe {
                    if a == c {
                        let w = v - a * strides[axis] + b * strides[axis];
                        set.insert((v.min(w), v.max(w)));
                    }
                }
            }
        }
        Ok(Self::assemble(n, set, Some(factors)))
    }

    fn assemble(n: usize, edges: BTreeSet<(usize, usize)>, factors: Option<Vec<Factor>>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Self { n, edges, factors, adjacency }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn factors(&self) -> Option<&[Factor]> {
        self.factors.as_deref()
    }

    /// Factor list, treating a plain graph as a single opaque factor.
    pub fn factor_list(&self) -> Vec<Factor> {
        match &self.factors {
            Some(f) => f.clone(),
            None => vec![Factor::Graph { n: self.n, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect() }],
        }
    }

    pub fn factor_sizes(&self) -> Vec<usize> {
        self.factor_list().iter().map(Factor::size).collect()
    }

    pub fn num_axes(&self) -> usize {
        self.factors.as_ref().map_or(1, Vec::len)
    }

    /// True when every factor is a line graph.
    pub fn is_grid(&self) -> bool {
        self.factors.as_ref().is_some_and(|f| f.iter().all(Factor::is_line))
    }

    pub fn coords(&self, v: usize) -> Vec<usize> {
        let sizes = self.factor_sizes();
        let st = strides(&sizes);
        sizes.iter().zip(&st).map(|(&s, &t)| (v / t) % s).collect()
    }

    pub fn vertex(&self, coords: &[usize]) -> Result<usize> {
        let sizes = self.factor_sizes();
        if coords.len() != sizes.len() {
            return Err(Error::DimensionMismatch { expected: sizes.len(), actual: coords.len() });
        }
        let mut v = 0;
        for (&c, &s) in coords.iter().zip(&sizes) {
            if c >= s {
                return Err(Error::InvalidArgument(format!("coordinate {c} out of range {s}")));
            }
            v = v * s + c;
        }
        Ok(v)
    }

    fn all_coords(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.coords(v)).collect()
    }

    /// Boustrophedon ordering of the vertices. For grids this is a
    /// Hamiltonian path; for opaque factors it falls back to index order.
    pub fn snake_order(&self) -> Vec<usize> {
        let sizes = self.factor_sizes();
        let mut out = Vec::with_capacity(self.n);
        snake_rec(&sizes, 0, &mut out);
        out
    }

    /// Whether consecutive entries of `order` are all joined by edges.
    pub fn is_path(&self, order: &[usize]) -> bool {
        order.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Partition the vertices into copies of the sub-product over `axes`.
    ///
    /// Copies are listed in row-major order of the remaining coordinates;
    /// the sites of a copy follow the snake order of the sub-product.
    pub fn copies(&self, axes: &[usize]) -> Result<Vec<Vec<usize>>> {
        let sizes = self.factor_sizes();
        let mut seen = vec![false; sizes.len()];
        for &a in axes {
            if a >= sizes.len() || seen[a] {
                return Err(Error::InvalidArgument(format!("axis {a} invalid or repeated")));
            }
            seen[a] = true;
        }
        let mut axes_sorted = axes.to_vec();
        axes_sorted.sort_unstable();
        let sub_sizes: Vec<usize> = axes_sorted.iter().map(|&a| sizes[a]).collect();
        let mut sub_order = Vec::new();
        snake_rec(&sub_sizes, 0, &mut sub_order);
        let sub_strides = strides(&sub_sizes);
        let rest: Vec<usize> = (0..sizes.len()).filter(|a| !seen[*a]).collect();
        let rest_sizes: Vec<usize> = rest.iter().map(|&a| sizes[a]).collect();
        let rest_strides = strides(&rest_sizes);
        let num_copies: usize = rest_sizes.iter().product();
        let mut out = Vec::with_capacity(num_copies);
        for copy in 0..num_copies {
            let mut coords = vec![0; sizes.len()];
            for (i, &a) in rest.iter().enumerate() {
                coords[a] = (copy / rest_strides[i]) % rest_sizes[i];
            }
            let mut sites = Vec::with_capacity(sub_order.len());
            for &local in &sub_order {
                for (i, &a) in axes_sorted.iter().enumerate() {
                    coords[a] = (local / sub_strides[i]) % sub_sizes[i];
                }
                sites.push(self.vertex(&coords)?);
            }
            out.push(sites);
        }
        Ok(out)
    }

    /// Edges along `axis` whose lower endpoint has coordinate ≡ `parity` (mod 2).
    /// Requires that axis to be a line factor; the result is a matching.
    pub fn axis_matching(&self, axis: usize, parity: usize) -> Result<Vec<(usize, usize)>> {
        let factors = self.factor_list();
        match factors.get(axis) {
            Some(Factor::Line { .. }) => {}
            _ => return Err(Error::InvalidArgument(format!("axis {axis} is not a line factor"))),
        }
        let sizes = self.factor_sizes();
        let stride = strides(&sizes)[axis];
        let mut out = Vec::new();
        for v in 0..self.n {
            let c = (v / stride) % sizes[axis];
            if c % 2 == parity % 2 && c + 1 < sizes[axis] {
                out.push((v, v + stride));
            }
        }
        Ok(out)
    }

    /// Sub-graph of the factors `axes`, as a standalone product graph.
    pub fn sub_product(&self, axes: &[usize]) -> Result<ConnectivityGraph> {
        let f = self.factor_list();
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        let picked = sorted
            .iter()
            .map(|&a| f.get(a).cloned().ok_or_else(|| Error::InvalidArgument(format!("axis {a} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(picked)
    }
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut st = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * sizes[i + 1];
    }
    st
}

fn snake_rec(sizes: &[usize], offset: usize, out: &mut Vec<usize>) {
    if sizes.is_empty() {
        out.push(offset);
        return;
    }
    let inner: usize = sizes[1..].iter().product();
    let mut sub = Vec::with_capacity(inner);
    snake_rec(&sizes[1..], 0, &mut sub);
    for c in 0..sizes[0] {
        let base = offset + c * inner;
        if c % 2 == 0 {
            out.extend(sub.iter().map(|s| base + s));
        } else {
            out.extend(sub.iter().rev().map(|s| base + s));
        }
    }
}

/// Set of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(pub BTreeSet<usize>);

impl VertexSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self(members.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

pub fn line_graph(length: usize) -> Result<ConnectivityGraph> {
    if length == 0 {
        return Err(Error::InvalidSize("line graph needs length >= 1".into()));
    }
    ConnectivityGraph::from_factors(vec![Factor::Line { size: length }])
}

pub fn cartesian_product(g: &ConnectivityGraph, h: &ConnectivityGraph) -> Result<ConnectivityGraph> {
    let mut f = g.factor_list();
    f.extend(h.factor_list());
    ConnectivityGraph::from_factors(f)
}

/// `D`-dimensional grid with equal sides.
pub fn grid(dims: usize, side: usize) -> Result<ConnectivityGraph> {
    if dims == 0 || side == 0 {
        return Err(Error::InvalidSize(format!("grid needs D >= 1 and side >= 1 (got {dims}, {side})")));
    }
    grid_with_sides(&vec![side; dims])
}

/// Grid with an individual side length per axis.
pub fn grid_with_sides(sides: &[usize]) -> Result<ConnectivityGraph> {
    if sides.is_empty() || sides.contains(&0) {
        return Err(Error::InvalidSize(format!("invalid grid sides {sides:?}")));
    }
    let mut n: usize = 1;
    for &s in sides {
        n = n.checked_mul(s).ok_or_else(|| Error::InvalidSize("grid vertex count overflows".into()))?;
    }
    ConnectivityGraph::from_factors(sides.iter().map(|&s| Factor::Line { size: s }).collect())
}

/// Graph-distance ball of radius `depth` around `seeds`.
pub fn lightcone(g: &ConnectivityGraph, seeds: &VertexSet, depth: usize) -> Result<VertexSet> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("lightcone needs at least one seed".into()));
    }
    let mut dist = vec![usize::MAX; g.n];
    let mut queue = VecDeque::new();
    for s in seeds.iter() {
        if s >= g.n {
            return Err(Error::InvalidArgument(format!("seed {s} out of range")));
        }
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == depth {
            continue;
        }
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(VertexSet::new((0..g.n).filter(|&v| dist[v] != usize::MAX)))
}

/// Exact forward support of `seeds` through the gates of `c`, which must sit on `g`.
pub fn circuit_lightcone(g: &ConnectivityGraph, c: &Circuit, seeds: &VertexSet) -> Result<VertexSet> {
    c.check_graph(g)?;
    Ok(c.lightcone(seeds))
}
