//! Small-scale numerical oracles: statevector simulation, unitary
//! equivalence, Haar sampling, frame potentials and the lightcone experiment.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis label.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford::{CliffordTableau, Letter, PauliString};
use crate::error::{Error, Result};
use crate::graphs::{circuit_lightcone, lightcone, ConnectivityGraph, VertexSet};
use crate::mixing::EnsembleSpec;
use crate::rng::{SeedStream, Stream};

pub const QUBIT_ORDER: &str = "qubit 0 is the most significant bit of basis labels";
pub const DEFAULT_CUTOFF: usize = 12;
/// Environment variable overriding [`DEFAULT_CUTOFF`].
pub const CUTOFF_ENV: &str = "LATTICEDESIGN_SV_CUTOFF";
const UNITARY_TOL: f64 = 1e-10;

/// Largest qubit count simulated densely.
pub fn statevector_cutoff() -> usize {
    std::env::var(CUTOFF_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_CUTOFF)
}

fn check_cutoff(n: usize) -> Result<()> {
    let c = statevector_cutoff();
    if n > c {
        return Err(Error::UnsupportedSize(format!("statevector simulation limited to {c} qubits, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, label: usize) -> Result<Self> {
        check_cutoff(n)?;
        if label >= 1 << n {
            return Err(Error::InvalidArgument(format!("basis label {label} out of range for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[label] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("{len} amplitudes is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        check_cutoff(n)?;
        let s = Self { n, amps };
        if (s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("state has norm {}", s.norm())));
        }
        Ok(s)
    }

    /// Tensor product of independent Haar-random single-qubit states.
    pub fn random_product<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_cutoff(n)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for _ in 0..n {
            let v: [C64; 2] = std::array::from_fn(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * v[0] / norm);
                next.push(a * v[1] / norm);
            }
            amps = next;
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply_1q(&mut self, m: &[C64; 4], q: usize) {
        let s = self.bit(q);
        for i in 0..self.amps.len() {
            if i & s == 0 {
                let (a, b) = (self.amps[i], self.amps[i | s]);
                self.amps[i] = m[0] * a + m[1] * b;
                self.amps[i | s] = m[2] * a + m[3] * b;
            }
        }
    }

    fn apply_2q(&mut self, m: &[C64; 16], q0: usize, q1: usize) {
        let (s0, s1) = (self.bit(q0), self.bit(q1));
        for i in 0..self.amps.len() {
            if i & (s0 | s1) == 0 {
                let idx = [i, i | s1, i | s0, i | s0 | s1];
                let v = idx.map(|k| self.amps[k]);
                for r in 0..4 {
                    self.amps[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
                }
            }
        }
    }

    /// Apply a Pauli string (including its phase).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let c = |re, im| C64::new(re, im);
        for q in 0..self.n {
            let m = match p.letter(q) {
                Letter::I => continue,
                Letter::X => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
                Letter::Y => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
                Letter::Z => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            };
            self.apply_1q(&m, q);
        }
        let ph = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase() as usize];
        self.amps.iter_mut().for_each(|a| *a *= ph);
    }
}

/// Gate matrices unpacked once per circuit.
enum Op {
    One([C64; 4], usize),
    Two([C64; 16], usize, usize),
}

fn compile_ops(c: &Circuit) -> Result<Vec<Op>> {
    let mut ops = Vec::with_capacity(c.gate_count());
    for g in c.gates() {
        let m = g.matrix().ok_or_else(|| Error::UnsupportedGate(format!("gate {} has no matrix", g.label())))?;
        let dim = m.nrows();
        let dev = (m.adjoint() * &m - DMatrix::<C64>::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary { label: g.label().to_string(), deviation: dev });
        }
        ops.push(if dim == 2 {
            Op::One(std::array::from_fn(|k| m[(k / 2, k % 2)]), g.qubits[0])
        } else {
            Op::Two(std::array::from_fn(|k| m[(k / 4, k % 4)]), g.qubits[0], g.qubits[1])
        });
    }
    Ok(ops)
}

fn run_ops(ops: &[Op], s: &mut StateVector) {
    for op in ops {
        match op {
            Op::One(m, q) => s.apply_1q(m, *q),
            Op::Two(m, a, b) => s.apply_2q(m, *a, *b),
        }
    }
}

/// Apply `c` to `input`, layer by layer.
pub fn simulate(c: &Circuit, input: &StateVector) -> Result<StateVector> {
    if c.num_qubits() != input.n {
        return Err(Error::DimensionMismatch { expected: c.num_qubits(), actual: input.n });
    }
    check_cutoff(input.n)?;
    let ops = compile_ops(c)?;
    let mut s = input.clone();
    run_ops(&ops, &mut s);
    Ok(s)
}

/// Dense unitary of a circuit, column `k` being the image of basis state `k`.
pub fn circuit_unitary(c: &Circuit) -> Result<DMatrix<C64>> {
    let n = c.num_qubits();
    check_cutoff(n)?;
    let ops = compile_ops(c)?;
    let d = 1 << n;
    let mut u = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut s = StateVector::basis(n, k)?;
        run_ops(&ops, &mut s);
        for (r, a) in s.amps.iter().enumerate() {
            u[(r, k)] = *a;
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub trials: usize,
    /// Smallest `|⟨c1 ψ|c2 ψ⟩|²` over the trial inputs.
    pub min_fidelity: f64,
    /// Largest spread of the overlap phase across inputs.
    pub phase_spread: f64,
}

/// Compare `c1` and `c2` on `trials` random product inputs, up to one global phase.
pub fn unitary_equivalent(c1: &Circuit, c2: &Circuit, trials: usize, tol: f64, seeds: &SeedStream) -> Result<Equivalence> {
    if c1.num_qubits() != c2.num_qubits() {
        return Err(Error::DimensionMismatch { expected: c1.num_qubits(), actual: c2.num_qubits() });
    }
    let n = c1.num_qubits();
    check_cutoff(n)?;
    let (o1, o2) = (compile_ops(c1)?, compile_ops(c2)?);
    let overlaps: Vec<C64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let input = StateVector::random_product(n, &mut seeds.substream(i)).expect("size checked");
            let mut a = input.clone();
            let mut b = input;
            run_ops(&o1, &mut a);
            run_ops(&o2, &mut b);
            a.inner(&b)
        })
        .collect();
    let min_fidelity = overlaps.iter().map(|o| o.norm_sqr()).fold(1.0, f64::min);
    let phase_spread = match overlaps.first() {
        Some(o0) if o0.norm() > 0.5 => {
            let r = o0 / o0.norm();
            overlaps.iter().map(|o| if o.norm() > 0.0 { (o / o.norm() - r).norm() } else { 2.0 }).fold(0.0, f64::max)
        }
        Some(_) => 2.0,
        None => 0.0,
    };
    let phase_tol = tol.sqrt().max(1e-12);
    Ok(Equivalence { equivalent: min_fidelity >= 1.0 - tol && phase_spread <= phase_tol, trials, min_fidelity, phase_spread })
}

/// Haar-random `d × d` unitary via QR of a complex Gaussian matrix with the phases of `R`'s diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// One draw from a unitary ensemble, in whichever form is cheapest.
#[derive(Debug, Clone)]
pub enum Draw {
    Tableau(CliffordTableau),
    Circuit(Circuit),
    Matrix(DMatrix<C64>),
}

pub trait UnitaryEnsemble: Sync {
    fn num_qubits(&self) -> usize;
    fn draw(&self, rng: &mut Stream) -> Result<Draw>;
}

/// The uniform Clifford group on `n` qubits.
pub struct CliffordEnsemble(pub usize);

impl UnitaryEnsemble for CliffordEnsemble {
    fn num_qubits(&self) -> usize {
        self.0
    }
    fn draw(&self, rng: &mut Stream) -> Result<Draw> {
        Ok(Draw::Tableau(CliffordTableau::sample_uniform(self.0, rng)?))
    }
}

/// Haar measure on `U(2^n)`.
pub struct HaarEnsemble(pub usize);

impl UnitaryEnsemble for HaarEnsemble {
    fn num_qubits(&self) -> usize {
        self.0
    }
    fn draw(&self, rng: &mut Stream) -> Result<Draw> {
        check_cutoff(self.0)?;
        Ok(Draw::Matrix(haar_unitary(1 << self.0, rng)))
    }
}

/// One fixed unitary.
pub struct PointEnsemble(pub Circuit);

impl UnitaryEnsemble for PointEnsemble {
    fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }
    fn draw(&self, _rng: &mut Stream) -> Result<Draw> {
        Ok(Draw::Circuit(self.0.clone()))
    }
}

impl UnitaryEnsemble for EnsembleSpec {
    fn num_qubits(&self) -> usize {
        EnsembleSpec::num_qubits(self)
    }
    fn draw(&self, rng: &mut Stream) -> Result<Draw> {
        Ok(Draw::Circuit(self.sample_circuit(rng)))
    }
}

enum Resolved {
    Tableau(CliffordTableau),
    Matrix(DMatrix<C64>),
}

fn resolve(d: Draw) -> Result<Resolved> {
    Ok(match d {
        Draw::Tableau(t) => Resolved::Tableau(t),
        Draw::Matrix(m) => Resolved::Matrix(m),
        Draw::Circuit(c) if c.is_clifford() => Resolved::Tableau(c.tableau()?),
        Draw::Circuit(c) => Resolved::Matrix(circuit_unitary(&c)?),
    })
}

fn dense_of_tableau(t: &CliffordTableau) -> Result<DMatrix<C64>> {
    circuit_unitary(&crate::clifford::synthesize_line(t))
}

/// `|tr(U V†)|²`.
fn trace_overlap_sq(u: Resolved, v: Resolved) -> Result<f64> {
    match (u, v) {
        (Resolved::Tableau(a), Resolved::Tableau(b)) => CliffordTableau::compose(&a, &b.inverse())?.trace_norm_sq(),
        (a, b) => {
            let ma = match a {
                Resolved::Matrix(m) => m,
                Resolved::Tableau(t) => dense_of_tableau(&t)?,
            };
            let mb = match b {
                Resolved::Matrix(m) => m,
                Resolved::Tableau(t) => dense_of_tableau(&t)?,
            };
            let tr: C64 = (0..ma.nrows()).map(|i| (0..ma.ncols()).map(|j| ma[(i, j)] * mb[(i, j)].conj()).sum::<C64>()).sum();
            Ok(tr.norm_sqr())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub k: u32,
    pub n: usize,
    pub pairs: usize,
    pub estimate: f64,
    pub std_err: f64,
    /// Three standard errors.
    pub allowance: f64,
    /// `k!`, meaningful when `2^n ≥ k`.
    pub haar_value: f64,
    pub seed: u64,
}

impl FrameReport {
    pub fn matches_haar(&self) -> bool {
        (self.estimate - self.haar_value).abs() <= self.allowance
    }
}

/// Monte Carlo estimate of `E |tr(U V†)|^{2k}` over independent pairs.
pub fn frame_potential(ens: &dyn UnitaryEnsemble, k: u32, pairs: usize, seeds: &SeedStream) -> Result<FrameReport> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("frame potential needs at least one pair".into()));
    }
    let values: Vec<f64> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds.substream(i);
            let u = resolve(ens.draw(&mut rng)?)?;
            let v = resolve(ens.draw(&mut rng)?)?;
            Ok(trace_overlap_sq(u, v)?.powi(k as i32))
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_stderr(&values);
    Ok(FrameReport {
        k,
        n: ens.num_qubits(),
        pairs,
        estimate: mean,
        std_err: se,
        allowance: 3.0 * se,
        haar_value: (1..=k as u64).product::<u64>() as f64,
        seed: seeds.master(),
    })
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub samples: usize,
    pub estimate: f64,
    pub std_err: f64,
    pub allowance: f64,
    pub bounds: BTreeMap<String, f64>,
    pub pass: bool,
    pub qubit_order: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    /// Propagate `Z₀` through the tableau: value `wt_X(U† Z₀ U) / n`.
    Clifford,
    /// Build `U† Z₀ U |0ⁿ⟩` densely and measure `M`.
    Statevector,
}

/// Per-sample record of the lightcone experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightconeSample {
    pub value: f64,
    /// `|lightcone of qubit 0 under U†| / n`.
    pub bound: f64,
}

/// `⟨ψ| M |ψ⟩` with `M = Σ_s (|s|/n) |s⟩⟨s|`.
pub fn hamming_weight_expectation(s: &StateVector) -> f64 {
    let n = s.n as f64;
    s.amps.iter().enumerate().map(|(k, a)| a.norm_sqr() * k.count_ones() as f64 / n).sum()
}

/// Value of the `M`-experiment on one circuit.
pub fn lightcone_value(c: &Circuit, path: EvalPath) -> Result<f64> {
    let n = c.num_qubits();
    let z0 = PauliString::single(n, 0, Letter::Z);
    match path {
        EvalPath::Clifford => Ok(c.heisenberg(&z0)?.x_weight() as f64 / n as f64),
        EvalPath::Statevector => {
            let mut s = simulate(c, &StateVector::zero(n)?)?;
            s.apply_pauli(&z0);
            Ok(hamming_weight_expectation(&simulate(&c.inverse()?, &s)?))
        }
    }
}

/// Per-sample values and lightcone bounds for circuits drawn from `ens` on `g`.
pub fn lightcone_samples(ens: &EnsembleSpec, g: &ConnectivityGraph, samples: usize, path: EvalPath, seeds: &SeedStream) -> Result<Vec<LightconeSample>> {
    let n = g.num_vertices();
    let seed = VertexSet::new([0]);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = ens.sample_circuit(&mut seeds.substream(i));
            // U†Z₀U is supported on the cone of the gates read last to first
            let rev = c.inverse().unwrap_or_else(|_| c.clone());
            let cone = circuit_lightcone(g, &rev, &seed)?;
            Ok(LightconeSample { value: lightcone_value(&c, path)?, bound: cone.len() as f64 / n as f64 })
        })
        .collect()
}

/// The lower-bound experiment: estimate `E ⟨0|U†Z₀U M U†Z₀U|0⟩` and check
/// every sample against its lightcone bound.
pub fn lightcone_experiment(ens: &EnsembleSpec, g: &ConnectivityGraph, samples: usize, path: EvalPath, seeds: &SeedStream) -> Result<ExperimentReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("lightcone experiment needs at least one sample".into()));
    }
    let n = g.num_vertices();
    let rows = lightcone_samples(ens, g, samples, path, seeds)?;
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (mean, se) = mean_and_stderr(&values);
    let tol = if path == EvalPath::Clifford { 0.0 } else { 1e-9 };
    let pass = rows.iter().all(|r| r.value <= r.bound + tol);
    let depth = ens.declared_depth();
    let dims = g.num_axes() as i32;
    let ball = lightcone(g, &VertexSet::new([0]), depth)?.len() as f64;
    let mut bounds = BTreeMap::new();
    bounds.insert("max_lightcone_fraction".into(), rows.iter().map(|r| r.bound).fold(0.0, f64::max));
    bounds.insert("ball_fraction".into(), ball / n as f64);
    bounds.insert("ball_bound_2d_plus_1".into(), ((2 * depth + 1) as f64).powi(dims) / n as f64);
    bounds.insert("ball_bound_2d".into(), ((2 * depth) as f64).powi(dims) / n as f64);
    bounds.insert("haar_floor".into(), 0.5);
    let mut parameters = BTreeMap::new();
    parameters.insert("n".into(), n.into());
    parameters.insert("depth".into(), depth.into());
    parameters.insert("path".into(), serde_json::to_value(path)?);
    parameters.insert("graph".into(), crate::routing::graph_ref(g).into());
    Ok(ExperimentReport {
        experiment: "lightcone".into(),
        parameters,
        seed: seeds.master(),
        samples,
        estimate: mean,
        std_err: se,
        allowance: 3.0 * se,
        bounds,
        pass,
        qubit_order: QUBIT_ORDER.into(),
    })
}

/// `d² / (2(d² − 1))` with `d = 2^n`, the Haar value of the `M`-experiment.
pub fn haar_lightcone_value(n: usize) -> f64 {
    let d2 = 4f64.powi(n as i32);
    d2 / (2.0 * (d2 - 1.0))
}

/// Monte Carlo Haar estimate of the `M`-experiment.
pub fn haar_reference(n: usize, samples: usize, seeds: &SeedStream) -> Result<ExperimentReport> {
    check_cutoff(n)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("Haar reference needs at least one sample".into()));
    }
    let d = 1usize << n;
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_unitary(d, &mut seeds.substream(i));
            // ψ = U† Z₀ U |0⟩; Z₀ flips the sign of the upper half of the labels
            let mut col: Vec<C64> = (0..d).map(|r| u[(r, 0)]).collect();
            for (r, a) in col.iter_mut().enumerate() {
                if r >= d / 2 {
                    *a = -*a;
                }
            }
            let psi: Vec<C64> = (0..d).map(|r| (0..d).map(|k| u[(k, r)].conj() * col[k]).sum()).collect();
            hamming_weight_expectation(&StateVector { n, amps: psi })
        })
        .collect();
    let (mean, se) = mean_and_stderr(&values);
    let mut bounds = BTreeMap::new();
    bounds.insert("haar_floor".into(), 0.5);
    bounds.insert("haar_exact".into(), haar_lightcone_value(n));
    let mut parameters = BTreeMap::new();
    parameters.insert("n".into(), n.into());
    Ok(ExperimentReport {
        experiment: "haar_reference".into(),
        parameters,
        seed: seeds.master(),
        samples,
        estimate: mean,
        std_err: se,
        allowance: 3.0 * se,
        bounds,
        pass: mean >= 0.5 - 3.0 * se,
        qubit_order: QUBIT_ORDER.into(),
    })
}
