use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde::Serialize;
use serde_json::{json, Value};

use latticedesign::circuit::Circuit;
use latticedesign::clifford::PauliString;
use latticedesign::compiler::compile_to_grid;
use latticedesign::gluing::{
    kdesign_grid_plan, ExactCliffordBuilder, GluedEnsemble, GluingConstants, GluingPlan, KDesignOptions, Layout, PlanOptions,
};
use latticedesign::graphs::{grid_with_sides, ConnectivityGraph};
use latticedesign::mixing::{grid_mixing_ensemble, product_bounds, worst_case_mixing_error, EnsembleSpec, LayerKind, Mode, Strategy};
use latticedesign::rng::SeedStream;
use latticedesign::routing::{graph_ref, route_graph, rt_bound, verify_schedule, Permutation};
use latticedesign::verify::{
    frame_potential, haar_reference, lightcone_experiment, statevector_cutoff, unitary_equivalent, CliffordEnsemble, EvalPath, HaarEnsemble, UnitaryEnsemble,
};
use latticedesign::{Error, Result};

/// Build and check geometrically local random-circuit designs.
///
/// Exit status: 0 when every bound check passes, 1 on a bound violation,
/// 2 on invalid input. Diagnostics go to stderr as JSON.
/// The statevector size limit is read from LATTICEDESIGN_SV_CUTOFF.
#[derive(Parser)]
#[command(name = "latticedesign", version)]
struct Cli {
    /// Master seed; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Describe a grid: vertices, edges, factors and snake order.
    Grid(GridArg),
    /// Route a permutation with SWAP rounds and verify the schedule.
    Route {
        #[command(flatten)]
        grid: GridArg,
        /// `reversal`, `identity`, `random`, cycles like `(0 1 2)(3 4)`, or an image list `2,0,1`.
        #[arg(long)]
        perm: String,
    },
    /// Compile an all-to-all circuit onto a grid.
    Compile {
        #[command(flatten)]
        grid: GridArg,
        /// Circuit JSON.
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the compile report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Statevector equivalence trials (0 skips the check).
        #[arg(long, default_value_t = 0)]
        equiv_trials: usize,
    },
    /// Measure the Pauli-mixing error of an ensemble against its bounds.
    Mix {
        #[command(flatten)]
        grid: GridArg,
        /// Ensemble JSON; defaults to the grid mixing ensemble.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Use the exact support-pattern oracle.
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Monte Carlo samples per Q.
        #[arg(long)]
        samples: Option<usize>,
        /// Evaluate every non-identity Q.
        #[arg(long = "all-Q", conflicts_with = "q")]
        all_q: bool,
        /// A single Q, e.g. `ZIXI`.
        #[arg(long)]
        q: Option<String>,
    },
    /// Gluing plans and circuits.
    Glue {
        #[command(subcommand)]
        cmd: GlueCmd,
    },
    /// Numerical oracles.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    /// Parameter sweeps as CSV.
    Sweep {
        #[command(subcommand)]
        cmd: SweepCmd,
    },
}

#[derive(Args, Clone)]
struct GridArg {
    /// `D,side`.
    #[arg(long, value_parser = parse_grid)]
    grid: (usize, usize),
}

#[derive(Args, Clone)]
struct GlueArgs {
    #[command(flatten)]
    grid: GridArg,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Patch size; defaults to the formula.
    #[arg(long)]
    xi: Option<usize>,
    #[arg(long)]
    wraparound: Option<bool>,
    #[arg(long, default_value_t = 0)]
    slack: usize,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    c3: f64,
    #[arg(long, default_value_t = 1.0)]
    c_weak: f64,
}

#[derive(Subcommand)]
enum GlueCmd {
    /// The four-step plan.
    Plan(GlueArgs),
    /// Sample the plan's circuit.
    Build(GlueArgs),
    /// Depth accounting only.
    Depth(GlueArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Clifford,
    Statevector,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Clifford,
    Haar,
    /// The gluing protocol with exact Cliffords in every step.
    Glued,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Lightcone lower-bound experiment on a brickwork Clifford ensemble.
    Lightcone {
        #[command(flatten)]
        grid: GridArg,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = PathArg::Clifford)]
        path: PathArg,
        /// Also run the Haar reference at this many qubits.
        #[arg(long)]
        haar_n: Option<usize>,
    },
    /// Frame potential of an ensemble.
    Frame {
        #[arg(long, value_enum, default_value_t = EnsembleArg::Clifford)]
        ensemble: EnsembleArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 10000)]
        pairs: usize,
    },
    /// Unitary equivalence of two circuits.
    Equiv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Worst observed routing rounds against the product bound.
    Routing {
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// k-design plan depth and the share taken by the global 2-designs.
    Kdesign {
        #[arg(long, default_value_t = 1)]
        dims: usize,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Lightcone experiment over brickwork depths.
    Lightcone {
        #[command(flatten)]
        grid: GridArg,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        depths: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Exact weight-one mixing error of grid ensembles against the general bound.
    Mixing {
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        sides: Vec<usize>,
    },
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [d, side] = parts.as_slice() else {
        return Err(format!("expected D,side, got {s:?}"));
    };
    let d: usize = d.parse().map_err(|e| format!("bad D {d:?}: {e}"))?;
    let side: usize = side.parse().map_err(|e| format!("bad side {side:?}: {e}"))?;
    if d == 0 || side == 0 {
        return Err("D and side must be positive".into());
    }
    Ok((d, side))
}

fn build_grid(g: &GridArg) -> Result<ConnectivityGraph> {
    grid_with_sides(&vec![g.grid.1; g.grid.0])
}

/// Main output plus whether every bound check passed.
enum Output {
    Json(Value),
    Csv(String),
}

struct Run {
    out: Output,
    pass: bool,
    extra: Vec<(PathBuf, String)>,
}

impl Run {
    fn json<T: Serialize>(v: &T, pass: bool) -> Result<Self> {
        Ok(Self { out: Output::Json(serde_json::to_value(v)?), pass, extra: Vec::new() })
    }
}

fn read_circuit(p: &PathBuf) -> Result<Circuit> {
    Ok(serde_json::from_str(&fs::read_to_string(p)?)?)
}

fn glue_plan(a: &GlueArgs) -> Result<latticedesign::gluing::KDesignPlan> {
    let constants = GluingConstants { slack: a.slack, c1: a.c1, c2: a.c2, c3: a.c3, c_weak: a.c_weak };
    kdesign_grid_plan(a.grid.grid.0, a.grid.grid.1, a.k, a.eps, &KDesignOptions { constants, wraparound: a.wraparound, xi: a.xi })
}

fn brickwork_ensemble(g: &ConnectivityGraph, depth: usize) -> Result<EnsembleSpec> {
    EnsembleSpec::global(g.clone(), LayerKind::Brickwork { depth })
}

fn run(cli: &Cli) -> Result<Run> {
    let seeds = SeedStream::new(cli.seed);
    match &cli.cmd {
        Cmd::Grid(ga) => {
            let g = build_grid(ga)?;
            let v = json!({
                "graph": graph_ref(&g),
                "n": g.num_vertices(),
                "num_edges": g.num_edges(),
                "factors": g.factor_list(),
                "snake_order": g.snake_order(),
                "edges": g.edges(),
                "routing_bound": rt_bound(&g)?,
                "seed": cli.seed,
            });
            Ok(Run { out: Output::Json(v), pass: true, extra: Vec::new() })
        }
        Cmd::Route { grid, perm } => {
            let g = build_grid(grid)?;
            let n = g.num_vertices();
            let pi = if perm == "random" {
                let mut images: Vec<usize> = (0..n).collect();
                images.shuffle(&mut seeds.substream(0));
                Permutation::from_images(images)?
            } else {
                Permutation::parse(perm, n)?
            };
            let s = route_graph(&g, &pi)?;
            let check = verify_schedule(&g, &pi, &s);
            let bound = rt_bound(&g)?;
            let pass = check.ok && s.num_rounds() <= bound;
            let v = json!({
                "schedule": s,
                "num_rounds": s.num_rounds(),
                "num_swaps": s.num_swaps(),
                "bound": bound,
                "check": check,
                "seed": cli.seed,
            });
            Ok(Run { out: Output::Json(v), pass, extra: Vec::new() })
        }
        Cmd::Compile { grid, input, report, equiv_trials } => {
            let g = build_grid(grid)?;
            let c = read_circuit(input)?;
            let compiled = compile_to_grid(&c, &g)?;
            let mut pass = compiled.report.within_bound;
            let equiv = if *equiv_trials > 0 {
                let e = unitary_equivalent(&c, &compiled.circuit, *equiv_trials, 1e-10, &seeds)?;
                pass &= e.equivalent;
                Some(e)
            } else {
                None
            };
            let rep = json!({ "report": compiled.report, "equivalence": equiv, "seed": cli.seed });
            let mut run = Run::json(&compiled.circuit, pass)?;
            match report {
                Some(p) => run.extra.push((p.clone(), serde_json::to_string_pretty(&rep)? + "\n")),
                None => eprintln!("{}", serde_json::to_string(&rep)?),
            }
            Ok(run)
        }
        Cmd::Mix { grid, spec, exact, samples, all_q, q } => {
            let spec = match spec {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => grid_mixing_ensemble(grid.grid.0, grid.grid.1)?,
            };
            let mode = match (exact, samples) {
                (_, Some(s)) => Mode::Samples(*s),
                _ => Mode::Exact,
            };
            let n = spec.num_qubits();
            let (tv, allowance, argmax, evaluated, strategy) = if let Some(q) = q {
                let q: PauliString = q.parse()?;
                if q.num_qubits() != n {
                    return Err(Error::DimensionMismatch { expected: n, actual: q.num_qubits() });
                }
                let r = latticedesign::mixing::mixing_report(&spec, &q, mode, cli.seed)?;
                (r.tv, r.allowance, r.q, 1, "single".to_string())
            } else {
                let strategy = if *all_q { Strategy::Exhaustive } else { Strategy::Weight1 };
                let name = if *all_q { "exhaustive" } else { "weight1" }.to_string();
                let w = worst_case_mixing_error(&spec, strategy, mode, &seeds)?;
                (w.tv, w.allowance, w.argmax, w.evaluated, name)
            };
            let (general, simplified) = product_bounds(&spec);
            let pass = general.is_none_or(|b| tv - allowance <= b);
            let v = json!({
                "graph": graph_ref(spec.graph()),
                "n": n,
                "mode": mode,
                "strategy": strategy,
                "evaluated": evaluated,
                "eps_star": tv,
                "allowance": allowance,
                "argmax_Q": argmax,
                "bound_general": general,
                "bound_simplified": simplified,
                "declared_error": spec.declared_error(),
                "depth": spec.declared_depth(),
                "pass": pass,
                "seed": cli.seed,
            });
            Ok(Run { out: Output::Json(v), pass, extra: Vec::new() })
        }
        Cmd::Glue { cmd } => match cmd {
            GlueCmd::Plan(a) => {
                let kp = glue_plan(a)?;
                Run::json(&json!({ "plan": kp.plan, "seed": cli.seed }), true)
            }
            GlueCmd::Depth(a) => {
                let kp = glue_plan(a)?;
                Run::json(&json!({ "depth": kp.depth, "flags": kp.plan.flags, "constants": kp.plan.constants, "seed": cli.seed }), true)
            }
            GlueCmd::Build(a) => {
                let kp = glue_plan(a)?;
                let built = kp.build(&seeds)?;
                let exact = built.steps.iter().map(|s| s.depth).sum::<usize>() == built.circuit.depth();
                let pass = exact && built.circuit.depth() <= kp.depth.total;
                Run::json(&json!({ "plan": kp.plan, "steps": built.steps, "depth": built.circuit.depth(), "circuit": built.circuit, "seed": cli.seed }), pass)
            }
        },
        Cmd::Verify { cmd } => match cmd {
            VerifyCmd::Lightcone { grid, depth, samples, path, haar_n } => {
                let g = build_grid(grid)?;
                let path = match path {
                    PathArg::Clifford => EvalPath::Clifford,
                    PathArg::Statevector => EvalPath::Statevector,
                };
                let r = lightcone_experiment(&brickwork_ensemble(&g, *depth)?, &g, *samples, path, &seeds)?;
                let mut pass = r.pass;
                let haar = match haar_n {
                    Some(n) => {
                        let h = haar_reference(*n, *samples, &seeds.child(1))?;
                        pass &= h.pass;
                        Some(h)
                    }
                    None => None,
                };
                Run::json(&json!({ "lightcone": r, "haar": haar, "seed": cli.seed }), pass)
            }
            VerifyCmd::Frame { ensemble, n, k, pairs } => {
                let plan;
                let glued;
                let ens: &dyn UnitaryEnsemble = match ensemble {
                    EnsembleArg::Clifford => &CliffordEnsemble(*n),
                    EnsembleArg::Haar => &HaarEnsemble(*n),
                    EnsembleArg::Glued => {
                        plan = GluingPlan::new(Layout::AllToAll { n: *n }, 1.max(*n / 4), Some(*k as usize), 0.1, &PlanOptions::default())?;
                        glued = GluedEnsemble { plan: &plan, global: &ExactCliffordBuilder, patch: &ExactCliffordBuilder };
                        &glued
                    }
                };
                let r = frame_potential(ens, *k, *pairs, &seeds)?;
                // Cliffords are exact 3-designs only; beyond that the comparison is informational
                let design = matches!(ensemble, EnsembleArg::Haar) || *k <= 3;
                let pass = !design || r.matches_haar();
                Run::json(&json!({ "frame": r, "compared": design, "pass": pass }), pass)
            }
            VerifyCmd::Equiv { a, b, trials, tol } => {
                let (ca, cb) = (read_circuit(a)?, read_circuit(b)?);
                if ca.num_qubits() > statevector_cutoff() {
                    return Err(Error::UnsupportedSize(format!("{} qubits exceeds the statevector cutoff {}", ca.num_qubits(), statevector_cutoff())));
                }
                let e = unitary_equivalent(&ca, &cb, *trials, *tol, &seeds)?;
                let pass = e.equivalent;
                Run::json(&json!({ "equivalence": e, "seed": cli.seed }), pass)
            }
        },
        Cmd::Sweep { cmd } => sweep(cmd, &seeds),
    }
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn sweep(cmd: &SweepCmd, seeds: &SeedStream) -> Result<Run> {
    let mut pass = true;
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match cmd {
        SweepCmd::Routing { dims, sides, samples } => {
            let mut rows = Vec::new();
            for (i, &side) in sides.iter().enumerate() {
                let g = grid_with_sides(&vec![side; *dims])?;
                let n = g.num_vertices();
                let bound = rt_bound(&g)?;
                let mut rng = seeds.substream(i as u64);
                let mut worst = 0;
                let mut ok = true;
                for _ in 0..*samples {
                    let mut images: Vec<usize> = (0..n).collect();
                    images.shuffle(&mut rng);
                    let pi = Permutation::from_images(images)?;
                    let s = route_graph(&g, &pi)?;
                    ok &= verify_schedule(&g, &pi, &s).ok;
                    worst = worst.max(s.num_rounds());
                }
                let row_pass = ok && worst <= bound;
                pass &= row_pass;
                rows.push(vec![dims.to_string(), side.to_string(), samples.to_string(), worst.to_string(), bound.to_string(), row_pass.to_string()]);
            }
            (vec!["D", "side", "samples", "estimate", "bound", "pass"], rows)
        }
        SweepCmd::Kdesign { dims, sides, k, eps } => {
            let mut rows = Vec::new();
            for &side in sides {
                let kp = kdesign_grid_plan(*dims, side, *k, *eps, &KDesignOptions::default())?;
                let d = &kp.depth;
                rows.push(vec![
                    dims.to_string(),
                    side.to_string(),
                    k.to_string(),
                    eps.to_string(),
                    kp.plan.xi.to_string(),
                    kp.plan.m.to_string(),
                    d.global_depth.to_string(),
                    format!("{:.6}", d.global_share),
                    d.total.to_string(),
                    String::new(),
                    true.to_string(),
                ]);
            }
            (vec!["D", "side", "k", "eps", "xi", "m", "global_depth", "global_share", "estimate", "bound", "pass"], rows)
        }
        SweepCmd::Lightcone { grid, depths, samples } => {
            let g = build_grid(grid)?;
            let mut rows = Vec::new();
            for &depth in depths {
                let r = lightcone_experiment(&brickwork_ensemble(&g, depth)?, &g, *samples, EvalPath::Clifford, &seeds.child(depth as u64))?;
                pass &= r.pass;
                rows.push(vec![
                    grid.grid.0.to_string(),
                    grid.grid.1.to_string(),
                    depth.to_string(),
                    samples.to_string(),
                    format!("{:.6}", r.estimate),
                    format!("{:.6}", r.bounds["max_lightcone_fraction"]),
                    r.pass.to_string(),
                ]);
            }
            (vec!["D", "side", "depth", "samples", "estimate", "bound", "pass"], rows)
        }
        SweepCmd::Mixing { dims, sides } => {
            let mut rows = Vec::new();
            for &side in sides {
                let spec = grid_mixing_ensemble(*dims, side)?;
                let w = worst_case_mixing_error(&spec, Strategy::Weight1, Mode::Exact, seeds)?;
                let (general, _) = product_bounds(&spec);
                let row_pass = general.is_none_or(|b| w.tv <= b);
                pass &= row_pass;
                rows.push(vec![
                    dims.to_string(),
                    side.to_string(),
                    format!("{:.9}", w.tv),
                    general.map_or("".into(), |b| format!("{b:.9}")),
                    row_pass.to_string(),
                ]);
            }
            (vec!["D", "side", "estimate", "bound", "pass"], rows)
        }
    };
    Ok(Run { out: Output::Csv(csv_table(&header, rows)?), pass, extra: Vec::new() })
}

fn diagnostic(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            diagnostic("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let result = run(&cli).and_then(|r| {
        let text = match &r.out {
            Output::Json(v) => serde_json::to_string_pretty(v)? + "\n",
            Output::Csv(s) => s.clone(),
        };
        match &cli.out {
            Some(p) => fs::write(p, text)?,
            None => print!("{text}"),
        }
        for (p, t) in &r.extra {
            fs::write(p, t)?;
        }
        Ok(r.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            diagnostic("bound-violation", "a bound check failed; see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            diagnostic(e.kind(), &e.to_string());
            ExitCode::from(2)
        }
    }
}
