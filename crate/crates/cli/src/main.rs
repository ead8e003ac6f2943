//! Command-line front end: graph files in, JSON reports and CSV
//! trajectories out.
//!
//! Exit codes: 0 on success, 1 when a requested certification fails its
//! tolerance, 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use skewlv::dynamics::{self, Observable};
use skewlv::graph::{
    aut_order_decomposed, automorphisms_brute, find_isomorphism, SkewGraph, WeightVector,
    BRUTE_FORCE_LIMIT,
};
use skewlv::io::{graph_from_json_str, GraphJson};
use skewlv::lax::{self, CloneLayout, PolyMatrix};
use skewlv::lv::LvSystem;
use skewlv::{families, sampling, Rat};

#[derive(Parser)]
#[command(
    name = "skewlv",
    version,
    about = "Skew-symmetric graphs, their Lotka-Volterra systems, and Lax pair certification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a named family graph (km N | bogo N K | lv_n0 N | open_km N).
    Families {
        /// Family name: km, bogo, lv_n0 or open_km.
        name: String,
        /// Family parameters, e.g. `6` or `6 2`.
        params: Vec<usize>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Clone a graph file using its `weights` entry.
    Clone {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Quotient a graph by equal adjacency rows; reports quotient, classes
    /// and the projection. With -o, also writes the quotient (with its
    /// weights) as a loadable graph file.
    Declone {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Automorphism group order, generators, and the clone-class
    /// decomposition.
    Aut {
        input: PathBuf,
        /// Respect the file's weight vector.
        #[arg(long)]
        weighted: bool,
    },
    /// Decide isomorphism of two graph files; prints an explicit map when
    /// one exists.
    Iso { a: PathBuf, b: PathBuf },
    /// Exact rank and Casimir exponent basis of the LV system.
    Casimirs { input: PathBuf },
    /// Integrate the LV system and certify conservation of the requested
    /// observables.
    Simulate {
        input: PathBuf,
        /// Initial point, comma separated; random in [0.5,1.5]^n when
        /// omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Write the trajectory as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Checks to run: any of h, casimirs, ratios, lax.
        #[arg(long, value_delimiter = ',', default_value = "h,casimirs")]
        check: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative drift tolerance for h and casimirs.
        #[arg(long, default_value_t = 1e-6)]
        tol_drift: f64,
        /// Relative drift tolerance for clone ratios.
        #[arg(long, default_value_t = 1e-8)]
        tol_ratio: f64,
        /// Relative drift tolerance for Lax spectral invariants.
        #[arg(long, default_value_t = 1e-5)]
        tol_invariant: f64,
    },
    /// Certify the Lax equation residual for a Bogoyavlenskij family.
    LaxVerify {
        /// Family spec: `bogo N K` or `km N`.
        #[arg(long, num_args = 2..=3, required = true)]
        family: Vec<String>,
        /// Clone weights for pullback/block modes (default all ones).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, value_enum, default_value_t = LaxMode::Base)]
        mode: LaxMode,
        /// Spectral parameter samples.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-2,-1,1,2,3"
        )]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LaxMode {
    Base,
    Pullback,
    Block,
}

/// Input or usage problem; always maps to exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<ExitCode, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Families { name, params, out } => cmd_families(&name, &params, out.as_deref()),
        Cmd::Clone { input, out } => cmd_clone(&input, out.as_deref()),
        Cmd::Declone { input, out } => cmd_declone(&input, out.as_deref()),
        Cmd::Aut { input, weighted } => cmd_aut(&input, weighted),
        Cmd::Iso { a, b } => cmd_iso(&a, &b),
        Cmd::Casimirs { input } => cmd_casimirs(&input),
        Cmd::Simulate {
            input,
            x0,
            dt,
            steps,
            csv,
            check,
            seed,
            tol_drift,
            tol_ratio,
            tol_invariant,
        } => cmd_simulate(SimulateArgs {
            input,
            x0,
            dt,
            steps,
            csv,
            check,
            seed,
            tol_drift,
            tol_ratio,
            tol_invariant,
        }),
        Cmd::LaxVerify {
            family,
            weights,
            points,
            mode,
            lambdas,
            seed,
            tol,
        } => cmd_lax_verify(&family, weights, points, mode, &lambdas, seed, tol),
    }
}

fn load_graph(path: &Path) -> Result<(SkewGraph<Rat>, WeightVector), UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    graph_from_json_str(&text).map_err(|e| UsageError(format!("in {}: {e}", path.display())))
}

fn emit_graph(json: &GraphJson, out: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(json).expect("graph serializes");
    match out {
        Some(path) => fs::write(path, text + "\n")
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit_json(value: &Value) -> ExitCode {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializes")
    );
    ExitCode::SUCCESS
}

fn cmd_families(name: &str, params: &[usize], out: Option<&Path>) -> CmdResult {
    let graph = match (name, params) {
        ("km", [n]) => families::km(*n)?,
        ("bogo", [n, k]) => families::bogo(*n, *k)?,
        ("lv_n0", [n]) => families::lv_n0(*n)?,
        ("open_km", [n]) => families::open_km(*n)?,
        _ => {
            return Err(UsageError(format!(
                "unknown family invocation: {name} {params:?} \
                 (expected km N, bogo N K, lv_n0 N or open_km N)"
            )))
        }
    };
    emit_graph(&GraphJson::from_graph(&graph), out)
}

fn cmd_clone(input: &Path, out: Option<&Path>) -> CmdResult {
    let (g, w) = load_graph(input)?;
    let cloned = g.clone_graph(&w)?;
    emit_graph(&GraphJson::from_graph(&cloned), out)
}

fn cmd_declone(input: &Path, out: Option<&Path>) -> CmdResult {
    let (g, _) = load_graph(input)?;
    let d = g.declone();
    let quotient_json = GraphJson::from_graph(&d.quotient).with_weights(&d.weights);
    let projection: serde_json::Map<String, Value> = g
        .labels()
        .iter()
        .map(|l| {
            let image = d.projection.image_label(l).expect("total map");
            (l.clone(), Value::String(image.to_string()))
        })
        .collect();
    let report = json!({
        "quotient": quotient_json,
        "weights": d.weights.iter().collect::<std::collections::BTreeMap<_, _>>(),
        "classes": d.classes,
        "projection": projection,
    });
    if let Some(path) = out {
        emit_graph(&quotient_json, Some(path))?;
    }
    Ok(emit_json(&report))
}

fn perm_as_map(g: &SkewGraph<Rat>, perm: &[usize]) -> Value {
    let map: serde_json::Map<String, Value> = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            (
                g.label(i).to_string(),
                Value::String(g.label(j).to_string()),
            )
        })
        .collect();
    Value::Object(map)
}

fn cmd_aut(input: &Path, weighted: bool) -> CmdResult {
    let (g, w) = load_graph(input)?;
    let d = g.declone();
    let decomposition = json!({
        "blocks": d.classes.iter().map(Vec::len).collect::<Vec<_>>(),
        "quotient_order": automorphisms_brute(&d.quotient, Some(&d.weights))?.order(),
    });
    let report = if weighted {
        let group = automorphisms_brute(&g, Some(&w))?;
        json!({
            "order": group.order(),
            "generators": group
                .generators()
                .iter()
                .map(|p| perm_as_map(&g, p))
                .collect::<Vec<_>>(),
            "decomposition": Value::Null,
        })
    } else if g.order() <= BRUTE_FORCE_LIMIT {
        let group = automorphisms_brute(&g, None)?;
        json!({
            "order": group.order(),
            "generators": group
                .generators()
                .iter()
                .map(|p| perm_as_map(&g, p))
                .collect::<Vec<_>>(),
            "decomposition": decomposition,
        })
    } else {
        // too large for direct search: use the clone-class decomposition
        // and emit kernel transpositions plus lifted quotient generators
        let order = aut_order_decomposed(&g)?;
        let mut generators: Vec<Value> = Vec::new();
        let identity: Vec<usize> = (0..g.order()).collect();
        for class in &d.classes {
            for pair in class.windows(2) {
                let mut p = identity.clone();
                let i = g.index_of(&pair[0]).unwrap();
                let j = g.index_of(&pair[1]).unwrap();
                p.swap(i, j);
                generators.push(perm_as_map(&g, &p));
            }
        }
        let quotient_group = automorphisms_brute(&d.quotient, Some(&d.weights))?;
        for psi in quotient_group.generators() {
            let mut p = identity.clone();
            for (ci, class) in d.classes.iter().enumerate() {
                let target = &d.classes[psi[ci]];
                for (a, b) in class.iter().zip(target) {
                    p[g.index_of(a).unwrap()] = g.index_of(b).unwrap();
                }
            }
            generators.push(perm_as_map(&g, &p));
        }
        json!({
            "order": order,
            "generators": generators,
            "decomposition": decomposition,
        })
    };
    Ok(emit_json(&report))
}

fn cmd_iso(a: &Path, b: &Path) -> CmdResult {
    let (ga, _) = load_graph(a)?;
    let (gb, _) = load_graph(b)?;
    let report = match find_isomorphism(&ga, &gb, None)? {
        Some(iso) => {
            let map: serde_json::Map<String, Value> = ga
                .labels()
                .iter()
                .map(|l| {
                    let image = iso.image_label(l).expect("total map");
                    (l.clone(), Value::String(image.to_string()))
                })
                .collect();
            json!({"isomorphic": true, "map": map})
        }
        None => json!({"isomorphic": false, "map": Value::Null}),
    };
    Ok(emit_json(&report))
}

fn cmd_casimirs(input: &Path) -> CmdResult {
    let (g, _) = load_graph(input)?;
    let sys = LvSystem::new(g);
    let basis: Vec<Vec<i64>> = sys
        .casimir_basis()
        .iter()
        .map(|c| c.exponents().to_vec())
        .collect();
    Ok(emit_json(&json!({"rank": sys.rank(), "basis": basis})))
}

struct SimulateArgs {
    input: PathBuf,
    x0: Option<Vec<f64>>,
    dt: f64,
    steps: usize,
    csv: Option<PathBuf>,
    check: Vec<String>,
    seed: u64,
    tol_drift: f64,
    tol_ratio: f64,
    tol_invariant: f64,
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let (g, _) = load_graph(&args.input)?;
    let sys = LvSystem::new(g.clone());
    let x0 = match args.x0 {
        Some(x0) => {
            if x0.len() != sys.dimension() {
                return Err(UsageError(format!(
                    "--x0 has {} entries, the system has dimension {}",
                    x0.len(),
                    sys.dimension()
                )));
            }
            x0
        }
        None => {
            sampling::points_in_box(sys.dimension(), 1, 0.5, 1.5, &mut sampling::rng(args.seed))
                .remove(0)
        }
    };

    // (observable, tolerance) pairs per requested check
    let mut checks: Vec<(Observable, f64)> = Vec::new();
    for name in &args.check {
        match name.as_str() {
            "h" => checks.push((Observable::hamiltonian(), args.tol_drift)),
            "casimirs" => {
                for (i, c) in sys.casimir_basis().into_iter().enumerate() {
                    checks.push((Observable::casimir(format!("C{i}"), c), args.tol_drift));
                }
            }
            "ratios" => {
                for obs in ratio_observables(&g, &x0)? {
                    checks.push((obs, args.tol_ratio));
                }
            }
            "lax" => {
                checks.push((lax_invariant_observable(&g)?, args.tol_invariant));
            }
            other => {
                return Err(UsageError(format!(
                    "unknown check {other:?}; expected h, casimirs, ratios or lax"
                )))
            }
        }
    }

    let traj = dynamics::integrate(&sys, &x0, args.dt, args.steps)
        .map_err(|e| UsageError(format!("integration failed: {e}")))?;
    if let Some(path) = &args.csv {
        let mut file = fs::File::create(path)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
        dynamics::write_csv(&traj, g.labels(), &mut file)?;
    }

    let mut all_pass = true;
    let mut rows = Vec::new();
    for (obs, tol) in &checks {
        let report = dynamics::drift(&traj, std::slice::from_ref(obs));
        for entry in report.entries {
            let pass = entry.max_rel_dev < *tol;
            all_pass &= pass;
            rows.push(json!({
                "name": entry.name,
                "initial": entry.initial,
                "max_abs_dev": entry.max_abs_dev,
                "max_rel_dev": entry.max_rel_dev,
                "tolerance": tol,
                "pass": pass,
            }));
        }
    }
    emit_json(&json!({
        "x0": x0,
        "dt": args.dt,
        "steps": args.steps,
        "checks": rows,
        "pass": all_pass,
    }));
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Clone-ratio observables of a (possibly reducible) graph: one ratio per
/// non-leading clone, relative to the first class member.
fn ratio_observables(g: &SkewGraph<Rat>, x0: &[f64]) -> Result<Vec<Observable>, UsageError> {
    let d = g.declone();
    let mut out = Vec::new();
    for class in &d.classes {
        if class.len() < 2 {
            continue;
        }
        let lead = g.index_of(&class[0]).unwrap();
        if x0[lead] == 0.0 {
            return Err(UsageError(format!(
                "initial value of {} is zero, clone ratios are undefined",
                class[0]
            )));
        }
        for member in &class[1..] {
            let idx = g.index_of(member).unwrap();
            out.push(Observable::ratio(
                format!("{}/{}", member, class[0]),
                idx,
                lead,
            ));
        }
    }
    Ok(out)
}

/// Spectral first integrals for a graph whose decloned quotient is some
/// `B(n,k)`: characteristic-polynomial coefficients of the base Lax
/// operator evaluated at the summed clone coordinates.
fn lax_invariant_observable(g: &SkewGraph<Rat>) -> Result<Observable, UsageError> {
    let d = g.declone();
    let n = d.quotient.order();
    let lambdas = vec![-2.0, -1.0, 1.0, 2.0, 3.0];
    for k in 1..=n / 2 {
        if 2 * k >= n {
            break;
        }
        let base = families::bogo(n, k)?;
        let Some(iso) = find_isomorphism(&d.quotient, &base, None)? else {
            continue;
        };
        // bogo coordinate b gets the sum over the class mapped onto it
        let mut class_of_bogo: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ci, class) in d.classes.iter().enumerate() {
            let b = iso.indices()[ci];
            class_of_bogo[b] = class.iter().map(|l| g.index_of(l).unwrap()).collect();
        }
        let labels: Vec<String> = lambdas
            .iter()
            .flat_map(|l| (0..n).map(move |i| format!("c{i}[lambda={l}]")))
            .collect();
        return Ok(Observable::vector(labels, move |x: &[f64]| {
            let y: Vec<f64> = class_of_bogo
                .iter()
                .map(|class| class.iter().map(|&v| x[v]).sum())
                .collect();
            let (l, _) = lax::bogo_lax(n, k, &y).expect("parameters validated");
            lax::char_poly_invariants(&l, &lambdas).concat()
        }));
    }
    Err(UsageError(
        "the lax check needs a graph whose decloned quotient is a \
         Bogoyavlenskij circulant B(n,k)"
            .to_string(),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_lax_verify(
    family: &[String],
    weights: Option<Vec<usize>>,
    points: usize,
    mode: LaxMode,
    lambdas: &[f64],
    seed: u64,
    tol: f64,
) -> CmdResult {
    let (n, k) = parse_family(family)?;
    let base_graph = families::bogo(n, k)?;
    let weights = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(UsageError(format!(
                    "--weights has {} entries for base order {n}",
                    w.len()
                )));
            }
            w
        }
        None => vec![1; n],
    };
    let layout = CloneLayout::new(n, k, weights.clone())?;

    type FlowFn = Box<dyn Fn(&[f64]) -> Vec<f64>>;
    type PairFn = Box<dyn Fn(&[f64]) -> Result<(PolyMatrix, PolyMatrix), lax::LaxError>>;
    let dim;
    let flow: FlowFn;
    let pair: PairFn;
    match mode {
        LaxMode::Base => {
            dim = n;
            let sys = LvSystem::new(base_graph);
            flow = Box::new(move |x: &[f64]| sys.vector_field(x).expect("dimension checked"));
            pair = Box::new(move |x: &[f64]| lax::bogo_lax(n, k, x));
        }
        LaxMode::Pullback | LaxMode::Block => {
            dim = layout.clone_dim();
            let wv = WeightVector::new(
                base_graph
                    .labels()
                    .iter()
                    .zip(&weights)
                    .map(|(l, &w)| (l.clone(), w)),
            )?;
            let sys = LvSystem::new(base_graph.clone_graph(&wv)?);
            flow = Box::new(move |x: &[f64]| sys.vector_field(x).expect("dimension checked"));
            let layout = layout.clone();
            pair = match mode {
                LaxMode::Pullback => Box::new(move |x: &[f64]| lax::pullback_lax(&layout, x)),
                _ => Box::new(move |x: &[f64]| lax::block_lax(&layout, x)),
            };
        }
    }

    let mut rng = sampling::rng(seed);
    let mut max_residual: f64 = 0.0;
    for x in sampling::points_in_box(dim, points, 0.1, 1.0, &mut rng) {
        let r = lax::lax_residual(&pair, &flow, &x, lambdas)?;
        max_residual = max_residual.max(r);
    }
    let pass = max_residual < tol;
    emit_json(&json!({
        "family": format!("B({n},{k})"),
        "mode": match mode {
            LaxMode::Base => "base",
            LaxMode::Pullback => "pullback",
            LaxMode::Block => "block",
        },
        "weights": weights,
        "points": points,
        "lambdas": lambdas,
        "max_residual": max_residual,
        "tolerance": tol,
        "pass": pass,
    }));
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_family(family: &[String]) -> Result<(usize, usize), UsageError> {
    let int = |s: &String| -> Result<usize, UsageError> {
        s.parse()
            .map_err(|_| UsageError(format!("expected an integer, got {s:?}")))
    };
    match family {
        [name, n] if name == "km" => Ok((int(n)?, 1)),
        [name, n, k] if name == "bogo" => Ok((int(n)?, int(k)?)),
        _ => Err(UsageError(format!(
            "--family expects `km N` or `bogo N K`, got {family:?}"
        ))),
    }
}
