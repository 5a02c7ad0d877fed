#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qstime::bounds::{default_grid, Tolerances};
use qstime::montecarlo::{self, SimConfig, Start};
use qstime::suite::{self, GridSpec, Instance, InstanceResult, Prepared};
use qstime::{BoundReport, GraphSpec, SetSpec};

use output::{OutDir, RunManifest};

/// Exact hitting-time laws, quasi-stationary distributions and the bounds
/// relating them, for random walks on graphs.
#[derive(Parser)]
#[command(name = "qstime", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory for reports, CSVs and the run manifest.
    #[arg(long, global = true, default_value = "qstime-out")]
    out: PathBuf,
    /// Allowed negative slack for inequality verdicts.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline for one graph and target set.
    Analyze {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_name = "MIN,MAX,COUNT")]
        t_grid: Option<GridSpec>,
    },
    /// Run every verdict over an instance list (built-in list by default).
    Verify {
        /// File with one `<graph spec> <set spec>` per line.
        #[arg(long)]
        list: Option<PathBuf>,
        #[arg(long, value_name = "MIN,MAX,COUNT")]
        t_grid: Option<GridSpec>,
    },
    /// Tori (Z/mZ)^d over a list of side lengths, A a segment on the first axis.
    SweepTorus {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        set_size: usize,
    },
    /// Monte Carlo hitting times against the exact tails.
    Simulate {
        #[command(flatten)]
        target: Target,
        /// vertex:<i>, pi, qs or qs:<component>.
        #[arg(long, default_value = "pi")]
        start: Start,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "QSTIME_SEED", default_value_t = 20261015)]
        seed: u64,
        #[arg(long, value_name = "MIN,MAX,COUNT")]
        t_grid: Option<GridSpec>,
    },
}

#[derive(Args)]
struct Target {
    /// e.g. torus:d=2,m=16, cycle:n=8, hypercube:k=4, complete:n=5,
    /// cayley:mods=4,4;gens=(1,0),(-1,0),(0,1),(0,-1), file:<path>.
    #[arg(long)]
    graph: GraphSpec,
    /// Vertex list `0,4` or ball `ball:o=0,r=1`.
    #[arg(long)]
    set: SetSpec,
}

/// Outcome of a command that ran to completion.
enum Status {
    Pass,
    VerdictFailure,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::VerdictFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    if !(cli.tol >= 0.0) {
        bail!("--tol must be a nonnegative number");
    }
    let tol = Tolerances {
        inequality: cli.tol,
        ..Tolerances::default()
    };
    let mut manifest = RunManifest::new(&tol);
    match cli.command {
        Command::Analyze { target, t_grid } => {
            manifest.command = "analyze".into();
            manifest.graph = Some(target.graph.to_string());
            manifest.set = Some(target.set.to_string());
            analyze(&target, t_grid.as_ref(), &tol, OutDir::create(&cli.out)?, manifest)
        }
        Command::Verify { list, t_grid } => {
            manifest.command = "verify".into();
            verify(list, t_grid.as_ref(), &tol, &cli.out, manifest)
        }
        Command::SweepTorus { dim, m, set_size } => {
            manifest.command = "sweep-torus".into();
            manifest.graph = Some(format!("torus:d={dim},m={}", join(&m)));
            manifest.set = Some(format!("segment of {set_size}"));
            sweep(dim, &m, set_size, &tol, &cli.out, manifest)
        }
        Command::Simulate {
            target,
            start,
            samples,
            seed,
            t_grid,
        } => {
            manifest.command = "simulate".into();
            manifest.graph = Some(target.graph.to_string());
            manifest.set = Some(target.set.to_string());
            manifest.seed = Some(seed);
            let out = OutDir::create(&cli.out)?;
            simulate(&target, &start, samples, seed, t_grid.as_ref(), out, manifest)
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct ComponentSummary {
    id: usize,
    size: usize,
    min_vertex: usize,
    lambda: f64,
    mean_hit: f64,
    is_max: bool,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    graph: String,
    set: String,
    #[serde(flatten)]
    report: &'a BoundReport,
    components: Vec<ComponentSummary>,
}

#[derive(Serialize)]
struct TailRow {
    t: f64,
    tail_pi: f64,
    tail_alpha: f64,
    gap: f64,
    pi_a: f64,
    r_m: f64,
    refined_upper: f64,
    ab_upper: f64,
}

#[derive(Serialize)]
struct AlphaRow {
    vertex: usize,
    pi: f64,
    alpha_m: f64,
}

fn analyze(
    target: &Target,
    grid: Option<&GridSpec>,
    tol: &Tolerances,
    mut out: OutDir,
    manifest: RunManifest,
) -> Result<Status> {
    let prepared = Prepared::new(&target.graph).with_context(|| format!("building {}", target.graph))?;
    let analysis = prepared
        .analyze(&target.set, grid, tol)
        .with_context(|| format!("analyzing A = {}", target.set))?;
    let report = &analysis.report;
    let law = &analysis.law;
    let components = law
        .killed()
        .components()
        .iter()
        .map(|c| ComponentSummary {
            id: c.id,
            size: c.vertices.len(),
            min_vertex: c.vertices[0],
            lambda: c.lambda,
            mean_hit: c.mean_hit,
            is_max: c.is_max,
        })
        .collect();
    out.json(
        "report.json",
        &AnalyzeReport {
            graph: target.graph.to_string(),
            set: target.set.to_string(),
            report,
            components,
        },
    )?;
    out.csv(
        "tails.csv",
        analysis.times.iter().map(|&t| {
            let (p, a) = (law.tail_from_pi(t), law.tail_from_alpha(t));
            TailRow {
                t,
                tail_pi: p,
                tail_alpha: a,
                gap: 1.0 - p / a,
                pi_a: report.pi_a,
                r_m: report.r_m,
                refined_upper: report.pi_a + report.refined_error,
                ab_upper: report.ab_error,
            }
        }),
    )?;
    let alpha = &law.killed().max_component().alpha;
    out.csv(
        "quasi_stationary.csv",
        prepared.chain.pi().iter().zip(alpha).enumerate().map(|(vertex, (&pi, &alpha_m))| AlphaRow {
            vertex,
            pi,
            alpha_m,
        }),
    )?;
    print_report(&target.graph.to_string(), &target.set.to_string(), report);
    out.finish(manifest)?;
    Ok(if report.all_pass() { Status::Pass } else { Status::VerdictFailure })
}

fn print_report(graph: &str, set: &str, r: &BoundReport) {
    println!("{graph}  A = {set}  (n = {}, |A| = {})", r.n, r.set_size);
    let mut rows: Vec<(&str, f64)> = vec![
        ("pi(A)", r.pi_a),
        ("R_M", r.r_m),
        ("t_rel", r.t_rel),
        ("t_med", r.t_med),
        ("E_pi[T_A]", r.e_pi_t_a),
        ("E_alpha[T_A]", r.e_alpha_t_a),
        ("ab_error", r.ab_error),
        ("refined_error", r.refined_error),
        ("tmed_error", r.tmed_error),
    ];
    let optional = [
        ("err_no_c0", r.err_no_c0),
        ("err_c0_2304", r.err_c0_2304),
        ("beta_gamma", r.beta_gamma),
        ("I_0", r.i0),
        ("I_1", r.i1),
    ];
    rows.extend(optional.iter().filter_map(|(k, v)| v.map(|v| (*k, v))));
    for (k, v) in rows {
        println!("  {k:<14} {v:.10e}");
    }
    let fails: Vec<_> = r.failures().collect();
    println!("  verdicts: {} pass, {} fail", r.verdicts.len() - fails.len(), fails.len());
    for (name, v) in fails {
        println!("    FAIL {name}: worst {:.3e} (tol {:.0e})", v.worst, v.tolerance);
    }
}

#[derive(Serialize)]
struct MarginRow<'a> {
    graph: &'a str,
    set: &'a str,
    verdict: &'a str,
    kind: &'static str,
    pass: bool,
    worst: f64,
    tolerance: f64,
    at_t: Option<f64>,
}

fn verify(
    list: Option<PathBuf>,
    grid: Option<&GridSpec>,
    tol: &Tolerances,
    out_dir: &std::path::Path,
    manifest: RunManifest,
) -> Result<Status> {
    let instances: Vec<Instance> = match &list {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            suite::parse_instance_list(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => suite::default_instances(),
    };
    if instances.is_empty() {
        log::warn!("instance list is empty; nothing to verify");
        return Ok(Status::Pass);
    }
    let mut results: Vec<InstanceResult> = Vec::new();
    let mut errors = Vec::new();
    for (inst, r) in instances.iter().zip(suite::run_instances(&instances, grid, tol)) {
        match r {
            Ok(r) => results.push(r),
            Err(e) => errors.push(format!("{inst}: {e}")),
        }
    }
    if !errors.is_empty() {
        bail!("{} instance(s) could not be evaluated:\n  {}", errors.len(), errors.join("\n  "));
    }
    let mut out = OutDir::create(out_dir)?;
    out.json("summary.json", &results)?;
    out.csv(
        "margins.csv",
        results.iter().flat_map(|r| {
            r.report.verdicts.iter().map(move |(name, v)| MarginRow {
                graph: &r.graph,
                set: &r.set,
                verdict: name,
                kind: match v.kind {
                    qstime::VerdictKind::Inequality => "inequality",
                    qstime::VerdictKind::Identity => "identity",
                },
                pass: v.pass,
                worst: v.worst,
                tolerance: v.tolerance,
                at_t: v.at_t,
            })
        }),
    )?;
    let mut failed = 0;
    for r in &results {
        let fails: Vec<&String> = r.report.failures().map(|(k, _)| k).collect();
        if fails.is_empty() {
            println!("PASS {} {{{}}}", r.graph, r.set);
        } else {
            failed += 1;
            println!("FAIL {} {{{}}}: {}", r.graph, r.set, fails.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "));
        }
    }
    println!("{} of {} instances pass", results.len() - failed, results.len());
    out.finish(manifest)?;
    Ok(if failed == 0 { Status::Pass } else { Status::VerdictFailure })
}

#[derive(Serialize)]
struct SweepCsvRow {
    m: usize,
    t_rel: f64,
    e_pi_t_o: f64,
    ab_error: f64,
    refined_error: f64,
    beta_gamma: f64,
}

fn sweep(
    dim: usize,
    sides: &[usize],
    set_size: usize,
    tol: &Tolerances,
    out_dir: &std::path::Path,
    manifest: RunManifest,
) -> Result<Status> {
    let rows = suite::torus_sweep(dim, sides, set_size, tol)?;
    let mut out = OutDir::create(out_dir)?;
    out.csv(
        "sweep.csv",
        rows.iter().map(|r| SweepCsvRow {
            m: r.m,
            t_rel: r.t_rel,
            e_pi_t_o: r.e_pi_t_o,
            ab_error: r.ab_error,
            refined_error: r.refined_error,
            beta_gamma: r.beta_gamma,
        }),
    )?;
    println!(
        "{:>4} {:>12} {:>14} {:>12} {:>14} {:>12}",
        "m", "t_rel", "E_pi[T_o]", "ab_error", "refined_error", "beta_gamma"
    );
    for r in &rows {
        println!(
            "{:>4} {:>12.4} {:>14.4} {:>12.4e} {:>14.4e} {:>12.4e}{}",
            r.m,
            r.t_rel,
            r.e_pi_t_o,
            r.ab_error,
            r.refined_error,
            r.beta_gamma,
            if r.all_pass { "" } else { "  (verdict failure)" }
        );
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    type Column = (&'static str, fn(&suite::SweepRow) -> f64);
    let columns: [Column; 5] = [
        ("t_rel", |r| r.t_rel),
        ("e_pi_t_o", |r| r.e_pi_t_o),
        ("ab_error", |r| r.ab_error),
        ("refined_error", |r| r.refined_error),
        ("beta_gamma", |r| r.beta_gamma),
    ];
    let slopes: std::collections::BTreeMap<&str, f64> = columns
        .iter()
        .map(|(name, f)| (*name, if rows.len() >= 2 { suite::loglog_slope(&xs, &rows.iter().map(f).collect::<Vec<_>>()) } else { f64::NAN }))
        .collect();
    println!("log-log slopes vs m:");
    for (k, v) in &slopes {
        println!("  {k:<14} {v:.4}");
    }
    out.json("slopes.json", &slopes)?;
    out.finish(manifest)?;
    Ok(if rows.iter().all(|r| r.all_pass) { Status::Pass } else { Status::VerdictFailure })
}

#[derive(Serialize)]
struct SimRow {
    t: f64,
    empirical: f64,
    ci95_lo: f64,
    ci95_hi: f64,
    exact: f64,
    band3_lo: f64,
    band3_hi: f64,
    within_band: bool,
}

fn simulate(
    target: &Target,
    start: &Start,
    samples: usize,
    seed: u64,
    grid: Option<&GridSpec>,
    mut out: OutDir,
    manifest: RunManifest,
) -> Result<Status> {
    let prepared = Prepared::new(&target.graph).with_context(|| format!("building {}", target.graph))?;
    let ts = prepared.target(&target.set)?;
    let law = qstime::HittingLaw::new(&prepared.chain, &ts)?;
    let chain = &prepared.chain;
    let mu = start.distribution(chain, &law)?;
    let cfg = SimConfig::for_law(&law, samples, seed);
    let sims = montecarlo::sample_hitting_times(chain, &ts, &mu, &cfg)?;
    let times = grid.map_or_else(|| default_grid(&law), GridSpec::times);
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let k = sims.survivors(t);
        let (ci95_lo, ci95_hi) = montecarlo::wilson_interval(k, sims.len(), 1.96);
        let (band3_lo, band3_hi) = montecarlo::wilson_interval(k, sims.len(), 3.0);
        let exact = start.exact_tail(chain, &law, t)?;
        rows.push(SimRow {
            t,
            empirical: sims.empirical_tail(t),
            ci95_lo,
            ci95_hi,
            exact,
            band3_lo,
            band3_hi,
            within_band: band3_lo <= exact && exact <= band3_hi,
        });
    }
    out.csv("simulation.csv", rows.iter())?;
    let misses = rows.iter().filter(|r| !r.within_band).count();
    println!(
        "{} A = {} start = {start}: {} samples, seed {seed}, {} censored at t = {:.4e}",
        target.graph,
        target.set,
        sims.len(),
        sims.censored,
        sims.horizon
    );
    println!("  empirical mean {:.6} +- {:.6}", sims.mean(), sims.std_error());
    println!("  {} of {} grid times inside the 3-sigma Wilson band", rows.len() - misses, rows.len());
    let mut ok = misses == 0 && !sims.flagged;
    if matches!(start, Start::QuasiStationary(None)) {
        let lambda = law.lambda1();
        let d = montecarlo::ks_statistic(&sims.times, |t| -(-lambda * t).exp_m1());
        let crit = montecarlo::ks_critical_1pct(sims.len());
        println!("  KS against Exp(lambda_1): {d:.5} (1% critical value {crit:.5})");
        ok &= d < crit;
    }
    out.finish(manifest)?;
    Ok(if ok { Status::Pass } else { Status::VerdictFailure })
}
