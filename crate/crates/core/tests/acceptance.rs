//! Acceptance gate: one PASS/FAIL line per criterion, details below each.
//! Exits non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::DMatrix;
use qstime::bounds::{BoundReport, Tolerances, TransitiveContext, VerdictKind};
use qstime::graphs::{build_complete, build_cycle, build_hypercube, build_torus};
use qstime::killed::{KilledSpectrum, TargetSet};
use qstime::montecarlo::{self, SimConfig, Start};
use qstime::suite::{self, InstanceResult};
use qstime::{HittingLaw, ReversibleChain};

const SEED: u64 = 20261015;
const MC_SAMPLES: usize = 100_000;
const WILSON_Z: f64 = 3.0;

/// Verdicts named by the identity and inequality criteria. Every other
/// verdict in a report is also checked and assigned by its kind.
const IDENTITY_CORE: &[&str] = &[
    "mixture_mass",
    "c1_identity",
    "r_m_two_way",
    "tail_oracle",
    "hit_profile_identity",
    "tmed_identity",
    "resolvent_i0",
    "resolvent_i1",
];
const INEQUALITY_CORE: &[&str] = &[
    "ab_tail",
    "ab_mean",
    "rm_tail",
    "rm_mean",
    "refined_tail",
    "refined_mean",
    "rm_le_ab_error",
    "tmed_le_2trel",
    "interlacing",
    "sharpness_tail",
    "sharpness_mean",
    "singleton_reduction",
    "i0_lower",
    "i1_upper",
    "gap_diameter",
];

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        if !ok {
            self.pass = false;
        }
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("info {line}"));
    }
}

/// The refined error against `|A|^2 d^2 beta` (and `|A|^2 d beta`) has an
/// unspecified constant; report the fitted range instead of asserting one.
fn note_fitted_constants(out: &mut Outcome, results: &[InstanceResult]) {
    let range = |f: fn(&InstanceResult) -> Option<f64>| {
        results.iter().filter_map(f).fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (lo, hi) = range(|r| r.report.kappa_ratio);
    out.note(format!("refined_error / (|A|^2 d^2 beta_gamma): fitted kappa = {hi:.4} (range [{lo:.4}, {hi:.4}])"));
    let (lo, hi) = range(|r| r.report.linear_degree_ratio);
    out.note(format!("refined_error / (|A|^2 d beta_gamma): range [{lo:.4}, {hi:.4}]"));
}

fn suite_results() -> Vec<InstanceResult> {
    let instances = suite::default_instances();
    suite::run_instances(&instances, None, &Tolerances::default())
        .into_iter()
        .zip(&instances)
        .map(|(r, inst)| r.unwrap_or_else(|e| panic!("{inst}: {e}")))
        .collect()
}

fn verdict_criterion(results: &[InstanceResult], kind: VerdictKind, core: &[&str]) -> Outcome {
    let mut out = Outcome::new();
    let mut names: Vec<&String> = results
        .iter()
        .flat_map(|r| r.report.verdicts.iter())
        .filter(|(_, v)| v.kind == kind)
        .map(|(k, _)| k)
        .collect();
    names.sort();
    names.dedup();
    for name in core {
        if !names.iter().any(|n| n == name) {
            out.check(false, format!("{name}: never evaluated"));
        }
    }
    for name in names {
        let mut worst: Option<(f64, &InstanceResult, f64)> = None;
        let mut failed = Vec::new();
        let mut count = 0;
        for r in results {
            let Some(v) = r.report.verdicts.get(name) else {
                continue;
            };
            count += 1;
            if !v.pass {
                failed.push(format!("{} {{{}}}", r.graph, r.set));
            }
            let badness = match kind {
                VerdictKind::Identity => v.worst,
                VerdictKind::Inequality => -v.worst,
            };
            if worst.is_none_or(|(b, _, _)| badness > b) {
                worst = Some((badness, r, v.tolerance));
            }
        }
        let (_, at, tol) = worst.expect("at least one instance");
        let worst_value = at.report.verdicts[name].worst;
        let tag = if core.contains(&name.as_str()) { "" } else { " (supplementary)" };
        out.check(
            failed.is_empty(),
            format!(
                "{name}{tag}: {count} instances, worst {worst_value:.3e} (tol {tol:.0e}) at {} {{{}}}{}",
                at.graph,
                at.set,
                if failed.is_empty() {
                    String::new()
                } else {
                    format!("; failing on {}", failed.join(", "))
                }
            ),
        );
    }
    out
}

fn close(out: &mut Outcome, label: &str, got: f64, want: f64, tol: f64) {
    let err = (got - want).abs();
    out.check(err <= tol, format!("{label}: {got:.12} vs {want:.12} (|diff| {err:.1e}, tol {tol:.0e})"));
}

fn law_for(chain: &ReversibleChain, a: &[usize]) -> HittingLaw {
    HittingLaw::new(chain, &TargetSet::new(chain, a).unwrap()).unwrap()
}

fn closed_forms() -> Outcome {
    let mut out = Outcome::new();
    let k4 = ReversibleChain::srw(&build_complete(4).unwrap()).unwrap();
    let law = law_for(&k4, &[0]);
    close(&mut out, "K4 E_alpha[T_A]", law.mean_from_alpha(), 3.0, 1e-10);
    close(&mut out, "K4 E_pi[T_A]", law.mean_from_pi(), 2.25, 1e-10);
    close(&mut out, "K4 R_M", law.r_m(), 0.25, 1e-10);
    close(&mut out, "K4 pi(A)", law.pi_a(), 0.25, 1e-15);

    let c4 = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
    let law = law_for(&c4, &[0]);
    let s2 = 2f64.sqrt();
    close(&mut out, "C4 E_alpha[T_A]", law.mean_from_alpha(), 2.0 + s2, 1e-10);
    close(&mut out, "C4 E_pi[T_A]", law.mean_from_pi(), 2.5, 1e-10);
    close(&mut out, "C4 R_M", law.r_m(), 1.0 - 1.0 / (24.0 - 16.0 * s2), 1e-10);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    close(&mut out, "C4 t_med", law.t_med(), -(1.0 - inv).ln() / (1.0 + inv), 1e-10);

    let two = ReversibleChain::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), vec![0.5, 0.5]).unwrap();
    let law = law_for(&two, &[1]);
    let worst = (0..=200)
        .map(|k| k as f64 * 0.1)
        .map(|t| (law.tail_from_pi(t) - 0.5 * (-t).exp()).abs())
        .fold(0.0, f64::max);
    out.check(worst <= 1e-14, format!("two-state tail 1/2 e^{{-t}} on [0, 20]: max |diff| {worst:.1e}"));
    out
}

fn sweep() -> Outcome {
    let mut out = Outcome::new();
    let tol = Tolerances::default();
    let fits = [
        (2usize, (8..=32).collect::<Vec<usize>>(), 0.0, true),
        (3, (4..=12).collect(), -1.0, false),
    ];
    for (dim, sides, target, times_log) in fits {
        let rows = suite::torus_sweep(dim, &sides, 1, &tol).unwrap();
        let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| if times_log { r.ab_error * (r.m as f64).ln() } else { r.ab_error })
            .collect();
        let slope = suite::loglog_slope(&xs, &ys);
        let what = if times_log { "ab_error * ln m" } else { "ab_error" };
        out.check(
            (slope - target).abs() <= 0.3,
            format!("d={dim}: slope of ln({what}) vs ln m = {slope:.4} (target {target} +- 0.3)"),
        );
        let ratios: Vec<f64> = rows
            .iter()
            .map(|r| r.refined_error / (r.ab_error * r.ab_error))
            .collect();
        let ratio = ratios.iter().copied().fold(0.0, f64::max);
        let low = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        out.check(
            ratio <= 10.0,
            format!("d={dim}: refined_error / ab_error^2 in [{low:.3}, {ratio:.3}] (bound 10)"),
        );
        for r in &rows {
            out.details.push(format!(
                "      m={:>2} n={:>5} t_rel={:>9.3} E_pi[T_o]={:>10.2} ab={:.4e} refined={:.4e} ratio={:.3} verdicts={}",
                r.m,
                r.n,
                r.t_rel,
                r.e_pi_t_o,
                r.ab_error,
                r.refined_error,
                r.refined_error / (r.ab_error * r.ab_error),
                if r.all_pass { "pass" } else { "FAIL" }
            ));
        }
        let failing: Vec<usize> = rows.iter().filter(|r| !r.all_pass).map(|r| r.m).collect();
        out.check(
            failing.is_empty(),
            format!("d={dim}: every verdict passes on all {} tori (failing m: {failing:?})", rows.len()),
        );
    }
    out
}

fn monte_carlo() -> Outcome {
    let mut out = Outcome::new();
    let triples: Vec<(&str, ReversibleChain, Vec<usize>, Start)> = vec![
        ("K4", ReversibleChain::srw(&build_complete(4).unwrap()).unwrap(), vec![0], Start::Vertex(1)),
        ("C4", ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap(), vec![0], Start::Stationary),
        ("C8", ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap(), vec![0, 3], Start::QuasiStationary(None)),
        ("Q4", ReversibleChain::srw(&build_hypercube(4).unwrap()).unwrap(), vec![0, 15], Start::Stationary),
        ("T(2,6)", ReversibleChain::srw(&build_torus(2, 6).unwrap()).unwrap(), vec![0], Start::QuasiStationary(None)),
    ];
    for (name, chain, a, start) in triples {
        let ts = TargetSet::new(&chain, &a).unwrap();
        let law = HittingLaw::new(&chain, &ts).unwrap();
        let mu = start.distribution(&chain, &law).unwrap();
        let cfg = SimConfig::for_law(&law, MC_SAMPLES, SEED);
        let samples = montecarlo::sample_hitting_times(&chain, &ts, &mu, &cfg).unwrap();
        let grid = qstime::bounds::default_grid(&law);
        let mut misses = Vec::new();
        for &t in &grid {
            let exact = start.exact_tail(&chain, &law, t).unwrap();
            let (lo, hi) = montecarlo::wilson_interval(samples.survivors(t), samples.len(), WILSON_Z);
            if exact < lo || exact > hi {
                misses.push(format!("t={t:.4}: exact {exact:.5} outside [{lo:.5}, {hi:.5}]"));
            }
        }
        out.check(
            misses.is_empty() && !samples.flagged,
            format!(
                "{name} A={a:?} start={start}: {} grid points inside 3-sigma Wilson bands, {} censored{}",
                grid.len() - misses.len(),
                samples.censored,
                if misses.is_empty() { String::new() } else { format!("; {}", misses.join("; ")) }
            ),
        );
        if matches!(start, Start::QuasiStationary(_)) {
            let lambda = law.lambda1();
            let d = montecarlo::ks_statistic(&samples.times, |t| -(-lambda * t).exp_m1());
            let crit = montecarlo::ks_critical_1pct(samples.len());
            out.check(d < crit, format!("{name} quasi-stationary start: KS {d:.5} < {crit:.5} (1% level)"));
        }
        if name == "K4" {
            let band = 3.0 * 3.0 / (MC_SAMPLES as f64).sqrt();
            out.check(
                (samples.mean() - 3.0).abs() <= band,
                format!("K4 mean {:.5} within {band:.5} of 3", samples.mean()),
            );
        }
    }
    out
}

fn tie_robustness() -> Outcome {
    let mut out = Outcome::new();
    let g = build_cycle(8).unwrap();
    let chain = ReversibleChain::srw(&g).unwrap();
    let ts = TargetSet::new(&chain, &[0, 4]).unwrap();
    let ctx = TransitiveContext::new(&g, &chain).unwrap();
    let tol = Tolerances::default();
    let reports: Vec<BoundReport> = (0..ts.components().len())
        .map(|c| {
            let killed = KilledSpectrum::with_designated(&chain, &ts, c).unwrap();
            let law = HittingLaw::from_spectrum(&chain, &ts, killed);
            let grid = qstime::bounds::default_grid(&law);
            BoundReport::compute(&chain, &ts, &law, Some(&ctx), &grid, &tol).unwrap()
        })
        .collect();
    out.check(reports.len() == 2, format!("{} tied components", reports.len()));
    let (a, b) = (&reports[0], &reports[1]);
    let dr = (a.r_m - b.r_m).abs();
    out.check(dr <= 1e-10, format!("R_M {:.12} vs {:.12} (|diff| {dr:.1e})", a.r_m, b.r_m));
    let mut worst = 0.0f64;
    let mut mismatched = Vec::new();
    for (name, va) in &a.verdicts {
        let vb = &b.verdicts[name];
        let d = (va.worst - vb.worst).abs();
        worst = worst.max(d);
        if va.pass != vb.pass || d > 1e-10 {
            mismatched.push(format!("{name} ({d:.1e})"));
        }
    }
    out.check(
        mismatched.is_empty() && a.verdicts.len() == b.verdicts.len(),
        format!(
            "{} verdicts identical under either designation (max |diff| of worst {worst:.1e}){}",
            a.verdicts.len(),
            if mismatched.is_empty() { String::new() } else { format!("; differ: {}", mismatched.join(", ")) }
        ),
    );
    out
}

fn main() {
    let start = Instant::now();
    let results = suite_results();
    let suite_time = start.elapsed().as_secs_f64();
    println!("instance set: {} instances in {suite_time:.1}s", results.len());

    let mut all_pass = true;
    let mut report = |id: &str, title: &str, out: Outcome, secs: f64| {
        all_pass &= out.pass;
        println!("{} [{id}] {title} ({secs:.1}s)", if out.pass { "PASS" } else { "FAIL" });
        for d in out.details {
            println!("      {d}");
        }
    };
    report(
        "1",
        "identity suite",
        verdict_criterion(&results, VerdictKind::Identity, IDENTITY_CORE),
        suite_time,
    );
    report(
        "2",
        "inequality suite on the 41-point grid",
        {
            let mut out = verdict_criterion(&results, VerdictKind::Inequality, INEQUALITY_CORE);
            note_fitted_constants(&mut out, &results);
            out
        },
        suite_time,
    );
    let t = Instant::now();
    report("3", "closed-form spot checks", closed_forms(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    report("4", "torus scaling at desk scale", sweep(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    report("5", "Monte Carlo cross-validation", monte_carlo(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    report("6", "tie robustness on C8, A = {0,4}", tie_robustness(), t.elapsed().as_secs_f64());
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if !all_pass {
        std::process::exit(1);
    }
}
