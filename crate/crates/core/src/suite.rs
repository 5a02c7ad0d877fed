//! Instance lists, the batch runner and the torus sweep.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{default_grid, log_grid, BoundReport, Tolerances, TransitiveContext};
use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::graphs::{build_torus, Graph, GraphSpec};
use crate::killed::{SetSpec, TargetSet};
use crate::laws::HittingLaw;

/// One `(graph, A)` pair. Text form: `<graph spec> <set spec>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: GraphSpec,
    pub set: SetSpec,
}

impl Instance {
    pub fn new(graph: GraphSpec, set: SetSpec) -> Self {
        Instance { graph, set }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.graph, self.set)
    }
}

impl FromStr for Instance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(g), Some(a), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Spec {
                what: "instance",
                input: s.to_string(),
                reason: "expected `<graph spec> <set spec>`".into(),
            });
        };
        Ok(Instance {
            graph: g.parse()?,
            set: a.parse()?,
        })
    }
}

/// Parses an instance list: one instance per line, `#` comments and blank
/// lines ignored.
pub fn parse_instance_list(text: &str) -> Result<Vec<Instance>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            line.parse().map_err(|e: Error| Error::InstanceList {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// The built-in verification instances: cycles, complete graphs,
/// hypercubes, 2- and 3-dimensional tori and one non-torus abelian Cayley
/// graph, each with a singleton, an adjacent pair, and on cycles the
/// antipodal pair that splits the complement in two.
pub fn default_instances() -> Vec<Instance> {
    let mut graphs = vec![
        GraphSpec::Cycle { n: 4 },
        GraphSpec::Cycle { n: 8 },
        GraphSpec::Cycle { n: 101 },
    ];
    graphs.extend((2..=6).map(|n| GraphSpec::Complete { n }));
    graphs.extend((3..=8).map(|dim| GraphSpec::Hypercube { dim }));
    graphs.extend([4, 8, 16, 32].map(|side| GraphSpec::Torus { dim: 2, side }));
    graphs.extend([4, 8, 12].map(|side| GraphSpec::Torus { dim: 3, side }));
    graphs.push(GraphSpec::Cayley {
        moduli: vec![6, 4],
        generators: vec![
            vec![1, 0],
            vec![-1, 0],
            vec![0, 1],
            vec![0, -1],
            vec![1, 1],
            vec![-1, -1],
        ],
    });
    let mut out = Vec::new();
    for g in graphs {
        out.push(Instance::new(g.clone(), SetSpec::Vertices(vec![0])));
        if g != (GraphSpec::Complete { n: 2 }) {
            out.push(Instance::new(g.clone(), SetSpec::Vertices(vec![0, 1])));
        }
        if let GraphSpec::Cycle { n } = g {
            out.push(Instance::new(g, SetSpec::Vertices(vec![0, n / 2])));
        }
    }
    out
}

/// Time grid override: `count` log-spaced points in `[min, max]` after `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn times(&self) -> Vec<f64> {
        log_grid(self.min, self.max, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Spec {
            what: "t-grid",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [min, max, count] = parts[..] else {
            return Err(bad("expected min,max,count"));
        };
        let min: f64 = min.parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = max.parse().map_err(|_| bad("max is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("count is not an integer"))?;
        if !(min > 0.0 && max >= min) || count == 0 {
            return Err(bad("need 0 < min <= max and count >= 1"));
        }
        Ok(GridSpec { min, max, count })
    }
}

/// A graph with its chain and, when transitive, the singleton data.
pub struct Prepared {
    pub graph: Graph,
    pub chain: ReversibleChain,
    pub context: Option<TransitiveContext>,
}

impl Prepared {
    pub fn new(spec: &GraphSpec) -> Result<Self> {
        let graph = spec.build()?;
        let chain = ReversibleChain::srw(&graph)?;
        let context = if graph.is_transitive() {
            Some(TransitiveContext::new(&graph, &chain)?)
        } else {
            None
        };
        Ok(Prepared {
            graph,
            chain,
            context,
        })
    }

    pub fn target(&self, set: &SetSpec) -> Result<TargetSet> {
        TargetSet::new(&self.chain, &set.resolve(&self.graph)?)
    }

    pub fn analyze(&self, set: &SetSpec, grid: Option<&GridSpec>, tol: &Tolerances) -> Result<Analysis> {
        let ts = self.target(set)?;
        let law = HittingLaw::new(&self.chain, &ts)?;
        let times = grid.map_or_else(|| default_grid(&law), GridSpec::times);
        let report = BoundReport::compute(&self.chain, &ts, &law, self.context.as_ref(), &times, tol)?;
        Ok(Analysis {
            ts,
            law,
            times,
            report,
        })
    }
}

pub struct Analysis {
    pub ts: TargetSet,
    pub law: HittingLaw,
    pub times: Vec<f64>,
    pub report: BoundReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceResult {
    pub graph: String,
    pub set: String,
    #[serde(flatten)]
    pub report: BoundReport,
}

/// Runs every instance, building each distinct graph once. Results are in
/// input order.
pub fn run_instances(
    instances: &[Instance],
    grid: Option<&GridSpec>,
    tol: &Tolerances,
) -> Vec<Result<InstanceResult>> {
    let mut groups: Vec<(GraphSpec, Vec<usize>)> = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == inst.graph) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((inst.graph.clone(), vec![i])),
        }
    }
    let run_group = |(spec, idx): &(GraphSpec, Vec<usize>)| -> Vec<(usize, Result<InstanceResult>)> {
        let prepared = match Prepared::new(spec) {
            Ok(p) => p,
            Err(e) => {
                let msg = e.to_string();
                return idx
                    .iter()
                    .map(|&i| (i, Err(Error::InvalidGraph(format!("{spec}: {msg}")))))
                    .collect();
            }
        };
        idx.iter()
            .map(|&i| {
                let inst = &instances[i];
                let r = prepared.analyze(&inst.set, grid, tol).map(|a| InstanceResult {
                    graph: inst.graph.to_string(),
                    set: inst.set.to_string(),
                    report: a.report,
                });
                (i, r)
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let mut flat: Vec<(usize, Result<InstanceResult>)> = {
        use rayon::prelude::*;
        groups.par_iter().flat_map_iter(run_group).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut flat: Vec<(usize, Result<InstanceResult>)> = groups.iter().flat_map(run_group).collect();
    flat.sort_by_key(|(i, _)| *i);
    flat.into_iter().map(|(_, r)| r).collect()
}

/// One row of the torus sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub t_rel: f64,
    pub e_pi_t_o: f64,
    pub ab_error: f64,
    pub refined_error: f64,
    pub beta_gamma: f64,
    pub r_m: f64,
    pub pi_a: f64,
    pub all_pass: bool,
}

/// Sweeps `(Z/mZ)^dim` over `sides` with `A` a segment of `set_size`
/// consecutive vertices along the first axis.
pub fn torus_sweep(dim: usize, sides: &[usize], set_size: usize, tol: &Tolerances) -> Result<Vec<SweepRow>> {
    if sides.is_empty() {
        return Err(Error::InvalidGraph("torus sweep needs at least one side length".into()));
    }
    let run = |&m: &usize| -> Result<SweepRow> {
        if set_size == 0 || set_size > m {
            return Err(Error::InvalidGraph(format!(
                "segment of {set_size} vertices does not fit in side {m}"
            )));
        }
        let graph = build_torus(dim, m)?;
        let chain = ReversibleChain::srw(&graph)?;
        let ctx = TransitiveContext::new(&graph, &chain)?;
        let a: Vec<usize> = (0..set_size).collect();
        let ts = TargetSet::new(&chain, &a)?;
        let law = HittingLaw::new(&chain, &ts)?;
        let report = BoundReport::compute(&chain, &ts, &law, Some(&ctx), &default_grid(&law), tol)?;
        Ok(SweepRow {
            m,
            n: chain.state_count(),
            t_rel: chain.t_rel(),
            e_pi_t_o: chain.eigentime_mean_hit(),
            ab_error: report.ab_error,
            refined_error: report.refined_error,
            beta_gamma: report.beta_gamma.unwrap_or(f64::NAN),
            r_m: report.r_m,
            pi_a: report.pi_a,
            all_pass: report.all_pass(),
        })
    };
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        sides.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = sides.iter().map(run).collect();
    rows
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
