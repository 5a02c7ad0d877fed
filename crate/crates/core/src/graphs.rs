//! Vertex-transitive test-bed graphs and their metric invariants.
//!
//! Every built-in family (tori, cycles, hypercubes, complete graphs and
//! Cayley graphs of finite abelian groups) is vertex-transitive. Graphs read
//! from an edge list are only checked for regularity, symmetry and
//! connectivity.

use std::collections::VecDeque;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest vertex count accepted by the builders.
pub const MAX_VERTICES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Torus { dim: usize, side: usize },
    Cycle { n: usize },
    Hypercube { dim: usize },
    Complete { n: usize },
    Cayley { moduli: Vec<usize> },
    File { path: PathBuf },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Torus { dim, side } => write!(f, "torus:d={dim},m={side}"),
            Family::Cycle { n } => write!(f, "cycle:n={n}"),
            Family::Hypercube { dim } => write!(f, "hypercube:k={dim}"),
            Family::Complete { n } => write!(f, "complete:n={n}"),
            Family::Cayley { moduli } => {
                let mods: Vec<String> = moduli.iter().map(|m| m.to_string()).collect();
                write!(f, "cayley:mods={}", mods.join(","))
            }
            Family::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// A finite connected regular simple graph.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    degree: usize,
    family: Family,
    transitive: bool,
}

impl Graph {
    /// Validates an adjacency structure: sorted, symmetric, loop-free,
    /// regular and connected.
    fn new(mut adjacency: Vec<Vec<usize>>, family: Family, transitive: bool) -> Result<Self> {
        let n = adjacency.len();
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 vertices, got {n}")));
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("parallel edge at vertex {v}")));
            }
            if nbrs.binary_search(&v).is_ok() {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {v}")));
            }
            if let Some(&u) = nbrs.iter().find(|&&u| u >= n) {
                return Err(Error::VertexOutOfRange { vertex: u, n });
            }
        }
        let degree = adjacency[0].len();
        if degree == 0 {
            return Err(Error::InvalidGraph("vertex 0 has no neighbours".into()));
        }
        for (v, nbrs) in adjacency.iter().enumerate() {
            if nbrs.len() != degree {
                return Err(Error::InvalidGraph(format!(
                    "not regular: vertex {v} has degree {} but vertex 0 has degree {degree}",
                    nbrs.len()
                )));
            }
            for &u in nbrs {
                if adjacency[u].binary_search(&v).is_err() {
                    return Err(Error::InvalidGraph(format!("edge {v}->{u} has no reverse")));
                }
            }
        }
        let g = Graph {
            adjacency,
            degree,
            family,
            transitive,
        };
        let reached = g.distances_from(0).iter().filter(|d| d.is_some()).count();
        if reached != n {
            return Err(Error::Disconnected { reached, n });
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Whether the graph comes from a family known to be vertex-transitive.
    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    /// BFS distances from `origin`; `None` for unreachable vertices.
    pub fn distances_from(&self, origin: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[origin] = Some(0);
        queue.push_back(origin);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &u in &self.adjacency[v] {
                if dist[u].is_none() {
                    dist[u] = Some(dv + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Vertices at graph distance at most `radius` from `origin`, sorted.
    pub fn ball(&self, origin: usize, radius: usize) -> Vec<usize> {
        self.distances_from(origin)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.filter(|&d| d <= radius).map(|_| v))
            .collect()
    }
}

fn check_size(n: u128) -> Result<usize> {
    if n > MAX_VERTICES as u128 {
        return Err(Error::TooLarge {
            n,
            limit: MAX_VERTICES,
        });
    }
    Ok(n as usize)
}

/// Cayley graph on `Z_{m1} x ... x Z_{mk}` in mixed-radix vertex order
/// (first coordinate fastest). Generators must already be reduced and
/// deduplicated.
fn abelian_cayley(moduli: &[usize], generators: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n: usize = moduli.iter().product();
    let mut coords = vec![0usize; moduli.len()];
    (0..n)
        .map(|v| {
            let mut rest = v;
            for (c, &m) in coords.iter_mut().zip(moduli) {
                *c = rest % m;
                rest /= m;
            }
            generators
                .iter()
                .map(|g| {
                    let mut idx = 0;
                    for k in (0..moduli.len()).rev() {
                        idx = idx * moduli[k] + (coords[k] + g[k]) % moduli[k];
                    }
                    idx
                })
                .collect()
        })
        .collect()
}

/// Nearest-neighbour torus `(Z/side Z)^dim`.
///
/// With `side = 2` the `+1` and `-1` steps coincide and are stored once, so
/// the degree is `dim` rather than `2 * dim`.
pub fn build_torus(dim: usize, side: usize) -> Result<Graph> {
    if dim < 1 {
        return Err(Error::InvalidGraph("torus dimension must be at least 1".into()));
    }
    if side < 2 {
        return Err(Error::InvalidGraph("torus side must be at least 2".into()));
    }
    let n = (side as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    check_size(n)?;
    let mut gens = Vec::new();
    for k in 0..dim {
        for step in [1, side - 1] {
            let mut g = vec![0; dim];
            g[k] = step;
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
    }
    let family = if dim == 1 {
        Family::Cycle { n: side }
    } else {
        Family::Torus { dim, side }
    };
    Graph::new(abelian_cayley(&vec![side; dim], &gens), family, true)
}

pub fn build_cycle(n: usize) -> Result<Graph> {
    build_torus(1, n)
}

pub fn build_hypercube(dim: usize) -> Result<Graph> {
    if dim < 1 {
        return Err(Error::InvalidGraph("hypercube dimension must be at least 1".into()));
    }
    let n = check_size(1u128.checked_shl(dim as u32).unwrap_or(u128::MAX))?;
    let adjacency = (0..n)
        .map(|v| (0..dim).map(|i| v ^ (1 << i)).collect())
        .collect();
    Graph::new(adjacency, Family::Hypercube { dim }, true)
}

pub fn build_complete(n: usize) -> Result<Graph> {
    check_size(n as u128)?;
    let adjacency = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
    Graph::new(adjacency, Family::Complete { n }, true)
}

/// Cayley graph of `Z_{m1} x ... x Z_{mk}` with the given connection set.
///
/// Generators are reduced modulo the moduli; the set must be closed under
/// inversion, must not contain the identity, and must generate the group.
pub fn build_cayley(moduli: &[usize], generators: &[Vec<i64>]) -> Result<Graph> {
    if moduli.is_empty() || moduli.iter().any(|&m| m < 1) {
        return Err(Error::InvalidGraph("moduli must be positive and non-empty".into()));
    }
    let n = moduli
        .iter()
        .try_fold(1u128, |acc, &m| acc.checked_mul(m as u128))
        .unwrap_or(u128::MAX);
    check_size(n)?;
    let mut gens: Vec<Vec<usize>> = Vec::new();
    for g in generators {
        if g.len() != moduli.len() {
            return Err(Error::InvalidGraph(format!(
                "generator {g:?} has {} coordinates, group has {}",
                g.len(),
                moduli.len()
            )));
        }
        let reduced: Vec<usize> = g
            .iter()
            .zip(moduli)
            .map(|(&x, &m)| x.rem_euclid(m as i64) as usize)
            .collect();
        if reduced.iter().all(|&x| x == 0) {
            return Err(Error::InvalidGraph(format!("generator {g:?} is the identity")));
        }
        if !gens.contains(&reduced) {
            gens.push(reduced);
        }
    }
    for g in &gens {
        let inv: Vec<usize> = g.iter().zip(moduli).map(|(&x, &m)| (m - x) % m).collect();
        if !gens.contains(&inv) {
            return Err(Error::InvalidGraph(format!(
                "connection set is not symmetric: inverse of {g:?} missing"
            )));
        }
    }
    let family = Family::Cayley {
        moduli: moduli.to_vec(),
    };
    Graph::new(abelian_cayley(moduli, &gens), family, true)
}

/// Parses an edge list: a header line `n d`, then one undirected edge
/// `u v` per line (0-indexed). Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::EdgeList {
        line: 1,
        reason: "missing header `n d`".into(),
    })?;
    let nums = |line: usize, s: &str| -> Result<Vec<usize>> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|e| Error::EdgeList {
                    line,
                    reason: format!("`{t}`: {e}"),
                })
            })
            .collect()
    };
    let head = nums(hline, header)?;
    let [n, d] = head[..] else {
        return Err(Error::EdgeList {
            line: hline,
            reason: "header must be `n d`".into(),
        });
    };
    check_size(n as u128)?;
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = 0usize;
    for (line, l) in lines {
        let uv = nums(line, l)?;
        let [u, v] = uv[..] else {
            return Err(Error::EdgeList {
                line,
                reason: "expected `u v`".into(),
            });
        };
        if u >= n || v >= n {
            return Err(Error::EdgeList {
                line,
                reason: format!("vertex out of range 0..{n}"),
            });
        }
        if u == v {
            return Err(Error::EdgeList {
                line,
                reason: format!("self-loop at {u}"),
            });
        }
        if adjacency[u].contains(&v) {
            return Err(Error::EdgeList {
                line,
                reason: format!("duplicate edge {u} {v}"),
            });
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
        edges += 1;
    }
    if 2 * edges != n * d {
        return Err(Error::EdgeList {
            line: hline,
            reason: format!("{edges} edges inconsistent with n = {n}, d = {d}"),
        });
    }
    log::warn!(
        "{}: graph read from file is checked for regularity only; vertex-transitivity is assumed, not verified",
        path.display()
    );
    Graph::new(
        adjacency,
        Family::File {
            path: path.to_path_buf(),
        },
        false,
    )
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, path)
}

/// Graph descriptor accepted on the command line, e.g. `torus:d=2,m=16`,
/// `cycle:n=8`, `hypercube:k=3`, `complete:n=5`,
/// `cayley:mods=4,4;gens=(1,0),(-1,0),(0,1),(0,-1)` or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Torus { dim: usize, side: usize },
    Cycle { n: usize },
    Hypercube { dim: usize },
    Complete { n: usize },
    Cayley { moduli: Vec<usize>, generators: Vec<Vec<i64>> },
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Torus { dim, side } => build_torus(*dim, *side),
            GraphSpec::Cycle { n } => build_cycle(*n),
            GraphSpec::Hypercube { dim } => build_hypercube(*dim),
            GraphSpec::Complete { n } => build_complete(*n),
            GraphSpec::Cayley { moduli, generators } => build_cayley(moduli, generators),
            GraphSpec::File(path) => read_edge_list(path),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Torus { dim, side } => write!(f, "torus:d={dim},m={side}"),
            GraphSpec::Cycle { n } => write!(f, "cycle:n={n}"),
            GraphSpec::Hypercube { dim } => write!(f, "hypercube:k={dim}"),
            GraphSpec::Complete { n } => write!(f, "complete:n={n}"),
            GraphSpec::Cayley { moduli, generators } => {
                let mods: Vec<String> = moduli.iter().map(|m| m.to_string()).collect();
                let gens: Vec<String> = generators
                    .iter()
                    .map(|g| {
                        let c: Vec<String> = g.iter().map(|x| x.to_string()).collect();
                        format!("({})", c.join(","))
                    })
                    .collect();
                write!(f, "cayley:mods={};gens={}", mods.join(","), gens.join(","))
            }
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn spec_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Spec {
        what: "graph spec",
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parses `key=value` pairs separated by commas, e.g. `d=2,m=16`.
fn key_values<'a>(input: &str, body: &'a str) -> Result<Vec<(&'a str, usize)>> {
    body.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| spec_err(input, format!("expected key=value, got `{kv}`")))?;
            let v = v
                .trim()
                .parse::<usize>()
                .map_err(|e| spec_err(input, format!("`{v}`: {e}")))?;
            Ok((k.trim(), v))
        })
        .collect()
}

fn single_key(input: &str, body: &str, key: &str) -> Result<usize> {
    match key_values(input, body)?[..] {
        [(k, v)] if k == key => Ok(v),
        _ => Err(spec_err(input, format!("expected `{key}=<int>`"))),
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let (kind, body) = input
            .split_once(':')
            .ok_or_else(|| spec_err(input, "expected `<family>:<params>`"))?;
        match kind.trim() {
            "torus" => {
                let kv = key_values(input, body)?;
                let get = |key: &str| {
                    kv.iter()
                        .find(|(k, _)| *k == key)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| spec_err(input, format!("missing `{key}`")))
                };
                if kv.len() != 2 {
                    return Err(spec_err(input, "expected `d=<int>,m=<int>`"));
                }
                Ok(GraphSpec::Torus {
                    dim: get("d")?,
                    side: get("m")?,
                })
            }
            "cycle" => Ok(GraphSpec::Cycle {
                n: single_key(input, body, "n")?,
            }),
            "hypercube" => Ok(GraphSpec::Hypercube {
                dim: single_key(input, body, "k")?,
            }),
            "complete" => Ok(GraphSpec::Complete {
                n: single_key(input, body, "n")?,
            }),
            "cayley" => parse_cayley(input, body),
            "file" => {
                if body.is_empty() {
                    return Err(spec_err(input, "missing path"));
                }
                Ok(GraphSpec::File(PathBuf::from(body)))
            }
            other => Err(spec_err(input, format!("unknown family `{other}`"))),
        }
    }
}

fn parse_cayley(input: &str, body: &str) -> Result<GraphSpec> {
    let (mods, gens) = body
        .split_once(';')
        .ok_or_else(|| spec_err(input, "expected `mods=...;gens=...`"))?;
    let mods = mods
        .trim()
        .strip_prefix("mods=")
        .ok_or_else(|| spec_err(input, "missing `mods=`"))?;
    let moduli = mods
        .split(',')
        .map(|m| {
            m.trim()
                .parse::<usize>()
                .map_err(|e| spec_err(input, format!("modulus `{m}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let gens = gens
        .trim()
        .strip_prefix("gens=")
        .ok_or_else(|| spec_err(input, "missing `gens=`"))?;
    let mut generators = Vec::new();
    let mut rest = gens.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| spec_err(input, "generators must look like `(a,b,...)`"))?;
        let (inner, after) = open
            .split_once(')')
            .ok_or_else(|| spec_err(input, "unclosed generator tuple"))?;
        let g = inner
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .map_err(|e| spec_err(input, format!("generator entry `{x}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        generators.push(g);
        rest = after.trim_start_matches(',').trim();
    }
    if generators.is_empty() {
        return Err(spec_err(input, "empty generator list"));
    }
    Ok(GraphSpec::Cayley { moduli, generators })
}

/// Growth decomposition `n = D^q R` with integer `q` and `1 <= R < D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Growth {
    pub q: u32,
    pub r: f64,
}

/// Ball-volume profile around an origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricProfile {
    pub origin: usize,
    pub diameter: usize,
    /// `ball_volume[r]` = number of vertices within distance `r`, for `r = 0..=D`.
    pub ball_volume: Vec<usize>,
    /// `None` when `D < 2`, where the decomposition is undefined.
    pub growth: Option<Growth>,
}

impl MetricProfile {
    pub fn vertex_count(&self) -> usize {
        *self.ball_volume.last().unwrap_or(&0)
    }

    /// Volume of the ball of radius `floor(rho)`; saturates at `n`.
    pub fn volume(&self, rho: f64) -> usize {
        if rho < 0.0 {
            return 0;
        }
        let k = rho.floor();
        if k >= self.diameter as f64 {
            self.vertex_count()
        } else {
            self.ball_volume[k as usize]
        }
    }

    /// Exact `int_0^upper r^3 / V(r) dr`, with `V` constant on `[k, k+1)`.
    pub fn volume_integral(&self, upper: f64) -> f64 {
        if upper <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut k = 0usize;
        loop {
            let lo = k as f64;
            if lo >= upper {
                break;
            }
            if k >= self.diameter {
                total += (upper.powi(4) - lo.powi(4)) / (4.0 * self.vertex_count() as f64);
                break;
            }
            let hi = ((k + 1) as f64).min(upper);
            total += (hi.powi(4) - lo.powi(4)) / (4.0 * self.ball_volume[k] as f64);
            k += 1;
        }
        total
    }
}

/// Unique `q, R` with `n = D^q R`, `1 <= R < D`; `None` for `D < 2`.
pub fn growth_decomposition(n: usize, diameter: usize) -> Option<Growth> {
    if diameter < 2 {
        return None;
    }
    let (n, d) = (n as u128, diameter as u128);
    let mut q = 0u32;
    let mut power = 1u128;
    while power * d <= n {
        power *= d;
        q += 1;
    }
    Some(Growth {
        q,
        r: n as f64 / power as f64,
    })
}

/// BFS profile from `origin`: diameter (eccentricity of the origin), ball
/// volumes and the growth decomposition.
pub fn metric_profile(g: &Graph, origin: usize) -> Result<MetricProfile> {
    let n = g.vertex_count();
    if origin >= n {
        return Err(Error::VertexOutOfRange { vertex: origin, n });
    }
    let dist = g.distances_from(origin);
    let mut counts = Vec::new();
    for d in dist {
        let d = d.ok_or(Error::Disconnected { reached: 0, n })?;
        if d >= counts.len() {
            counts.resize(d + 1, 0usize);
        }
        counts[d] += 1;
    }
    let diameter = counts.len() - 1;
    let ball_volume: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    Ok(MetricProfile {
        origin,
        diameter,
        ball_volume,
        growth: growth_decomposition(n, diameter),
    })
}
