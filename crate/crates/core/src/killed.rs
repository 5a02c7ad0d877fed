//! The chain killed on hitting a target set `A`, its pi-orthonormal
//! eigensystem on `C_0(B)` (functions vanishing on `A`), and the
//! quasi-stationary distributions of the irreducible pieces of `B = A^c`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::linalg;

/// Relative tolerance used when comparing quasi-stationary hitting times.
pub const MAX_REL_TOL: f64 = 1e-9;

/// Target set `A` together with its complement and the irreducible
/// components of the complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    a: Vec<usize>,
    b: Vec<usize>,
    in_a: Vec<bool>,
    /// Each sorted; ordered by smallest vertex.
    components: Vec<Vec<usize>>,
}

impl TargetSet {
    /// Components of `B` are the connected components of the positive-transition
    /// graph restricted to `B`. Under detailed balance `P(x,y) > 0` iff
    /// `P(y,x) > 0`, so undirected search suffices.
    pub fn new(chain: &ReversibleChain, a: &[usize]) -> Result<Self> {
        let n = chain.state_count();
        let mut in_a = vec![false; n];
        for &v in a {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            in_a[v] = true;
        }
        let a: Vec<usize> = (0..n).filter(|&v| in_a[v]).collect();
        if a.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if a.len() == n {
            return Err(Error::FullTarget);
        }
        let b: Vec<usize> = (0..n).filter(|&v| !in_a[v]).collect();
        let mut label = vec![usize::MAX; n];
        let mut components = Vec::new();
        for &start in &b {
            if label[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &(y, _) in chain.row(x) {
                    if !in_a[y] && label[y] == usize::MAX {
                        label[y] = id;
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        Ok(TargetSet {
            a,
            b,
            in_a,
            components,
        })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn contains(&self, x: usize) -> bool {
        self.in_a[x]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn pi_a(&self, chain: &ReversibleChain) -> f64 {
        self.a.iter().map(|&x| chain.pi()[x]).sum()
    }
}

/// Target-set syntax: `0,4` (explicit vertices) or `ball:o=0,r=1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSpec {
    Vertices(Vec<usize>),
    Ball { origin: usize, radius: usize },
}

impl SetSpec {
    pub fn resolve(&self, g: &Graph) -> Result<Vec<usize>> {
        match self {
            SetSpec::Vertices(v) => Ok(v.clone()),
            SetSpec::Ball { origin, radius } => {
                let n = g.vertex_count();
                if *origin >= n {
                    return Err(Error::VertexOutOfRange { vertex: *origin, n });
                }
                Ok(g.ball(*origin, *radius))
            }
        }
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Vertices(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
            SetSpec::Ball { origin, radius } => write!(f, "ball:o={origin},r={radius}"),
        }
    }
}

impl FromStr for SetSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let err = |reason: String| Error::Spec {
            what: "set spec",
            input: input.to_string(),
            reason,
        };
        let input_t = input.trim();
        if let Some(body) = input_t.strip_prefix("ball:") {
            let (mut origin, mut radius) = (None, None);
            for kv in body.split(',') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got `{kv}`")))?;
                let v: usize = v.trim().parse().map_err(|e| err(format!("`{v}`: {e}")))?;
                match k.trim() {
                    "o" => origin = Some(v),
                    "r" => radius = Some(v),
                    other => return Err(err(format!("unknown key `{other}`"))),
                }
            }
            return Ok(SetSpec::Ball {
                origin: origin.ok_or_else(|| err("missing `o`".into()))?,
                radius: radius.ok_or_else(|| err("missing `r`".into()))?,
            });
        }
        if input_t.is_empty() {
            return Ok(SetSpec::Vertices(Vec::new()));
        }
        input_t
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| err(format!("`{v}`: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(SetSpec::Vertices)
    }
}

/// Quasi-stationary distribution of one irreducible component of `B`.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiStationaryComponent {
    pub id: usize,
    pub vertices: Vec<usize>,
    /// Probability vector over all states, zero off the component.
    pub alpha: Vec<f64>,
    /// Perron root of the restricted killed matrix.
    pub rho: f64,
    pub lambda: f64,
    /// `E_alpha[T_A] = 1 / (1 - rho)`.
    pub mean_hit: f64,
    /// Whether the component attains the maximal quasi-stationary hitting time.
    pub is_max: bool,
}

/// Symmetrized restriction of `P` to `vertices`.
fn restricted_symmetric(chain: &ReversibleChain, vertices: &[usize]) -> DMatrix<f64> {
    let p = chain.transition();
    let pi = chain.pi();
    let k = vertices.len();
    DMatrix::from_fn(k, k, |i, j| {
        let (x, y) = (vertices[i], vertices[j]);
        (pi[x] / pi[y]).sqrt() * p[(x, y)]
    })
}

/// Perron data from a component's leading symmetric eigenpair: the unit
/// eigenvector (sign fixed to be nonnegative) and the quasi-stationary law.
fn perron_from_leading(
    chain: &ReversibleChain,
    id: usize,
    vertices: &[usize],
    rho: f64,
    leading: &[f64],
) -> Result<(Vec<f64>, QuasiStationaryComponent)> {
    let pi = chain.pi();
    let sign = if leading.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let unit: Vec<f64> = leading.iter().map(|u| sign * u).collect();
    // alpha is proportional to pi * f = sqrt(pi) * u
    let raw: Vec<f64> = vertices
        .iter()
        .zip(&unit)
        .map(|(&x, u)| pi[x].sqrt() * u)
        .collect();
    let total: f64 = raw.iter().sum();
    let mut alpha = vec![0.0; chain.state_count()];
    for (&x, r) in vertices.iter().zip(&raw) {
        let a = r / total;
        if a < -1e-9 {
            return Err(Error::NonPositivePerron {
                component: id,
                value: a,
            });
        }
        alpha[x] = a.max(0.0);
    }
    let mass: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= mass);
    let lambda = 1.0 - rho;
    Ok((
        unit,
        QuasiStationaryComponent {
            id,
            vertices: vertices.to_vec(),
            alpha,
            rho,
            lambda,
            mean_hit: 1.0 / lambda,
            is_max: false,
        },
    ))
}

/// Quasi-stationary distribution of component `component` of `ts`.
pub fn quasi_stationary(
    chain: &ReversibleChain,
    ts: &TargetSet,
    component: usize,
) -> Result<QuasiStationaryComponent> {
    let vertices = ts.components().get(component).ok_or_else(|| {
        Error::InvalidChain(format!(
            "component {component} does not exist ({} components)",
            ts.components().len()
        ))
    })?;
    let eig = linalg::eigen_decreasing(restricted_symmetric(chain, vertices))?;
    let leading: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
    perron_from_leading(chain, component, vertices, eig.values[0], &leading).map(|(_, q)| q)
}

/// Index of the component with maximal `mean_hit`. Ties within relative
/// `MAX_REL_TOL` go to the component with the smallest vertex, which is the
/// first one in component order.
pub fn select_max_component(components: &[QuasiStationaryComponent]) -> usize {
    let best = components
        .iter()
        .map(|c| c.mean_hit)
        .fold(f64::NEG_INFINITY, f64::max);
    components
        .iter()
        .filter(|c| c.mean_hit >= best * (1.0 - MAX_REL_TOL))
        .min_by_key(|c| c.vertices[0])
        .map(|c| c.id)
        .unwrap_or(0)
}

/// Eigensystem of the killed chain on `C_0(B)`.
///
/// Index 0 is always the Perron pair of the designated maximal component
/// `M`; the remaining pairs follow in increasing `lambda`.
#[derive(Debug, Clone)]
pub struct KilledSpectrum {
    lambdas: Vec<f64>,
    /// Column `i` holds `f_{i+1}` on all `n` states (zero on `A`).
    eigvecs: DMatrix<f64>,
    coeffs: Vec<f64>,
    component_of: Vec<usize>,
    components: Vec<QuasiStationaryComponent>,
    designated: usize,
    pi_a: f64,
}

impl KilledSpectrum {
    pub fn new(chain: &ReversibleChain, ts: &TargetSet) -> Result<Self> {
        Self::build(chain, ts, None)
    }

    /// Same as [`KilledSpectrum::new`] with `component` designated as `M`;
    /// fails unless it attains the maximal hitting time.
    pub fn with_designated(
        chain: &ReversibleChain,
        ts: &TargetSet,
        component: usize,
    ) -> Result<Self> {
        Self::build(chain, ts, Some(component))
    }

    fn build(chain: &ReversibleChain, ts: &TargetSet, designate: Option<usize>) -> Result<Self> {
        let n = chain.state_count();
        let pi = chain.pi();
        // (lambda, component, unit vector over the component's vertices)
        let mut pairs: Vec<(f64, usize, Vec<f64>)> = Vec::with_capacity(ts.b().len());
        let mut components = Vec::with_capacity(ts.components().len());
        for (id, vertices) in ts.components().iter().enumerate() {
            let eig = linalg::eigen_decreasing(restricted_symmetric(chain, vertices))?;
            let leading: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
            let (unit, qs) = perron_from_leading(chain, id, vertices, eig.values[0], &leading)?;
            pairs.push((1.0 - eig.values[0], id, unit));
            for k in 1..vertices.len() {
                let v: Vec<f64> = eig.vectors.column(k).iter().copied().collect();
                pairs.push((1.0 - eig.values[k], id, v));
            }
            components.push(qs);
        }
        let best = components
            .iter()
            .map(|c| c.mean_hit)
            .fold(f64::NEG_INFINITY, f64::max);
        for c in &mut components {
            c.is_max = c.mean_hit >= best * (1.0 - MAX_REL_TOL);
        }
        let designated = match designate {
            None => select_max_component(&components),
            Some(id) => {
                if !components.get(id).is_some_and(|c| c.is_max) {
                    return Err(Error::NotMaximal { component: id });
                }
                id
            }
        };
        // The designated Perron pair is the first pair pushed for that component.
        let lead_pos = pairs
            .iter()
            .position(|(_, c, _)| *c == designated)
            .expect("every component contributes a pair");
        let lead = pairs.remove(lead_pos);
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        pairs.insert(0, lead);

        let m = pairs.len();
        let mut eigvecs = DMatrix::zeros(n, m);
        let mut lambdas = Vec::with_capacity(m);
        let mut component_of = Vec::with_capacity(m);
        for (i, (lambda, comp, unit)) in pairs.into_iter().enumerate() {
            for (&x, u) in ts.components()[comp].iter().zip(&unit) {
                eigvecs[(x, i)] = u / pi[x].sqrt();
            }
            lambdas.push(lambda);
            component_of.push(comp);
        }
        let coeffs: Vec<f64> = (0..m)
            .map(|i| ts.b().iter().map(|&x| pi[x] * eigvecs[(x, i)]).sum())
            .collect();
        Ok(KilledSpectrum {
            lambdas,
            eigvecs,
            coeffs,
            component_of,
            components,
            designated,
            pi_a: ts.pi_a(chain),
        })
    }

    /// `m = |B|`.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Eigenvalues of `I_B - P_B` on `C_0(B)`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `gamma_i = 1 - lambda_i`, eigenvalues of `P_B`.
    pub fn gamma(&self, i: usize) -> f64 {
        1.0 - self.lambdas[i]
    }

    /// `f_i` in column `i`.
    pub fn eigvecs(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    /// `c_i = E_pi[f_i]`, the coordinates of `1_B` in the basis `f_i`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn component_of(&self, i: usize) -> usize {
        self.component_of[i]
    }

    pub fn components(&self) -> &[QuasiStationaryComponent] {
        &self.components
    }

    /// The designated maximal component `M`.
    pub fn max_component(&self) -> &QuasiStationaryComponent {
        &self.components[self.designated]
    }

    pub fn pi_a(&self) -> f64 {
        self.pi_a
    }

    /// Number of components attaining the maximal hitting time.
    pub fn max_multiplicity(&self) -> usize {
        self.components.iter().filter(|c| c.is_max).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_complete, build_cycle};

    fn srw(g: Graph) -> ReversibleChain {
        ReversibleChain::srw(&g).unwrap()
    }

    #[test]
    fn components_of_cut_cycle() {
        let c8 = srw(build_cycle(8).unwrap());
        let ts = TargetSet::new(&c8, &[0, 4]).unwrap();
        assert_eq!(ts.components(), &[vec![1, 2, 3], vec![5, 6, 7]]);
        let ts = TargetSet::new(&c8, &[0]).unwrap();
        assert_eq!(ts.components().len(), 1);
        assert_eq!(ts.components()[0].len(), 7);
        let k4 = srw(build_complete(4).unwrap());
        let ts = TargetSet::new(&k4, &[0]).unwrap();
        assert_eq!(ts.components(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn target_set_errors() {
        let c4 = srw(build_cycle(4).unwrap());
        assert!(matches!(TargetSet::new(&c4, &[]), Err(Error::EmptyTarget)));
        assert!(matches!(
            TargetSet::new(&c4, &[0, 1, 2, 3]),
            Err(Error::FullTarget)
        ));
        assert!(matches!(
            TargetSet::new(&c4, &[9]),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn complete_graph_quasi_stationary() {
        let k4 = srw(build_complete(4).unwrap());
        let ts = TargetSet::new(&k4, &[0]).unwrap();
        let q = quasi_stationary(&k4, &ts, 0).unwrap();
        for &x in &[1, 2, 3] {
            assert!((q.alpha[x] - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((q.mean_hit - 3.0).abs() < 1e-12);
        let ks = KilledSpectrum::new(&k4, &ts).unwrap();
        assert!((ks.lambdas()[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((ks.coeffs()[0].powi(2) - 0.75).abs() < 1e-12);
        assert!(ks.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn cycle_four_quasi_stationary() {
        let c4 = srw(build_cycle(4).unwrap());
        let ts = TargetSet::new(&c4, &[0]).unwrap();
        let q = quasi_stationary(&c4, &ts, 0).unwrap();
        let r2 = 2f64.sqrt();
        let expected = [0.0, 1.0 / (2.0 + r2), r2 / (2.0 + r2), 1.0 / (2.0 + r2)];
        for (a, e) in q.alpha.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12);
        }
        assert!((q.mean_hit - (2.0 + r2)).abs() < 1e-12);
    }

    #[test]
    fn singleton_component() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let chain = ReversibleChain::new(p, vec![0.5, 0.5]).unwrap();
        let ts = TargetSet::new(&chain, &[1]).unwrap();
        let ks = KilledSpectrum::new(&chain, &ts).unwrap();
        assert_eq!(ks.len(), 1);
        assert!((ks.lambdas()[0] - 1.0).abs() < 1e-15);
        assert!((ks.coeffs()[0].powi(2) - 0.5).abs() < 1e-15);
        assert_eq!(ks.max_component().alpha, vec![1.0, 0.0]);
    }

    #[test]
    fn tie_break_and_designation() {
        let c8 = srw(build_cycle(8).unwrap());
        let ts = TargetSet::new(&c8, &[0, 4]).unwrap();
        let ks = KilledSpectrum::new(&c8, &ts).unwrap();
        assert_eq!(ks.max_component().vertices, vec![1, 2, 3]);
        assert_eq!(ks.max_multiplicity(), 2);
        let other = KilledSpectrum::with_designated(&c8, &ts, 1).unwrap();
        assert_eq!(other.max_component().vertices, vec![5, 6, 7]);

        let ts = TargetSet::new(&c8, &[0, 3]).unwrap();
        let ks = KilledSpectrum::new(&c8, &ts).unwrap();
        assert_eq!(ks.max_component().vertices, vec![4, 5, 6, 7]);
        assert!(matches!(
            KilledSpectrum::with_designated(&c8, &ts, 0),
            Err(Error::NotMaximal { component: 0 })
        ));
    }

    #[test]
    fn set_spec_parsing() {
        assert_eq!(
            "0,4".parse::<SetSpec>().unwrap(),
            SetSpec::Vertices(vec![0, 4])
        );
        let ball: SetSpec = "ball:o=0,r=1".parse().unwrap();
        assert_eq!(ball, SetSpec::Ball { origin: 0, radius: 1 });
        let g = build_cycle(8).unwrap();
        assert_eq!(ball.resolve(&g).unwrap(), vec![0, 1, 7]);
        assert!("ball:o=0".parse::<SetSpec>().is_err());
        assert!("1,x".parse::<SetSpec>().is_err());
    }
}
