//! Eigensolver-free transient analysis of the killed chain.
//!
//! These routines only use sparse products with `P`, so they serve as an
//! independent check on everything derived from the killed eigensystem.

use crate::chain::ReversibleChain;
use crate::killed::TargetSet;

/// Longest time step handled by one uniformization pass.
const MAX_STEP: f64 = 200.0;
/// Poisson weights below this (past the mode) end a pass.
const WEIGHT_CUTOFF: f64 = 1e-18;

fn killed_step(chain: &ReversibleChain, ts: &TargetSet, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for &x in ts.b() {
        let vx = v[x];
        if vx == 0.0 {
            continue;
        }
        for &(y, p) in chain.row(x) {
            if !ts.contains(y) {
                out[y] += vx * p;
            }
        }
    }
}

/// Replaces `v` by `v e^{dt Q_B}` using `e^{dt Q_B} = sum_k Pois(dt; k) P_B^k`.
fn advance(chain: &ReversibleChain, ts: &TargetSet, v: &mut Vec<f64>, dt: f64) {
    let n = v.len();
    let mut term = v.clone();
    let mut next = vec![0.0; n];
    let mut weight = (-dt).exp();
    let mut acc: Vec<f64> = term.iter().map(|t| weight * t).collect();
    let mut k = 0usize;
    loop {
        k += 1;
        killed_step(chain, ts, &term, &mut next);
        std::mem::swap(&mut term, &mut next);
        weight *= dt / k as f64;
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += weight * t;
        }
        if k as f64 > dt && weight < WEIGHT_CUTOFF {
            break;
        }
    }
    *v = acc;
}

/// `P_mu(T_A > t)` at each time of an increasing `grid`, for a start
/// distribution `mu` over all states.
pub fn uniformized_tails(
    chain: &ReversibleChain,
    ts: &TargetSet,
    mu: &[f64],
    grid: &[f64],
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..mu.len())
        .map(|x| if ts.contains(x) { 0.0 } else { mu[x] })
        .collect();
    let mut now = 0.0;
    grid.iter()
        .map(|&t| {
            assert!(t >= now, "grid must be increasing");
            let mut remaining = t - now;
            while remaining > 0.0 {
                let dt = remaining.min(MAX_STEP);
                advance(chain, ts, &mut v, dt);
                remaining -= dt;
            }
            now = t;
            v.iter().sum::<f64>().clamp(0.0, 1.0)
        })
        .collect()
}

/// Quasi-stationary law of an irreducible component computed by power
/// iteration on the lazy killed matrix `(I + P_C) / 2`.
#[derive(Debug, Clone)]
pub struct PowerPerron {
    /// Probability vector over all states.
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn perron_by_power_iteration(
    chain: &ReversibleChain,
    ts: &TargetSet,
    component: usize,
    max_iter: usize,
) -> PowerPerron {
    let n = chain.state_count();
    let vertices = &ts.components()[component];
    let mut member = vec![false; n];
    vertices.iter().for_each(|&x| member[x] = true);
    let mass: f64 = vertices.iter().map(|&x| chain.pi()[x]).sum();
    let mut alpha = vec![0.0; n];
    for &x in vertices {
        alpha[x] = chain.pi()[x] / mass;
    }
    let mut next = vec![0.0; n];
    let mut prev_change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        next.iter_mut().for_each(|v| *v = 0.0);
        for &x in vertices {
            let ax = alpha[x];
            next[x] += 0.5 * ax;
            for &(y, p) in chain.row(x) {
                if member[y] {
                    next[y] += 0.5 * ax * p;
                }
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut alpha, &mut next);
        // Geometric convergence: remaining error ~ change * r / (1 - r).
        let ratio = (change / prev_change).min(0.999_999_9);
        prev_change = change;
        if it > 10 && change * ratio / (1.0 - ratio) < 1e-14 {
            converged = true;
            break;
        }
        if change == 0.0 {
            converged = true;
            break;
        }
    }
    // rho = mass kept by one step of P_C from alpha.
    let rho: f64 = vertices
        .iter()
        .map(|&x| {
            alpha[x]
                * chain
                    .row(x)
                    .iter()
                    .filter(|(y, _)| member[*y])
                    .map(|(_, p)| p)
                    .sum::<f64>()
        })
        .sum();
    PowerPerron {
        alpha,
        rho,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_complete, build_cycle};

    #[test]
    fn complete_graph_tail_is_exponential() {
        let k4 = ReversibleChain::srw(&build_complete(4).unwrap()).unwrap();
        let ts = TargetSet::new(&k4, &[0]).unwrap();
        let start = [0.0, 1.0, 0.0, 0.0];
        let grid = [0.0, 0.5, 3.0, 30.0, 400.0];
        let tails = uniformized_tails(&k4, &ts, &start, &grid);
        for (t, p) in grid.iter().zip(tails) {
            assert!((p - (-t / 3.0f64).exp()).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn power_iteration_cycle_four() {
        let c4 = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
        let ts = TargetSet::new(&c4, &[0]).unwrap();
        let p = perron_by_power_iteration(&c4, &ts, 0, 100_000);
        assert!(p.converged);
        assert!((p.rho - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let r2 = 2f64.sqrt();
        assert!((p.alpha[2] - r2 / (2.0 + r2)).abs() < 1e-12);
    }
}
