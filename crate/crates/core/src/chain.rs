//! Rate-1 continuous-time reversible Markov chains and their spectra.
//!
//! The spectrum of `I - P` is obtained from the symmetric conjugate
//! `S = Diag(pi)^{1/2} P Diag(pi)^{-1/2}`. Eigenvectors are mapped back to
//! `g_i = Diag(pi)^{-1/2} u_i`, which makes them orthonormal for
//! `<f, g>_pi = sum_x pi(x) f(x) g(x)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::linalg;

/// Tolerance for stochasticity and detailed balance at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ReversibleChain {
    transition: DMatrix<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    pi: Vec<f64>,
    /// `0 = beta_1 < beta_2 <= ... <= beta_n`, eigenvalues of `I - P`.
    betas: Vec<f64>,
    /// Column `i` holds `g_{i+1}`.
    eigvecs: DMatrix<f64>,
    t_rel: f64,
}

impl ReversibleChain {
    /// Builds the chain from a transition matrix and its stationary law.
    pub fn new(transition: DMatrix<f64>, pi: Vec<f64>) -> Result<Self> {
        let n = transition.nrows();
        if n < 2 || transition.ncols() != n || pi.len() != n {
            return Err(Error::InvalidChain(format!(
                "need a square matrix with n >= 2 and pi of length n (got {}x{}, {})",
                n,
                transition.ncols(),
                pi.len()
            )));
        }
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidChain("pi must be strictly positive".into()));
        }
        let mass: f64 = pi.iter().sum();
        if (mass - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidChain(format!("pi sums to {mass}")));
        }
        for x in 0..n {
            let row = transition.row(x);
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidChain(format!("row {x} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > CONSTRUCTION_TOL {
                return Err(Error::InvalidChain(format!("row {x} sums to {s}")));
            }
        }
        for x in 0..n {
            for y in (x + 1)..n {
                let lhs = pi[x] * transition[(x, y)];
                let rhs = pi[y] * transition[(y, x)];
                if (lhs - rhs).abs() > CONSTRUCTION_TOL {
                    return Err(Error::InvalidChain(format!(
                        "detailed balance fails at ({x},{y}): {lhs:e} vs {rhs:e}"
                    )));
                }
            }
        }
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|x| {
                (0..n)
                    .filter(|&y| transition[(x, y)] > 0.0)
                    .map(|y| (y, transition[(x, y)]))
                    .collect()
            })
            .collect();
        let reached = reachable_from(&rows, 0);
        if reached != n {
            return Err(Error::InvalidChain(format!(
                "chain is reducible ({reached} of {n} states reachable from 0)"
            )));
        }

        let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |x, y| sqrt_pi[x] * transition[(x, y)] / sqrt_pi[y]);
        let eig = linalg::eigen_decreasing(sym)?;
        if eig.values[0] > 1.0 + 1e-9 || eig.values[n - 1] < -1.0 - 1e-9 {
            return Err(Error::Eigen(format!(
                "eigenvalues of P outside [-1, 1]: {} .. {}",
                eig.values[n - 1],
                eig.values[0]
            )));
        }
        let mut betas: Vec<f64> = eig.values.iter().map(|theta| 1.0 - theta).collect();
        betas[0] = 0.0;
        if betas[1] <= 1e-12 {
            return Err(Error::Eigen(format!("spectral gap {} is not positive", betas[1])));
        }
        let mut eigvecs = DMatrix::from_fn(n, n, |x, i| eig.vectors[(x, i)] / sqrt_pi[x]);
        eigvecs.column_mut(0).fill(1.0);
        let t_rel = 1.0 / betas[1];
        Ok(ReversibleChain {
            transition,
            rows,
            pi,
            betas,
            eigvecs,
            t_rel,
        })
    }

    /// Simple random walk: `P(x,y) = 1/d` for neighbours, `pi` uniform.
    pub fn srw(g: &Graph) -> Result<Self> {
        let n = g.vertex_count();
        let w = 1.0 / g.degree() as f64;
        let mut p = DMatrix::zeros(n, n);
        for x in 0..n {
            for &y in g.neighbors(x) {
                p[(x, y)] = w;
            }
        }
        Self::new(p, vec![1.0 / n as f64; n])
    }

    pub fn state_count(&self) -> usize {
        self.pi.len()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// Positive entries of row `x` as `(y, P(x,y))`.
    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Eigenvalues of `I - P`, increasing, `betas()[0] == 0`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// The pi-orthonormal eigenbasis, `g_i` in column `i`.
    pub fn eigenbasis(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    pub fn t_rel(&self) -> f64 {
        self.t_rel
    }

    /// `p_t(x, y) = P_x(X_t = y) = sum_i e^{-beta_i t} g_i(x) g_i(y) pi(y)`.
    pub fn heat_kernel(&self, t: f64, x: usize, y: usize) -> f64 {
        let s: f64 = self
            .betas
            .iter()
            .enumerate()
            .map(|(i, b)| (-b * t).exp() * self.eigvecs[(x, i)] * self.eigvecs[(y, i)])
            .sum();
        (s * self.pi[y]).clamp(0.0, 1.0)
    }

    /// The law of `X_t` started from `x`.
    pub fn heat_kernel_row(&self, t: f64, x: usize) -> Vec<f64> {
        let weights = DVector::from_iterator(
            self.betas.len(),
            self.betas
                .iter()
                .enumerate()
                .map(|(i, b)| (-b * t).exp() * self.eigvecs[(x, i)]),
        );
        let row = &self.eigvecs * weights;
        row.iter()
            .zip(&self.pi)
            .map(|(v, p)| (v * p).clamp(0.0, 1.0))
            .collect()
    }

    /// `int_0^inf p_s(x, y) e^{-rate s} ds`, from the spectrum.
    pub fn resolvent(&self, rate: f64, x: usize, y: usize) -> f64 {
        let s: f64 = self
            .betas
            .iter()
            .enumerate()
            .map(|(i, b)| self.eigvecs[(x, i)] * self.eigvecs[(y, i)] / (b + rate))
            .sum();
        s * self.pi[y]
    }

    /// Eigentime sum `sum_{i>=2} 1/beta_i`; equals `E_pi[T_o]` on a
    /// vertex-transitive graph.
    pub fn eigentime_mean_hit(&self) -> f64 {
        self.betas[1..].iter().map(|b| 1.0 / b).sum()
    }

    /// `nu([0, r]) = (1/n) #{i >= 2 : beta_i <= r}`.
    pub fn spectral_counting(&self, r: f64) -> f64 {
        let n = self.betas.len();
        self.betas[1..].iter().filter(|&&b| b <= r).count() as f64 / n as f64
    }
}

fn reachable_from(rows: &[Vec<(usize, f64)>], start: usize) -> usize {
    let mut seen = vec![false; rows.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &(y, _) in &rows[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_complete, build_cycle};

    #[test]
    fn complete_graph_gap() {
        let c = ReversibleChain::srw(&build_complete(4).unwrap()).unwrap();
        assert!((c.betas()[1] - 4.0 / 3.0).abs() < 1e-12);
        assert!((c.t_rel() - 0.75).abs() < 1e-12);
        assert!((c.eigentime_mean_hit() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn cycle_four_spectrum() {
        let c = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0];
        for (b, e) in c.betas().iter().zip(expected) {
            assert!((b - e).abs() < 1e-12);
        }
        assert!((c.t_rel() - 1.0).abs() < 1e-12);
        assert_eq!(c.spectral_counting(1.0), 0.5);
        assert_eq!(c.spectral_counting(0.5), 0.0);
        assert_eq!(c.spectral_counting(2.0), 0.75);
    }

    #[test]
    fn cycle_eight_eigentime() {
        let c = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
        assert!((c.eigentime_mean_hit() - 10.5).abs() < 1e-10);
    }

    #[test]
    fn two_state_chain() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let c = ReversibleChain::new(p, vec![0.5, 0.5]).unwrap();
        assert!((c.betas()[1] - 2.0).abs() < 1e-14);
        assert!((c.eigentime_mean_hit() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn heat_kernel_limits() {
        let c = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
        assert!((c.heat_kernel(0.0, 3, 3) - 1.0).abs() < 1e-12);
        assert!(c.heat_kernel(0.0, 3, 4).abs() < 1e-12);
        let late = 50.0 * c.t_rel();
        assert!((c.heat_kernel(late, 0, 5) - 0.125).abs() < 1e-10);
    }

    #[test]
    fn rejects_invalid_chains() {
        let not_stochastic = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 1.0, 0.0]);
        assert!(ReversibleChain::new(not_stochastic, vec![0.5, 0.5]).is_err());
        let not_reversible = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        );
        assert!(ReversibleChain::new(not_reversible, vec![1.0 / 3.0; 3]).is_err());
        let reducible = DMatrix::identity(2, 2);
        assert!(ReversibleChain::new(reducible, vec![0.5, 0.5]).is_err());
    }
}
