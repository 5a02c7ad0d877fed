//! Exact hitting-time laws from the killed eigensystem.
//!
//! With `1_B = sum_i c_i f_i`,
//!
//! ```text
//! P_pi[T_A > t] = sum_i c_i^2 e^{-lambda_i t}
//! P_x[T_A > t]  = sum_i c_i f_i(x) e^{-lambda_i t}     (x in B)
//! ```
//!
//! and the quasi-stationary default of stationarity is `R_M = 1 - c_1^2`.

use nalgebra::DVector;

use crate::chain::ReversibleChain;
use crate::error::Result;
use crate::killed::{KilledSpectrum, TargetSet};
use crate::transient;

/// Below this, `sum_{i>=2} c_i^2` is treated as zero and `t_med = 0`.
pub const TMED_DEGENERATE_MASS: f64 = 1e-14;
const TMED_ABS_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct HittingLaw {
    killed: KilledSpectrum,
    pi: Vec<f64>,
    in_a: Vec<bool>,
    t_rel: f64,
    r_m: f64,
    r_m_alpha: f64,
    e_pi: f64,
    t_med: f64,
}

impl HittingLaw {
    pub fn new(chain: &ReversibleChain, ts: &TargetSet) -> Result<Self> {
        let killed = KilledSpectrum::new(chain, ts)?;
        Ok(Self::from_spectrum(chain, ts, killed))
    }

    /// Builds the law from an already computed spectrum (e.g. one with a
    /// specific designated component).
    pub fn from_spectrum(chain: &ReversibleChain, ts: &TargetSet, killed: KilledSpectrum) -> Self {
        let c1 = killed.coeffs()[0];
        let r_m = 1.0 - c1 * c1;
        // Second route: quasi-stationary law by power iteration, no eigensolver.
        let power = transient::perron_by_power_iteration(
            chain,
            ts,
            killed.max_component().id,
            POWER_MAX_ITER,
        );
        if !power.converged {
            log::warn!(
                "power iteration for the quasi-stationary law stopped after {} iterations",
                power.iterations
            );
        }
        let norm_sq: f64 = power
            .alpha
            .iter()
            .zip(chain.pi())
            .map(|(a, p)| a * a / p)
            .sum();
        let r_m_alpha = (norm_sq - 1.0) / norm_sq;
        let e_pi = killed
            .coeffs()
            .iter()
            .zip(killed.lambdas())
            .map(|(c, l)| c * c / l)
            .sum();
        let mut law = HittingLaw {
            killed,
            pi: chain.pi().to_vec(),
            in_a: (0..chain.state_count()).map(|x| ts.contains(x)).collect(),
            t_rel: chain.t_rel(),
            r_m,
            r_m_alpha,
            e_pi,
            t_med: 0.0,
        };
        law.t_med = law.solve_t_med();
        law
    }

    pub fn killed(&self) -> &KilledSpectrum {
        &self.killed
    }

    pub fn pi_a(&self) -> f64 {
        self.killed.pi_a()
    }

    /// `R_M = 1 - c_1^2`.
    pub fn r_m(&self) -> f64 {
        self.r_m
    }

    /// `R_M = (|alpha_M/pi|^2 - 1) / |alpha_M/pi|^2` with `alpha_M` from power iteration.
    pub fn r_m_from_alpha(&self) -> f64 {
        self.r_m_alpha
    }

    pub fn t_rel(&self) -> f64 {
        self.t_rel
    }

    pub fn t_med(&self) -> f64 {
        self.t_med
    }

    pub fn lambda1(&self) -> f64 {
        self.killed.lambdas()[0]
    }

    /// `E_{alpha_M}[T_A] = 1 / lambda_1`.
    pub fn mean_from_alpha(&self) -> f64 {
        1.0 / self.lambda1()
    }

    /// `E_pi[T_A] = sum_i c_i^2 / lambda_i`.
    pub fn mean_from_pi(&self) -> f64 {
        self.e_pi
    }

    /// `P_{alpha_M}[T_A > t] = e^{-lambda_1 t}`.
    pub fn tail_from_alpha(&self, t: f64) -> f64 {
        (-self.lambda1() * t).exp()
    }

    pub fn tail_from_pi(&self, t: f64) -> f64 {
        self.killed
            .coeffs()
            .iter()
            .zip(self.killed.lambdas())
            .map(|(c, l)| c * c * (-l * t).exp())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn tail_from_vertex(&self, x: usize, t: f64) -> f64 {
        if self.in_a[x] {
            return 0.0;
        }
        let f = self.killed.eigvecs();
        self.killed
            .coeffs()
            .iter()
            .zip(self.killed.lambdas())
            .enumerate()
            .map(|(i, (c, l))| c * f[(x, i)] * (-l * t).exp())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `P_x[T_A > t]` for every state `x` (zero on `A`).
    pub fn tails_from_vertices(&self, t: f64) -> Vec<f64> {
        self.weighted_vertex_sum(|l| (-l * t).exp())
    }

    /// `P_x[T_A > tau]` for every `x`, with `tau ~ Exp(rate)` independent of the chain:
    /// `sum_i c_i f_i(x) rate / (lambda_i + rate)`.
    pub fn survives_exp_clock(&self, rate: f64) -> Vec<f64> {
        self.weighted_vertex_sum(|l| rate / (l + rate))
    }

    fn weighted_vertex_sum(&self, weight: impl Fn(f64) -> f64) -> Vec<f64> {
        let w = DVector::from_iterator(
            self.killed.len(),
            self.killed
                .coeffs()
                .iter()
                .zip(self.killed.lambdas())
                .map(|(c, &l)| c * weight(l)),
        );
        let v = self.killed.eigvecs() * w;
        v.iter()
            .zip(&self.in_a)
            .map(|(p, &a)| if a { 0.0 } else { p.clamp(0.0, 1.0) })
            .collect()
    }

    /// `sum_{x in B} pi(x) P_x[T_A <= t]^2` from the spectrum:
    /// `sum_i c_i^2 (1 - e^{-lambda_i t})^2`.
    pub fn mean_sq_hit_profile(&self, t: f64) -> f64 {
        self.killed
            .coeffs()
            .iter()
            .zip(self.killed.lambdas())
            .map(|(c, l)| c * c * (-(-l * t).exp_m1()).powi(2))
            .sum()
    }

    /// Same quantity summed over vertices from the pointwise tails.
    pub fn mean_sq_hit_spatial(&self, t: f64) -> f64 {
        self.tails_from_vertices(t)
            .iter()
            .zip(&self.pi)
            .zip(&self.in_a)
            .filter(|(_, &a)| !a)
            .map(|((s, p), _)| p * (1.0 - s).powi(2))
            .sum()
    }

    /// `sum_{i>=2} c_i^2 = R_M - pi(A)`.
    pub fn excess_mass(&self) -> f64 {
        self.killed.coeffs()[1..].iter().map(|c| c * c).sum()
    }

    fn tmed_gap(&self, t: f64) -> f64 {
        let c = self.killed.coeffs();
        let l = self.killed.lambdas();
        let lhs: f64 = (1..c.len())
            .map(|i| c[i] * c[i] * (-(-l[i] * t).exp_m1()).powi(2))
            .sum();
        lhs - 0.5 * self.excess_mass()
    }

    /// Unique root of `sum_{i>=2} c_i^2 (1 - e^{-lambda_i t})^2 = (1/2) sum_{i>=2} c_i^2`
    /// by bisection; zero when the excess mass vanishes.
    pub fn solve_t_med(&self) -> f64 {
        if self.excess_mass() <= TMED_DEGENERATE_MASS {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = 2.0 * self.t_rel;
        let mut doublings = 0;
        while self.tmed_gap(hi) < 0.0 && doublings < 200 {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
        }
        while hi - lo > TMED_ABS_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tmed_gap(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_complete, build_cycle};
    use nalgebra::DMatrix;

    fn law(chain: &ReversibleChain, a: &[usize]) -> HittingLaw {
        let ts = TargetSet::new(chain, a).unwrap();
        HittingLaw::new(chain, &ts).unwrap()
    }

    #[test]
    fn two_state_tail() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let chain = ReversibleChain::new(p, vec![0.5, 0.5]).unwrap();
        let l = law(&chain, &[1]);
        for t in [0.0, 0.3, 2.0, 10.0] {
            assert!((l.tail_from_pi(t) - 0.5 * (-t).exp()).abs() < 1e-15);
        }
        assert!((l.mean_from_pi() - 0.5).abs() < 1e-15);
        assert_eq!(l.t_med(), 0.0);
        assert_eq!(l.tail_from_vertex(1, 0.0), 0.0);
    }

    #[test]
    fn complete_graph_law() {
        let k4 = ReversibleChain::srw(&build_complete(4).unwrap()).unwrap();
        let l = law(&k4, &[0]);
        assert!((l.mean_from_pi() - 2.25).abs() < 1e-12);
        assert!((l.r_m() - 0.25).abs() < 1e-12);
        assert!((l.tail_from_vertex(1, 3.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(l.t_med(), 0.0);
    }

    #[test]
    fn cycle_four_law() {
        let c4 = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
        let l = law(&c4, &[0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t_med = -(1.0 - s).ln() / (1.0 + s);
        assert!((l.t_med() - t_med).abs() < 1e-11);
        assert!((l.mean_from_pi() - 2.5).abs() < 1e-12);
        assert!((l.r_m() - l.r_m_from_alpha()).abs() < 1e-12);
        for x in 1..4 {
            assert!((l.tail_from_vertex(x, 0.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn profiles_agree_and_saturate() {
        let c8 = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
        let l = law(&c8, &[0, 3]);
        assert_eq!(l.mean_sq_hit_profile(0.0), 0.0);
        for t in [0.1, 1.0, 7.5, 40.0] {
            assert!((l.mean_sq_hit_profile(t) - l.mean_sq_hit_spatial(t)).abs() < 1e-12);
        }
        assert!((l.mean_sq_hit_profile(1e4) - 0.75).abs() < 1e-12);
    }
}
