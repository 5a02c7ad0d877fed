//! Error functionals of the exponential approximation and the checks that
//! tie them together.
//!
//! Every check produces a [`Verdict`]: inequalities report their worst
//! slack (must be `>= -tolerance`), identities their worst residual (must
//! be `<= tolerance`). Checks that need a vertex-transitive graph live
//! behind [`TransitiveContext`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::Result;
use crate::graphs::{metric_profile, Graph, MetricProfile};
use crate::killed::TargetSet;
use crate::laws::HittingLaw;
use crate::quadrature;
use crate::transient;

/// Proof constant of the volume-growth bound.
pub const C0_PROOF: f64 = 2304.0;

/// Pinned tolerances for every verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed negative slack for any inequality.
    pub inequality: f64,
    pub mixture_mass: f64,
    pub c1_identity: f64,
    pub r_m_two_way: f64,
    pub tail_oracle: f64,
    pub hit_profile: f64,
    pub tmed_identity: f64,
    /// Relative, for `I_0`, `I_1` and the killed square sum.
    pub resolvent: f64,
    pub memoryless: f64,
    pub interlacing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inequality: 1e-8,
            mixture_mass: 1e-10,
            c1_identity: 1e-10,
            r_m_two_way: 1e-9,
            tail_oracle: 1e-8,
            hit_profile: 1e-10,
            tmed_identity: 1e-8,
            resolvent: 1e-9,
            memoryless: 1e-9,
            interlacing: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Inequality,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub pass: bool,
    /// Minimal slack (inequality) or maximal residual (identity).
    pub worst: f64,
    pub tolerance: f64,
    /// Time at which the worst case occurred, for time-indexed checks.
    pub at_t: Option<f64>,
}

impl Verdict {
    /// Slacks `rhs - lhs` of `lhs <= rhs`, optionally indexed by time.
    pub fn inequality<I: IntoIterator<Item = (Option<f64>, f64)>>(slacks: I, tol: f64) -> Self {
        let (at_t, worst) = slacks
            .into_iter()
            .fold((None, f64::INFINITY), |acc, (t, s)| {
                if s < acc.1 || s.is_nan() {
                    (t, s)
                } else {
                    acc
                }
            });
        Verdict {
            kind: VerdictKind::Inequality,
            pass: worst >= -tol,
            worst,
            tolerance: tol,
            at_t,
        }
    }

    pub fn identity<I: IntoIterator<Item = (Option<f64>, f64)>>(residuals: I, tol: f64) -> Self {
        let (at_t, worst) = residuals
            .into_iter()
            .fold((None, 0.0f64), |acc, (t, r)| {
                let r = r.abs();
                if r > acc.1 || r.is_nan() {
                    (t, r)
                } else {
                    acc
                }
            });
        Verdict {
            kind: VerdictKind::Identity,
            pass: worst <= tol,
            worst,
            tolerance: tol,
            at_t,
        }
    }
}

pub type Verdicts = BTreeMap<String, Verdict>;

/// `0` followed by `count` log-spaced times in `[min, max]`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if count == 1 {
        grid.push(min);
    } else if count > 1 {
        let (lmin, lmax) = (min.ln(), max.ln());
        grid.extend((0..count).map(|k| (lmin + (lmax - lmin) * k as f64 / (count - 1) as f64).exp()));
    }
    grid
}

/// The 41-point verdict grid: `t = 0` and 40 log-spaced points in
/// `[t_rel / 100, 20 E_{alpha_M}[T_A]]`.
pub fn default_grid(law: &HittingLaw) -> Vec<f64> {
    log_grid(law.t_rel() / 100.0, 20.0 * law.mean_from_alpha(), 40)
}

/// The collapsed chain on `B ∪ {A}`: states are `B` in increasing order,
/// then the merged state `{A}` last.
pub fn collapsed_chain(chain: &ReversibleChain, ts: &TargetSet) -> Result<ReversibleChain> {
    let p = chain.transition();
    let pi = chain.pi();
    let b = ts.b();
    let a = ts.a();
    let m = b.len();
    let pi_a = ts.pi_a(chain);
    let mut k = DMatrix::zeros(m + 1, m + 1);
    for (i, &x) in b.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            k[(i, j)] = p[(x, y)];
        }
        k[(i, m)] = a.iter().map(|&z| p[(x, z)]).sum();
    }
    for &z in a {
        let w = pi[z] / pi_a;
        for (j, &y) in b.iter().enumerate() {
            k[(m, j)] += w * p[(z, y)];
        }
        k[(m, m)] += w * a.iter().map(|&z2| p[(z, z2)]).sum::<f64>();
    }
    let mut pi_hat: Vec<f64> = b.iter().map(|&x| pi[x]).collect();
    pi_hat.push(pi_a);
    ReversibleChain::new(k, pi_hat)
}

#[derive(Debug, Clone, Serialize)]
pub struct Interlacing {
    /// `1 / (1 - gamma_2(B))`; absent when `|B| = 1`.
    pub killed_gap_time: Option<f64>,
    pub collapsed_t_rel: f64,
    pub t_rel: f64,
}

/// `1/(1 - gamma_2(B)) <= t_rel(K) <= t_rel`, with slacks relative to `t_rel`.
pub fn verify_interlacing(
    chain: &ReversibleChain,
    ts: &TargetSet,
    law: &HittingLaw,
    tol: f64,
) -> Result<(Interlacing, Verdict)> {
    let collapsed = collapsed_chain(chain, ts)?;
    let killed = law.killed();
    let killed_gap_time = (killed.len() >= 2).then(|| 1.0 / (1.0 - killed.gamma(1)));
    let values = Interlacing {
        killed_gap_time,
        collapsed_t_rel: collapsed.t_rel(),
        t_rel: chain.t_rel(),
    };
    let scale = chain.t_rel();
    let mut slacks = vec![(None, (values.t_rel - values.collapsed_t_rel) / scale)];
    if let Some(g) = killed_gap_time {
        slacks.push((None, (values.collapsed_t_rel - g) / scale));
    }
    let verdict = Verdict::inequality(slacks, tol);
    Ok((values, verdict))
}

/// `2 sum_{x in S} pi(x) P_x[T_A <= t]^2`.
pub fn doubled_square_sum(law: &HittingLaw, t: f64) -> f64 {
    2.0 * (law.pi_a() + law.mean_sq_hit_profile(t))
}

/// Aldous-Brown sandwich, tail and mean forms:
/// `pi(A) <= 1 - P_pi/P_alpha <= t_rel / E_alpha[T_A]`.
pub fn verify_ab(law: &HittingLaw, grid: &[f64], tol: f64) -> Verdicts {
    let pi_a = law.pi_a();
    let ab = law.t_rel() / law.mean_from_alpha();
    let gap = |t: f64| 1.0 - law.tail_from_pi(t) / law.tail_from_alpha(t);
    let tail = grid
        .iter()
        .flat_map(|&t| [(Some(t), gap(t) - pi_a), (Some(t), ab - gap(t))]);
    let mean_gap = 1.0 - law.mean_from_pi() / law.mean_from_alpha();
    let mut v = Verdicts::new();
    v.insert("ab_tail".into(), Verdict::inequality(tail, tol));
    v.insert(
        "ab_mean".into(),
        Verdict::inequality([(None, mean_gap - pi_a), (None, ab - mean_gap)], tol),
    );
    v
}

/// The `R_M` sandwich, the refined bound with error
/// `2 sum_x pi(x) P_x[T_A <= 2 t_rel]^2`, the comparisons of `R_M` with the
/// Aldous-Brown error terms, the `t_med` bounds and the sharpness envelopes.
pub fn verify_refined(law: &HittingLaw, grid: &[f64], tol: f64) -> Verdicts {
    let pi_a = law.pi_a();
    let r_m = law.r_m();
    let t_rel = law.t_rel();
    let e_alpha = law.mean_from_alpha();
    let e_pi = law.mean_from_pi();
    let refined = doubled_square_sum(law, 2.0 * t_rel);
    let ratio = |t: f64| law.tail_from_pi(t) / law.tail_from_alpha(t);
    let mean_ratio = e_pi / e_alpha;
    let mut v = Verdicts::new();

    v.insert(
        "rm_tail".into(),
        Verdict::inequality(
            grid.iter()
                .flat_map(|&t| [(Some(t), (1.0 - ratio(t)) - pi_a), (Some(t), r_m - (1.0 - ratio(t)))]),
            tol,
        ),
    );
    v.insert(
        "rm_mean".into(),
        Verdict::inequality(
            [(None, (1.0 - mean_ratio) - pi_a), (None, r_m - (1.0 - mean_ratio))],
            tol,
        ),
    );
    v.insert(
        "refined_tail".into(),
        Verdict::inequality(
            grid.iter()
                .map(|&t| (Some(t), pi_a + refined - (1.0 - ratio(t)))),
            tol,
        ),
    );
    v.insert(
        "refined_mean".into(),
        Verdict::inequality([(None, pi_a + refined - (1.0 - mean_ratio))], tol),
    );
    v.insert(
        "rm_le_ab_error".into(),
        Verdict::inequality([(None, t_rel / e_alpha - r_m)], tol),
    );
    v.insert(
        "rm_le_pi_ab_error".into(),
        Verdict::inequality([(None, t_rel / e_pi - r_m)], tol),
    );
    let t_med = law.t_med();
    v.insert(
        "tmed_le_2trel".into(),
        Verdict::inequality(
            [
                (None, 2.0 - t_med / t_rel),
                (None, (-t_med / t_rel).exp() - (1.0 - std::f64::consts::FRAC_1_SQRT_2)),
            ],
            tol,
        ),
    );
    // (1-R_M) <= P_pi/P_alpha <= (1-R_M) + (R_M - pi(A)) e^{-t/t_rel} / P_alpha.
    // R_M - pi(A) is taken as sum_{i>=2} c_i^2: the difference cancels to
    // rounding error, which the growing factor 1/P_alpha would amplify.
    let excess = law.excess_mass();
    let lambda1 = law.lambda1();
    v.insert(
        "sharpness_tail".into(),
        Verdict::inequality(
            grid.iter().flat_map(|&t| {
                let upper = (1.0 - r_m) + excess * (lambda1 * t - t / t_rel).exp();
                [(Some(t), ratio(t) - (1.0 - r_m)), (Some(t), upper - ratio(t))]
            }),
            tol,
        ),
    );
    v.insert(
        "sharpness_mean".into(),
        Verdict::inequality(
            [
                (None, mean_ratio - (1.0 - r_m)),
                (None, (1.0 - r_m) + excess * t_rel / e_alpha - mean_ratio),
            ],
            tol,
        ),
    );
    v
}

/// Residual of
/// `R_M - pi(A) = 2 sum_{x in B} pi(x) P_x[T_A <= t_med]^2 - 2 (1-R_M)(1-e^{-lambda_1 t_med})^2`,
/// with the sum assembled from pointwise tails.
pub fn excess_mass_residual(law: &HittingLaw) -> f64 {
    let t_med = law.t_med();
    let lhs = law.r_m() - law.pi_a();
    let rhs = 2.0 * law.mean_sq_hit_spatial(t_med)
        - 2.0 * (1.0 - law.r_m()) * (-(-law.lambda1() * t_med).exp_m1()).powi(2);
    (lhs - rhs).abs()
}

/// Identities that hold on every reversible chain, including the check of
/// the spectral tails against uniformization.
pub fn verify_identities(
    chain: &ReversibleChain,
    ts: &TargetSet,
    law: &HittingLaw,
    grid: &[f64],
    tol: &Tolerances,
) -> Verdicts {
    let killed = law.killed();
    let mut v = Verdicts::new();
    let mass: f64 = killed.coeffs().iter().map(|c| c * c).sum();
    v.insert(
        "mixture_mass".into(),
        Verdict::identity([(None, mass - (1.0 - law.pi_a()))], tol.mixture_mass),
    );
    let alpha = &killed.max_component().alpha;
    let norm_sq: f64 = alpha.iter().zip(chain.pi()).map(|(a, p)| a * a / p).sum();
    let c1 = killed.coeffs()[0];
    v.insert(
        "c1_identity".into(),
        Verdict::identity([(None, c1 * c1 - 1.0 / norm_sq)], tol.c1_identity),
    );
    v.insert(
        "r_m_two_way".into(),
        Verdict::identity([(None, law.r_m() - law.r_m_from_alpha())], tol.r_m_two_way),
    );
    let oracle_pi = transient::uniformized_tails(chain, ts, chain.pi(), grid);
    v.insert(
        "tail_oracle".into(),
        Verdict::identity(
            grid.iter()
                .zip(&oracle_pi)
                .map(|(&t, o)| (Some(t), law.tail_from_pi(t) - o)),
            tol.tail_oracle,
        ),
    );
    let oracle_alpha = transient::uniformized_tails(chain, ts, alpha, grid);
    v.insert(
        "qs_exponential".into(),
        Verdict::identity(
            grid.iter()
                .zip(&oracle_alpha)
                .map(|(&t, o)| (Some(t), law.tail_from_alpha(t) - o)),
            tol.tail_oracle,
        ),
    );
    v.insert(
        "hit_profile_identity".into(),
        Verdict::identity(
            grid.iter()
                .map(|&t| (Some(t), law.mean_sq_hit_profile(t) - law.mean_sq_hit_spatial(t))),
            tol.hit_profile,
        ),
    );
    v.insert(
        "tmed_identity".into(),
        Verdict::identity([(None, excess_mass_residual(law))], tol.tmed_identity),
    );
    let tmed_error = 2.0 * law.mean_sq_hit_spatial(law.t_med());
    v.insert(
        "tmed_bound".into(),
        Verdict::inequality([(None, tmed_error - (law.r_m() - law.pi_a()))], tol.inequality),
    );
    v
}

/// `Err(Γ, A)` without the universal constant:
/// `|A|^2 (t_rel/E_pi[T_o])^2 (1 + d^2 n / t_rel^2 int_0^{sqrt(t_rel/d)} r^3/V(r) dr)`.
pub fn err_functional(chain: &ReversibleChain, profile: &MetricProfile, degree: usize, set_size: usize) -> f64 {
    let t_rel = chain.t_rel();
    let e_pi = chain.eigentime_mean_hit();
    let d = degree as f64;
    let n = chain.state_count() as f64;
    let integral = profile.volume_integral((t_rel / d).sqrt());
    let a = set_size as f64;
    a * a * (t_rel / e_pi).powi(2) * (1.0 + d * d * n / (t_rel * t_rel) * integral)
}

/// Diameter/growth functional, branching on `q` in `n = D^q R`; graphs with
/// `D = 1` fall to the `1/n` branch.
pub fn beta_gamma(chain: &ReversibleChain, profile: &MetricProfile) -> f64 {
    let n = chain.state_count() as f64;
    let Some(growth) = profile.growth else {
        return 1.0 / n;
    };
    let d = profile.diameter as f64;
    let e = chain.eigentime_mean_hit();
    let base = d.powi(4) / (e * e);
    let r = growth.r;
    match growth.q {
        0..=2 => base,
        3 => base * (1.0 + r * r.ln() / d),
        4 => base * (r + (d / r).ln()),
        _ => 1.0 / n,
    }
}

/// Largest `c` with `V(s) >= c s^{q+1}` for `s <= R` and `V(s) >= c R s^q`
/// for `R < s <= D`, over integer radii `1..=D`.
pub fn growth_constant(profile: &MetricProfile) -> Option<f64> {
    let g = profile.growth?;
    (1..=profile.diameter)
        .map(|s| {
            let (sf, v) = (s as f64, profile.ball_volume[s] as f64);
            if sf <= g.r {
                v / sf.powi(g.q as i32 + 1)
            } else {
                v / (g.r * sf.powi(g.q as i32))
            }
        })
        .reduce(f64::min)
}

/// Graph data needed by the transitive-graph checks.
#[derive(Debug, Clone)]
pub struct TransitiveContext {
    pub degree: usize,
    pub profile: MetricProfile,
    /// Law of `T_o` for the singleton `{o}`, `o = profile.origin`.
    pub origin_law: HittingLaw,
}

impl TransitiveContext {
    pub fn new(graph: &Graph, chain: &ReversibleChain) -> Result<Self> {
        let profile = metric_profile(graph, 0)?;
        let ts = TargetSet::new(chain, &[profile.origin])?;
        let origin_law = HittingLaw::new(chain, &ts)?;
        Ok(TransitiveContext {
            degree: graph.degree(),
            profile,
            origin_law,
        })
    }
}

/// `I_j = int_0^inf s^j p_s(o,o) e^{-s/t_2} ds` from the spectrum:
/// `(j!/n) (t_2^{j+1} + sum_{i>=2} (beta_i + 1/t_2)^{-(j+1)})`.
pub fn resolvent_moment_spectral(chain: &ReversibleChain, j: u32) -> f64 {
    let t2 = 2.0 * chain.t_rel();
    let n = chain.state_count() as f64;
    let fact: f64 = (1..=j).map(f64::from).product();
    let tail: f64 = chain.betas()[1..]
        .iter()
        .map(|b| (b + 1.0 / t2).powi(-(j as i32 + 1)))
        .sum();
    fact / n * (t2.powi(j as i32 + 1) + tail)
}

/// Same integral by adaptive Simpson on `s^j p_s(o,o) e^{-s/t_2}`, with
/// `p_s(o,o)` from the heat kernel at `o`, truncated at `50 t_2` plus the
/// analytic tail of the stationary part.
pub fn resolvent_moment_quadrature(chain: &ReversibleChain, origin: usize, j: u32) -> f64 {
    let t2 = 2.0 * chain.t_rel();
    let g = chain.eigenbasis();
    let pi_o = chain.pi()[origin];
    let weights: Vec<f64> = (0..chain.state_count())
        .map(|i| g[(origin, i)].powi(2) * pi_o)
        .collect();
    let betas = chain.betas();
    let integrand = |s: f64| {
        let p: f64 = betas
            .iter()
            .zip(&weights)
            .map(|(b, w)| w * (-(b + 1.0 / t2) * s).exp())
            .sum();
        s.powi(j as i32) * p
    };
    let cutoff = 50.0 * t2;
    let fact: f64 = (1..=j).map(f64::from).product();
    let scale = fact * t2.powi(j as i32 + 1) * pi_o;
    let mut breaks = vec![0.0];
    let mut b = (t2 / 4096.0).min(1.0 / 64.0);
    while b < cutoff {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(cutoff);
    let body = quadrature::adaptive_simpson_panels(&integrand, &breaks, 1e-13 * scale, 50);
    // int_L^inf s^j pi(o) e^{-s/t2} ds for j = 0, 1
    let decay = (-cutoff / t2).exp();
    let tail = match j {
        0 => pi_o * t2 * decay,
        _ => pi_o * t2 * (cutoff + t2) * decay,
    };
    body + tail
}

/// Checks that need vertex-transitivity: exponential killing identities,
/// the integral bounds, the reduction to a singleton, the volume-growth
/// bracket and the spectral inputs on the gap and counting function.
pub fn verify_killing_identities(
    chain: &ReversibleChain,
    ts: &TargetSet,
    law: &HittingLaw,
    ctx: &TransitiveContext,
    grid: &[f64],
    tol: &Tolerances,
) -> (TransitiveValues, Verdicts) {
    let n = chain.state_count() as f64;
    let o = ctx.profile.origin;
    let t_rel = chain.t_rel();
    let t2 = 2.0 * t_rel;
    let d = ctx.degree as f64;
    let set_size = ts.a().len() as f64;
    let e_pi_o = chain.eigentime_mean_hit();
    let mut v = Verdicts::new();

    let i0 = resolvent_moment_spectral(chain, 0);
    let i1 = resolvent_moment_spectral(chain, 1);
    let i0_quad = resolvent_moment_quadrature(chain, o, 0);
    let i1_quad = resolvent_moment_quadrature(chain, o, 1);
    v.insert(
        "resolvent_i0".into(),
        Verdict::identity([(None, (i0 - i0_quad) / i0)], tol.resolvent),
    );
    v.insert(
        "resolvent_i1".into(),
        Verdict::identity([(None, (i1 - i1_quad) / i1)], tol.resolvent),
    );
    v.insert(
        "i0_lower".into(),
        Verdict::inequality([(None, (i0 - 2.0 / 3.0 * e_pi_o / n) / i0)], tol.inequality),
    );
    let integral = ctx.profile.volume_integral((t_rel / d).sqrt());
    let i1_bound = 64.0 * (t_rel * t_rel / n + d * d * integral);
    v.insert(
        "i1_upper".into(),
        Verdict::inequality([(None, (i1_bound - i1) / i1)], tol.inequality),
    );

    // P_x[T_o <= tau], tau ~ Exp(1/t2): killed route vs resolvent ratio.
    let rate = 1.0 / t2;
    let hit_o_tau: Vec<f64> = ctx
        .origin_law
        .survives_exp_clock(rate)
        .iter()
        .map(|s| 1.0 - s)
        .collect();
    let r_oo = chain.resolvent(rate, o, o);
    v.insert(
        "memoryless".into(),
        Verdict::identity(
            (0..chain.state_count()).map(|x| (None, hit_o_tau[x] - chain.resolvent(rate, x, o) / r_oo)),
            tol.memoryless,
        ),
    );
    let sq_o_tau: f64 = hit_o_tau.iter().zip(chain.pi()).map(|(h, p)| p * h * h).sum();
    let sq_o_tau_closed = i1 / (n * i0 * i0);
    v.insert(
        "killed_square_sum".into(),
        Verdict::identity([(None, (sq_o_tau - sq_o_tau_closed) / sq_o_tau_closed)], tol.resolvent),
    );

    let square_sum = |l: &HittingLaw, t: f64| l.pi_a() + l.mean_sq_hit_profile(t);
    v.insert(
        "singleton_reduction".into(),
        Verdict::inequality(
            grid.iter().map(|&t| {
                (
                    Some(t),
                    set_size * set_size * square_sum(&ctx.origin_law, t) - square_sum(law, t),
                )
            }),
            tol.inequality,
        ),
    );
    let e2 = std::f64::consts::E.powi(2);
    let sq_a_t2 = square_sum(law, t2);
    let sq_a_tau: f64 = law
        .survives_exp_clock(rate)
        .iter()
        .zip(chain.pi())
        .map(|(s, p)| p * (1.0 - s).powi(2))
        .sum();
    v.insert(
        "exp_clock_chain".into(),
        Verdict::inequality(
            [
                (None, e2 * sq_a_tau - sq_a_t2),
                (None, set_size * set_size * sq_o_tau - sq_a_tau),
            ],
            tol.inequality,
        ),
    );

    let refined = doubled_square_sum(law, t2);
    let err_no_c0 = err_functional(chain, &ctx.profile, ctx.degree, ts.a().len());
    let err_c0 = C0_PROOF * err_no_c0;
    v.insert(
        "err_bracket".into(),
        Verdict::inequality([(None, (err_c0 - refined) / err_c0)], tol.inequality),
    );

    let diam = ctx.profile.diameter as f64;
    let beta2 = chain.betas()[1];
    v.insert(
        "gap_diameter".into(),
        Verdict::inequality([(None, beta2 * d * diam * diam - 1.0)], tol.inequality),
    );
    let beta_max = *chain.betas().last().unwrap_or(&beta2);
    let r_grid = log_grid(beta2 / 4.0, beta_max * 1.01, 40);
    v.insert(
        "spectral_counting".into(),
        Verdict::inequality(
            r_grid[1..].iter().map(|&r| {
                let radius = (1.0 / (2.0 * d * r)).sqrt();
                (
                    Some(r),
                    4.0 / ctx.profile.volume(radius) as f64 - chain.spectral_counting(r),
                )
            }),
            tol.inequality,
        ),
    );

    let beta = beta_gamma(chain, &ctx.profile);
    let values = TransitiveValues {
        i0,
        i1,
        err_no_c0,
        err_c0_2304: err_c0,
        beta_gamma: beta,
        growth_c: growth_constant(&ctx.profile),
        kappa_ratio: refined / (set_size * set_size * d * d * beta),
        linear_degree_ratio: refined / (set_size * set_size * d * beta),
    };
    (values, v)
}

/// Values reported only for vertex-transitive graphs.
#[derive(Debug, Clone, Serialize)]
pub struct TransitiveValues {
    pub i0: f64,
    pub i1: f64,
    pub err_no_c0: f64,
    pub err_c0_2304: f64,
    pub beta_gamma: f64,
    pub growth_c: Option<f64>,
    /// `refined_error / (|A|^2 d^2 beta(Γ))`.
    pub kappa_ratio: f64,
    /// `refined_error / (|A|^2 d beta(Γ))`.
    pub linear_degree_ratio: f64,
}

/// Everything computed for one `(chain, A)` instance.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub set_size: usize,
    #[serde(rename = "pi_A")]
    pub pi_a: f64,
    pub r_m: f64,
    pub t_rel: f64,
    pub t_med: f64,
    pub e_pi_t_a: f64,
    pub e_alpha_t_a: f64,
    /// `t_rel / E_{alpha_M}[T_A]`.
    pub ab_error: f64,
    /// `2 sum_{x in S} pi(x) P_x[T_A <= 2 t_rel]^2`.
    pub refined_error: f64,
    /// `2 sum_{x in B} pi(x) P_x[T_A <= t_med]^2`.
    pub tmed_error: f64,
    pub excess_mass_residual: f64,
    pub interlacing: Interlacing,
    pub i0: Option<f64>,
    pub i1: Option<f64>,
    pub err_no_c0: Option<f64>,
    pub err_c0_2304: Option<f64>,
    pub beta_gamma: Option<f64>,
    pub growth_c: Option<f64>,
    pub kappa_ratio: Option<f64>,
    pub linear_degree_ratio: Option<f64>,
    pub max_component_multiplicity: usize,
    pub verdicts: Verdicts,
}

impl BoundReport {
    pub fn compute(
        chain: &ReversibleChain,
        ts: &TargetSet,
        law: &HittingLaw,
        ctx: Option<&TransitiveContext>,
        grid: &[f64],
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut verdicts = verify_ab(law, grid, tol.inequality);
        verdicts.extend(verify_refined(law, grid, tol.inequality));
        verdicts.extend(verify_identities(chain, ts, law, grid, tol));
        let (interlacing, v) = verify_interlacing(chain, ts, law, tol.interlacing)?;
        verdicts.insert("interlacing".into(), v);
        let transitive = ctx.map(|ctx| {
            let (values, v) = verify_killing_identities(chain, ts, law, ctx, grid, tol);
            verdicts.extend(v);
            values
        });
        Ok(BoundReport {
            n: chain.state_count(),
            set_size: ts.a().len(),
            pi_a: law.pi_a(),
            r_m: law.r_m(),
            t_rel: law.t_rel(),
            t_med: law.t_med(),
            e_pi_t_a: law.mean_from_pi(),
            e_alpha_t_a: law.mean_from_alpha(),
            ab_error: law.t_rel() / law.mean_from_alpha(),
            refined_error: doubled_square_sum(law, 2.0 * law.t_rel()),
            tmed_error: 2.0 * law.mean_sq_hit_spatial(law.t_med()),
            excess_mass_residual: excess_mass_residual(law),
            interlacing,
            i0: transitive.as_ref().map(|t| t.i0),
            i1: transitive.as_ref().map(|t| t.i1),
            err_no_c0: transitive.as_ref().map(|t| t.err_no_c0),
            err_c0_2304: transitive.as_ref().map(|t| t.err_c0_2304),
            beta_gamma: transitive.as_ref().map(|t| t.beta_gamma),
            growth_c: transitive.as_ref().and_then(|t| t.growth_c),
            kappa_ratio: transitive.as_ref().map(|t| t.kappa_ratio),
            linear_degree_ratio: transitive.as_ref().map(|t| t.linear_degree_ratio),
            max_component_multiplicity: law.killed().max_multiplicity(),
            verdicts,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&String, &Verdict)> {
        self.verdicts.iter().filter(|(_, v)| !v.pass)
    }
}
