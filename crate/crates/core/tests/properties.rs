use nalgebra::DMatrix;
use proptest::prelude::*;
use qstime::bounds::{default_grid, BoundReport, Tolerances, TransitiveContext};
use qstime::graphs::{build_complete, build_cycle, build_hypercube, build_torus, metric_profile, Graph};
use qstime::killed::KilledSpectrum;
use qstime::{HittingLaw, ReversibleChain, TargetSet};

fn small_graph() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (3usize..30).prop_map(|n| build_cycle(n).unwrap()),
        (2usize..10).prop_map(|n| build_complete(n).unwrap()),
        (1usize..6).prop_map(|k| build_hypercube(k).unwrap()),
        (2usize..4, 2usize..6).prop_map(|(d, m)| build_torus(d, m).unwrap()),
    ]
}

/// A nonempty proper subset of `0..n`, chosen by a bit mask.
fn subset(n: usize, mask: u64, pick: usize) -> Vec<usize> {
    let mut a: Vec<usize> = (0..n).filter(|&x| x < 64 && mask >> x & 1 == 1).collect();
    if a.is_empty() {
        a.push(pick % n);
    }
    if a.len() == n {
        a.retain(|&x| x != pick % n);
    }
    a
}

/// Reversible chain from symmetric positive weights on a cycle plus chords.
fn weighted_chain(weights: &[f64], chords: &[(usize, usize, f64)], n: usize) -> ReversibleChain {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        w[(i, j)] += weights[i];
        w[(j, i)] += weights[i];
    }
    for &(a, b, c) in chords {
        let (a, b) = (a % n, b % n);
        if a != b {
            w[(a, b)] += c;
            w[(b, a)] += c;
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let total: f64 = deg.iter().sum();
    let p = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / deg[i]);
    ReversibleChain::new(p, deg.iter().map(|d| d / total).collect()).unwrap()
}

fn weighted_instance() -> impl Strategy<Value = (ReversibleChain, Vec<usize>)> {
    (3usize..14)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(0.1f64..5.0, n),
                prop::collection::vec((0usize..64, 0usize..64, 0.1f64..3.0), 0..4),
                any::<u64>(),
                0usize..64,
            )
        })
        .prop_map(|(n, w, chords, mask, pick)| (weighted_chain(&w, &chords, n), subset(n, mask, pick)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graphs_are_regular_and_symmetric(g in small_graph()) {
        let d = g.degree();
        for x in 0..g.vertex_count() {
            prop_assert_eq!(g.neighbors(x).len(), d);
            for &y in g.neighbors(x) {
                prop_assert!(g.neighbors(y).contains(&x));
            }
        }
    }

    #[test]
    fn ball_volumes_do_not_depend_on_origin(g in small_graph(), o in 0usize..1000) {
        let o = o % g.vertex_count();
        let p0 = metric_profile(&g, 0).unwrap();
        let po = metric_profile(&g, o).unwrap();
        prop_assert_eq!(p0.ball_volume, po.ball_volume);
    }

    #[test]
    fn heat_kernel_semigroup_and_trace(g in small_graph(), s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let chain = ReversibleChain::srw(&g).unwrap();
        let n = chain.state_count();
        let x = n / 3;
        let row_s = chain.heat_kernel_row(s, x);
        let row_st = chain.heat_kernel_row(s + t, x);
        prop_assert!((row_st.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for (y, &direct) in row_st.iter().enumerate() {
            let composed: f64 = (0..n).map(|z| row_s[z] * chain.heat_kernel(t, z, y)).sum();
            prop_assert!((composed - direct).abs() < 1e-10);
        }
        let trace: f64 = (0..n).map(|z| chain.heat_kernel(t, z, z)).sum();
        let spectral: f64 = chain.betas().iter().map(|b| (-b * t).exp()).sum();
        prop_assert!((trace - spectral).abs() < 1e-9 * spectral);
    }

    #[test]
    fn mixture_mass_and_monotone_tails(g in small_graph(), mask in any::<u64>(), pick in 0usize..64) {
        let chain = ReversibleChain::srw(&g).unwrap();
        let n = chain.state_count();
        let a = subset(n, mask, pick);
        let ts = TargetSet::new(&chain, &a).unwrap();
        let law = HittingLaw::new(&chain, &ts).unwrap();
        let mass: f64 = law.killed().coeffs().iter().map(|c| c * c).sum();
        prop_assert!((mass - (1.0 - law.pi_a())).abs() < 1e-10);
        let mut prev = law.tail_from_pi(0.0);
        prop_assert!((prev - (1.0 - law.pi_a())).abs() < 1e-10);
        for k in 1..60 {
            let t = 0.05 * k as f64 * law.mean_from_alpha();
            let cur = law.tail_from_pi(t);
            prop_assert!(cur <= prev + 1e-14);
            prev = cur;
        }
    }

    #[test]
    fn verdicts_pass_on_transitive_graphs(g in small_graph(), mask in any::<u64>(), pick in 0usize..64) {
        let chain = ReversibleChain::srw(&g).unwrap();
        let a = subset(chain.state_count(), mask, pick);
        let ts = TargetSet::new(&chain, &a).unwrap();
        let law = HittingLaw::new(&chain, &ts).unwrap();
        let ctx = TransitiveContext::new(&g, &chain).unwrap();
        let report = BoundReport::compute(&chain, &ts, &law, Some(&ctx), &default_grid(&law), &Tolerances::default()).unwrap();
        let failures: Vec<_> = report.failures().map(|(k, v)| (k.clone(), v.worst)).collect();
        prop_assert!(failures.is_empty(), "{:?} failed for A = {:?}", failures, a);
    }

    #[test]
    fn verdicts_pass_on_weighted_chains((chain, a) in weighted_instance()) {
        let ts = TargetSet::new(&chain, &a).unwrap();
        let law = HittingLaw::new(&chain, &ts).unwrap();
        let report = BoundReport::compute(&chain, &ts, &law, None, &default_grid(&law), &Tolerances::default()).unwrap();
        let failures: Vec<_> = report.failures().map(|(k, v)| (k.clone(), v.worst)).collect();
        prop_assert!(failures.is_empty(), "{:?} failed for A = {:?}", failures, a);
    }

    #[test]
    fn tied_designations_agree(k in 2usize..12) {
        let g = build_cycle(2 * k).unwrap();
        let chain = ReversibleChain::srw(&g).unwrap();
        let ts = TargetSet::new(&chain, &[0, k]).unwrap();
        let ctx = TransitiveContext::new(&g, &chain).unwrap();
        let reports: Vec<BoundReport> = (0..2)
            .map(|c| {
                let law = HittingLaw::from_spectrum(&chain, &ts, KilledSpectrum::with_designated(&chain, &ts, c).unwrap());
                BoundReport::compute(&chain, &ts, &law, Some(&ctx), &default_grid(&law), &Tolerances::default()).unwrap()
            })
            .collect();
        prop_assert!((reports[0].r_m - reports[1].r_m).abs() < 1e-10);
        for (name, v) in &reports[0].verdicts {
            let w = &reports[1].verdicts[name];
            prop_assert_eq!(v.pass, w.pass);
            prop_assert!((v.worst - w.worst).abs() < 1e-10, "{}", name);
        }
    }
}
