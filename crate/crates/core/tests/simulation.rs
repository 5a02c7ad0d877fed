use qstime::graphs::{build_complete, build_cycle};
use qstime::montecarlo::{self, SimConfig, Start};
use qstime::{HittingLaw, ReversibleChain, TargetSet};

const SEED: u64 = 20261015;

fn setup(chain: &ReversibleChain, a: &[usize]) -> (TargetSet, HittingLaw) {
    let ts = TargetSet::new(chain, a).unwrap();
    let law = HittingLaw::new(chain, &ts).unwrap();
    (ts, law)
}

#[test]
fn cycle_four_stationary_tail_at_one() {
    let chain = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
    let (ts, law) = setup(&chain, &[0]);
    let mu = Start::Stationary.distribution(&chain, &law).unwrap();
    let s = montecarlo::sample_hitting_times(&chain, &ts, &mu, &SimConfig::for_law(&law, 100_000, SEED)).unwrap();
    let exact = law.tail_from_pi(1.0);
    let (lo, hi) = montecarlo::wilson_interval(s.survivors(1.0), s.len(), 3.0);
    assert!(lo <= exact && exact <= hi, "{exact} not in [{lo}, {hi}]");
    // t = 0: one minus the fraction started in A
    let started_in_a = s.times.iter().filter(|&&t| t == 0.0).count();
    assert_eq!(s.survivors(0.0), s.len() - started_in_a);
}

#[test]
fn empirical_tail_is_monotone() {
    let chain = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
    let (ts, law) = setup(&chain, &[0, 3]);
    let mu = Start::Stationary.distribution(&chain, &law).unwrap();
    let s = montecarlo::sample_hitting_times(&chain, &ts, &mu, &SimConfig::for_law(&law, 5_000, 1)).unwrap();
    let tails: Vec<f64> = (0..50).map(|k| s.empirical_tail(0.2 * k as f64)).collect();
    assert!(tails.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn complete_graph_killed_hit_probability() {
    // P_x[T_o <= tau] = R(x, o) / R(o, o) with R the resolvent at the killing rate.
    let chain = ReversibleChain::srw(&build_complete(4).unwrap()).unwrap();
    let rate = 1.0 / (2.0 * chain.t_rel());
    let exact = chain.resolvent(rate, 1, 0) / chain.resolvent(rate, 0, 0);
    let mut mu = vec![0.0; 4];
    mu[1] = 1.0;
    let cfg = SimConfig {
        samples: 100_000,
        seed: SEED,
        horizon: 1.0,
    };
    let s = montecarlo::sample_killed_local_time(&chain, 0, rate, &mu, &cfg).unwrap();
    let (lo, hi) = montecarlo::wilson_interval(s.hits(), s.hit.len(), 3.0);
    assert!(lo <= exact && exact <= hi, "{exact} not in [{lo}, {hi}]");
    // Local time is positive exactly when the origin was visited.
    assert!(s.local_time.iter().zip(&s.hit).all(|(l, &h)| (*l > 0.0) == h));

    let mut origin = vec![0.0; 4];
    origin[0] = 1.0;
    let s = montecarlo::sample_killed_local_time(&chain, 0, rate, &origin, &SimConfig { samples: 1000, ..cfg }).unwrap();
    assert!(s.local_time.iter().all(|&l| l > 0.0));
}

#[test]
fn faster_killing_hits_less_often() {
    let chain = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
    let mut mu = vec![0.0; 8];
    mu[4] = 1.0;
    let cfg = SimConfig {
        samples: 20_000,
        seed: 5,
        horizon: 1.0,
    };
    let hits: Vec<usize> = [0.01, 0.1, 1.0, 100.0]
        .iter()
        .map(|&r| montecarlo::sample_killed_local_time(&chain, 0, r, &mu, &cfg).unwrap().hits())
        .collect();
    assert!(hits.windows(2).all(|w| w[1] < w[0]), "{hits:?}");
    assert!(hits[3] < 20);
}

#[test]
fn quasi_stationary_start_is_exponential() {
    let chain = ReversibleChain::srw(&build_cycle(8).unwrap()).unwrap();
    let (ts, law) = setup(&chain, &[0, 3]);
    let mu = Start::QuasiStationary(None).distribution(&chain, &law).unwrap();
    let s = montecarlo::sample_hitting_times(&chain, &ts, &mu, &SimConfig::for_law(&law, 100_000, SEED)).unwrap();
    let lambda = law.lambda1();
    let d = montecarlo::ks_statistic(&s.times, |t| -(-lambda * t).exp_m1());
    assert!(d < montecarlo::ks_critical_1pct(s.len()));
}

#[test]
fn bad_configs_are_rejected() {
    let chain = ReversibleChain::srw(&build_cycle(4).unwrap()).unwrap();
    let (ts, law) = setup(&chain, &[0]);
    let mu = Start::Stationary.distribution(&chain, &law).unwrap();
    let zero = SimConfig {
        samples: 0,
        seed: 1,
        horizon: 10.0,
    };
    assert!(montecarlo::sample_hitting_times(&chain, &ts, &mu, &zero).is_err());
    assert!(montecarlo::sample_hitting_times(&chain, &ts, &[0.0; 4], &SimConfig { samples: 10, ..zero }).is_err());
    assert!(montecarlo::sample_killed_local_time(&chain, 9, 1.0, &mu, &SimConfig { samples: 10, ..zero }).is_err());
    assert!(Start::Vertex(7).distribution(&chain, &law).is_err());
}
