use anyon_ca::backend::{Charge, SystemState};
use anyon_ca::lattice::LatticeGeom;
use anyon_ca::noise::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn within(count: f64, trials: f64, p: f64, z: f64) -> bool {
    (count - trials * p).abs() <= z * (trials * p * (1.0 - p)).sqrt()
}

#[test]
fn charge_noise_fires_each_edge_at_rate_p() {
    let g = LatticeGeom::new(3, 2).unwrap();
    let cfg = NoiseConfig::new(0.02, 0.0);
    let mut st = SystemState::new(g, 1);
    let rounds = 2000;
    let mut per_edge = vec![0u32; 2 * g.sites()];
    let mut sigma_pairs = 0;
    let mut total = 0;
    for t in 0..rounds {
        let before = st.sigma_count();
        let ev = apply_charge_noise(&mut st, &cfg, t);
        sigma_pairs += (st.sigma_count() - before) / 2;
        for e in &ev {
            assert_eq!(e.kind, EventKind::Charge);
            assert_eq!(e.t, t as f64);
            let (x, y) = (e.x.floor() as usize, e.y.floor() as usize);
            let idx = 2 * (y * g.l + x) + usize::from(e.y.fract() != 0.0);
            per_edge[idx] += 1;
        }
        total += ev.len();
        // keep the state small
        st = SystemState::new(g, 1000 + t);
    }
    let n = (rounds as usize * per_edge.len()) as f64;
    assert!(within(total as f64, n, 0.02, 4.0), "{total} events");
    assert!(within(sigma_pairs as f64, total as f64, 0.5, 4.0));
    let max = *per_edge.iter().max().unwrap() as f64;
    assert!(within(max, rounds as f64, 0.02, 5.0) || max < rounds as f64 * 0.02);
}

#[test]
fn measurement_errors_at_rate_q_and_never_report_the_truth() {
    let g = LatticeGeom::new(3, 2).unwrap();
    let cfg = NoiseConfig::new(0.0, 0.1);
    let mut st = SystemState::new(g, 2);
    let rounds = 500;
    let (mut wrong, mut sigma) = (0usize, 0usize);
    for t in 0..rounds {
        let (grid, ev) = measure_all_sites(&mut st, &cfg, t);
        assert_eq!(grid.non_trivial(), ev.len());
        for e in &ev {
            assert_eq!(e.t, t as f64 + 0.5);
            let c = grid.get(anyon_ca::lattice::Site::new(e.x as usize, e.y as usize));
            assert_ne!(c, Charge::Vacuum);
            sigma += usize::from(c == Charge::Sigma);
        }
        wrong += ev.len();
    }
    let n = (rounds as usize * g.sites()) as f64;
    assert!(within(wrong as f64, n, 0.1, 4.0), "{wrong}");
    assert!(within(sigma as f64, wrong as f64, 0.5, 4.0));
}

#[test]
fn config_validation() {
    assert!(NoiseConfig::new(0.1, 0.2).validate().is_ok());
    assert!(NoiseConfig::new(1.5, 0.0).validate().is_err());
    assert!(NoiseConfig::new(0.0, -0.1).validate().is_err());
    let mut c = NoiseConfig::new(0.1, 0.1);
    c.pair_weights = [0.0, 0.0];
    assert!(c.validate().is_err());
}

proptest! {
    #[test]
    fn bernoulli_indices_are_sorted_and_in_range(n in 0usize..2000, p in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = bernoulli_indices(&mut rng, n, p);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(v.iter().all(|&i| i < n));
    }
}

#[test]
fn bernoulli_indices_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p, reps) = (50, 0.07, 20_000);
    let mut hits = vec![0u32; n];
    for _ in 0..reps {
        for i in bernoulli_indices(&mut rng, n, p) {
            hits[i] += 1;
        }
    }
    for (i, &h) in hits.iter().enumerate() {
        assert!(within(f64::from(h), reps as f64, p, 4.5), "index {i}: {h}");
    }
}
