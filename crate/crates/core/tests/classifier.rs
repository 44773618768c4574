use anyon_ca::classifier::*;
use anyon_ca::noise::ErrorEvent;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> ClassifierParams {
    ClassifierParams::new(2, 7, 3, 49, 3)
}

fn sets(a: &LevelAssignment, ev: &[ErrorEvent]) -> Vec<(usize, Vec<[u64; 3]>)> {
    let mut v: Vec<_> = a
        .errors
        .iter()
        .map(|e| {
            let mut pts: Vec<[u64; 3]> =
                e.events.iter().map(|&i| [ev[i].x.to_bits(), ev[i].y.to_bits(), ev[i].t.to_bits()]).collect();
            pts.sort_unstable();
            (e.level, pts)
        })
        .collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sampled_histories_are_fully_classified_and_separated(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = sample_history(&mut rng, 9, 30, 2e-3, 2e-3);
        let a = classify(&h, params(), false).unwrap();
        prop_assert!(!a.preconditions_ok);
        prop_assert!(check_separation(&h, params(), &a).is_ok());
        let mut covered = vec![0u32; h.len()];
        for e in &a.errors {
            for &i in &e.events {
                covered[i] += 1;
                prop_assert_eq!(a.level_of[i], Some(e.level));
            }
        }
        for &i in &a.unclassified {
            covered[i] += 1;
        }
        prop_assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn classification_ignores_event_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, _) = planted_history(&mut rng, 3, 2, 2, 3);
        let mut shuffled = h.clone();
        shuffled.shuffle(&mut rng);
        let a = classify(&h, params(), false).unwrap();
        let b = classify(&shuffled, params(), false).unwrap();
        prop_assert_eq!(sets(&a, &h), sets(&b, &shuffled));
    }

    #[test]
    fn linkage_is_symmetric(
        a in prop::collection::vec(prop::array::uniform3(-20.0f64..20.0), 1..5),
        b in prop::collection::vec(prop::array::uniform3(-20.0f64..20.0), 1..5),
        l in 0.5f64..10.0,
    ) {
        prop_assert_eq!(linked(&a, &b, l, l, l), linked(&b, &a, l, l, l));
        prop_assert_eq!(separated(&a, &b, l, l, l), separated(&b, &a, l, l, l));
        prop_assert!(!(linked(&a, &b, l, l, l) && separated(&a, &b, l, l, l)));
    }
}

#[test]
fn events_round_trip_through_csv() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = sample_history(&mut rng, 5, 20, 0.01, 0.01);
    assert!(!h.is_empty());
    let mut buf = Vec::new();
    write_events(&mut buf, &h).unwrap();
    assert_eq!(read_events(buf.as_slice()).unwrap(), h);
    assert!(read_events("kind,x,y,t\nbogus,1,2,3\n".as_bytes()).is_err());
}

#[test]
fn strict_mode_rejects_small_colonies() {
    assert!(classify(&[], params(), true).is_err());
    let ok = ClassifierParams::new(1, 2, 13, 16, 2);
    assert!(ok.preconditions_hold());
    assert!(classify(&[], ok, true).unwrap().errors.is_empty());
}

#[test]
fn convergence_bound() {
    assert_eq!(convergence_denominator(3, 49), 4 * 81 * 49 * 49);
    assert!(convergent(1e-7, 1e-7, 3, 49));
    assert!(!convergent(1e-3, 1e-3, 3, 49));
    assert!((epsilon_bound(0, 1e-3, 2e-3, 3, 49) - 1.2e-2).abs() < 1e-15);
}
