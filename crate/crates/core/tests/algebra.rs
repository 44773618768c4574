use anyon_ca::algebra::*;
use proptest::prelude::*;

#[test]
fn model_file_matches_builtin_ising() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/models/ising.anyons")).unwrap();
    let m = AnyonModel::parse(&text).unwrap();
    assert_eq!(m, ising_model());
    assert_eq!(AnyonModel::parse(&m.to_text()).unwrap(), m);
}

#[test]
fn named_models_classify() {
    let g = build_fusion_graph(&ising_model()).unwrap();
    assert_eq!(graph_diameter(&g).unwrap(), 2);
    assert!(is_non_cyclic(&ising_model()));
    assert!(!is_non_cyclic(&fibonacci_model()));
    assert!(is_non_cyclic(&trivial_model()));
    for n in 2..8 {
        let m = cyclic_group_model(n);
        assert!(validate_model(&m).is_empty());
        assert!(is_non_cyclic(&m));
        assert_eq!(graph_diameter(&build_fusion_graph(&m).unwrap()).unwrap(), 1);
    }
}

/// Self-dual model with random fusion outcomes; valid by construction.
fn random_model(n: usize, bits: &[bool]) -> AnyonModel {
    let names: Vec<String> = (0..n).map(|k| if k == 0 { "1".into() } else { format!("a{k}") }).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut m = AnyonModel::with_labels("random", &refs);
    let mut it = bits.iter().cycle();
    for a in 0..n {
        m.dual[a] = Some(a);
        m.set_fusion(0, a, a, 1);
    }
    for a in 1..n {
        for b in a..n {
            for c in 1..n {
                if *it.next().unwrap() {
                    m.set_fusion(a, b, c, 1);
                }
            }
        }
        m.set_fusion(a, a, 0, 1);
    }
    m
}

/// Longest path length to the vacuum by exhaustive walk, None on a cycle.
fn longest_to_vacuum(succ: &[Vec<usize>], v: usize, stack: &mut Vec<usize>) -> Option<usize> {
    if v == 0 {
        return Some(0);
    }
    if stack.contains(&v) {
        return None;
    }
    stack.push(v);
    let mut best = Some(0);
    for &w in &succ[v] {
        match longest_to_vacuum(succ, w, stack) {
            None => {
                stack.pop();
                return None;
            }
            Some(d) => best = best.max(Some(d + 1)),
        }
    }
    stack.pop();
    best
}

proptest! {
    #[test]
    fn cycle_detection_and_diameter_match_search(n in 2usize..6, bits in prop::collection::vec(any::<bool>(), 1..64)) {
        let m = random_model(n, &bits);
        prop_assert!(validate_model(&m).is_empty());
        let succ: Vec<Vec<usize>> = (0..n).map(|a| if a == 0 { vec![] } else { (0..n).filter(|&c| m.n(a, a, c) > 0).collect() }).collect();
        let depth: Vec<Option<usize>> = (1..n).map(|v| longest_to_vacuum(&succ, v, &mut Vec::new())).collect();
        let acyclic = depth.iter().all(Option::is_some);
        prop_assert_eq!(is_non_cyclic(&m), acyclic);
        if acyclic {
            let g = build_fusion_graph(&m).unwrap();
            prop_assert_eq!(graph_diameter(&g).unwrap(), depth.iter().flatten().copied().max().unwrap());
        }
    }

    #[test]
    fn constants_are_consistent(q in 20u64..200, d in 1u64..10) {
        let pp = proof_parameters(q, d, 3, None).unwrap();
        prop_assert_eq!(pp.fc_b + pp.fn_b, pp.b);
        prop_assert!((pp.f_c + pp.f_n - 1.0).abs() < 1e-12);
        prop_assert_eq!(pp.u, pp.b * pp.b);
        let next = proof_parameters(q, d + 1, 3, None).unwrap();
        prop_assert!(next.p_c < pp.p_c);
        // b0 = ceil(4KQ + 5 + 2 sqrt(4K^2Q^2 + 11KQ + 7)), K = 3D + 1
        let kq = ((3 * d + 1) * q) as f64;
        let b0 = (4.0 * kq + 5.0 + 2.0 * (4.0 * kq * kq + 11.0 * kq + 7.0).sqrt()).ceil() as u64;
        prop_assert!(pp.b0.abs_diff(b0) <= 1);
    }
}

#[test]
fn reference_constants() {
    let pp = proof_parameters(78, 2, 3, None).unwrap();
    assert_eq!(pp.b, 9 * 7 * 78);
    assert_eq!(pp.fn_b, 4 * 7 * 78 + 1);
    assert!(!pp.q_odd && pp.check_lattice().is_err());
    assert!(proof_parameters(10, 2, 3, None).is_err());
    let want = 1.0 / (4.0 * 78f64.powi(4) * (4914f64).powi(4));
    assert!((pp.p_c / want - 1.0).abs() < 1e-12);
}
