use anyon_ca::backend::{Charge, PairKind, SystemState};
use anyon_ca::decoder::*;
use anyon_ca::lattice::{region_of, LatticeGeom, RegionClass, Site};
use anyon_ca::noise::{measure_all_sites, NoiseConfig};
use proptest::prelude::*;

fn pattern(mask: u32, c: Charge) -> [Charge; 8] {
    std::array::from_fn(|i| if mask >> i & 1 == 1 { c } else { Charge::Vacuum })
}

fn rot(o: (i64, i64)) -> (i64, i64) {
    (-o.1, o.0)
}

#[test]
fn rules_are_total_and_local() {
    for q in [3usize, 5, 7] {
        for rho in (0..q * q).map(|i| (i % q, i / q)) {
            let region = region_of(rho, q);
            for mask in 0..256u32 {
                assert_eq!(select_rule(region, Charge::Vacuum, &pattern(mask, Charge::Sigma), 0), RuleAction::NoOp);
                for sc in [Charge::Sigma, Charge::Epsilon] {
                    let a = select_rule(region, sc, &pattern(mask, Charge::Sigma), 3);
                    // only triviality of the neighbours matters
                    assert_eq!(a, select_rule(region, sc, &pattern(mask, Charge::Epsilon), 3));
                    match a {
                        RuleAction::NoOp => {}
                        RuleAction::Move { dir, charge, level } => {
                            assert_eq!(dir.0.abs() + dir.1.abs(), 1);
                            assert_eq!((charge, level), (sc, 3));
                        }
                    }
                    if region.primary() == RegionClass::Centre {
                        assert_eq!(a, RuleAction::NoOp);
                    }
                }
            }
        }
    }
}

#[test]
fn rules_rotate_with_the_colony() {
    for q in [3usize, 5, 7] {
        let c = (q / 2) as i64;
        for rho in (0..q * q).map(|i| (i % q, i / q)) {
            let (dx, dy) = rot((rho.0 as i64 - c, rho.1 as i64 - c));
            let image = ((c + dx) as usize, (c + dy) as usize);
            let (r0, r1) = (region_of(rho, q), region_of(image, q));
            if r0.west || r0.south || r1.west || r1.south {
                continue;
            }
            for mask in 0..256u32 {
                let nb = pattern(mask, Charge::Sigma);
                let mut turned = [Charge::Vacuum; 8];
                for (i, &o) in NEIGHBOUR_OFFSETS.iter().enumerate() {
                    let j = NEIGHBOUR_OFFSETS.iter().position(|&p| p == rot(o)).unwrap();
                    turned[j] = nb[i];
                }
                let a = select_rule(r0, Charge::Epsilon, &nb, 0);
                let b = select_rule(r1, Charge::Epsilon, &turned, 0);
                let want = match a {
                    RuleAction::Move { dir, charge, level } => RuleAction::Move { dir: rot(dir), charge, level },
                    x => x,
                };
                assert_eq!(b, want, "Q={q} rho={rho:?} mask={mask:08b}");
            }
        }
    }
}

#[test]
fn lone_charge_is_drawn_to_the_centre() {
    let quiet = NoiseConfig::new(0.0, 0.0);
    for q in [3usize, 5, 7] {
        // level 0 only, on a 3 x 3 grid of colonies; a sigma's partner parks at another centre
        let g = LatticeGeom::new(q, 2).unwrap();
        let cfg = DecoderConfig::new(q, 1, 7, 0.8, 0.2);
        let centre = Site::new(q / 2, q / 2);
        let parking = Site::new(q + q / 2, q + q / 2);
        for idx in (0..q * q).map(|i| g.index(Site::new(i % q, i / q))) {
            for c in [Charge::Sigma, Charge::Epsilon] {
                let mut st = SystemState::new(g, 0);
                let start = g.site(idx);
                if c == Charge::Sigma {
                    let (_, b) = st.create_pair(PairKind::SigmaSigma, start, g.offset(start, 1, 0));
                    st.walk_free(b, parking);
                } else {
                    st.place_unpaired(c, start);
                }
                let mut dec = Decoder::new(g, cfg.clone());
                for t in 0..q as u64 {
                    let (s0, _) = measure_all_sites(&mut st, &quiet, t);
                    dec.step(&mut st, &s0, t);
                }
                assert_eq!(st.site_charge(centre), c, "Q={q} start {start:?} {c:?}");
                assert_eq!(st.anyon_count(), if c == Charge::Sigma { 2 } else { 1 });
            }
        }
    }
}

#[test]
fn level_periods() {
    let cfg = DecoderConfig::new(3, 3, 7, 0.8, 0.2);
    assert_eq!(cfg.u(), 49);
    assert_eq!((cfg.period(0), cfg.period(1), cfg.period(2)), (1, 49, 2401));
    assert_eq!((cfg.c_threshold(), cfg.n_threshold()), (6, 2));
}

proptest! {
    #[test]
    fn transport_conserves_charge(x in 0usize..9, y in 0usize..9, d in 0usize..4, steps in 1usize..9, seed in any::<u64>()) {
        let g = LatticeGeom::new(3, 2).unwrap();
        let mut st = SystemState::new(g, seed);
        let dir = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)][d];
        // an obstacle pair on the path
        let on = g.offset(Site::new(x, y), dir.0, dir.1);
        st.create_pair(PairKind::SigmaSigma, on, g.offset(on, -dir.1, dir.0));
        execute_move(&mut st, Site::new(x, y), dir, Charge::Epsilon, steps);
        st.collapse_all();
        st.check_invariants().unwrap();
        prop_assert_eq!(st.total_charge(), Charge::Vacuum);
        prop_assert_eq!(st.total_charge_by_fusion(), Charge::Vacuum);
    }
}
