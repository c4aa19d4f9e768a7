use std::sync::OnceLock;

use proptest::prelude::*;

use olab::coverage::{CoverageConfig, CoverageEngine, VerdictKind};
use olab::grid::{build_grid, set_from_mask, ChainMode, GridParams, GridSpacetime};
use olab::locale::OrderedLocale;
use olab::paths::{all_paths, concat, refines, Path};
use olab::scenarios::{chain3, vee};
use olab::sites::{pullback, Sieve};
use olab::space::{subset, FiniteSpace, Mask, Topology};

fn preorder(n: usize, rel: &[bool]) -> FiniteSpace {
    let pairs: Vec<(usize, usize)> =
        (0..n * n).filter(|&k| rel[k]).map(|k| (k / n, k % n)).collect();
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::from_relation("random", labels, &pairs, Topology::Discrete)
}

fn space_strategy() -> impl Strategy<Value = FiniteSpace> {
    (1usize..=6).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.2), n * n)
            .prop_map(move |rel| preorder(n, &rel))
    })
}

fn grid43() -> &'static GridSpacetime {
    static G: OnceLock<GridSpacetime> = OnceLock::new();
    G.get_or_init(|| build_grid(GridParams::new(4, 3, 1)).unwrap())
}

fn grid32() -> &'static GridSpacetime {
    static G: OnceLock<GridSpacetime> = OnceLock::new();
    G.get_or_init(|| build_grid(GridParams::new(3, 2, 1)).unwrap())
}

fn chain3_paths() -> &'static (OrderedLocale, Vec<Path>) {
    static P: OnceLock<(OrderedLocale, Vec<Path>)> = OnceLock::new();
    P.get_or_init(|| {
        let l = OrderedLocale::egli_milner(chain3());
        let opens = l.space().opens().unwrap();
        let paths = all_paths(&l, &opens, 3);
        (l, paths)
    })
}

fn below(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !x || *y)
}

proptest! {
    #[test]
    fn point_cones_are_join_preserving_closures(sp in space_strategy(), a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (a & sp.full(), b & sp.full());
        for cone in [FiniteSpace::up_set, FiniteSpace::down_set] {
            let ca = cone(&sp, a);
            prop_assert!(subset(a, ca));
            prop_assert_eq!(cone(&sp, ca), ca);
            prop_assert_eq!(cone(&sp, a | b), ca | cone(&sp, b));
        }
    }

    #[test]
    fn open_cones_make_localic_cones_pointwise(sp in space_strategy(), u in any::<u64>()) {
        let u = u & sp.full();
        prop_assert!(sp.has_open_cones().unwrap().holds);
        let up = sp.up_set(u);
        let down = sp.down_set(u);
        let l = OrderedLocale::egli_milner(sp);
        prop_assert_eq!(l.cone_up(u), up);
        prop_assert_eq!(l.cone_down(u), down);
    }

    #[test]
    fn chain_domains_are_monotone_and_contain_a(a in any::<u16>(), extra in any::<u16>()) {
        let g = grid43();
        let n = g.cell_count();
        let small = set_from_mask(a as Mask, n);
        let big = set_from_mask((a | extra) as Mask, n);
        for mode in [ChainMode::Causal, ChainMode::Chronological] {
            let (d_small, d_big) = (g.domain_inextendible(&small, mode), g.domain_inextendible(&big, mode));
            prop_assert!(below(&small, &d_small));
            prop_assert!(below(&d_small, &d_big));
            let (d_small, d_big) = (g.domain_bounded(&small, mode), g.domain_bounded(&big, mode));
            prop_assert!(below(&small, &d_small));
            prop_assert!(below(&d_small, &d_big));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn localic_domain_is_monotone_and_contains_a(a in 0u64..64, extra in 0u64..64) {
        let g = grid32();
        let cfg = CoverageConfig::default();
        let small = set_from_mask(a, 6);
        let big = set_from_mask(a | extra, 6);
        let ds = g.domain_localic(&small, &cfg).unwrap();
        let db = g.domain_localic(&big, &cfg).unwrap();
        prop_assert!(ds.unknown.is_empty() && db.unknown.is_empty());
        prop_assert!(below(&small, &ds.cells));
        prop_assert!(below(&ds.cells, &db.cells));
    }

    #[test]
    fn chronological_cover_implies_localic_cover(a in 1u64..64, u in 1u64..64) {
        let g = grid32();
        let l = g.locale().unwrap();
        let cfg = CoverageConfig::default().with_basis(g.interval_basis(&l));
        let e = CoverageEngine::new(&l, cfg).unwrap();
        let chained = g.chain_cover_minus(&set_from_mask(a, 6), &set_from_mask(u, 6), ChainMode::Chronological);
        if chained.holds {
            prop_assert_eq!(e.cov_minus(a, u).unwrap().kind, VerdictKind::Covered);
        }
    }

    #[test]
    fn longer_target_bound_never_adds_covers(a in 0u64..8, u in 0u64..8, len in 1usize..4) {
        for l in [OrderedLocale::egli_milner(chain3()), OrderedLocale::egli_milner(vee())] {
            let short = CoverageEngine::new(&l, CoverageConfig::default().with_target_len(len)).unwrap();
            let long = CoverageEngine::new(&l, CoverageConfig::default()).unwrap();
            if short.cov_minus(a, u).unwrap().kind == VerdictKind::NotCovered {
                prop_assert_eq!(long.cov_minus(a, u).unwrap().kind, VerdictKind::NotCovered);
            }
        }
    }

    #[test]
    fn longer_refinements_find_nothing_new(a in 0u64..8, u in 0u64..8) {
        for l in [OrderedLocale::egli_milner(chain3()), OrderedLocale::egli_milner(vee())] {
            let base = CoverageEngine::new(&l, CoverageConfig::default()).unwrap();
            let wide = CoverageEngine::new(&l, CoverageConfig::default().with_refinement_len(200)).unwrap();
            prop_assert_eq!(base.cov_minus(a, u).unwrap().kind, wide.cov_minus(a, u).unwrap().kind);
        }
    }
}

proptest! {
    #[test]
    fn sieve_closure_is_idempotent(root in 0u64..8, gens in proptest::collection::vec(0u64..8, 0..4)) {
        let sp = chain3();
        let gens: Vec<Mask> = gens.into_iter().map(|g| g & root).collect();
        let s = Sieve::generated(&sp, root, &gens).unwrap();
        prop_assert!(s.is_down_closed(&sp).unwrap());
        let again = Sieve::generated(&sp, root, s.members()).unwrap();
        prop_assert_eq!(again.members(), s.members());
    }

    #[test]
    fn pullbacks_compose(root in 0u64..8, g in 0u64..8, u in 0u64..8, v in 0u64..8) {
        let sp = chain3();
        let (u, g) = (u & root, g & root);
        let v = v & u;
        let r = Sieve::generated(&sp, root, &[g]).unwrap();
        let step = pullback(&sp, v, &pullback(&sp, u, &r).unwrap()).unwrap();
        let direct = pullback(&sp, v, &r).unwrap();
        prop_assert_eq!(step.members(), direct.members());
    }

    #[test]
    fn refinement_is_transitive(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let (_, paths) = chain3_paths();
        let (r, q, p) = (i.get(paths), j.get(paths), k.get(paths));
        if refines(r, q).is_some() && refines(q, p).is_some() {
            prop_assert!(refines(r, p).is_some());
        }
        prop_assert!(refines(p, p).is_some());
    }

    #[test]
    fn concatenation_respects_refinement(
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        k in any::<prop::sample::Index>(),
        m in any::<prop::sample::Index>(),
    ) {
        let (_, paths) = chain3_paths();
        let (q, p, q2, p2) = (i.get(paths), j.get(paths), k.get(paths), m.get(paths));
        if refines(q, p).is_some() && refines(q2, p2).is_some() {
            if let (Ok(fine), Ok(coarse)) = (concat(q2, q), concat(p2, p)) {
                prop_assert!(refines(&fine, &coarse).is_some());
            }
        }
    }
}
