use dynq::product::Gf2Matrix;
use dynq::rpq::RpqState;
use dynq::{gen, oracle, LabeledGraph, Modification, TcState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(any::<bool>(), c), r))
}

proptest! {
    #[test]
    fn rank_survives_row_replacement(rows in matrix(), row in any::<prop::sample::Index>(), mix in any::<u8>()) {
        let r = row.index(rows.len());
        let mut replaced = rows.clone();
        for (o, other) in rows.iter().enumerate() {
            if o != r && mix >> (o % 8) & 1 == 1 {
                for (a, &b) in replaced[r].iter_mut().zip(other) {
                    *a ^= b;
                }
            }
        }
        prop_assert_eq!(Gf2Matrix::from_rows(&rows).rank(), Gf2Matrix::from_rows(&replaced).rank());
    }

    #[test]
    fn rank_is_bounded_and_transpose_invariant(rows in matrix()) {
        let m = Gf2Matrix::from_rows(&rows);
        let t: Vec<Vec<bool>> = (0..m.num_cols()).map(|c| (0..m.num_rows()).map(|r| m.get(r, c)).collect()).collect();
        prop_assert!(m.rank() <= m.num_rows().min(m.num_cols()));
        prop_assert_eq!(m.rank(), Gf2Matrix::from_rows(&t).rank());
    }

    #[test]
    fn closure_insert_then_delete_is_identity(seed in any::<u64>(), n in 2usize..9, steps in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = LabeledGraph::new(n, gen::alphabet(2), true);
        let mut t = TcState::new(n);
        for m in gen::dag_script(&mut rng, &g.clone(), steps, 0.3) {
            t.apply(&mut g, &m).unwrap();
        }
        let extra = gen::dag_script(&mut rng, &g, 1, 0.0);
        if let Some(&m) = extra.first() {
            if !t.cycle_check(m.u, m.v) && !g.has_edge(m.u, m.sym, m.v) {
                let before = t.clone();
                t.apply(&mut g, &m).unwrap();
                t.apply(&mut g, &Modification::delete(m.sym, m.u, m.v)).unwrap();
                prop_assert_eq!(t, before);
            }
        }
    }

    #[test]
    fn graph_text_round_trips(seed in any::<u64>(), n in 1usize..8, directed in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g0 = LabeledGraph::new(n, gen::alphabet(3), directed);
        let mut g = g0.clone();
        let script = if directed {
            gen::insert_script(&mut rng, &g0, 10)
        } else {
            gen::undirected_script(&mut rng, &g0, 10, 0.2)
        };
        for m in script {
            g.apply_mod(&m).unwrap();
        }
        prop_assert_eq!(LabeledGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn rpq_answers_only_grow(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let al = gen::alphabet(2);
        let dfa = gen::dfa(&mut rng, &al, 4);
        let g0 = LabeledGraph::new(n, al, true);
        let mut g = g0.clone();
        let mut s = RpqState::new(dfa.clone(), n);
        let mut prev = s.query();
        for m in gen::insert_script(&mut rng, &g0, 8) {
            s.apply(&m).unwrap();
            g.apply_mod(&m).unwrap();
            let now = s.query();
            prop_assert!(prev.is_subset(&now));
            prop_assert_eq!(&now, &oracle::rpq(&g, &dfa));
            prev = now;
        }
    }
}
