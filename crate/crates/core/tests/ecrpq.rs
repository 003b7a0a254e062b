use dynq::ecrpq::{CrpqState, EcrpqPlan, EcrpqState};
use dynq::rpq::RpqState;
use dynq::specs::{Constraint, EcrpqQuery, PathAtom, RelAtom, SyncAutomaton};
use dynq::{gen, oracle, LabeledGraph, Modification};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-copy DAG scripts interleaved into one sequence of `(copy, modification)`.
fn interleaved(rng: &mut ChaCha8Rng, copies: &[LabeledGraph], steps: usize) -> Vec<(usize, Modification)> {
    let mut queues: Vec<Vec<Modification>> = copies
        .iter()
        .map(|g| {
            let mut s = gen::dag_script(rng, g, steps, 0.3);
            s.reverse();
            s
        })
        .collect();
    let mut out = Vec::new();
    while queues.iter().any(|q| !q.is_empty()) {
        let live: Vec<usize> = (0..queues.len()).filter(|&i| !queues[i].is_empty()).collect();
        let i = *live.choose(rng).unwrap();
        out.push((i, queues[i].pop().unwrap()));
    }
    out
}

#[test]
fn ecrpq_matches_oracle_under_churn() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..40 {
        let al = gen::alphabet(rng.gen_range(1..=2));
        let m = rng.gen_range(1..=2);
        let n = rng.gen_range(2..=4);
        let query = gen::ecrpq_query(&mut rng, &al, m, 4, 2);
        let plan = EcrpqPlan::compile(query.clone()).unwrap();
        let mut s = EcrpqState::new(plan, n).unwrap();
        let copies = vec![LabeledGraph::new(n, al.clone(), true); m];
        for (i, md) in interleaved(&mut rng, &copies, 8) {
            s.apply(i, &md).unwrap();
            let want = oracle::ecrpq(&query, s.copies(), 1 << 20).unwrap();
            assert_eq!(s.query(), want, "trial {trial} copy {i} after {md}");
        }
    }
}

#[test]
fn stored_tuples_are_realizable() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for trial in 0..15 {
        let al = gen::alphabet(2);
        let m = rng.gen_range(1..=2);
        let n = rng.gen_range(2..=4);
        let query = gen::ecrpq_query(&mut rng, &al, m, 3, 0);
        let plan = EcrpqPlan::compile(query).unwrap();
        let mut s = EcrpqState::new(plan, n).unwrap();
        let copies = vec![LabeledGraph::new(n, al.clone(), true); m];
        for (i, md) in interleaved(&mut rng, &copies, 6) {
            s.apply(i, &md).unwrap();
        }
        let paths: Vec<_> = s.copies().iter().map(|g| oracle::dag_paths(g, 1 << 16).unwrap()).collect();
        let a = s.plan().automaton();
        let k = al.len();
        for (p, xs, q, ys, counts) in s.entries() {
            for i in 0..m {
                assert!(counts[i * k..(i + 1) * k].iter().sum::<usize>() < n);
            }
            // some tuple of paths with these endpoints and counts drives p to q
            let mut found = false;
            let mut idx = vec![0usize; m];
            'search: loop {
                let chosen: Vec<_> = (0..m).map(|i| &paths[i][idx[i]]).collect();
                let fits = chosen.iter().enumerate().all(|(i, (x, y, w))| {
                    *x == xs[i]
                        && *y == ys[i]
                        && (0..k).all(|j| w.iter().filter(|s| s.index() == j).count() == counts[i * k + j])
                });
                if fits {
                    let words: Vec<_> = chosen.iter().map(|c| c.2.clone()).collect();
                    if a.states_after(p, &words)[q] {
                        found = true;
                        break 'search;
                    }
                }
                for i in 0..m {
                    idx[i] += 1;
                    if idx[i] < paths[i].len() {
                        continue 'search;
                    }
                    idx[i] = 0;
                }
                break;
            }
            assert!(found, "trial {trial}: unrealizable ({p},{xs:?})->({q},{ys:?}) {counts:?}");
        }
    }
}

#[test]
fn insert_then_delete_restores_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..15 {
        let al = gen::alphabet(2);
        let query = gen::ecrpq_query(&mut rng, &al, 2, 3, 1);
        let mut s = EcrpqState::new(EcrpqPlan::compile(query).unwrap(), 4).unwrap();
        let copies = vec![LabeledGraph::new(4, al.clone(), true); 2];
        for (i, md) in interleaved(&mut rng, &copies, 5) {
            s.apply(i, &md).unwrap();
        }
        let extra = gen::dag_script(&mut rng, &s.copies()[1], 1, 0.0)[0];
        let closes_cycle = oracle::reach(&s.copies()[1]).contains(&(extra.v, extra.u));
        if closes_cycle || s.copies()[1].has_edge(extra.u, extra.sym, extra.v) {
            continue;
        }
        let before: Vec<_> = {
            let mut e: Vec<_> = s.entries().collect();
            e.sort();
            e
        };
        s.apply(1, &extra).unwrap();
        s.apply(1, &Modification::delete(extra.sym, extra.u, extra.v)).unwrap();
        let mut after: Vec<_> = s.entries().collect();
        after.sort();
        assert_eq!(before, after);
    }
}

#[test]
fn crpq_matches_bounded_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for trial in 0..30 {
        let al = gen::alphabet(rng.gen_range(1..=2));
        let m = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=5);
        let lmax = rng.gen_range(2..=5);
        let query = gen::crpq_query(&mut rng, &al, m, 3, 2);
        let g0 = LabeledGraph::new(n, al.clone(), true);
        let mut s = CrpqState::new(query.clone(), &g0, Some(lmax)).unwrap();
        let mut prev = s.query();
        for md in gen::insert_script(&mut rng, &g0, 10) {
            s.apply(&md).unwrap();
            let got = s.query();
            assert_eq!(got, oracle::crpq(&query, s.graph(), lmax), "trial {trial} after {md}");
            assert!(prev.is_subset(&got));
            prev = got;
        }
    }
}

#[test]
fn single_atom_crpq_agrees_with_rpq() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..20 {
        let al = gen::alphabet(2);
        let dfa = gen::dfa(&mut rng, &al, 3);
        let n = rng.gen_range(1..=5);
        let query = EcrpqQuery::new(
            al.clone(),
            vec!["x".into(), "y".into()],
            vec![0, 1],
            vec![PathAtom { x: 0, path: "p".into(), y: 1 }],
            vec![RelAtom { automaton: SyncAutomaton::from_dfa(&dfa), paths: vec![0] }],
            vec![],
        )
        .unwrap();
        let g0 = LabeledGraph::new(n, al.clone(), true);
        let lmax = n * dfa.num_states();
        let mut c = CrpqState::new(query, &g0, Some(lmax)).unwrap();
        let mut r = RpqState::new(dfa.clone(), n);
        for md in gen::insert_script(&mut rng, &g0, 10) {
            c.apply(&md).unwrap();
            r.apply(&md).unwrap();
            let via_rpq: std::collections::BTreeSet<Vec<usize>> =
                r.query().into_iter().map(|(x, y)| vec![x, y]).collect();
            assert_eq!(c.query(), via_rpq);
        }
    }
}

#[test]
fn zero_atom_crpq() {
    let al = gen::alphabet(1);
    let g = LabeledGraph::new(3, al.clone(), true);
    let q = EcrpqQuery::new(al.clone(), vec![], vec![], vec![], vec![], vec![]).unwrap();
    assert_eq!(CrpqState::new(q, &g, None).unwrap().query().len(), 1);
    let never = Constraint { coeffs: vec![], bound: 1 };
    let q = EcrpqQuery::new(al.clone(), vec![], vec![], vec![], vec![], vec![never]).unwrap();
    assert!(CrpqState::new(q, &g, None).unwrap().query().is_empty());
}
