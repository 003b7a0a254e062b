use dynq::cfl::CflState;
use dynq::gen;
use dynq::oracle;
use dynq::{LabeledGraph, Modification};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grammars(rng: &mut ChaCha8Rng, trial: usize) -> dynq::specs::CnfGrammar {
    let al = gen::alphabet(2);
    match trial % 3 {
        0 => gen::dyck(&al),
        1 => gen::anbn(&al),
        _ => gen::cnf(rng, &al, 6),
    }
}

#[test]
fn random_dag_churn_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let grammar = grammars(&mut rng, trial);
        let n = rng.gen_range(2..=7);
        let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
        let script = gen::dag_script(&mut rng, &g0, 25, 0.35);
        let mut s = CflState::new(grammar, n);
        for m in &script {
            s.apply(m).unwrap();
            assert_eq!(s.query(), oracle::cfl(s.graph(), s.grammar()), "trial {trial} after {m}");
            assert_eq!(s.tc().pairs(), oracle::reach(s.graph()).into_iter().collect::<Vec<_>>());
        }
    }
}

#[test]
fn stored_relations_match_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..12 {
        let grammar = grammars(&mut rng, trial);
        let n = rng.gen_range(2..=5);
        let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
        let script = gen::dag_script(&mut rng, &g0, 12, 0.3);
        let mut s = CflState::new(grammar, n);
        for m in &script {
            s.apply(m).unwrap();
        }
        let v = s.grammar().num_vars();
        for x in 0..v {
            for y in 0..v {
                let expect =
                    oracle::cfl_derived_by_paths(s.graph(), s.grammar(), x, &[y], 1 << 22).unwrap();
                let got = s.derived(x, &[y]).unwrap();
                assert_eq!(got, expect, "trial {trial} R_{{{x}->{y}}}");
            }
        }
    }
}

#[test]
fn k2_derived_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..6 {
        let grammar = grammars(&mut rng, trial);
        let n = 4;
        let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
        let script = gen::dag_script(&mut rng, &g0, 5, 0.0);
        let mut s = CflState::new(grammar, n);
        for m in &script {
            s.apply(m).unwrap();
        }
        let v = s.grammar().num_vars().min(3);
        for x in 0..v {
            for y1 in 0..v {
                for y2 in 0..v {
                    let expect = oracle::cfl_derived_by_paths(
                        s.graph(),
                        s.grammar(),
                        x,
                        &[y1, y2],
                        1 << 24,
                    )
                    .unwrap();
                    assert_eq!(s.derived(x, &[y1, y2]).unwrap(), expect);
                }
            }
        }
    }
}

#[test]
fn insert_then_delete_restores_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..30 {
        let grammar = grammars(&mut rng, trial);
        let n = rng.gen_range(2..=6);
        let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
        let script = gen::dag_script(&mut rng, &g0, 15, 0.3);
        let mut s = CflState::new(grammar, n);
        for m in &script {
            s.apply(m).unwrap();
        }
        let extra = gen::dag_script(&mut rng, s.graph(), 1, 0.0);
        let Some(m) = extra.first().copied() else { continue };
        if !m.is_insert() || s.graph().has_edge(m.u, m.sym, m.v) || s.tc().cycle_check(m.u, m.v) {
            continue;
        }
        let before = s.clone();
        s.apply(&m).unwrap();
        s.apply(&Modification::delete(m.sym, m.u, m.v)).unwrap();
        assert_eq!(s, before, "trial {trial}");
    }
}
