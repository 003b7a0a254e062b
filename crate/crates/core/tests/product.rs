use dynq::dist::InsDistState;
use dynq::product::{product_reach, Gf2Matrix, LabeledProductState, NepsState, PalindromeState, Regime};
use dynq::specs::NepsSpec;
use dynq::{gen, oracle, LabeledGraph, Modification};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn assert_neps(s: &NepsState, ctx: &str) {
    let graphs = s.graphs();
    let p = oracle::neps_product(&graphs, s.spec(), 1 << 12).unwrap();
    let dims: Vec<usize> = graphs.iter().map(|g| g.n()).collect();
    for xs in tuples(&dims) {
        for ys in tuples(&dims) {
            assert_eq!(s.reach(&xs, &ys).unwrap(), p.reach(&xs, &ys), "{ctx}: {xs:?} -> {ys:?}");
        }
    }
}

/// One script per factor, reversed so that `pop` yields them in order.
fn scripts(rng: &mut ChaCha8Rng, graphs: &[LabeledGraph], regime: Regime, steps: usize) -> Vec<Vec<Modification>> {
    graphs
        .iter()
        .map(|g| {
            let mut s = match regime {
                Regime::InsertOnly => gen::insert_script(rng, g, steps),
                Regime::Acyclic => gen::dag_script(rng, g, steps, 0.3),
                Regime::Undirected => gen::undirected_script(rng, g, steps, 0.3),
            };
            s.reverse();
            s
        })
        .collect()
}

fn neps_trials(regime: Regime, seed: u64, trials: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let m = rng.gen_range(1..=3);
        let spec = gen::neps(&mut rng, m, 3);
        let directed = regime != Regime::Undirected;
        let graphs: Vec<LabeledGraph> = (0..m)
            .map(|_| LabeledGraph::new(rng.gen_range(1..=4), gen::alphabet(1), directed))
            .collect();
        let mut scripts = scripts(&mut rng, &graphs, regime, 6);
        let mut s = NepsState::new(spec, regime, graphs, None).unwrap();
        for step in 0..6 {
            let i = rng.gen_range(0..m);
            if let Some(md) = scripts[i].pop() {
                s.apply(i, &md).unwrap();
            }
            if rng.gen_bool(0.3) {
                let r = rng.gen_range(0..s.spec().rules().len());
                s.flip(r, rng.gen_range(0..m)).unwrap();
            }
            assert_neps(&s, &format!("{regime} trial {trial} step {step}"));
        }
    }
}

#[test]
fn neps_insert_only_matches_explicit_product() {
    neps_trials(Regime::InsertOnly, 41, 25);
}

#[test]
fn neps_acyclic_matches_explicit_product() {
    neps_trials(Regime::Acyclic, 42, 40);
}

#[test]
fn neps_undirected_matches_explicit_product() {
    neps_trials(Regime::Undirected, 43, 40);
}

#[test]
fn explicit_product_search_agrees_with_deepening() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let spec = gen::neps(&mut rng, 2, 3);
        let mut gs = Vec::new();
        for _ in 0..2 {
            let g = LabeledGraph::new(rng.gen_range(1..=4), gen::alphabet(1), true);
            let mut h = g.clone();
            for md in gen::insert_script(&mut rng, &g, 4) {
                h.apply_mod(&md).unwrap();
            }
            gs.push(h);
        }
        let refs: Vec<&LabeledGraph> = gs.iter().collect();
        let p = oracle::neps_product(&refs, &spec, 1 << 10).unwrap();
        for xs in tuples(&[gs[0].n(), gs[1].n()]) {
            for ys in tuples(&[gs[0].n(), gs[1].n()]) {
                assert_eq!(p.reach(&xs, &ys), p.reach_by_deepening(&xs, &ys));
            }
        }
    }
}

#[test]
fn parity_system_solvability_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..60 {
        let m = rng.gen_range(1..=3);
        let spec = gen::neps(&mut rng, m, 4);
        let graphs: Vec<LabeledGraph> = (0..m)
            .map(|_| {
                let g = LabeledGraph::new(rng.gen_range(1..=4), gen::alphabet(1), false);
                let mut h = g.clone();
                for md in gen::undirected_script(&mut rng, &g, 5, 0.2) {
                    h.apply_mod(&md).unwrap();
                }
                h
            })
            .collect();
        let dims: Vec<usize> = graphs.iter().map(LabeledGraph::n).collect();
        let s = NepsState::new(spec, Regime::Undirected, graphs, None).unwrap();
        let xs: Vec<usize> = dims.iter().map(|&d| rng.gen_range(0..d)).collect();
        let ys: Vec<usize> = dims.iter().map(|&d| rng.gen_range(0..d)).collect();
        if let Some((b, d)) = s.parity_system(&xs, &ys) {
            let k = b.num_cols();
            let by_enum = (0u32..1 << k).any(|p| {
                (0..b.num_rows()).all(|i| {
                    let sum = (0..k).filter(|&j| p >> j & 1 == 1 && b.get(i, j)).count();
                    (sum % 2 == 1) == d[i]
                })
            });
            assert_eq!(b.solvable(&d), by_enum);
        }
    }
}

#[test]
fn gf2_rank_matches_span_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for _ in 0..200 {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let bits: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let span: std::collections::HashSet<u32> = (0u32..1 << rows)
            .map(|c| {
                (0..rows)
                    .filter(|&r| c >> r & 1 == 1)
                    .fold(0u32, |acc, r| acc ^ bits[r].iter().enumerate().fold(0, |v, (j, &b)| v | (b as u32) << j))
            })
            .collect();
        assert_eq!(1usize << Gf2Matrix::from_rows(&bits).rank(), span.len());
    }
}

#[test]
fn product_reach_matches_tensor_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for trial in 0..40 {
        let m = rng.gen_range(1..=3);
        let graphs: Vec<LabeledGraph> = (0..m)
            .map(|_| {
                let g = LabeledGraph::new(rng.gen_range(1..=3), gen::alphabet(1), true);
                let mut h = g.clone();
                for md in gen::insert_script(&mut rng, &g, 3) {
                    h.apply_mod(&md).unwrap();
                }
                h
            })
            .collect();
        let dims: Vec<usize> = graphs.iter().map(LabeledGraph::n).collect();
        let bound: usize = dims.iter().product();
        let dists: Vec<InsDistState> = graphs
            .iter()
            .map(|g| {
                let mut d = InsDistState::new(g.n(), Some(bound)).unwrap();
                for e in g.edges() {
                    d.apply(&Modification::insert(e.sym, e.u, e.v)).unwrap();
                }
                d
            })
            .collect();
        let refs: Vec<&LabeledGraph> = graphs.iter().collect();
        let p = oracle::neps_product(&refs, &NepsSpec::tensor(m), 1 << 10).unwrap();
        for xs in tuples(&dims) {
            for ys in tuples(&dims) {
                let got = product_reach(&dists, &xs, &ys).unwrap();
                assert_eq!(got, p.reach(&xs, &ys), "trial {trial}: {xs:?} -> {ys:?}");
            }
        }
    }
}

#[test]
fn labeled_product_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for trial in 0..40 {
        let m = rng.gen_range(1..=3);
        let al = gen::alphabet(rng.gen_range(1..=2));
        let graphs: Vec<LabeledGraph> = (0..m)
            .map(|_| LabeledGraph::new(rng.gen_range(1..=4), al.clone(), true))
            .collect();
        let mut scripts = scripts(&mut rng, &graphs, Regime::Acyclic, 8);
        let mut s = LabeledProductState::new(graphs).unwrap();
        for step in 0..8 {
            let i = rng.gen_range(0..m);
            if let Some(md) = scripts[i].pop() {
                s.apply(i, &md).unwrap();
            }
            let refs: Vec<&LabeledGraph> = s.factors().iter().collect();
            let p = oracle::labeled_product(&refs, 1 << 12).unwrap();
            let dims: Vec<usize> = refs.iter().map(|g| g.n()).collect();
            for xs in tuples(&dims) {
                for ys in tuples(&dims) {
                    assert_eq!(s.reach(&xs, &ys).unwrap(), p.reach(&xs, &ys), "trial {trial} step {step}");
                }
            }
        }
    }
}

#[test]
fn palindromes_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    for trial in 0..60 {
        let n = rng.gen_range(1..=6);
        let g = LabeledGraph::new(n, gen::alphabet(rng.gen_range(1..=2)), true);
        let mut s = PalindromeState::new(&g).unwrap();
        for md in gen::dag_script(&mut rng, &g, 12, 0.3) {
            s.apply(&md).unwrap();
            assert_eq!(s.query(), oracle::palindromes(s.graph(), 1 << 16).unwrap(), "trial {trial} after {md}");
        }
    }
}
