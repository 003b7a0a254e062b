use dynq::dist::{AcyDistState, AnBnCnState, InsDistState, ParikhState, PathLengths, UndirDistState};
use dynq::{gen, oracle, Error, LabeledGraph, Modification, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_lengths(s: &impl PathLengths, g: &LabeledGraph, lmax: usize, ctx: &str) {
    let want = oracle::length_sets(g, lmax);
    for x in 0..g.n() {
        for y in 0..g.n() {
            for l in 0..=lmax {
                assert_eq!(s.has_length(x, y, l).unwrap(), want.contains(x, y, l), "{ctx}: ({x},{y}) len {l}");
            }
        }
    }
}

#[test]
fn insert_only_lengths_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..60 {
        let n = rng.gen_range(1..=7);
        let lmax = rng.gen_range(1..=14);
        let mut g = LabeledGraph::new(n, gen::alphabet(1), true);
        let mut s = InsDistState::new(n, Some(lmax)).unwrap();
        let steps = rng.gen_range(1..=12);
        for m in gen::insert_script(&mut rng, &g.clone(), steps) {
            g.apply_mod(&m).unwrap();
            s.apply(&m).unwrap();
        }
        assert_lengths(&s, &g, lmax, &format!("trial {trial}"));
        assert!(matches!(s.has_length(0, 0, lmax + 1), Err(Error::BoundExceeded { .. })));
        assert!(matches!(
            s.apply(&Modification::delete(Sym(0), 0, 0)),
            Err(Error::UnsupportedModification(_))
        ));
    }
}

#[test]
fn acyclic_lengths_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for trial in 0..80 {
        let n = rng.gen_range(2..=8);
        let mut s = AcyDistState::new(gen::alphabet(2), n);
        for m in gen::dag_script(&mut rng, &s.graph().clone(), 30, 0.35) {
            s.apply(&m).unwrap();
            assert_lengths(&s, s.graph(), n, &format!("trial {trial} after {m}"));
        }
    }
}

#[test]
fn undirected_parity_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..80 {
        let n = rng.gen_range(1..=7);
        let mut s = UndirDistState::new(gen::alphabet(2), n);
        for m in gen::undirected_script(&mut rng, &s.graph().clone(), 15, 0.3) {
            s.apply(&m).unwrap();
        }
        assert_lengths(&s, s.graph(), 2 * n + 2, &format!("trial {trial}"));
    }
}

#[test]
fn parikh_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for trial in 0..40 {
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=5);
        let lmax = rng.gen_range(1..=8);
        let mut g = LabeledGraph::new(n, gen::alphabet(k), true);
        let mut s = ParikhState::new(n, k, lmax).unwrap();
        let steps = rng.gen_range(1..=8);
        for m in gen::insert_script(&mut rng, &g.clone(), steps) {
            g.apply_mod(&m).unwrap();
            s.apply(&m).unwrap();
        }
        let want = oracle::parikh(&g, lmax);
        let got: oracle::ParikhSet = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .flat_map(|(x, y)| s.vectors(x, y).map(move |v| (x, y, v)).collect::<Vec<_>>())
            .collect();
        assert_eq!(got, want, "trial {trial}");
    }
}

#[test]
fn parikh_with_one_symbol_is_insdist() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..30 {
        let n = rng.gen_range(1..=6);
        let lmax = rng.gen_range(1..=10);
        let g = LabeledGraph::new(n, gen::alphabet(1), true);
        let mut p = ParikhState::new(n, 1, lmax).unwrap();
        let mut d = InsDistState::new(n, Some(lmax)).unwrap();
        for m in gen::insert_script(&mut rng, &g, 10) {
            p.apply(&m).unwrap();
            d.apply(&m).unwrap();
            for x in 0..n {
                for y in 0..n {
                    for t in 0..=lmax {
                        let via_p: Vec<usize> = p.sums(x, y, t).iter().collect();
                        let via_d: Vec<usize> = d.sums(x, y, t).iter().collect();
                        assert_eq!(via_p, via_d);
                    }
                }
            }
        }
    }
}

fn anbncn_by_paths(g: &LabeledGraph) -> oracle::PairSet {
    oracle::anbncn(g, [Sym(0), Sym(1), Sym(2)], 1 << 20).unwrap()
}

#[test]
fn anbncn_chains() {
    let al = gen::alphabet(3);
    for m in 0..=5 {
        let n = 3 * m + 1;
        let mut s = AnBnCnState::new(al.clone(), n, [Sym(0), Sym(1), Sym(2)]);
        for i in 0..3 * m {
            s.apply(&Modification::insert(Sym((i / m) as u16), i, i + 1)).unwrap();
        }
        let q = s.query();
        assert_eq!(q, anbncn_by_paths(s.graph()));
        assert!(q.contains(&(0, n - 1)));
        if m > 0 {
            // break the middle block: the full chain no longer matches
            let mid = m + m / 2;
            s.apply(&Modification::delete(Sym(1), mid, mid + 1)).unwrap();
            s.apply(&Modification::insert(Sym(0), mid, mid + 1)).unwrap();
            assert!(!s.query().contains(&(0, n - 1)));
            assert_eq!(s.query(), anbncn_by_paths(s.graph()));
        }
    }
}

#[test]
fn anbncn_random_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for trial in 0..40 {
        let n = rng.gen_range(2..=8);
        let mut s = AnBnCnState::new(gen::alphabet(3), n, [Sym(0), Sym(1), Sym(2)]);
        for m in gen::dag_script(&mut rng, &s.graph().clone(), 20, 0.25) {
            s.apply(&m).unwrap();
        }
        assert_eq!(s.query(), anbncn_by_paths(s.graph()), "trial {trial}");
    }
}
