//! Seeded random instances for the fuzz suites and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Alphabet, LabeledGraph, Modification, Sym};
use crate::specs::{
    CnfGrammar, Constraint, Dfa, EcrpqQuery, Letter, NepsSpec, PathAtom, RelAtom, SyncAutomaton,
};

pub fn alphabet(k: usize) -> Alphabet {
    Alphabet::letters(&"abcdefgh"[..k])
}

fn sym<R: Rng>(rng: &mut R, alphabet: &Alphabet) -> Sym {
    Sym(rng.gen_range(0..alphabet.len()) as u16)
}

/// Valid modifications keeping the graph acyclic: inserted edges respect a
/// hidden random topological order; deletions pick an existing edge with
/// probability `p_delete`.
pub fn dag_script<R: Rng>(
    rng: &mut R,
    g: &LabeledGraph,
    steps: usize,
    p_delete: f64,
) -> Vec<Modification> {
    let n = g.n();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let mut g = g.clone();
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps && n >= 2 {
        let m = if g.edge_count() > 0 && rng.gen_bool(p_delete) {
            let edges: Vec<_> = g.edges().collect();
            let e = edges[rng.gen_range(0..edges.len())];
            Modification::delete(e.sym, e.u, e.v)
        } else {
            let (mut a, mut b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            if rank[a] > rank[b] {
                std::mem::swap(&mut a, &mut b);
            }
            Modification::insert(sym(rng, g.alphabet()), a, b)
        };
        g.apply_mod(&m).expect("generated modification is valid");
        out.push(m);
    }
    out
}

/// Arbitrary insertions, self-loops and cycles included.
pub fn insert_script<R: Rng>(rng: &mut R, g: &LabeledGraph, steps: usize) -> Vec<Modification> {
    (0..steps)
        .map(|_| {
            Modification::insert(
                sym(rng, g.alphabet()),
                rng.gen_range(0..g.n()),
                rng.gen_range(0..g.n()),
            )
        })
        .collect()
}

/// Mixed insertions and deletions on an undirected graph.
pub fn undirected_script<R: Rng>(
    rng: &mut R,
    g: &LabeledGraph,
    steps: usize,
    p_delete: f64,
) -> Vec<Modification> {
    let mut g = g.clone();
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        let m = if g.edge_count() > 0 && rng.gen_bool(p_delete) {
            let edges: Vec<_> = g.edges().collect();
            let e = edges[rng.gen_range(0..edges.len())];
            Modification::delete(e.sym, e.u, e.v)
        } else {
            Modification::insert(
                sym(rng, g.alphabet()),
                rng.gen_range(0..g.n()),
                rng.gen_range(0..g.n()),
            )
        };
        g.apply_mod(&m).expect("generated modification is valid");
        out.push(m);
    }
    out
}

/// A random (usually partial) DFA with at most `max_states` states.
pub fn dfa<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_states: usize) -> Dfa {
    let q = rng.gen_range(1..=max_states);
    let mut trans = Vec::new();
    for p in 0..q {
        for a in alphabet.symbols() {
            if rng.gen_bool(0.8) {
                trans.push((p, a, rng.gen_range(0..q)));
            }
        }
    }
    let finals: Vec<usize> = (0..q).filter(|_| rng.gen_bool(0.4)).collect();
    let d = Dfa::new(alphabet.clone(), q, 0, &finals, &trans).expect("valid dfa");
    if d.num_states() > max_states {
        // completion added a sink; fold it into a total transition table
        let trans: Vec<_> = (0..q)
            .flat_map(|p| alphabet.symbols().map(move |a| (p, a)))
            .map(|(p, a)| {
                let t = d.step(p, a);
                (p, a, if t >= q { rng.gen_range(0..q) } else { t })
            })
            .collect();
        return Dfa::new(alphabet.clone(), q, 0, &finals, &trans).expect("valid dfa");
    }
    d
}

/// A random CNF grammar with at most `max_vars` variables.
pub fn cnf<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_vars: usize) -> CnfGrammar {
    let v = rng.gen_range(1..=max_vars);
    let names = (0..v).map(|i| format!("V{i}")).collect();
    let mut binary = Vec::new();
    let mut terminal = Vec::new();
    for x in 0..v {
        for _ in 0..rng.gen_range(0..=3) {
            binary.push((x, rng.gen_range(0..v), rng.gen_range(0..v)));
        }
        for a in alphabet.symbols() {
            if rng.gen_bool(0.4) {
                terminal.push((x, a));
            }
        }
    }
    let start_eps = !binary.iter().any(|&(_, y, z)| y == 0 || z == 0) && rng.gen_bool(0.5);
    CnfGrammar::new(alphabet.clone(), names, 0, binary, terminal, start_eps).expect("valid cnf")
}

/// Dyck-1 with `a` as the opening and `b` as the closing bracket.
pub fn dyck(alphabet: &Alphabet) -> CnfGrammar {
    CnfGrammar::parse("start S\nrule S -> S S\nrule S -> a S b\nrule S -> eps\n", alphabet)
        .expect("dyck grammar")
}

pub fn anbn(alphabet: &Alphabet) -> CnfGrammar {
    CnfGrammar::parse("start S\nrule S -> a S b\nrule S -> eps\n", alphabet).expect("anbn grammar")
}

/// A random rule set over `factors` factors with at most `max_rules` rules.
pub fn neps<R: Rng>(rng: &mut R, factors: usize, max_rules: usize) -> NepsSpec {
    let k = rng.gen_range(1..=max_rules);
    let rules = (0..k)
        .map(|_| (0..factors).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    NepsSpec::new(factors, rules).expect("valid rules")
}

/// A random synchronous automaton that respects end padding by construction:
/// every state carries the set of tapes that have ended, and transitions only
/// grow that set.
pub fn sync_automaton<R: Rng>(
    rng: &mut R,
    alphabet: &Alphabet,
    arity: usize,
    max_states: usize,
) -> SyncAutomaton {
    let q = rng.gen_range(1..=max_states);
    let full = (1u32 << arity) - 1;
    let masks: Vec<u32> = (0..q)
        .map(|i| if i == 0 { 0 } else { rng.gen_range(0..full) })
        .collect();
    let mut trans = Vec::new();
    for p in 0..q {
        for t in 0..q {
            if masks[p] & !masks[t] != 0 {
                continue;
            }
            for _ in 0..rng.gen_range(0..=3) {
                let letter: Letter = (0..arity)
                    .map(|i| (masks[t] & (1 << i) == 0).then(|| sym(rng, alphabet)))
                    .collect();
                trans.push((p, letter, t));
            }
        }
    }
    let finals: Vec<usize> = (0..q).filter(|_| rng.gen_bool(0.5)).collect();
    SyncAutomaton::new(alphabet.clone(), arity, q, 0, &finals, trans).expect("valid automaton")
}

fn constraints<R: Rng>(rng: &mut R, width: usize, max_rows: usize) -> Vec<Constraint> {
    (0..rng.gen_range(0..=max_rows))
        .map(|_| Constraint {
            coeffs: (0..width).map(|_| rng.gen_range(-1..=1)).collect(),
            bound: rng.gen_range(-1..=1),
        })
        .collect()
}

/// Random variables for `m` atoms over a pool of at most `m + 2` variables,
/// with a nonempty head drawn from the used ones.
fn shape<R: Rng>(rng: &mut R, m: usize) -> (Vec<String>, Vec<usize>, Vec<PathAtom>) {
    let pool = rng.gen_range(1..=m + 2);
    let vars: Vec<String> = (0..pool).map(|i| format!("v{i}")).collect();
    let atoms: Vec<PathAtom> = (0..m)
        .map(|i| PathAtom {
            x: rng.gen_range(0..pool),
            path: format!("p{i}"),
            y: rng.gen_range(0..pool),
        })
        .collect();
    let mut used: Vec<usize> = atoms.iter().flat_map(|a| [a.x, a.y]).collect();
    used.sort();
    used.dedup();
    let mut head: Vec<usize> = used.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
    if head.is_empty() && !used.is_empty() {
        head.push(used[rng.gen_range(0..used.len())]);
    }
    (vars, head, atoms)
}

/// An extended query with `m` atoms, one `m`-ary relation and sometimes an
/// extra unary one.
pub fn ecrpq_query<R: Rng>(
    rng: &mut R,
    alphabet: &Alphabet,
    m: usize,
    max_states: usize,
    max_rows: usize,
) -> EcrpqQuery {
    let (vars, head, atoms) = shape(rng, m);
    let mut relations = vec![RelAtom {
        automaton: sync_automaton(rng, alphabet, m, max_states),
        paths: (0..m).collect(),
    }];
    if m > 1 && rng.gen_bool(0.3) {
        relations.push(RelAtom {
            automaton: sync_automaton(rng, alphabet, 1, 2),
            paths: vec![rng.gen_range(0..m)],
        });
    }
    let cs = constraints(rng, m * alphabet.len(), max_rows);
    EcrpqQuery::new(alphabet.clone(), vars, head, atoms, relations, cs).expect("valid query")
}

/// A conjunctive query with `m` atoms, each restricted by a random DFA.
pub fn crpq_query<R: Rng>(
    rng: &mut R,
    alphabet: &Alphabet,
    m: usize,
    max_states: usize,
    max_rows: usize,
) -> EcrpqQuery {
    let (vars, head, atoms) = shape(rng, m);
    let relations = (0..m)
        .map(|i| RelAtom {
            automaton: SyncAutomaton::from_dfa(&dfa(rng, alphabet, max_states)),
            paths: vec![i],
        })
        .collect();
    let cs = constraints(rng, m * alphabet.len(), max_rows);
    EcrpqQuery::new(alphabet.clone(), vars, head, atoms, relations, cs).expect("valid query")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dag_scripts_stay_acyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut g = LabeledGraph::new(6, alphabet(2), true);
            for m in dag_script(&mut rng, &g.clone(), 30, 0.3) {
                g.apply_mod(&m).unwrap();
                assert!(oracle::is_acyclic(&g));
            }
        }
    }

    #[test]
    fn random_dfas_fit_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = dfa(&mut rng, &alphabet(3), 4);
            assert!(d.num_states() <= 4);
        }
    }

    #[test]
    fn random_sync_automata_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for arity in 1..=3 {
            for _ in 0..30 {
                sync_automaton(&mut rng, &alphabet(2), arity, 4).validate().unwrap();
            }
        }
    }
}
