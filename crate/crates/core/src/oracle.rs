//! From-scratch evaluators used as ground truth.
//!
//! Nothing here touches the incremental states. Each function is a plain
//! fixpoint, search or enumeration over the current graph, written for
//! clarity rather than speed.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, Sym};
use crate::specs::{CnfGrammar, Dfa, EcrpqQuery, Item, NepsSpec, SyncAutomaton};

pub type PairSet = BTreeSet<(usize, usize)>;

/// Reflexive reachability by BFS from every node.
pub fn reach(g: &LabeledGraph) -> PairSet {
    let mut out = PairSet::new();
    for x in 0..g.n() {
        let mut seen = vec![false; g.n()];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            out.insert((x, u));
            for e in g.out_edges(u) {
                if !seen[e.v] {
                    seen[e.v] = true;
                    queue.push_back(e.v);
                }
            }
        }
    }
    out
}

/// Depth-first cycle detection on the union of all labels.
pub fn is_acyclic(g: &LabeledGraph) -> bool {
    fn visit(g: &LabeledGraph, u: usize, color: &mut [u8]) -> bool {
        color[u] = 1;
        for e in g.out_edges(u) {
            if color[e.v] == 1 || (color[e.v] == 0 && !visit(g, e.v, color)) {
                return false;
            }
        }
        color[u] = 2;
        true
    }
    let mut color = vec![0u8; g.n()];
    (0..g.n()).all(|u| color[u] != 0 || visit(g, u, &mut color))
}

/// `sets[ℓ]` holds the pairs joined by a walk of length exactly `ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthSets {
    pub sets: Vec<PairSet>,
}

impl LengthSets {
    pub fn contains(&self, x: usize, y: usize, len: usize) -> bool {
        self.sets.get(len).is_some_and(|s| s.contains(&(x, y)))
    }

    pub fn lmax(&self) -> usize {
        self.sets.len() - 1
    }
}

/// Path lengths up to `lmax` by repeated composition with the edge relation.
pub fn length_sets(g: &LabeledGraph, lmax: usize) -> LengthSets {
    let edges: PairSet = g.edges().map(|e| (e.u, e.v)).collect();
    let mut sets = vec![(0..g.n()).map(|x| (x, x)).collect::<PairSet>()];
    for _ in 0..lmax {
        let prev = sets.last().unwrap();
        let mut next = PairSet::new();
        for &(x, z) in prev {
            for &(a, y) in edges.range((z, 0)..(z + 1, 0)) {
                debug_assert_eq!(a, z);
                next.insert((x, y));
            }
        }
        sets.push(next);
    }
    LengthSets { sets }
}

/// Pairs joined by a path whose label is accepted, by BFS over the product
/// of the graph with the automaton.
pub fn rpq(g: &LabeledGraph, dfa: &Dfa) -> PairSet {
    let mut out = PairSet::new();
    for x in 0..g.n() {
        let mut seen = HashSet::from([(x, dfa.start())]);
        let mut queue = VecDeque::from([(x, dfa.start())]);
        while let Some((u, q)) = queue.pop_front() {
            if dfa.is_final(q) {
                out.insert((x, u));
            }
            for e in g.out_edges(u) {
                let next = (e.v, dfa.step(q, e.sym));
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    out
}

/// Every path of a DAG as `(start, end, label)`, including the empty path at
/// each node.
pub fn dag_paths(g: &LabeledGraph, budget: usize) -> Result<Vec<(usize, usize, Vec<Sym>)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize, Vec<Sym>)> = (0..g.n()).map(|x| (x, x, vec![])).collect();
    while let Some((x, u, word)) = stack.pop() {
        if word.len() > g.n() {
            return Err(Error::Invalid("graph has a cycle".into()));
        }
        for e in g.out_edges(u) {
            let mut w = word.clone();
            w.push(e.sym);
            stack.push((x, e.v, w));
        }
        out.push((x, u, word));
        if out.len() > budget {
            return Err(Error::BudgetExceeded(budget));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// RPQ answers on a DAG by enumerating every path label.
pub fn rpq_by_paths(g: &LabeledGraph, dfa: &Dfa, budget: usize) -> Result<PairSet> {
    Ok(dag_paths(g, budget)?
        .into_iter()
        .filter(|(_, _, w)| dfa.accepts(w))
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// CFL reachability by the worklist fixpoint over facts `X(u, v)`.
pub fn cfl(g: &LabeledGraph, grammar: &CnfGrammar) -> PairSet {
    let v = grammar.num_vars();
    let mut facts: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut by_start: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); g.n()]; v];
    let mut by_end: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); g.n()]; v];
    let mut work = Vec::new();
    for e in g.edges() {
        for &(x, a) in grammar.terminal_rules() {
            if a == e.sym {
                work.push((x, e.u, e.v));
            }
        }
    }
    while let Some((x, a, b)) = work.pop() {
        if !facts.insert((x, a, b)) {
            continue;
        }
        by_start[x][a].push(b);
        by_end[x][b].push(a);
        for &(w, y, z) in grammar.binary_rules() {
            if y == x {
                for &c in &by_start[z][b] {
                    work.push((w, a, c));
                }
            }
            if z == x {
                for &c in &by_end[y][a] {
                    work.push((w, c, b));
                }
            }
        }
    }
    let s = grammar.start();
    let mut out: PairSet = facts
        .into_iter()
        .filter(|&(x, _, _)| x == s)
        .map(|(_, a, b)| (a, b))
        .collect();
    if grammar.derives_empty() {
        out.extend((0..g.n()).map(|x| (x, x)));
    }
    out
}

/// CFL answers on a DAG by CYK on every path label.
pub fn cfl_by_paths(g: &LabeledGraph, grammar: &CnfGrammar, budget: usize) -> Result<PairSet> {
    Ok(dag_paths(g, budget)?
        .into_iter()
        .filter(|(_, _, w)| grammar.accepts(w))
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// Whether `x ⇒* items`, where variable items stand for themselves.
pub fn derives_sentential(grammar: &CnfGrammar, x: usize, items: &[Item]) -> bool {
    let n = items.len();
    if n == 0 {
        return x == grammar.start() && grammar.derives_empty();
    }
    let mut t = vec![vec![BTreeSet::new(); n]; n];
    for (i, it) in items.iter().enumerate() {
        match *it {
            Item::Var(y) => {
                t[i][i].insert(y);
            }
            Item::Term(a) => {
                for &(w, b) in grammar.terminal_rules() {
                    if a == b {
                        t[i][i].insert(w);
                    }
                }
            }
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len - 1;
            for m in i..j {
                for &(w, y, z) in grammar.binary_rules() {
                    if t[i][m].contains(&y) && t[m + 1][j].contains(&z) {
                        t[i][j].insert(w);
                    }
                }
            }
        }
    }
    t[0][n - 1].contains(&x)
}

/// Tuples `(a1, b1, …, a_{k+1}, b_{k+1})` with `x ⇒* s1 Y1 … Yk s_{k+1}` and
/// an `s_i`-path `a_i → b_i`, by enumerating DAG paths.
pub fn cfl_derived_by_paths(
    g: &LabeledGraph,
    grammar: &CnfGrammar,
    x: usize,
    ys: &[usize],
    budget: usize,
) -> Result<BTreeSet<Vec<usize>>> {
    let paths = dag_paths(g, budget)?;
    let segments = ys.len() + 1;
    let combos = (0..segments).try_fold(1usize, |acc, _| acc.checked_mul(paths.len()));
    if combos.is_none_or(|c| c > budget) {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; segments];
    'outer: loop {
        let mut items = Vec::new();
        let mut tuple = Vec::with_capacity(2 * segments);
        for (s, &i) in idx.iter().enumerate() {
            let (a, b, w) = &paths[i];
            items.extend(w.iter().map(|&c| Item::Term(c)));
            if s < ys.len() {
                items.push(Item::Var(ys[s]));
            }
            tuple.extend([*a, *b]);
        }
        if !out.contains(&tuple) && derives_sentential(grammar, x, &items) {
            out.insert(tuple);
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < paths.len() {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
    Ok(out)
}

pub type ParikhSet = BTreeSet<(usize, usize, Vec<usize>)>;

/// Parikh vectors of walks with at most `lmax` edges, layer by layer.
pub fn parikh(g: &LabeledGraph, lmax: usize) -> ParikhSet {
    let k = g.alphabet().len();
    let mut all = ParikhSet::new();
    let mut layer: ParikhSet = (0..g.n()).map(|x| (x, x, vec![0; k])).collect();
    for _ in 0..=lmax {
        let mut next = ParikhSet::new();
        for (x, z, vec) in &layer {
            for e in g.out_edges(*z) {
                let mut v = vec.clone();
                v[e.sym.index()] += 1;
                next.insert((*x, e.v, v));
            }
        }
        all.extend(std::mem::replace(&mut layer, next));
    }
    all
}

/// An explicit product graph on tuples of factor nodes.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    dims: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

impl ProductGraph {
    fn encode(&self, xs: &[usize]) -> usize {
        xs.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    fn decode(&self, mut id: usize) -> Vec<usize> {
        let mut xs = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            xs[i] = id % self.dims[i];
            id /= self.dims[i];
        }
        xs
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn reach(&self, from: &[usize], to: &[usize]) -> bool {
        self.reachable_from(from).contains(&self.encode(to))
    }

    fn reachable_from(&self, from: &[usize]) -> HashSet<usize> {
        let s = self.encode(from);
        let mut seen = HashSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Reachability by iterative deepening on path length, as a cross-check
    /// of [`ProductGraph::reach`].
    pub fn reach_by_deepening(&self, from: &[usize], to: &[usize]) -> bool {
        let target = self.encode(to);
        let mut frontier = HashSet::from([self.encode(from)]);
        let mut seen = frontier.clone();
        for _ in 0..=self.num_nodes() {
            if frontier.contains(&target) {
                return true;
            }
            let mut next = HashSet::new();
            for &u in &frontier {
                for &v in &self.adj[u] {
                    if seen.insert(v) {
                        next.insert(v);
                    }
                }
            }
            frontier = next;
        }
        false
    }

    pub fn node(&self, id: usize) -> Vec<usize> {
        self.decode(id)
    }
}

fn product_with(
    factors: &[&LabeledGraph],
    budget: usize,
    mut step: impl FnMut(&[usize], &mut Vec<usize>, &ProductGraph),
) -> Result<ProductGraph> {
    let dims: Vec<usize> = factors.iter().map(|g| g.n()).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&t| t <= budget)
        .ok_or(Error::BudgetExceeded(budget))?;
    let mut p = ProductGraph {
        dims,
        adj: vec![Vec::new(); total],
    };
    for id in 0..total {
        let xs = p.decode(id);
        let mut out = Vec::new();
        step(&xs, &mut out, &p);
        out.sort_unstable();
        out.dedup();
        p.adj[id] = out;
    }
    Ok(p)
}

/// Successor tuples where each factor either stays (`moves[i] == false`) or
/// takes an edge, optionally all with the same label.
fn moves_from(
    factors: &[&LabeledGraph],
    xs: &[usize],
    moves: &[bool],
    label: Option<Sym>,
    out: &mut Vec<Vec<usize>>,
) {
    let mut partial = vec![Vec::new()];
    for (i, g) in factors.iter().enumerate() {
        let choices: Vec<usize> = if moves[i] {
            g.out_edges(xs[i])
                .filter(|e| label.is_none_or(|a| a == e.sym))
                .map(|e| e.v)
                .collect()
        } else {
            vec![xs[i]]
        };
        partial = partial
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                choices.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.extend(partial);
}

/// The generalized product of `factors` under `spec`.
pub fn neps_product(factors: &[&LabeledGraph], spec: &NepsSpec, budget: usize) -> Result<ProductGraph> {
    assert_eq!(factors.len(), spec.factors());
    product_with(factors, budget, |xs, out, p| {
        for rule in spec.rules() {
            let mut succ = Vec::new();
            moves_from(factors, xs, rule, None, &mut succ);
            out.extend(succ.iter().map(|s| p.encode(s)));
        }
    })
}

/// Product where all factors step together along equally labeled edges.
pub fn labeled_product(factors: &[&LabeledGraph], budget: usize) -> Result<ProductGraph> {
    let all = vec![true; factors.len()];
    product_with(factors, budget, |xs, out, p| {
        for a in factors[0].alphabet().symbols() {
            let mut succ = Vec::new();
            moves_from(factors, xs, &all, Some(a), &mut succ);
            out.extend(succ.iter().map(|s| p.encode(s)));
        }
    })
}

/// Pairs joined by a path labeled `aⁿbⁿcⁿ` (`n ≥ 0`, so the diagonal is
/// included), by label enumeration.
pub fn anbncn(g: &LabeledGraph, labels: [Sym; 3], budget: usize) -> Result<PairSet> {
    Ok(dag_paths(g, budget)?
        .into_iter()
        .filter(|(_, _, w)| {
            let m = w.len() / 3;
            w.len() % 3 == 0 && w.iter().enumerate().all(|(i, &s)| s == labels[i / m.max(1)])
        })
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// Pairs joined by a path whose label is a palindrome, by label enumeration.
pub fn palindromes(g: &LabeledGraph, budget: usize) -> Result<PairSet> {
    Ok(dag_paths(g, budget)?
        .into_iter()
        .filter(|(_, _, w)| w.iter().eq(w.iter().rev()))
        .map(|(x, y, _)| (x, y))
        .collect())
}

/// ECRPQ answers over DAG copies by enumerating one path per atom.
pub fn ecrpq(query: &EcrpqQuery, copies: &[LabeledGraph], budget: usize) -> Result<BTreeSet<Vec<usize>>> {
    let m = query.atoms.len();
    assert_eq!(copies.len(), m);
    let k = query.alphabet.len();
    let paths: Vec<Vec<(usize, usize, Vec<Sym>)>> =
        copies.iter().map(|g| dag_paths(g, budget)).collect::<Result<_>>()?;
    let combos = paths.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
    if combos.is_none_or(|c| c > budget) {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; m];
    'combos: loop {
        let chosen: Vec<&(usize, usize, Vec<Sym>)> = (0..m).map(|i| &paths[i][idx[i]]).collect();
        let mut nu: Vec<Option<usize>> = vec![None; query.vars.len()];
        let mut consistent = true;
        for (atom, (x, y, _)) in query.atoms.iter().zip(&chosen) {
            for (var, val) in [(atom.x, *x), (atom.y, *y)] {
                match nu[var] {
                    Some(v) if v != val => consistent = false,
                    _ => nu[var] = Some(val),
                }
            }
        }
        if consistent
            && query.relations.iter().all(|r| {
                let words: Vec<Vec<Sym>> = r.paths.iter().map(|&p| chosen[p].2.clone()).collect();
                r.automaton.accepts(&words)
            })
        {
            let mut counts = vec![0usize; m * k];
            for (i, (_, _, w)) in chosen.iter().enumerate() {
                for a in w {
                    counts[i * k + a.index()] += 1;
                }
            }
            if query.constraints_hold(&counts) {
                out.insert(query.head.iter().map(|&h| nu[h].unwrap()).collect());
            }
        }
        for i in 0..m {
            idx[i] += 1;
            if idx[i] < paths[i].len() {
                continue 'combos;
            }
            idx[i] = 0;
        }
        break;
    }
    Ok(out)
}

/// A nondeterministic word automaton used for CRPQ atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordNfa {
    pub num_states: usize,
    pub start: usize,
    pub finals: Vec<bool>,
    pub trans: Vec<(usize, Sym, usize)>,
}

impl WordNfa {
    pub fn from_sync(a: &SyncAutomaton) -> WordNfa {
        assert_eq!(a.arity(), 1);
        WordNfa {
            num_states: a.num_states(),
            start: a.start(),
            finals: (0..a.num_states()).map(|q| a.is_final(q)).collect(),
            trans: a
                .transitions()
                .iter()
                .filter_map(|(p, l, q)| l[0].map(|s| (*p, s, *q)))
                .collect(),
        }
    }
}

/// Bounded-witness CRPQ answers: per atom, the Parikh vectors of accepted
/// paths of length at most `lmax`, joined over variables and filtered by the
/// constraints. Every relation of `query` must be unary.
pub fn crpq(query: &EcrpqQuery, g: &LabeledGraph, lmax: usize) -> BTreeSet<Vec<usize>> {
    let k = g.alphabet().len();
    let m = query.atoms.len();
    let mut per_atom: Vec<HashMap<(usize, usize), BTreeSet<Vec<usize>>>> = Vec::new();
    for i in 0..m {
        let nfas: Vec<WordNfa> = query
            .relations
            .iter()
            .filter(|r| r.paths == [i])
            .map(|r| WordNfa::from_sync(&r.automaton))
            .collect();
        let mut table: HashMap<(usize, usize), BTreeSet<Vec<usize>>> = HashMap::new();
        for x in 0..g.n() {
            // layer: (node, state tuple, vector)
            let init = (x, nfas.iter().map(|a| a.start).collect::<Vec<_>>(), vec![0usize; k]);
            let mut layer = BTreeSet::from([init]);
            let mut seen = layer.clone();
            for step in 0..=lmax {
                for (u, qs, vec) in &layer {
                    if nfas.iter().zip(qs).all(|(a, &q)| a.finals[q]) {
                        table.entry((x, *u)).or_default().insert(vec.clone());
                    }
                }
                if step == lmax {
                    break;
                }
                let mut next = BTreeSet::new();
                for (u, qs, vec) in &layer {
                    for e in g.out_edges(*u) {
                        let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
                        for (a, &q) in nfas.iter().zip(qs) {
                            let targets: Vec<usize> = a
                                .trans
                                .iter()
                                .filter(|t| t.0 == q && t.1 == e.sym)
                                .map(|t| t.2)
                                .collect();
                            succ = succ
                                .into_iter()
                                .flat_map(|s| {
                                    targets.iter().map(move |&t| {
                                        let mut s2 = s.clone();
                                        s2.push(t);
                                        s2
                                    })
                                })
                                .collect();
                        }
                        let mut v2 = vec.clone();
                        v2[e.sym.index()] += 1;
                        for s in succ {
                            let item = (e.v, s, v2.clone());
                            if seen.insert(item.clone()) {
                                next.insert(item);
                            }
                        }
                    }
                }
                layer = next;
            }
        }
        per_atom.push(table);
    }
    let mut out = BTreeSet::new();
    let nv = query.vars.len();
    let mut nu = vec![usize::MAX; nv];
    join_atoms(query, &per_atom, 0, &mut nu, &mut Vec::new(), &mut out);
    out
}

fn join_atoms(
    query: &EcrpqQuery,
    per_atom: &[HashMap<(usize, usize), BTreeSet<Vec<usize>>>],
    i: usize,
    nu: &mut Vec<usize>,
    counts: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if i == per_atom.len() {
        if query.constraints_hold(counts) {
            out.insert(query.head.iter().map(|&h| nu[h]).collect());
        }
        return;
    }
    let atom = &query.atoms[i];
    let mut keys: Vec<&(usize, usize)> = per_atom[i].keys().collect();
    keys.sort();
    for &(x, y) in keys {
        let (ox, oy) = (nu[atom.x], nu[atom.y]);
        if (ox != usize::MAX && ox != x) || (oy != usize::MAX && oy != y) {
            continue;
        }
        nu[atom.x] = x;
        if nu[atom.y] != usize::MAX && nu[atom.y] != y {
            nu[atom.x] = ox;
            continue;
        }
        nu[atom.y] = y;
        for vec in &per_atom[i][&(x, y)] {
            let len = counts.len();
            counts.extend_from_slice(vec);
            join_atoms(query, per_atom, i + 1, nu, counts, out);
            counts.truncate(len);
        }
        nu[atom.y] = oy;
        nu[atom.x] = ox;
    }
}
