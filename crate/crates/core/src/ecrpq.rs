//! Extended conjunctive regular path queries with linear constraints on
//! symbol counts.
//!
//! [`EcrpqState`] handles insertions and deletions on acyclic copies, one copy
//! per path atom. [`CrpqState`] handles unary relations on a general graph
//! under insertions, one Parikh state per atom over `G × 𝒜_j`.

use std::collections::{BTreeSet, HashMap};

use crate::dist::ParikhState;
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, ModKind, Modification, Sym, TcState};
use crate::specs::{EcrpqQuery, Letter, SyncAutomaton};

/// Head tuples of a query answer.
pub type Answer = BTreeSet<Vec<usize>>;

const MAX_LETTERS: usize = 1 << 12;

/// A query normalized to one synchronous automaton over `m` tapes, tape `i`
/// reading the label of atom `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcrpqPlan {
    query: EcrpqQuery,
    automaton: SyncAutomaton,
}

impl EcrpqPlan {
    /// Synchronized product of all relation automata. Each relation reads its
    /// own tapes and idles once all of them are padded; the product state also
    /// records which tapes have ended so padding stays a suffix on every tape.
    pub fn compile(query: EcrpqQuery) -> Result<EcrpqPlan> {
        let m = query.atoms.len();
        if m == 0 {
            return Err(Error::Invalid("an extended query needs at least one atom".into()));
        }
        if m > 16 {
            return Err(Error::ComplexityGuard(format!("{m} path atoms")));
        }
        for r in &query.relations {
            r.automaton.validate()?;
        }
        let k = query.alphabet.len();
        let letter_count = (k + 1).checked_pow(m as u32).unwrap_or(usize::MAX);
        if letter_count > MAX_LETTERS {
            return Err(Error::ComplexityGuard(format!(
                "{letter_count} letters over {m} tapes"
            )));
        }
        let letters: Vec<Letter> = (1..letter_count)
            .map(|mut c| {
                (0..m)
                    .map(|_| {
                        let d = c % (k + 1);
                        c /= k + 1;
                        (d > 0).then(|| Sym((d - 1) as u16))
                    })
                    .collect()
            })
            .collect();

        type Key = (Vec<usize>, u32);
        let start: Key = (query.relations.iter().map(|r| r.automaton.start()).collect(), 0);
        let mut ids: HashMap<Key, usize> = HashMap::from([(start.clone(), 0)]);
        let mut keys = vec![start];
        let mut trans = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let (states, mask) = keys[i].clone();
            for letter in &letters {
                let ended = letter
                    .iter()
                    .enumerate()
                    .any(|(t, s)| s.is_some() && mask & (1 << t) != 0);
                if ended {
                    continue;
                }
                let next_mask = letter
                    .iter()
                    .enumerate()
                    .fold(mask, |acc, (t, s)| if s.is_none() { acc | 1 << t } else { acc });
                let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
                for (r, &q) in query.relations.iter().zip(&states) {
                    let proj: Vec<Option<Sym>> = r.paths.iter().map(|&p| letter[p]).collect();
                    let targets: Vec<usize> = if proj.iter().all(Option::is_none) {
                        vec![q]
                    } else {
                        r.automaton
                            .transitions()
                            .iter()
                            .filter(|(p, l, _)| *p == q && l[..] == proj[..])
                            .map(|t| t.2)
                            .collect()
                    };
                    succ = succ
                        .iter()
                        .flat_map(|s| {
                            targets.iter().map(move |&t| {
                                let mut s = s.clone();
                                s.push(t);
                                s
                            })
                        })
                        .collect();
                }
                for s in succ {
                    let key = (s, next_mask);
                    let id = *ids.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        keys.len() - 1
                    });
                    trans.push((i, letter.clone(), id));
                }
            }
            i += 1;
        }
        let finals: Vec<usize> = keys
            .iter()
            .enumerate()
            .filter(|(_, (states, _))| {
                query.relations.iter().zip(states).all(|(r, &q)| r.automaton.is_final(q))
            })
            .map(|(i, _)| i)
            .collect();
        let full = SyncAutomaton::new(query.alphabet.clone(), m, keys.len(), 0, &finals, trans)?;
        let automaton = trim(&full)?;
        automaton.validate()?;
        Ok(EcrpqPlan { query, automaton })
    }

    pub fn query(&self) -> &EcrpqQuery {
        &self.query
    }

    pub fn automaton(&self) -> &SyncAutomaton {
        &self.automaton
    }

    pub fn tapes(&self) -> usize {
        self.query.atoms.len()
    }
}

/// Drops states that cannot reach a final state, keeping the start.
fn trim(a: &SyncAutomaton) -> Result<SyncAutomaton> {
    let useful = a.useful_states();
    let mut id = vec![usize::MAX; a.num_states()];
    let mut next = 0;
    for q in 0..a.num_states() {
        if useful[q] || q == a.start() {
            id[q] = next;
            next += 1;
        }
    }
    let trans = a
        .transitions()
        .iter()
        .filter(|(p, _, q)| useful[*p] && useful[*q])
        .map(|(p, l, q)| (id[*p], l.clone(), id[*q]))
        .collect();
    let finals: Vec<usize> = (0..a.num_states())
        .filter(|&q| a.is_final(q) && id[q] != usize::MAX)
        .map(|q| id[q])
        .collect();
    SyncAutomaton::new(a.alphabet().clone(), a.arity(), next, id[a.start()], &finals, trans)
}

/// Sorted, deduplicated count-vector indices.
type Counts = Vec<u64>;

fn sum_counts(a: &[u64], b: &[u64], shift: u64) -> Counts {
    let mut out: Counts = a.iter().flat_map(|&x| b.iter().map(move |&y| x + y + shift)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn merge_counts(into: &mut Counts, add: &[u64]) {
    into.extend_from_slice(add);
    into.sort_unstable();
    into.dedup();
}

/// Relations `R_{p,q}(x⃗, y⃗, ℓ⃗)` as counted reachability between nodes
/// `(p, x⃗)` and `(q, y⃗)` of the synchronized product of the plan automaton
/// with the copies. Every step of that product advances some tape along an
/// edge of an acyclic copy, so the product is acyclic too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcrpqState {
    plan: EcrpqPlan,
    n: usize,
    copies: Vec<LabeledGraph>,
    tcs: Vec<TcState>,
    by_state: Vec<Vec<(Letter, usize)>>,
    /// `n^c` for count coordinate `c = tape · k + symbol`.
    weights: Vec<u64>,
    rows: Vec<HashMap<u32, Counts>>,
}

impl EcrpqState {
    /// State for `m` edgeless copies on `n` nodes.
    pub fn new(plan: EcrpqPlan, n: usize) -> Result<EcrpqState> {
        let m = plan.tapes();
        let al = plan.query.alphabet.clone();
        let copies = vec![LabeledGraph::new(n, al, true); m];
        Self::from_copies(plan, copies)
    }

    /// State for the given acyclic copies, one per atom.
    pub fn from_copies(plan: EcrpqPlan, copies: Vec<LabeledGraph>) -> Result<EcrpqState> {
        let m = plan.tapes();
        if copies.len() != m {
            return Err(Error::Invalid(format!("{} copies for {m} atoms", copies.len())));
        }
        let n = copies[0].n();
        let k = plan.query.alphabet.len();
        for g in &copies {
            if g.n() != n || !g.is_directed() || g.alphabet() != &plan.query.alphabet {
                return Err(Error::Invalid(
                    "copies must be directed graphs over one domain and the query alphabet".into(),
                ));
            }
            if !g.is_acyclic() {
                return Err(Error::Invalid("copies must be acyclic".into()));
            }
        }
        let nodes = (plan.automaton.num_states() as u128) * (n as u128).pow(m as u32);
        if nodes > u32::MAX as u128 / 2 || (n as u64).checked_pow((m * k) as u32).is_none() {
            return Err(Error::ComplexityGuard(format!("{nodes} product nodes")));
        }
        let weights = (0..m * k).map(|c| (n as u64).pow(c as u32)).collect();
        let mut by_state = vec![Vec::new(); plan.automaton.num_states()];
        for (p, l, q) in plan.automaton.transitions() {
            by_state[*p].push((l.clone(), *q));
        }
        let tcs = copies.iter().map(|g| closure(g)).collect();
        let mut s = EcrpqState {
            plan,
            n,
            copies,
            tcs,
            by_state,
            weights,
            rows: Vec::new(),
        };
        s.recompute();
        Ok(s)
    }

    pub fn plan(&self) -> &EcrpqPlan {
        &self.plan
    }

    pub fn copies(&self) -> &[LabeledGraph] {
        &self.copies
    }

    fn m(&self) -> usize {
        self.copies.len()
    }

    fn k(&self) -> usize {
        self.plan.query.alphabet.len()
    }

    fn block(&self) -> usize {
        self.n.pow(self.m() as u32)
    }

    fn node(&self, p: usize, xs: &[usize]) -> usize {
        p * self.block() + xs.iter().rev().fold(0, |acc, &x| acc * self.n + x)
    }

    fn decode(&self, id: usize) -> (usize, Vec<usize>) {
        let (p, mut rest) = (id / self.block(), id % self.block());
        let xs = (0..self.m())
            .map(|_| {
                let x = rest % self.n;
                rest /= self.n;
                x
            })
            .collect();
        (p, xs)
    }

    /// Per-atom symbol counts, atom-major.
    pub fn counts(&self, index: u64) -> Vec<usize> {
        let mut rest = index;
        (0..self.weights.len())
            .map(|_| {
                let c = rest % self.n as u64;
                rest /= self.n as u64;
                c as usize
            })
            .collect()
    }

    fn letter_weight(&self, letter: &[Option<Sym>]) -> u64 {
        letter
            .iter()
            .enumerate()
            .filter_map(|(t, s)| s.map(|s| self.weights[t * self.k() + s.index()]))
            .sum()
    }

    /// Product steps out of `(p, xs)` that read `letter`, with tape `fixed`
    /// (if any) forced along the edge `fixed.1 -> fixed.2`.
    fn steps_with(
        &self,
        xs: &[usize],
        letter: &[Option<Sym>],
        fixed: Option<(usize, usize, usize)>,
    ) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for (t, (&x, s)) in xs.iter().zip(letter).enumerate() {
            let targets: Vec<usize> = match (s, fixed) {
                (_, Some((i, u, v))) if i == t => {
                    if x == u {
                        vec![v]
                    } else {
                        vec![]
                    }
                }
                (None, _) => vec![x],
                (Some(s), _) => self.copies[t]
                    .out_edges(x)
                    .filter(|e| e.sym == *s)
                    .map(|e| e.v)
                    .collect(),
            };
            out = out
                .iter()
                .flat_map(|prefix| {
                    targets.iter().map(move |&y| {
                        let mut p = prefix.clone();
                        p.push(y);
                        p
                    })
                })
                .collect();
        }
        out
    }

    fn recompute(&mut self) {
        let total = self.plan.automaton.num_states() * self.block();
        let ranks: Vec<Vec<usize>> = self.copies.iter().map(topo_rank).collect();
        let mut order: Vec<usize> = (0..total).collect();
        let height = |id: usize| {
            let (_, xs) = self.decode(id);
            xs.iter().enumerate().map(|(t, &x)| ranks[t][x]).sum::<usize>()
        };
        order.sort_by_key(|&id| std::cmp::Reverse(height(id)));
        let mut rows: Vec<HashMap<u32, Counts>> = vec![HashMap::new(); total];
        for &a in &order {
            let (p, xs) = self.decode(a);
            let mut row: HashMap<u32, Counts> = HashMap::from([(a as u32, vec![0])]);
            for (letter, q) in &self.by_state[p] {
                let w = self.letter_weight(letter);
                for ys in self.steps_with(&xs, letter, None) {
                    let b = self.node(*q, &ys);
                    for (&t, set) in &rows[b] {
                        let add: Counts = set.iter().map(|c| c + w).collect();
                        merge_counts(row.entry(t).or_default(), &add);
                    }
                }
            }
            rows[a] = row;
        }
        self.rows = rows;
    }

    /// Validates `m` against copy `copy` and returns the new closure.
    fn check(&self, copy: usize, m: &Modification) -> Result<TcState> {
        let g = self
            .copies
            .get(copy)
            .ok_or_else(|| Error::Invalid(format!("copy {copy} out of range")))?;
        self.tcs[copy].update(g, m)
    }

    /// Applies `m` to copy `copy`. On error nothing changes.
    pub fn apply(&mut self, copy: usize, m: &Modification) -> Result<()> {
        let tc = self.check(copy, m)?;
        let present = self.copies[copy].has_edge(m.u, m.sym, m.v);
        match m.kind {
            ModKind::Insert if present => {}
            ModKind::Insert => {
                let additions = self.insertion_delta(copy, m.sym, m.u, m.v);
                for (s, t, add) in additions {
                    merge_counts(self.rows[s].entry(t as u32).or_default(), &add);
                }
                self.copies[copy].apply_mod(m)?;
            }
            ModKind::Delete => {
                self.copies[copy].apply_mod(m)?;
                self.recompute();
            }
        }
        self.tcs[copy] = tc;
        Ok(())
    }

    /// Applies `m` to every copy, the reduction from one queried graph.
    pub fn apply_all(&mut self, m: &Modification) -> Result<()> {
        for (i, g) in self.copies.iter().enumerate() {
            self.tcs[i].update(g, m)?;
        }
        for i in 0..self.m() {
            self.apply(i, m)?;
        }
        Ok(())
    }

    /// Conditions (a)-(d): a run using the new edge splits into an old run
    /// `p → p'` ending at `x⃗'` with `x'_i = u`, one letter step `p' → q'`
    /// moving tape `i` along the new edge and every other tape along an old
    /// edge or not at all (padding), and an old run `q' → q` from `y⃗'`.
    fn insertion_delta(&self, copy: usize, sym: Sym, u: usize, v: usize) -> Vec<(usize, usize, Counts)> {
        let (m, n) = (self.m(), self.n);
        let total = self.rows.len();
        let mut out = Vec::new();
        for (p, moves) in self.by_state.iter().enumerate() {
            for (letter, q) in moves {
                if letter[copy] != Some(sym) {
                    continue;
                }
                let w = self.letter_weight(letter);
                for rest in 0..n.pow(m as u32 - 1) {
                    let mut r = rest;
                    let xs: Vec<usize> = (0..m)
                        .map(|t| {
                            if t == copy {
                                u
                            } else {
                                let x = r % n;
                                r /= n;
                                x
                            }
                        })
                        .collect();
                    let a = self.node(p, &xs) as u32;
                    for ys in self.steps_with(&xs, letter, Some((copy, u, v))) {
                        let b = self.node(*q, &ys);
                        for s in 0..total {
                            let Some(pre) = self.rows[s].get(&a) else { continue };
                            for (&t, post) in &self.rows[b] {
                                out.push((s, t as usize, sum_counts(pre, post, w)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Stored tuples `(p, x⃗, q, y⃗, ℓ⃗)` with atom-major counts.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Vec<usize>, usize, Vec<usize>, Vec<usize>)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(a, row)| {
            let (p, xs) = self.decode(a);
            row.iter().flat_map(move |(&b, set)| {
                let (q, ys) = self.decode(b as usize);
                let xs = xs.clone();
                set.iter()
                    .map(move |&c| (p, xs.clone(), q, ys.clone(), self.counts(c)))
            })
        })
    }

    /// Whether some accepted run starts at `xs` and ends at `ys` with counts
    /// satisfying the constraints.
    pub fn connects(&self, xs: &[usize], ys: &[usize]) -> bool {
        let a = &self.plan.automaton;
        let row = &self.rows[self.node(a.start(), xs)];
        let q = &self.plan.query;
        (0..a.num_states()).filter(|&f| a.is_final(f)).any(|f| {
            row.get(&(self.node(f, ys) as u32)).is_some_and(|set| {
                set.iter().any(|&c| q.constraints.is_empty() || q.constraints_hold(&self.counts(c)))
            })
        })
    }

    /// Head tuples of accepted runs whose counts satisfy the constraints.
    pub fn query(&self) -> Answer {
        let q = &self.plan.query;
        let a = &self.plan.automaton;
        let mut out = Answer::new();
        for rest in 0..self.block() {
            let src = a.start() * self.block() + rest;
            let (_, xs) = self.decode(src);
            for (&b, set) in &self.rows[src] {
                let (f, ys) = self.decode(b as usize);
                if !a.is_final(f) {
                    continue;
                }
                let Some(nu) = assignment(q, &xs, &ys) else { continue };
                let ok = if q.constraints.is_empty() {
                    !set.is_empty()
                } else {
                    set.iter().any(|&c| q.constraints_hold(&self.counts(c)))
                };
                if ok {
                    out.insert(q.head.iter().map(|&h| nu[h].expect("head occurs in an atom")).collect());
                }
            }
        }
        out
    }
}

/// Variable assignment induced by atom endpoints, if consistent.
fn assignment(q: &EcrpqQuery, xs: &[usize], ys: &[usize]) -> Option<Vec<Option<usize>>> {
    let mut nu = vec![None; q.vars.len()];
    for (i, atom) in q.atoms.iter().enumerate() {
        for (var, val) in [(atom.x, xs[i]), (atom.y, ys[i])] {
            match nu[var] {
                Some(w) if w != val => return None,
                _ => nu[var] = Some(val),
            }
        }
    }
    Some(nu)
}

fn closure(g: &LabeledGraph) -> TcState {
    let mut tc = TcState::new(g.n());
    let mut h = LabeledGraph::new(g.n(), g.alphabet().clone(), true);
    for e in g.edges() {
        tc.apply(&mut h, &Modification::insert(e.sym, e.u, e.v))
            .expect("acyclic copy");
    }
    tc
}

/// Position of each node in a topological order.
fn topo_rank(g: &LabeledGraph) -> Vec<usize> {
    let n = g.n();
    let mut indeg = vec![0usize; n];
    for e in g.edges() {
        indeg[e.v] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
    let mut rank = vec![0; n];
    let mut next = 0;
    while let Some(x) = ready.pop() {
        rank[x] = next;
        next += 1;
        for e in g.out_edges(x) {
            indeg[e.v] -= 1;
            if indeg[e.v] == 0 {
                ready.push(e.v);
            }
        }
    }
    rank
}

/// Word automaton of one atom: the product of its unary relations, or the
/// universal automaton when it has none.
#[derive(Debug, Clone, PartialEq, Eq)]
struct AtomAutomaton {
    num_states: usize,
    start: usize,
    finals: Vec<bool>,
    trans: Vec<(usize, Sym, usize)>,
}

impl AtomAutomaton {
    fn build(query: &EcrpqQuery, atom: usize) -> AtomAutomaton {
        let rels: Vec<&SyncAutomaton> = query
            .relations
            .iter()
            .filter(|r| r.paths == [atom])
            .map(|r| &r.automaton)
            .collect();
        let start: Vec<usize> = rels.iter().map(|a| a.start()).collect();
        let mut ids = HashMap::from([(start.clone(), 0)]);
        let mut keys = vec![start];
        let mut trans = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let states = keys[i].clone();
            for s in query.alphabet.symbols() {
                let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
                for (a, &q) in rels.iter().zip(&states) {
                    let targets: Vec<usize> = a
                        .transitions()
                        .iter()
                        .filter(|(p, l, _)| *p == q && l[0] == Some(s))
                        .map(|t| t.2)
                        .collect();
                    succ = succ
                        .iter()
                        .flat_map(|pre| {
                            targets.iter().map(move |&t| {
                                let mut v = pre.clone();
                                v.push(t);
                                v
                            })
                        })
                        .collect();
                }
                for key in succ {
                    let id = *ids.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        keys.len() - 1
                    });
                    trans.push((i, s, id));
                }
            }
            i += 1;
        }
        let finals = keys
            .iter()
            .map(|states| rels.iter().zip(states).all(|(a, &q)| a.is_final(q)))
            .collect();
        AtomAutomaton {
            num_states: keys.len(),
            start: 0,
            finals,
            trans,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AtomState {
    automaton: AtomAutomaton,
    parikh: ParikhState,
}

/// CRPQ with linear constraints under insertions, with witness paths of at
/// most `Lmax` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrpqState {
    query: EcrpqQuery,
    graph: LabeledGraph,
    lmax: usize,
    atoms: Vec<AtomState>,
}

impl CrpqState {
    /// State for `graph`, which is replayed edge by edge. `lmax` defaults to
    /// `(n · max_j |Q_j|)²`.
    pub fn new(query: EcrpqQuery, graph: &LabeledGraph, lmax: Option<usize>) -> Result<CrpqState> {
        if let Some(r) = query.relations.iter().find(|r| r.paths.len() != 1) {
            return Err(Error::Invalid(format!(
                "conjunctive queries take unary relations only, got arity {}",
                r.paths.len()
            )));
        }
        if graph.alphabet() != &query.alphabet {
            return Err(Error::Invalid("graph and query alphabets differ".into()));
        }
        for r in &query.relations {
            r.automaton.validate()?;
        }
        let automata: Vec<AtomAutomaton> =
            (0..query.atoms.len()).map(|i| AtomAutomaton::build(&query, i)).collect();
        let n = graph.n();
        let qmax = automata.iter().map(|a| a.num_states).max().unwrap_or(1);
        let lmax = lmax.unwrap_or((n * qmax).pow(2));
        let k = query.alphabet.len();
        let atoms = automata
            .into_iter()
            .map(|a| {
                let parikh = ParikhState::new(n * a.num_states, k, lmax)?;
                Ok(AtomState { automaton: a, parikh })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = CrpqState {
            query,
            graph: LabeledGraph::new(n, graph.alphabet().clone(), graph.is_directed()),
            lmax,
            atoms,
        };
        for e in graph.edges() {
            if graph.is_directed() || e.u <= e.v {
                s.apply(&Modification::insert(e.sym, e.u, e.v))?;
            }
        }
        Ok(s)
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn apply(&mut self, m: &Modification) -> Result<()> {
        if !m.is_insert() {
            return Err(Error::UnsupportedModification(
                "conjunctive queries with constraints support insertions only".into(),
            ));
        }
        if !self.graph.apply_mod(m)? {
            return Ok(());
        }
        let mut arcs = vec![(m.u, m.v)];
        if !self.graph.is_directed() && m.u != m.v {
            arcs.push((m.v, m.u));
        }
        for atom in &mut self.atoms {
            let qn = atom.automaton.num_states;
            for &(p, s, q) in &atom.automaton.trans {
                if s != m.sym {
                    continue;
                }
                for &(u, v) in &arcs {
                    atom.parikh = atom.parikh.inserted(s.index(), u * qn + p, v * qn + q);
                }
            }
        }
        Ok(())
    }

    /// `(x, y) ↦` Parikh vectors of accepted paths, for atom `i`.
    fn table(&self, i: usize) -> HashMap<(usize, usize), Vec<Vec<usize>>> {
        let atom = &self.atoms[i];
        let a = &atom.automaton;
        let n = self.graph.n();
        let mut out: HashMap<(usize, usize), Vec<Vec<usize>>> = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                let mut vs: Vec<Vec<usize>> = (0..a.num_states)
                    .filter(|&f| a.finals[f])
                    .flat_map(|f| {
                        atom.parikh
                            .vectors(x * a.num_states + a.start, y * a.num_states + f)
                    })
                    .collect();
                if !vs.is_empty() {
                    vs.sort();
                    vs.dedup();
                    out.insert((x, y), vs);
                }
            }
        }
        out
    }

    pub fn query(&self) -> Answer {
        let tables: Vec<_> = (0..self.atoms.len()).map(|i| self.table(i)).collect();
        let mut out = Answer::new();
        let mut nu = vec![None; self.query.vars.len()];
        self.join(&tables, 0, &mut nu, &mut Vec::new(), &mut out);
        out
    }

    fn join(
        &self,
        tables: &[HashMap<(usize, usize), Vec<Vec<usize>>>],
        i: usize,
        nu: &mut Vec<Option<usize>>,
        counts: &mut Vec<usize>,
        out: &mut Answer,
    ) {
        let q = &self.query;
        if i == tables.len() {
            if q.constraints_hold(counts) {
                out.insert(q.head.iter().map(|&h| nu[h].expect("head occurs in an atom")).collect());
            }
            return;
        }
        let atom = &q.atoms[i];
        for (&(x, y), vectors) in &tables[i] {
            let saved = (nu[atom.x], nu[atom.y]);
            if saved.0.is_some_and(|v| v != x) {
                continue;
            }
            nu[atom.x] = Some(x);
            if nu[atom.y].is_some_and(|v| v != y) {
                nu[atom.x] = saved.0;
                continue;
            }
            nu[atom.y] = Some(y);
            if q.constraints.is_empty() {
                // counts are irrelevant: one witness per pair suffices
                counts.extend_from_slice(&vectors[0]);
                self.join(tables, i + 1, nu, counts, out);
                counts.truncate(counts.len() - vectors[0].len());
            } else {
                for v in vectors {
                    counts.extend_from_slice(v);
                    self.join(tables, i + 1, nu, counts, out);
                    counts.truncate(counts.len() - v.len());
                }
            }
            nu[atom.x] = saved.0;
            nu[atom.y] = saved.1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Alphabet;
    use crate::specs::{Constraint, Dfa, PathAtom, RelAtom};

    fn eqlen_query(al: &Alphabet) -> EcrpqQuery {
        EcrpqQuery::new(
            al.clone(),
            vec!["x1".into(), "y1".into(), "x2".into(), "y2".into()],
            vec![0, 1, 2, 3],
            vec![
                PathAtom { x: 0, path: "p1".into(), y: 1 },
                PathAtom { x: 2, path: "p2".into(), y: 3 },
            ],
            vec![RelAtom { automaton: SyncAutomaton::equal_length(al), paths: vec![0, 1] }],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn eqlen_chains() {
        let al = Alphabet::letters("ab");
        let plan = EcrpqPlan::compile(eqlen_query(&al)).unwrap();
        let mut s = EcrpqState::new(plan, 4).unwrap();
        s.apply(0, &Modification::insert(Sym(0), 0, 1)).unwrap();
        s.apply(0, &Modification::insert(Sym(0), 1, 2)).unwrap();
        s.apply(1, &Modification::insert(Sym(1), 0, 1)).unwrap();
        s.apply(1, &Modification::insert(Sym(1), 1, 2)).unwrap();
        assert!(s.query().contains(&vec![0, 2, 0, 2]));
        s.apply(1, &Modification::insert(Sym(1), 2, 3)).unwrap();
        assert!(!s.query().contains(&vec![0, 2, 0, 3]));
        s.apply(0, &Modification::delete(Sym(0), 1, 2)).unwrap();
        assert!(!s.query().contains(&vec![0, 2, 0, 2]));
        assert!(s.query().contains(&vec![0, 1, 1, 2]));
    }

    #[test]
    fn plan_of_eqlen_and_language() {
        let al = Alphabet::letters("ab");
        let mut q = eqlen_query(&al);
        let dfa = Dfa::from_regex(&al, "a*").unwrap();
        q.relations.push(RelAtom { automaton: SyncAutomaton::from_dfa(&dfa), paths: vec![0] });
        let plan = EcrpqPlan::compile(q).unwrap();
        let w = |s: &str| s.bytes().map(|b| Sym((b - b'a') as u16)).collect::<Vec<_>>();
        assert!(plan.automaton().accepts(&[w("aa"), w("bb")]));
        assert!(!plan.automaton().accepts(&[w("ab"), w("bb")]));
        assert!(!plan.automaton().accepts(&[w("aa"), w("b")]));
    }

    #[test]
    fn constraint_on_empty_graph() {
        let al = Alphabet::letters("ab");
        let mut q = eqlen_query(&al);
        q.constraints.push(Constraint { coeffs: vec![1, 0, 0, 0], bound: 1 });
        let s = EcrpqState::new(EcrpqPlan::compile(q).unwrap(), 3).unwrap();
        assert!(s.query().is_empty());
        let s = EcrpqState::new(EcrpqPlan::compile(eqlen_query(&al)).unwrap(), 3).unwrap();
        assert_eq!(s.query().len(), 9);
    }

    fn crpq_query(al: &Alphabet, regex: &str, constraints: Vec<Constraint>) -> EcrpqQuery {
        let dfa = Dfa::from_regex(al, regex).unwrap();
        EcrpqQuery::new(
            al.clone(),
            vec!["x".into(), "y".into()],
            vec![0, 1],
            vec![PathAtom { x: 0, path: "p".into(), y: 1 }],
            vec![RelAtom { automaton: SyncAutomaton::from_dfa(&dfa), paths: vec![0] }],
            constraints,
        )
        .unwrap()
    }

    #[test]
    fn crpq_balanced_counts() {
        let al = Alphabet::letters("ab");
        let eq = vec![
            Constraint { coeffs: vec![1, -1], bound: 0 },
            Constraint { coeffs: vec![-1, 1], bound: 0 },
        ];
        let q = crpq_query(&al, "a*b*", eq);
        let mut g = LabeledGraph::new(4, al.clone(), true);
        g.apply_mod(&Modification::insert(Sym(0), 0, 1)).unwrap();
        g.apply_mod(&Modification::insert(Sym(1), 1, 2)).unwrap();
        let mut s = CrpqState::new(q, &g, Some(6)).unwrap();
        assert!(s.query().contains(&vec![0, 2]));
        s.apply(&Modification::insert(Sym(1), 2, 3)).unwrap();
        assert!(!s.query().contains(&vec![0, 3]));
        assert!(s.query().contains(&vec![3, 3]));
        assert!(matches!(
            s.apply(&Modification::delete(Sym(1), 2, 3)),
            Err(Error::UnsupportedModification(_))
        ));
    }
}
