//! Context-free path queries on acyclic graphs.
//!
//! For variables `X`, `Y` of a CNF grammar, `R_{X→Y}` holds `(x1, y1, x2, y2)`
//! iff `X ⇒* s1 Y s2` for words `s1`, `s2` labeling paths `x1 → y1` and
//! `x2 → y2`. Each relation is stored as an `n² × n²` bit matrix with row
//! `(x1, y2)` and column `(y1, x2)`, so that chaining `R_{X→Y}` with
//! `R_{Y→Z}` is a boolean matrix product.
//!
//! Updates use derived relations in which one or two holes are "pinned": the
//! hole derives a word whose path crosses a given set of edges `E*`. For an
//! insertion `E*` is the new edge; for a deletion it is the set of edges
//! `(z, z')` that leave the region reaching `u` without being the deleted
//! edge, which every surviving path through that region must use.

use std::collections::BTreeSet;

use crate::bits::{BitMatrix, BitSet};
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, ModKind, Modification, Sym, TcState};
use crate::oracle::PairSet;
use crate::specs::CnfGrammar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CflState {
    grammar: CnfGrammar,
    graph: LabeledGraph,
    tc: TcState,
    rel: Vec<BitMatrix>,
}

struct Derived {
    left: Vec<BitMatrix>,
    right: Vec<BitMatrix>,
    both: Vec<BitMatrix>,
}

impl CflState {
    /// State for the edgeless directed graph on `n` nodes.
    pub fn new(grammar: CnfGrammar, n: usize) -> CflState {
        let graph = LabeledGraph::new(n, grammar.alphabet().clone(), true);
        let v = grammar.num_vars();
        let rel = (0..v * v)
            .map(|i| {
                if i / v == i % v {
                    BitMatrix::identity(n * n)
                } else {
                    BitMatrix::new(n * n, n * n)
                }
            })
            .collect();
        CflState {
            tc: TcState::new(n),
            grammar,
            graph,
            rel,
        }
    }

    /// Builds the state for `g` by inserting its edges one at a time.
    pub fn from_graph(grammar: CnfGrammar, g: &LabeledGraph) -> Result<CflState> {
        if !g.is_directed() {
            return Err(Error::Invalid("context-free path queries need a directed graph".into()));
        }
        if g.alphabet() != grammar.alphabet() {
            return Err(Error::Invalid("grammar and graph alphabets differ".into()));
        }
        let mut s = CflState::new(grammar, g.n());
        for e in g.edges() {
            s.apply(&Modification::insert(e.sym, e.u, e.v))?;
        }
        Ok(s)
    }

    pub fn grammar(&self) -> &CnfGrammar {
        &self.grammar
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn tc(&self) -> &TcState {
        &self.tc
    }

    fn n(&self) -> usize {
        self.graph.n()
    }

    fn m(&self, x: usize, y: usize) -> &BitMatrix {
        &self.rel[x * self.grammar.num_vars() + y]
    }

    /// Membership of `(x1, y1, x2, y2)` in `R_{X→Y}`.
    pub fn contains(&self, x: usize, y: usize, t: [usize; 4]) -> bool {
        let n = self.n();
        self.m(x, y).contains(t[0] * n + t[3], t[2] * n + t[1])
    }

    /// All tuples `(x1, y1, x2, y2)` of `R_{X→Y}`.
    pub fn relation(&self, x: usize, y: usize) -> Vec<[usize; 4]> {
        let n = self.n();
        self.m(x, y)
            .entries()
            .map(|(r, c)| [r / n, c / n, c % n, r % n])
            .collect()
    }

    /// The derived relation `R_{X→Y1,…,Yk}` for `k ≤ 3`, as flat tuples
    /// `(a1, b1, …, a_{k+1}, b_{k+1})`: `X ⇒* s1 Y1 s2 … Yk s_{k+1}` with an
    /// `s_i`-path from `a_i` to `b_i`. Computed from the stored relations only,
    /// by guessing the rule at the lowest common ancestor of the holes.
    pub fn derived(&self, x: usize, ys: &[usize]) -> Result<BTreeSet<Vec<usize>>> {
        if ys.is_empty() || ys.len() > 3 {
            return Err(Error::ArityUnsupported(ys.len()));
        }
        Ok(self.derived_rec(x, ys))
    }

    fn derived_rec(&self, x: usize, ys: &[usize]) -> BTreeSet<Vec<usize>> {
        if let [y] = ys {
            return self
                .relation(x, *y)
                .into_iter()
                .map(|t| t.to_vec())
                .collect();
        }
        let mut out = BTreeSet::new();
        for &(u, a, b) in self.grammar.binary_rules() {
            let top = self.relation(x, u);
            if top.is_empty() {
                continue;
            }
            for split in 1..ys.len() {
                let left = self.derived_rec(a, &ys[..split]);
                let right = self.derived_rec(b, &ys[split..]);
                for t in &top {
                    // t = (x1, c1, c3, y_last)
                    for l in left.iter().filter(|l| l[0] == t[1]) {
                        let c2 = l[l.len() - 1];
                        for r in right.iter().filter(|r| r[0] == c2 && r[r.len() - 1] == t[2]) {
                            let mut tuple = vec![t[0]];
                            tuple.extend_from_slice(&l[1..l.len() - 1]);
                            tuple.extend_from_slice(&r[1..r.len() - 1]);
                            tuple.push(t[3]);
                            out.insert(tuple);
                        }
                    }
                }
            }
        }
        out
    }

    /// `Pin_A[c][c']`: `A` derives a word labeling a path `c → c'` that
    /// crosses one of `edges` at a terminal produced by a rule `A' → τ`.
    fn pinned(&self, edges: &[(usize, Sym, usize)]) -> Vec<BitMatrix> {
        let n = self.n();
        let v = self.grammar.num_vars();
        let mut cols = vec![BitSet::new(n * n); v];
        for &(p, tau, q) in edges {
            for &(a2, t) in self.grammar.terminal_rules() {
                if t == tau {
                    cols[a2].insert(p * n + q);
                }
            }
        }
        let mut pins = vec![BitMatrix::new(n, n); v];
        for (a, pin) in pins.iter_mut().enumerate() {
            for (a2, col) in cols.iter().enumerate() {
                if col.is_empty() {
                    continue;
                }
                for (r, row) in self.m(a, a2).rows().enumerate() {
                    if row.intersects(col) {
                        pin.insert(r / n, r % n);
                    }
                }
            }
        }
        pins
    }

    fn derived_pinned(&self, pins: &[BitMatrix]) -> Derived {
        let n = self.n();
        let v = self.grammar.num_vars();
        let empty = || vec![BitMatrix::new(n * n, n * n); v * v];
        let mut kl = empty();
        let mut kr = empty();
        for &(u, a, b) in self.grammar.binary_rules() {
            for y in 0..v {
                if !pins[a].is_empty() {
                    left_join(&mut kl[u * v + y], &pins[a], self.m(b, y), n);
                }
                if !pins[b].is_empty() {
                    right_join(&mut kr[u * v + y], self.m(a, y), &pins[b], n);
                }
            }
        }
        let left = self.close_under_context(&kl);
        let right = self.close_under_context(&kr);
        let mut k3 = empty();
        for &(w, w1, w2) in self.grammar.binary_rules() {
            for y in 0..v {
                if !pins[w2].is_empty() {
                    right_join(&mut k3[w * v + y], &left[w1 * v + y], &pins[w2], n);
                }
                if !pins[w1].is_empty() {
                    left_join(&mut k3[w * v + y], &pins[w1], &right[w2 * v + y], n);
                }
            }
        }
        let both = self.close_under_context(&k3);
        Derived { left, right, both }
    }

    /// `D[X][Y] = ∪_U R_{X→U} · K[U][Y]`.
    fn close_under_context(&self, k: &[BitMatrix]) -> Vec<BitMatrix> {
        let n = self.n();
        let v = self.grammar.num_vars();
        let mut out = vec![BitMatrix::new(n * n, n * n); v * v];
        for x in 0..v {
            for u in 0..v {
                let top = self.m(x, u);
                if top.is_empty() {
                    continue;
                }
                for y in 0..v {
                    let ku = &k[u * v + y];
                    if !ku.is_empty() {
                        out[x * v + y].union_product(top, ku);
                    }
                }
            }
        }
        out
    }

    fn check(&self, m: &Modification) -> Result<()> {
        self.graph.check_mod(m)
    }

    /// The state after `m`, computed from this one.
    pub fn updated(&self, m: &Modification) -> Result<CflState> {
        self.check(m)?;
        let (u, v) = (m.u, m.v);
        let next_tc = self.tc.update(&self.graph, m)?;
        let mut next_graph = self.graph.clone();
        match m.kind {
            ModKind::Insert => {
                if self.graph.has_edge(u, m.sym, v) {
                    return Ok(self.clone());
                }
                let pins = self.pinned(&[(u, m.sym, v)]);
                let d = self.derived_pinned(&pins);
                let mut rel = self.rel.clone();
                for (i, r) in rel.iter_mut().enumerate() {
                    r.union_with(&d.left[i]);
                    r.union_with(&d.right[i]);
                    r.union_with(&d.both[i]);
                }
                next_graph.apply_mod(m)?;
                Ok(CflState {
                    grammar: self.grammar.clone(),
                    graph: next_graph,
                    tc: next_tc,
                    rel,
                })
            }
            ModKind::Delete => {
                next_graph.apply_mod(m)?;
                let t = &self.tc;
                let escapes: Vec<(usize, Sym, usize)> = self
                    .graph
                    .edges()
                    .filter(|e| (e.u, e.sym, e.v) != (u, m.sym, v))
                    .filter(|e| t.contains(e.u, u) && !t.contains(e.v, u))
                    .map(|e| (e.u, e.sym, e.v))
                    .collect();
                let pins = self.pinned(&escapes);
                let d = self.derived_pinned(&pins);
                let rel = self.recombine(&d, u, v);
                Ok(CflState {
                    grammar: self.grammar.clone(),
                    graph: next_graph,
                    tc: next_tc,
                    rel,
                })
            }
        }
    }

    /// Case split on whether each of the two paths of a tuple could have
    /// crossed the deleted edge: `P(x, y) = T(x, u) ∧ T(v, y)`.
    fn recombine(&self, d: &Derived, u: usize, v: usize) -> Vec<BitMatrix> {
        let n = self.n();
        let t = &self.tc;
        let reaches_u: Vec<bool> = (0..n).map(|x| t.contains(x, u)).collect();
        let from_v: Vec<bool> = (0..n).map(|y| t.contains(v, y)).collect();
        // masks[r1][r2][s1][s2]: columns (y1, x2) where P(x1, y1) == s1 and
        // P(x2, y2) == s2, given r1 = T(x1, u) and r2 = T(v, y2)
        let mut masks = vec![BitSet::new(n * n); 16];
        for y1 in 0..n {
            for x2 in 0..n {
                let col = y1 * n + x2;
                for r1 in 0..2 {
                    for r2 in 0..2 {
                        let s1 = r1 == 1 && from_v[y1];
                        let s2 = r2 == 1 && reaches_u[x2];
                        masks[(r1 * 2 + r2) * 4 + usize::from(s1) * 2 + usize::from(s2)].insert(col);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.rel.len());
        for (i, old) in self.rel.iter().enumerate() {
            let sources = [old, &d.right[i], &d.left[i], &d.both[i]];
            let mut next = BitMatrix::new(n * n, n * n);
            for row in 0..n * n {
                let (x1, y2) = (row / n, row % n);
                let base = (usize::from(reaches_u[x1]) * 2 + usize::from(from_v[y2])) * 4;
                let dst = next.row_mut(row);
                for (s, src) in sources.iter().enumerate() {
                    let mut part = src.row(row).clone();
                    part.intersect_with(&masks[base + s]);
                    dst.union_with(&part);
                }
            }
            out.push(next);
        }
        out
    }

    /// Validates `m` and applies it; on error the state is unchanged.
    pub fn apply(&mut self, m: &Modification) -> Result<()> {
        *self = self.updated(m)?;
        Ok(())
    }

    /// Pairs joined by a path whose label the grammar derives.
    pub fn query(&self) -> PairSet {
        let n = self.n();
        let v = self.grammar.num_vars();
        let s = self.grammar.start();
        let mut ends = vec![BitSet::new(n * n); v];
        for e in self.graph.edges() {
            for &(a, t) in self.grammar.terminal_rules() {
                if t == e.sym {
                    ends[a].insert(e.u * n + e.v);
                }
            }
        }
        let mut out = PairSet::new();
        if self.grammar.derives_empty() {
            out.extend((0..n).map(|x| (x, x)));
        }
        for (a, end) in ends.iter().enumerate() {
            if end.is_empty() {
                continue;
            }
            for (row, bits) in self.m(s, a).rows().enumerate() {
                if bits.intersects(end) {
                    out.insert((row / n, row % n));
                }
            }
        }
        out
    }
}

/// `K[(c1, c3)] |= ∪ { R[(c2, c3)] : pin(c1, c2) }`.
fn left_join(k: &mut BitMatrix, pin: &BitMatrix, r: &BitMatrix, n: usize) {
    if r.is_empty() {
        return;
    }
    for c1 in 0..n {
        for c2 in pin.row(c1).iter() {
            for c3 in 0..n {
                let src = r.row(c2 * n + c3);
                if !src.is_empty() {
                    k.row_mut(c1 * n + c3).union_with(src);
                }
            }
        }
    }
}

/// `K[(c1, c3)] |= ∪ { R[(c1, c2)] : pin(c2, c3) }`.
fn right_join(k: &mut BitMatrix, r: &BitMatrix, pin: &BitMatrix, n: usize) {
    if r.is_empty() {
        return;
    }
    for c2 in 0..n {
        for c3 in pin.row(c2).iter() {
            for c1 in 0..n {
                let src = r.row(c1 * n + c2);
                if !src.is_empty() {
                    k.row_mut(c1 * n + c3).union_with(src);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Alphabet;
    use crate::oracle;

    fn grammar(text: &str, al: &str) -> CnfGrammar {
        CnfGrammar::parse(text, &Alphabet::letters(al)).unwrap()
    }

    fn anbn() -> CnfGrammar {
        grammar("start S\nrule S -> a S b\nrule S -> eps\n", "ab")
    }

    fn ins(s: &mut CflState, a: u16, u: usize, v: usize) {
        s.apply(&Modification::insert(Sym(a), u, v)).unwrap();
    }

    #[test]
    fn init_relations() {
        let g = grammar("start S\nrule S -> S S\nrule S -> a S b\nrule S -> eps\n", "ab");
        let s = CflState::new(g.clone(), 2);
        for x in 0..g.num_vars() {
            assert_eq!(s.relation(x, x).len(), 4);
        }
        let q: PairSet = [(0, 0), (1, 1)].into();
        assert_eq!(s.query(), q);
        assert!(CflState::new(grammar("start S\nrule S -> a\n", "a"), 2).query().is_empty());
    }

    #[test]
    fn anbn_chain_then_delete() {
        let mut s = CflState::new(anbn(), 5);
        for (a, u, v) in [(0, 0, 1), (0, 1, 2), (1, 2, 3), (1, 3, 4)] {
            ins(&mut s, a, u, v);
        }
        let q = s.query();
        assert!(q.contains(&(0, 4)) && q.contains(&(1, 3)));
        assert_eq!(q, oracle::cfl(s.graph(), s.grammar()));
        s.apply(&Modification::delete(Sym(1), 2, 3)).unwrap();
        let diag: PairSet = (0..5).map(|x| (x, x)).collect();
        assert_eq!(s.query(), diag);
    }

    #[test]
    fn derived_k1_is_stored_relation() {
        let mut s = CflState::new(anbn(), 3);
        ins(&mut s, 0, 0, 1);
        ins(&mut s, 1, 1, 2);
        let v = s.grammar().num_vars();
        for x in 0..v {
            for y in 0..v {
                let d = s.derived(x, &[y]).unwrap();
                let r: BTreeSet<Vec<usize>> =
                    s.relation(x, y).into_iter().map(|t| t.to_vec()).collect();
                assert_eq!(d, r);
            }
        }
        assert!(matches!(s.derived(0, &[0, 0, 0, 0]), Err(Error::ArityUnsupported(4))));
    }

    #[test]
    fn derived_k2_simple_rule() {
        let g = grammar("start S\nrule S -> A B\nrule A -> a\nrule B -> b\n", "ab");
        let mut s = CflState::new(g.clone(), 3);
        ins(&mut s, 0, 0, 1);
        ins(&mut s, 1, 1, 2);
        let var = |name: &str| (0..g.num_vars()).find(|&x| g.var_name(x) == name).unwrap();
        let d = s.derived(var("S"), &[var("A"), var("B")]).unwrap();
        assert!(d.contains(&vec![0, 0, 1, 1, 2, 2]));
        assert!(!d.contains(&vec![0, 1, 1, 1, 2, 2]));
    }

    #[test]
    fn cycle_rejected_state_unchanged() {
        let mut s = CflState::new(anbn(), 3);
        ins(&mut s, 0, 0, 1);
        ins(&mut s, 0, 1, 2);
        let before = s.clone();
        assert_eq!(
            s.apply(&Modification::insert(Sym(1), 2, 0)),
            Err(Error::CycleWouldForm { u: 2, v: 0 })
        );
        assert_eq!(s, before);
        assert!(matches!(
            s.apply(&Modification::delete(Sym(1), 0, 1)),
            Err(Error::DeleteAbsentEdge { .. })
        ));
    }

    #[test]
    fn parallel_chains_survive_delete() {
        let al = Alphabet::new(["(", ")"]).unwrap();
        let g = CnfGrammar::parse("start S\nrule S -> S S\nrule S -> ( S )\nrule S -> eps\n", &al)
            .unwrap();
        let mut s = CflState::new(g, 6);
        // 0 ( 1 ) 5 and 0 ( 2 ( 3 ) 4 ) 5 plus shortcut
        for (a, u, v) in [(0, 0, 1), (1, 1, 5), (0, 0, 2), (1, 2, 5)] {
            ins(&mut s, a, u, v);
        }
        assert!(s.query().contains(&(0, 5)));
        s.apply(&Modification::delete(Sym(1), 1, 5)).unwrap();
        assert!(s.query().contains(&(0, 5)));
        assert_eq!(s.query(), oracle::cfl(s.graph(), s.grammar()));
        s.apply(&Modification::delete(Sym(0), 0, 2)).unwrap();
        assert!(!s.query().contains(&(0, 5)));
    }
}
