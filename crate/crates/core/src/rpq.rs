//! Regular path queries under edge insertions.
//!
//! For a DFA with states `Q`, the state keeps one relation `R_{p,q}` per
//! state pair: `(x, y) ∈ R_{p,q}` iff some path from `x` to `y` reads a word
//! that takes the automaton from `p` to `q`. An insertion of `(u, σ, v)` is
//! handled by the bounded recurrence `φ^i` over paths that revisit `u` at most
//! `i` times; `i = |Q|` suffices because a longer witness repeats a state at
//! `u` and can be shortened.

use crate::bits::{BitMatrix, BitSet};
use crate::error::{Error, Result};
use crate::graph::{Modification, Sym};
use crate::oracle::PairSet;
use crate::specs::Dfa;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RpqState {
    dfa: Dfa,
    n: usize,
    rel: Vec<BitMatrix>,
}

/// A `|Q| × |Q|` boolean matrix over automaton states.
pub type StateMatrix = Vec<Vec<bool>>;

impl RpqState {
    /// State for the empty graph: only the empty path at every node.
    pub fn new(dfa: Dfa, n: usize) -> RpqState {
        let qn = dfa.num_states();
        let rel = (0..qn * qn)
            .map(|i| {
                if i / qn == i % qn {
                    BitMatrix::identity(n)
                } else {
                    BitMatrix::new(n, n)
                }
            })
            .collect();
        RpqState { dfa, n, rel }
    }

    /// State with arbitrary relations; `rels[p * |Q| + q]` is `R_{p,q}`.
    /// The relations need not describe any graph, which is what the locality
    /// tests rely on.
    pub fn from_relations(dfa: Dfa, n: usize, rels: Vec<BitMatrix>) -> Result<RpqState> {
        let qn = dfa.num_states();
        if rels.len() != qn * qn
            || rels.iter().any(|r| r.num_rows() != n || r.num_cols() != n)
        {
            return Err(Error::Invalid("relation shapes do not match the automaton".into()));
        }
        Ok(RpqState { dfa, n, rel: rels })
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relation(&self, p: usize, q: usize) -> &BitMatrix {
        &self.rel[p * self.dfa.num_states() + q]
    }

    #[inline]
    fn r(&self, p: usize, q: usize, x: usize, y: usize) -> bool {
        self.rel[p * self.dfa.num_states() + q].contains(x, y)
    }

    /// `φ^i` for the pending insertion of `(u, σ, v)`: entry `[p][q]` holds
    /// iff a path from `u` to `v` in the new graph, passing through `u` at
    /// most `i` times, reads a word from `p` to `q`.
    pub fn phi(&self, sym: Sym, u: usize, v: usize, i: usize) -> StateMatrix {
        let qn = self.dfa.num_states();
        let base: StateMatrix = (0..qn)
            .map(|p| {
                (0..qn)
                    .map(|q| self.dfa.step(p, sym) == q || self.r(p, q, u, v))
                    .collect()
            })
            .collect();
        let back: StateMatrix = (0..qn)
            .map(|p| (0..qn).map(|q| self.r(p, q, v, u)).collect())
            .collect();
        let mut cur = base.clone();
        for _ in 1..i {
            let mut next = cur.clone();
            for p in 0..qn {
                for p2 in (0..qn).filter(|&p2| base[p][p2]) {
                    for q2 in (0..qn).filter(|&q2| back[p2][q2]) {
                        for q in 0..qn {
                            next[p][q] |= cur[q2][q];
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// The updated membership of `(x, y)` in `R_{p,q}` after inserting
    /// `(u, σ, v)`. Reads only pairs over `{x, y, u, v}`.
    pub fn inserted_entry(&self, sym: Sym, u: usize, v: usize, p: usize, q: usize, x: usize, y: usize) -> bool {
        if self.r(p, q, x, y) {
            return true;
        }
        let qn = self.dfa.num_states();
        let phi = self.phi(sym, u, v, qn);
        (0..qn).any(|p2| {
            self.r(p, p2, x, u)
                && (0..qn).any(|q2| phi[p2][q2] && self.r(q2, q, v, y))
        })
    }

    /// Next state after inserting `(u, σ, v)`, computed from this one.
    pub fn inserted(&self, sym: Sym, u: usize, v: usize) -> RpqState {
        let qn = self.dfa.num_states();
        let phi = self.phi(sym, u, v, qn);
        // column u and row v of every relation, read before any write
        let into_u: Vec<BitSet> = self.rel.iter().map(|r| r.column(u)).collect();
        let from_v: Vec<BitSet> = self.rel.iter().map(|r| r.row(v).clone()).collect();
        let mut next = self.clone();
        for p in 0..qn {
            for q in 0..qn {
                let dst = &mut next.rel[p * qn + q];
                for p2 in 0..qn {
                    let xs = &into_u[p * qn + p2];
                    if xs.is_empty() {
                        continue;
                    }
                    let mut ys = BitSet::new(self.n);
                    for q2 in (0..qn).filter(|&q2| phi[p2][q2]) {
                        ys.union_with(&from_v[q2 * qn + q]);
                    }
                    if ys.is_empty() {
                        continue;
                    }
                    for x in xs.iter() {
                        dst.row_mut(x).union_with(&ys);
                    }
                }
            }
        }
        next
    }

    /// Applies an insertion; deletions are rejected.
    pub fn apply(&mut self, m: &Modification) -> Result<()> {
        if !m.is_insert() {
            return Err(Error::UnsupportedModification(
                "regular path queries are maintained under insertions only".into(),
            ));
        }
        self.check(m)?;
        *self = self.inserted(m.sym, m.u, m.v);
        Ok(())
    }

    fn check(&self, m: &Modification) -> Result<()> {
        for x in [m.u, m.v] {
            if x >= self.n {
                return Err(Error::NodeOutOfRange { node: x, n: self.n });
            }
        }
        if m.sym.index() >= self.dfa.alphabet().len() {
            return Err(Error::UnknownSymbol(format!("#{}", m.sym.0)));
        }
        Ok(())
    }

    /// `∪_{f ∈ F} R_{s,f}`.
    pub fn query(&self) -> PairSet {
        let mut acc = BitMatrix::new(self.n, self.n);
        for f in self.dfa.finals() {
            acc.union_with(self.relation(self.dfa.start(), f));
        }
        acc.entries().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Alphabet;

    fn state(re: &str, n: usize) -> RpqState {
        RpqState::new(Dfa::from_regex(&Alphabet::letters("ab"), re).unwrap(), n)
    }

    fn ins(s: &mut RpqState, a: u16, u: usize, v: usize) {
        s.apply(&Modification::insert(Sym(a), u, v)).unwrap();
    }

    #[test]
    fn init_is_epsilon_only() {
        let s = state("a*", 3);
        assert_eq!(s.relation(0, 0).count(), 3);
        assert_eq!(s.query().len(), 3);
        assert!(state("a", 3).query().is_empty());
    }

    #[test]
    fn a_star_chain() {
        let mut s = state("a*", 3);
        ins(&mut s, 0, 0, 1);
        ins(&mut s, 0, 1, 2);
        let expect: PairSet = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)].into();
        assert_eq!(s.query(), expect);
    }

    #[test]
    fn aaa_triangle_any_order() {
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            let edges = [(0, 1), (1, 2), (2, 0)];
            let mut s = state("aaa", 3);
            for i in order {
                ins(&mut s, 0, edges[i].0, edges[i].1);
            }
            let q = s.query();
            assert!(q.contains(&(0, 0)) && q.contains(&(1, 1)) && q.contains(&(2, 2)));
        }
    }

    #[test]
    fn ab_star_needs_a_first() {
        let mut s = state("(ab)*", 2);
        ins(&mut s, 0, 0, 1);
        ins(&mut s, 1, 1, 0);
        let q = s.query();
        assert!(q.contains(&(0, 0)));
        // (1,1) holds only through the empty path
        assert!(q.contains(&(1, 1)));
        let mut t = state("(ab)+", 2);
        ins(&mut t, 0, 0, 1);
        ins(&mut t, 1, 1, 0);
        assert!(t.query().contains(&(0, 0)));
        assert!(!t.query().contains(&(1, 1)));
    }

    #[test]
    fn phi_needs_second_visit() {
        // parity of a's; b loops
        let mut s = state("(b*ab*a)*b*", 2);
        ins(&mut s, 1, 1, 0);
        let even = s.dfa().start();
        let phi1 = s.phi(Sym(0), 0, 1, 1);
        let phi2 = s.phi(Sym(0), 0, 1, 2);
        // only u->v->u->v reads an even number of a's
        assert!(!phi1[even][even]);
        assert!(phi2[even][even]);
    }

    #[test]
    fn deletions_rejected() {
        let mut s = state("a", 2);
        assert!(matches!(
            s.apply(&Modification::delete(Sym(0), 0, 1)),
            Err(Error::UnsupportedModification(_))
        ));
    }

    #[test]
    fn batch_and_single_entry_agree() {
        let mut s = state("a(b|a)*", 4);
        for (a, u, v) in [(0, 0, 1), (1, 1, 2), (0, 2, 0), (1, 3, 3)] {
            let next = s.inserted(Sym(a), u, v);
            let qn = s.dfa().num_states();
            for p in 0..qn {
                for q in 0..qn {
                    for x in 0..4 {
                        for y in 0..4 {
                            assert_eq!(
                                next.relation(p, q).contains(x, y),
                                s.inserted_entry(Sym(a), u, v, p, q, x, y)
                            );
                        }
                    }
                }
            }
            s = next;
        }
    }
}
