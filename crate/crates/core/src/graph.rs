//! Labeled graphs, modifications, and the acyclic transitive-closure program.
//!
//! A [`LabeledGraph`] is the mutable input database: a fixed node domain
//! `0..n`, an ordered alphabet, and a set of labeled edges. [`TcState`] keeps
//! the reflexive-transitive closure of the union of all label projections of
//! an acyclic graph, updated only from the previous closure and the modified
//! edge.

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::{BitMatrix, BitSet};
use crate::error::{Error, Result};

/// Index of a symbol in an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(pub u16);

impl Sym {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() || a.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad symbol name `{a}`")));
            }
            if names[..i].contains(a) {
                return Err(Error::Invalid(format!("duplicate symbol `{a}`")));
            }
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::Invalid("alphabet too large".into()));
        }
        Ok(Alphabet { names })
    }

    /// Alphabet of single-letter symbols, e.g. `Alphabet::letters("abc")`.
    pub fn letters(s: &str) -> Self {
        Alphabet::new(s.chars().map(|c| c.to_string())).expect("distinct letters")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.index()]
    }

    pub fn lookup(&self, name: &str) -> Result<Sym> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Sym(i as u16))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + Clone {
        (0..self.names.len()).map(|i| Sym(i as u16))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: usize,
    pub sym: Sym,
    pub v: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modification {
    pub kind: ModKind,
    pub sym: Sym,
    pub u: usize,
    pub v: usize,
}

impl Modification {
    pub fn insert(sym: Sym, u: usize, v: usize) -> Self {
        Modification {
            kind: ModKind::Insert,
            sym,
            u,
            v,
        }
    }

    pub fn delete(sym: Sym, u: usize, v: usize) -> Self {
        Modification {
            kind: ModKind::Delete,
            sym,
            u,
            v,
        }
    }

    pub fn is_insert(&self) -> bool {
        self.kind == ModKind::Insert
    }

    pub fn edge(&self) -> Edge {
        Edge {
            u: self.u,
            sym: self.sym,
            v: self.v,
        }
    }

    /// The same modification on the reversed graph.
    pub fn reversed(&self) -> Self {
        Modification {
            u: self.v,
            v: self.u,
            ..*self
        }
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            ModKind::Insert => "ins",
            ModKind::Delete => "del",
        };
        write!(f, "{op} #{} {} {}", self.sym.0, self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    alphabet: Alphabet,
    directed: bool,
    edges: BTreeSet<Edge>,
}

impl LabeledGraph {
    pub fn new(n: usize, alphabet: Alphabet, directed: bool) -> Self {
        LabeledGraph {
            n,
            alphabet,
            directed,
            edges: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, sym: Sym, v: usize) -> bool {
        self.edges.contains(&Edge { u, sym, v })
    }

    /// Whether some label connects `u` to `v`.
    pub fn has_any_edge(&self, u: usize, v: usize) -> bool {
        self.out_edges(u).any(|e| e.v == v)
    }

    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = Edge> + '_ {
        let lo = Edge {
            u,
            sym: Sym(0),
            v: 0,
        };
        self.edges.range(lo..).take_while(move |e| e.u == u).copied()
    }

    pub fn check_node(&self, x: usize) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: x, n: self.n })
        }
    }

    pub fn check_mod(&self, m: &Modification) -> Result<()> {
        self.check_node(m.u)?;
        self.check_node(m.v)?;
        if m.sym.index() >= self.alphabet.len() {
            return Err(Error::UnknownSymbol(format!("#{}", m.sym.0)));
        }
        Ok(())
    }

    pub fn absent_edge_error(&self, m: &Modification) -> Error {
        Error::DeleteAbsentEdge {
            sym: self.alphabet.name(m.sym).to_string(),
            u: m.u,
            v: m.v,
        }
    }

    /// Applies `m` in place. Returns whether the edge set changed; inserting a
    /// present edge is a no-op, deleting an absent one is an error.
    pub fn apply_mod(&mut self, m: &Modification) -> Result<bool> {
        self.check_mod(m)?;
        let e = m.edge();
        let rev = Edge { u: m.v, v: m.u, ..e };
        match m.kind {
            ModKind::Insert => {
                let fresh = self.edges.insert(e);
                if !self.directed {
                    self.edges.insert(rev);
                }
                Ok(fresh)
            }
            ModKind::Delete => {
                if !self.edges.remove(&e) {
                    return Err(self.absent_edge_error(m));
                }
                if !self.directed {
                    self.edges.remove(&rev);
                }
                Ok(true)
            }
        }
    }

    pub fn with_mod(&self, m: &Modification) -> Result<LabeledGraph> {
        let mut g = self.clone();
        g.apply_mod(m)?;
        Ok(g)
    }

    /// Adjacency of `∪_σ G_σ`.
    pub fn union_adjacency(&self) -> BitMatrix {
        let mut adj = BitMatrix::new(self.n, self.n);
        for e in &self.edges {
            adj.insert(e.u, e.v);
        }
        adj
    }

    /// Kahn-style acyclicity test of the union graph.
    pub fn is_acyclic(&self) -> bool {
        let adj = self.union_adjacency();
        let mut indeg = vec![0usize; self.n];
        for (_, v) in adj.entries() {
            indeg[v] += 1;
        }
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(x) = stack.pop() {
            seen += 1;
            for y in adj.row(x).iter() {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    stack.push(y);
                }
            }
        }
        seen == self.n
    }

    /// The graph with every edge reversed.
    pub fn reversed(&self) -> LabeledGraph {
        LabeledGraph {
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    u: e.v,
                    sym: e.sym,
                    v: e.u,
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Parses the line-oriented graph format:
    ///
    /// ```text
    /// domain 4
    /// alphabet a b
    /// mode directed
    /// edge a 0 1
    /// ```
    pub fn parse(text: &str) -> Result<LabeledGraph> {
        let mut n = None;
        let mut alphabet = None;
        let mut directed = true;
        let mut pending = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            let mut toks = line.split_whitespace();
            let Some(head) = toks.next() else { continue };
            let rest: Vec<&str> = toks.collect();
            match head {
                "domain" => {
                    let [v] = rest[..] else {
                        return Err(Error::parse(line_no, "expected `domain <n>`"));
                    };
                    n = Some(parse_usize(v, line_no)?);
                }
                "alphabet" => {
                    alphabet = Some(
                        Alphabet::new(rest.iter().copied())
                            .map_err(|e| Error::parse(line_no, e.to_string()))?,
                    );
                }
                "mode" => {
                    directed = match rest[..] {
                        ["directed"] => true,
                        ["undirected"] => false,
                        _ => {
                            return Err(Error::parse(
                                line_no,
                                "expected `mode directed|undirected`",
                            ))
                        }
                    };
                }
                "edge" => {
                    let [s, u, v] = rest[..] else {
                        return Err(Error::parse(line_no, "expected `edge <sym> <u> <v>`"));
                    };
                    pending.push((line_no, s, parse_usize(u, line_no)?, parse_usize(v, line_no)?));
                }
                other => return Err(Error::parse(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::parse(0, "missing `domain`"))?;
        let alphabet = alphabet.ok_or_else(|| Error::parse(0, "missing `alphabet`"))?;
        let mut g = LabeledGraph::new(n, alphabet, directed);
        for (line_no, s, u, v) in pending {
            let sym = g
                .alphabet
                .lookup(s)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            g.apply_mod(&Modification::insert(sym, u, v))
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "domain {}\nalphabet {}\nmode {}\n",
            self.n,
            self.alphabet.names.join(" "),
            if self.directed { "directed" } else { "undirected" }
        );
        for e in &self.edges {
            if self.directed || e.u <= e.v {
                out.push_str(&format!("edge {} {} {}\n", self.alphabet.name(e.sym), e.u, e.v));
            }
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub(crate) fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, got `{tok}`")))
}

/// Reflexive-transitive closure `T` of an acyclic graph.
///
/// Edge labels are ignored: `T` tracks the union of all projections. The
/// diagonal is always present; the strict reading "path of length at least
/// one" is `T(x, y) && x != y` on acyclic graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcState {
    n: usize,
    reach: BitMatrix,
}

impl TcState {
    pub fn new(n: usize) -> Self {
        TcState {
            n,
            reach: BitMatrix::identity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.reach.contains(x, y)
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.reach
    }

    pub fn row(&self, x: usize) -> &BitSet {
        self.reach.row(x)
    }

    /// True iff inserting `u -> v` closes a cycle.
    pub fn cycle_check(&self, u: usize, v: usize) -> bool {
        u == v || self.reach.contains(v, u)
    }

    /// Closure after applying `m` to `g_before`, computed from the old closure,
    /// the old edge set and `(u, v)` only.
    pub fn update(&self, g_before: &LabeledGraph, m: &Modification) -> Result<TcState> {
        if !g_before.is_directed() {
            return Err(Error::Invalid(
                "acyclic closure maintenance requires a directed graph".into(),
            ));
        }
        g_before.check_mod(m)?;
        let (u, v) = (m.u, m.v);
        match m.kind {
            ModKind::Insert => {
                if g_before.has_edge(u, m.sym, v) {
                    return Ok(self.clone());
                }
                if self.cycle_check(u, v) {
                    return Err(Error::CycleWouldForm { u, v });
                }
                let mut next = self.reach.clone();
                let from_v = self.reach.row(v);
                for x in 0..self.n {
                    if self.reach.contains(x, u) {
                        next.row_mut(x).union_with(from_v);
                    }
                }
                Ok(TcState { n: self.n, reach: next })
            }
            ModKind::Delete => {
                if !g_before.has_edge(u, m.sym, v) {
                    return Err(g_before.absent_edge_error(m));
                }
                if g_before.out_edges(u).any(|e| e.v == v && e.sym != m.sym) {
                    // (u, v) survives under another label
                    return Ok(self.clone());
                }
                Ok(TcState {
                    n: self.n,
                    reach: self.delete_union_edge(g_before, u, v),
                })
            }
        }
    }

    /// `T'(x,y) = T(x,y) ∧ (¬T(x,u) ∨ ¬T(v,y) ∨ ∃ z,z'. T(x,z) ∧ E(z,z') ∧ (z,z') ≠ (u,v)
    ///            ∧ T(z',y) ∧ T(z,u) ∧ ¬T(z',u))`
    fn delete_union_edge(&self, g_before: &LabeledGraph, u: usize, v: usize) -> BitMatrix {
        let n = self.n;
        let t = &self.reach;
        let mut escapes: Vec<(usize, usize)> = Vec::new();
        for e in g_before.edges() {
            if (e.u, e.v) != (u, v) && t.contains(e.u, u) && !t.contains(e.v, u) {
                escapes.push((e.u, e.v));
            }
        }
        escapes.dedup();
        let mut next = t.clone();
        let not_from_v = {
            let mut s = BitSet::full(n);
            s.difference_with(t.row(v));
            s
        };
        for x in 0..n {
            if !t.contains(x, u) {
                continue;
            }
            let mut keep = not_from_v.clone();
            for &(z, z2) in &escapes {
                if t.contains(x, z) {
                    keep.union_with(t.row(z2));
                }
            }
            next.row_mut(x).intersect_with(&keep);
        }
        next
    }

    /// Validates `m`, updates the closure and applies `m` to `g`. On error both
    /// are left untouched.
    pub fn apply(&mut self, g: &mut LabeledGraph, m: &Modification) -> Result<()> {
        let next = self.update(g, m)?;
        g.apply_mod(m)?;
        *self = next;
        Ok(())
    }

    /// All pairs in `T`, including the diagonal.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.reach.entries().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::letters("ab")
    }

    fn dag(n: usize, edges: &[(usize, usize)]) -> (LabeledGraph, TcState) {
        let mut g = LabeledGraph::new(n, ab(), true);
        let mut t = TcState::new(n);
        for &(u, v) in edges {
            t.apply(&mut g, &Modification::insert(Sym(0), u, v)).unwrap();
        }
        (g, t)
    }

    #[test]
    fn apply_mod_basic_cases() {
        let mut g = LabeledGraph::new(2, ab(), true);
        assert!(g.apply_mod(&Modification::insert(Sym(0), 0, 1)).unwrap());
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![Edge { u: 0, sym: Sym(0), v: 1 }]);
        assert!(!g.apply_mod(&Modification::insert(Sym(0), 0, 1)).unwrap());
        assert_eq!(g.edge_count(), 1);
        let err = g.apply_mod(&Modification::delete(Sym(1), 0, 1)).unwrap_err();
        assert!(matches!(err, Error::DeleteAbsentEdge { .. }));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn undirected_edges_are_symmetric() {
        let mut g = LabeledGraph::new(3, ab(), false);
        g.apply_mod(&Modification::insert(Sym(1), 0, 2)).unwrap();
        assert!(g.has_edge(2, Sym(1), 0));
        g.apply_mod(&Modification::delete(Sym(1), 2, 0)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn out_of_range_nodes_rejected() {
        let mut g = LabeledGraph::new(2, ab(), true);
        assert!(matches!(
            g.apply_mod(&Modification::insert(Sym(0), 0, 2)),
            Err(Error::NodeOutOfRange { node: 2, n: 2 })
        ));
    }

    #[test]
    fn chain_composition_on_insert() {
        let (_, t) = dag(3, &[(0, 1), (1, 2)]);
        let mut expect = vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        expect.sort();
        assert_eq!(t.pairs(), expect);
    }

    #[test]
    fn diamond_delete_keeps_alternative() {
        let (mut g, mut t) = dag(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        t.apply(&mut g, &Modification::delete(Sym(0), 1, 3)).unwrap();
        assert!(t.contains(0, 3));
        assert!(!t.contains(1, 3));
    }

    #[test]
    fn chain_delete_removes_pairs() {
        let (mut g, mut t) = dag(3, &[(0, 1), (1, 2)]);
        t.apply(&mut g, &Modification::delete(Sym(0), 1, 2)).unwrap();
        assert!(!t.contains(0, 2));
        assert!(!t.contains(1, 2));
        assert!(t.contains(0, 1));
    }

    #[test]
    fn other_label_keeps_union_edge() {
        let (mut g, mut t) = dag(2, &[(0, 1)]);
        t.apply(&mut g, &Modification::insert(Sym(1), 0, 1)).unwrap();
        t.apply(&mut g, &Modification::delete(Sym(0), 0, 1)).unwrap();
        assert!(t.contains(0, 1));
    }

    #[test]
    fn cycle_check_cases() {
        let (_, t) = dag(3, &[(0, 1), (1, 2)]);
        assert!(t.cycle_check(2, 0));
        assert!(!t.cycle_check(0, 2));
        assert!(TcState::new(4).cycle_check(3, 3));
    }

    #[test]
    fn cycle_forming_insert_leaves_state() {
        let (mut g, mut t) = dag(3, &[(0, 1), (1, 2)]);
        let before = (g.clone(), t.clone());
        let err = t.apply(&mut g, &Modification::insert(Sym(0), 2, 0)).unwrap_err();
        assert_eq!(err, Error::CycleWouldForm { u: 2, v: 0 });
        assert_eq!((g, t), before);
    }

    #[test]
    fn reinsert_present_edge_is_fixed_point() {
        let (g, t) = dag(3, &[(0, 1), (1, 2)]);
        let again = t.update(&g, &Modification::insert(Sym(0), 0, 1)).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn undirected_graph_rejected() {
        let g = LabeledGraph::new(2, ab(), false);
        let t = TcState::new(2);
        assert!(t.update(&g, &Modification::insert(Sym(0), 0, 1)).is_err());
    }

    #[test]
    fn parse_and_print_roundtrip() {
        let text = "# sample\ndomain 3\nalphabet a b\nmode undirected\nedge a 0 1\nedge b 2 1\n";
        let g = LabeledGraph::parse(text).unwrap();
        assert!(!g.is_directed());
        assert!(g.has_edge(1, Sym(1), 2));
        assert_eq!(LabeledGraph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = LabeledGraph::parse("domain 2\nalphabet a\nedge c 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
