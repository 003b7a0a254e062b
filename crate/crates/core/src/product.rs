//! Reachability in graph products.
//!
//! * [`product_reach`]: direct products through per-factor path lengths.
//! * [`LabeledProductState`]: products of labeled acyclic graphs whose
//!   factors step along equally labeled edges.
//! * [`PalindromeState`]: palindromic paths through `G × G⁻`.
//! * [`NepsState`]: generalized products (NEPS) under factor modifications
//!   and rule-bit flips.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitSet;
use crate::dist::{AcyDistState, InsDistState, PathLengths, UndirDistState};
use crate::ecrpq::{EcrpqPlan, EcrpqState};
use crate::error::{Error, Result};
use crate::graph::{Alphabet, LabeledGraph, Modification};
use crate::oracle::PairSet;
use crate::specs::{EcrpqQuery, NepsSpec, PathAtom, RelAtom, SyncAutomaton};

/// A dense matrix over Z₂.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<BitSet>,
}

impl Gf2Matrix {
    pub fn new(rows: usize, cols: usize) -> Gf2Matrix {
        Gf2Matrix {
            cols,
            rows: vec![BitSet::new(cols); rows],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Gf2Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Gf2Matrix::new(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        m
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].contains(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// The matrix with `column` appended.
    pub fn augmented(&self, column: &[bool]) -> Gf2Matrix {
        assert_eq!(column.len(), self.rows.len());
        let mut m = Gf2Matrix::new(self.rows.len(), self.cols + 1);
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter() {
                m.set(r, c, true);
            }
            m.set(r, self.cols, column[r]);
        }
        m
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].contains(c)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.contains(c) {
                    // xor = (a ∪ b) \ (a ∩ b)
                    let mut both = row.clone();
                    both.intersect_with(&pivot);
                    row.union_with(&pivot);
                    row.difference_with(&both);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Whether `self · x = rhs` has a solution over Z₂.
    pub fn solvable(&self, rhs: &[bool]) -> bool {
        self.rank() == self.augmented(rhs).rank()
    }
}

fn node_product(ns: impl IntoIterator<Item = usize>) -> usize {
    ns.into_iter().fold(1usize, |acc, n| acc.saturating_mul(n))
}

/// Reachability from `xs` to `ys` in the direct product of the factors: some
/// common length `ℓ ≤ ∏|V_i|` is realized in every factor.
pub fn product_reach<D: PathLengths>(factors: &[D], xs: &[usize], ys: &[usize]) -> Result<bool> {
    if xs.len() != factors.len() || ys.len() != factors.len() {
        return Err(Error::Invalid("node tuples must have one entry per factor".into()));
    }
    let bound = node_product(factors.iter().map(|f| f.nodes()));
    for f in factors {
        if let Some(l) = f.max_length() {
            if l < bound {
                return Err(Error::BoundExceeded { requested: bound, bound: l });
            }
        }
    }
    'len: for len in 0..=bound {
        for (i, f) in factors.iter().enumerate() {
            if !f.has_length(xs[i], ys[i], len)? {
                continue 'len;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

fn equality_query(alphabet: &Alphabet, m: usize) -> EcrpqQuery {
    let vars = (0..m).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect();
    let atoms = (0..m)
        .map(|i| PathAtom {
            x: 2 * i,
            path: format!("p{i}"),
            y: 2 * i + 1,
        })
        .collect();
    let rel = RelAtom {
        automaton: SyncAutomaton::equality(alphabet, m),
        paths: (0..m).collect(),
    };
    EcrpqQuery::new(alphabet.clone(), vars, (0..2 * m).collect(), atoms, vec![rel], vec![])
        .expect("equality query is well-formed")
}

/// Product of labeled acyclic graphs in which all factors take equally
/// labeled edges together, maintained as an extended query with the equality
/// relation. Smaller factors are padded with isolated nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledProductState {
    factors: Vec<LabeledGraph>,
    state: EcrpqState,
}

impl LabeledProductState {
    pub fn new(factors: Vec<LabeledGraph>) -> Result<LabeledProductState> {
        let first = factors
            .first()
            .ok_or_else(|| Error::Invalid("a product needs at least one factor".into()))?;
        let plan = EcrpqPlan::compile(equality_query(first.alphabet(), factors.len()))?;
        let n = factors.iter().map(LabeledGraph::n).max().unwrap_or(0);
        let mut copies = Vec::with_capacity(factors.len());
        for g in &factors {
            let mut c = LabeledGraph::new(n, g.alphabet().clone(), g.is_directed());
            for e in g.edges() {
                c.apply_mod(&Modification::insert(e.sym, e.u, e.v))?;
            }
            copies.push(c);
        }
        Ok(LabeledProductState {
            state: EcrpqState::from_copies(plan, copies)?,
            factors,
        })
    }

    pub fn factors(&self) -> &[LabeledGraph] {
        &self.factors
    }

    /// Modifies one factor; on error nothing changes.
    pub fn apply(&mut self, factor: usize, m: &Modification) -> Result<()> {
        let g = self
            .factors
            .get(factor)
            .ok_or_else(|| Error::Invalid(format!("factor {factor} out of range")))?;
        let g = g.with_mod(m)?;
        self.state.apply(factor, m)?;
        self.factors[factor] = g;
        Ok(())
    }

    pub fn reach(&self, xs: &[usize], ys: &[usize]) -> Result<bool> {
        if xs.len() != self.factors.len() || ys.len() != self.factors.len() {
            return Err(Error::Invalid("node tuples must have one entry per factor".into()));
        }
        for (g, (&x, &y)) in self.factors.iter().zip(xs.iter().zip(ys)) {
            g.check_node(x)?;
            g.check_node(y)?;
        }
        Ok(self.state.connects(xs, ys))
    }
}

/// Pairs joined by a path whose label is a palindrome, on an acyclic graph.
///
/// `ww^R` from `x` to `y` means `w` from `x` to some `z` in `G` and `w` from
/// `y` to `z` in the reversed graph `G⁻`; odd palindromes `w a w^R` use a
/// middle edge `z → z'` instead of a meeting node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PalindromeState {
    state: EcrpqState,
}

impl PalindromeState {
    pub fn new(graph: &LabeledGraph) -> Result<PalindromeState> {
        if !graph.is_directed() {
            return Err(Error::Invalid("palindrome maintenance needs a directed graph".into()));
        }
        let plan = EcrpqPlan::compile(equality_query(graph.alphabet(), 2))?;
        let copies = vec![graph.clone(), graph.reversed()];
        Ok(PalindromeState {
            state: EcrpqState::from_copies(plan, copies)?,
        })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.state.copies()[0]
    }

    /// Applies `m` to `G` and its mirror to `G⁻`; on error nothing changes.
    pub fn apply(&mut self, m: &Modification) -> Result<()> {
        let mut next = self.state.clone();
        next.apply(0, m)?;
        next.apply(1, &m.reversed())?;
        self.state = next;
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        let g = self.graph();
        (0..g.n()).any(|z| self.state.connects(&[x, y], &[z, z]))
            || g.edges().any(|e| self.state.connects(&[x, y], &[e.u, e.v]))
    }

    pub fn query(&self) -> PairSet {
        let n = self.graph().n();
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| self.contains(x, y))
            .collect()
    }
}

/// Which factor graphs a generalized product is maintained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Directed factors under insertions.
    InsertOnly,
    /// Directed acyclic factors under insertions and deletions.
    Acyclic,
    /// Undirected factors under insertions and deletions.
    Undirected,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Regime> {
        match s {
            "insert-only" => Ok(Regime::InsertOnly),
            "acyclic" => Ok(Regime::Acyclic),
            "undirected" => Ok(Regime::Undirected),
            _ => Err(Error::Invalid(format!(
                "unknown regime `{s}`; expected insert-only, acyclic or undirected"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::InsertOnly => "insert-only",
            Regime::Acyclic => "acyclic",
            Regime::Undirected => "undirected",
        })
    }
}

const MAX_DIRECTED_RULES: usize = 4;
const MAX_INSERT_ONLY_FACTORS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Factor {
    Ins { graph: LabeledGraph, dist: InsDistState },
    Acy(AcyDistState),
    Undir(UndirDistState),
}

impl Factor {
    fn graph(&self) -> &LabeledGraph {
        match self {
            Factor::Ins { graph, .. } => graph,
            Factor::Acy(s) => s.graph(),
            Factor::Undir(s) => s.graph(),
        }
    }

    fn lengths(&self) -> &dyn PathLengths {
        match self {
            Factor::Ins { dist, .. } => dist,
            Factor::Acy(s) => s,
            Factor::Undir(s) => s,
        }
    }

    fn apply(&mut self, m: &Modification) -> Result<()> {
        match self {
            Factor::Ins { graph, dist } => {
                if !m.is_insert() {
                    return Err(Error::UnsupportedModification(
                        "the insert-only regime rejects deletions".into(),
                    ));
                }
                graph.check_mod(m)?;
                dist.apply(m)?;
                graph.apply_mod(m)?;
                Ok(())
            }
            Factor::Acy(s) => s.apply(m),
            Factor::Undir(s) => s.apply(m),
        }
    }
}

/// Distance states for `graphs` under `regime`, replayed edge by edge, with
/// the insert-only bound defaulting to `∏|V_i|`.
fn build_factors(
    regime: Regime,
    graphs: Vec<LabeledGraph>,
    lmax: Option<usize>,
) -> Result<(Option<usize>, Vec<Factor>)> {
    let bound = node_product(graphs.iter().map(LabeledGraph::n));
    let lmax = match regime {
        Regime::InsertOnly => Some(lmax.unwrap_or(bound)),
        _ => None,
    };
    let mut factors = Vec::with_capacity(graphs.len());
    for g in graphs {
        let directed = regime != Regime::Undirected;
        if g.is_directed() != directed {
            return Err(Error::Invalid(format!(
                "the {regime} regime needs {} factors",
                if directed { "directed" } else { "undirected" }
            )));
        }
        let mut f = match regime {
            Regime::InsertOnly => Factor::Ins {
                graph: LabeledGraph::new(g.n(), g.alphabet().clone(), true),
                dist: InsDistState::new(g.n(), lmax)?,
            },
            Regime::Acyclic => Factor::Acy(AcyDistState::new(g.alphabet().clone(), g.n())),
            Regime::Undirected => Factor::Undir(UndirDistState::new(g.alphabet().clone(), g.n())),
        };
        for e in g.edges() {
            if directed || e.u <= e.v {
                f.apply(&Modification::insert(e.sym, e.u, e.v))?;
            }
        }
        factors.push(f);
    }
    Ok((lmax, factors))
}

fn apply_to(factors: &mut [Factor], factor: usize, m: &Modification) -> Result<()> {
    let f = factors
        .get_mut(factor)
        .ok_or_else(|| Error::Invalid(format!("factor {factor} out of range")))?;
    let mut next = f.clone();
    next.apply(m)?;
    *f = next;
    Ok(())
}

fn check_tuple(factors: &[Factor], xs: &[usize]) -> Result<()> {
    if xs.len() != factors.len() {
        return Err(Error::Invalid(format!(
            "node tuple of length {} for {} factors",
            xs.len(),
            factors.len()
        )));
    }
    for (f, &x) in factors.iter().zip(xs) {
        f.graph().check_node(x)?;
    }
    Ok(())
}

/// Direct (tensor) product of factors kept as distance states: see
/// [`product_reach`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductState {
    regime: Regime,
    factors: Vec<Factor>,
}

impl ProductState {
    pub fn new(regime: Regime, graphs: Vec<LabeledGraph>, lmax: Option<usize>) -> Result<ProductState> {
        if graphs.is_empty() {
            return Err(Error::Invalid("a product needs at least one factor".into()));
        }
        if regime == Regime::InsertOnly && graphs.len() > MAX_INSERT_ONLY_FACTORS {
            return Err(Error::ComplexityGuard(format!(
                "{} factors; the insert-only regime accepts at most {MAX_INSERT_ONLY_FACTORS}",
                graphs.len()
            )));
        }
        let (_, factors) = build_factors(regime, graphs, lmax)?;
        Ok(ProductState { regime, factors })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn graphs(&self) -> Vec<&LabeledGraph> {
        self.factors.iter().map(Factor::graph).collect()
    }

    /// Modifies one factor; on error nothing changes.
    pub fn apply(&mut self, factor: usize, m: &Modification) -> Result<()> {
        apply_to(&mut self.factors, factor, m)
    }

    pub fn reach(&self, xs: &[usize], ys: &[usize]) -> Result<bool> {
        check_tuple(&self.factors, xs)?;
        check_tuple(&self.factors, ys)?;
        let dists: Vec<&dyn PathLengths> = self.factors.iter().map(Factor::lengths).collect();
        product_reach(&dists, xs, ys)
    }
}

/// Generalized product `NEPS(G_1, …, G_m; B)` with per-factor length
/// relations.
///
/// Directed regimes: `x⃗` reaches `y⃗` iff rule multiplicities `n_1..n_k`
/// exist with a path of length `Σ_j n_j·B[i][j]` from `x_i` to `y_i` in every
/// factor. Undirected regime: a parity system over Z₂, see
/// [`NepsState::parity_system`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NepsState {
    spec: NepsSpec,
    regime: Regime,
    lmax: Option<usize>,
    factors: Vec<Factor>,
}

impl NepsState {
    /// Builds the state for `graphs`, which are replayed edge by edge. In the
    /// insert-only regime `lmax` defaults to `∏|V_i|`.
    pub fn new(
        spec: NepsSpec,
        regime: Regime,
        graphs: Vec<LabeledGraph>,
        lmax: Option<usize>,
    ) -> Result<NepsState> {
        if graphs.len() != spec.factors() {
            return Err(Error::Invalid(format!(
                "{} factor graphs for {} factors",
                graphs.len(),
                spec.factors()
            )));
        }
        if regime != Regime::Undirected && spec.rules().len() > MAX_DIRECTED_RULES {
            return Err(Error::ComplexityGuard(format!(
                "{} rules; directed regimes enumerate rule multiplicities and accept at most {MAX_DIRECTED_RULES}",
                spec.rules().len()
            )));
        }
        if regime == Regime::InsertOnly && graphs.len() > MAX_INSERT_ONLY_FACTORS {
            return Err(Error::ComplexityGuard(format!(
                "{} factors; the insert-only regime accepts at most {MAX_INSERT_ONLY_FACTORS}",
                graphs.len()
            )));
        }
        let (lmax, factors) = build_factors(regime, graphs, lmax)?;
        Ok(NepsState {
            spec,
            regime,
            lmax,
            factors,
        })
    }

    pub fn spec(&self) -> &NepsSpec {
        &self.spec
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn graph(&self, factor: usize) -> &LabeledGraph {
        self.factors[factor].graph()
    }

    pub fn graphs(&self) -> Vec<&LabeledGraph> {
        self.factors.iter().map(Factor::graph).collect()
    }

    /// Modifies one factor; on error nothing changes.
    pub fn apply(&mut self, factor: usize, m: &Modification) -> Result<()> {
        apply_to(&mut self.factors, factor, m)
    }

    /// Flips bit `factor` of rule `rule`.
    pub fn flip(&mut self, rule: usize, factor: usize) -> Result<()> {
        self.spec.flip(rule, factor)
    }

    pub fn reach(&self, xs: &[usize], ys: &[usize]) -> Result<bool> {
        check_tuple(&self.factors, xs)?;
        check_tuple(&self.factors, ys)?;
        match self.regime {
            Regime::Undirected => Ok(self
                .parity_system(xs, ys)
                .is_some_and(|(b, d)| b.solvable(&d))),
            _ => self.reach_directed(xs, ys),
        }
    }

    fn reach_directed(&self, xs: &[usize], ys: &[usize]) -> Result<bool> {
        let m = self.factors.len();
        let total = node_product(self.factors.iter().map(|f| f.graph().n()));
        // largest factor length worth trying
        let caps: Vec<usize> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Acy(s) => s.graph().n().saturating_sub(1),
                _ => total,
            })
            .collect();
        if let Some(l) = self.lmax {
            if l < total {
                return Err(Error::BoundExceeded { requested: total, bound: l });
            }
        }
        let mut lens = Vec::with_capacity(m);
        for (i, f) in self.factors.iter().enumerate() {
            let mut set = BitSet::new(caps[i] + 1);
            for l in 0..=caps[i] {
                if f.lengths().has_length(xs[i], ys[i], l)? {
                    set.insert(l);
                }
            }
            if set.is_empty() {
                return Ok(false);
            }
            lens.push(set);
        }
        let rules: Vec<Vec<usize>> = self
            .spec
            .rules()
            .iter()
            .filter(|r| r.iter().any(|&b| b))
            .map(|r| (0..m).filter(|&i| r[i]).collect())
            .collect();
        let mut d = vec![0usize; m];
        Ok(search(&rules, 0, total, &caps, &lens, &mut d))
    }

    /// The Z₂ system `B·p = d` for the undirected regime, or `None` when some
    /// factor cannot get from `x_i` to `y_i` at all.
    ///
    /// A rule is enabled when every factor it moves has an edge at `x_i`;
    /// other rules can never fire. A factor no enabled rule moves must have
    /// `x_i = y_i`. Any other factor needs `y_i` in the component of `x_i`,
    /// and contributes the row of enabled rules with right-hand side the
    /// `x_i`–`y_i` distance parity if that component is bipartite, or a zero
    /// row if it is not.
    pub fn parity_system(&self, xs: &[usize], ys: &[usize]) -> Option<(Gf2Matrix, Vec<bool>)> {
        let graphs = self.graphs();
        let m = graphs.len();
        let enabled: Vec<&Vec<bool>> = self
            .spec
            .rules()
            .iter()
            .filter(|r| {
                r.iter().any(|&b| b)
                    && (0..m).all(|i| !r[i] || graphs[i].out_edges(xs[i]).next().is_some())
            })
            .collect();
        let mut b = Gf2Matrix::new(m, enabled.len());
        let mut d = vec![false; m];
        for (i, f) in self.factors.iter().enumerate() {
            let Factor::Undir(s) = f else {
                unreachable!("undirected regime holds undirected factors")
            };
            let moved = enabled.iter().any(|r| r[i]);
            if !moved {
                if xs[i] != ys[i] {
                    return None;
                }
                continue;
            }
            let even = xs[i] == ys[i] || s.distance(xs[i], ys[i], 0).is_some();
            let odd = s.distance(xs[i], ys[i], 1).is_some();
            if !even && !odd {
                return None;
            }
            let bipartite = s.distance(xs[i], xs[i], 1).is_none();
            if bipartite {
                for (j, r) in enabled.iter().enumerate() {
                    b.set(i, j, r[i]);
                }
                d[i] = odd;
            }
        }
        Some((b, d))
    }
}

/// Depth-first search over rule multiplicities, pruned by the per-factor
/// caps and the total step bound.
fn search(
    rules: &[Vec<usize>],
    j: usize,
    budget: usize,
    caps: &[usize],
    lens: &[BitSet],
    d: &mut Vec<usize>,
) -> bool {
    if j == rules.len() {
        return d.iter().zip(lens).all(|(&l, set)| set.contains(l));
    }
    let mut used = 0;
    loop {
        if search(rules, j + 1, budget - used, caps, lens, d) {
            for &i in &rules[j] {
                d[i] -= used;
            }
            return true;
        }
        if used == budget || rules[j].iter().any(|&i| d[i] + 1 > caps[i]) {
            break;
        }
        used += 1;
        for &i in &rules[j] {
            d[i] += 1;
        }
    }
    for &i in &rules[j] {
        d[i] -= used;
    }
    false
}
