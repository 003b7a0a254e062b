//! Seeded oracle-equivalence suites.
//!
//! Each suite runs independent trials: a random instance and modification
//! sequence, compared against the from-scratch evaluators in [`crate::oracle`]
//! after every step. Trial `i` of a suite under seed `s` always sees the same
//! random stream.

use std::collections::BTreeSet;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitMatrix;
use crate::cfl::CflState;
use crate::dist::{AcyDistState, AnBnCnState, InsDistState, ParikhState, PathLengths, UndirDistState};
use crate::ecrpq::{CrpqState, EcrpqPlan, EcrpqState};
use crate::error::Error;
use crate::graph::{Alphabet, LabeledGraph, Modification, Sym, TcState};
use crate::product::{Gf2Matrix, LabeledProductState, NepsState, PalindromeState, ProductState, Regime};
use crate::rpq::RpqState;
use crate::session::{run_script, Program, Session, Setup};
use crate::specs::{CnfGrammar, NepsSpec};
use crate::{gen, oracle};

/// Why a trial failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure(pub String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(format!("unexpected error: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type TrialResult = Result<(), Failure>;

fn same<T: PartialEq + fmt::Debug>(got: T, want: T, ctx: impl fmt::Display) -> TrialResult {
    if got == want {
        Ok(())
    } else {
        Err(Failure(format!("{ctx}: got {got:?}, expected {want:?}")))
    }
}

/// Trial parameters: the trial index and the node cap.
#[derive(Debug, Clone, Copy)]
struct Ctx {
    index: usize,
    cap: usize,
}

type TrialFn = fn(&mut ChaCha8Rng, Ctx) -> TrialResult;

pub struct Suite {
    pub name: &'static str,
    /// Acceptance criterion the suite belongs to.
    pub criterion: u8,
    /// Trial count used for acceptance.
    pub trials: usize,
    /// Largest graph the suite generates unless capped lower.
    pub max_nodes: usize,
    /// Smallest cap the generators can work with.
    min_nodes: usize,
    trial: TrialFn,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub suite: &'static str,
    pub trials: usize,
    /// `(trial, reason)` for every failed trial.
    pub failures: Vec<(usize, String)>,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn passed(&self) -> usize {
        self.trials - self.failures.len()
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

impl Suite {
    pub fn rng(&self, seed: u64, trial: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed ^ fnv1a(self.name) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// Runs one trial, turning panics into failures.
    pub fn run_trial(&self, seed: u64, trial: usize, max_nodes: Option<usize>) -> Result<(), String> {
        let cap = max_nodes.map_or(self.max_nodes, |m| m.min(self.max_nodes)).max(self.min_nodes);
        let mut rng = self.rng(seed, trial);
        let ctx = Ctx { index: trial, cap };
        match catch_unwind(AssertUnwindSafe(|| (self.trial)(&mut rng, ctx))) {
            Ok(Ok(())) => Ok(()),
            Ok(Err(f)) => Err(f.0),
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        }
    }

    /// Runs `trials` trials, spread over the available cores.
    pub fn run(&self, trials: usize, seed: u64, max_nodes: Option<usize>) -> Outcome {
        let start = Instant::now();
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials.max(1));
        let mut failures: Vec<(usize, String)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..trials)
                            .step_by(workers)
                            .filter_map(|t| self.run_trial(seed, t, max_nodes).err().map(|e| (t, e)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        });
        failures.sort();
        Outcome {
            suite: self.name,
            trials,
            failures,
            elapsed: start.elapsed(),
        }
    }
}

pub fn suites() -> &'static [Suite] {
    SUITES
}

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

macro_rules! suite {
    ($name:literal, $crit:literal, $trials:literal, $max:literal, $min:literal, $f:ident) => {
        Suite {
            name: $name,
            criterion: $crit,
            trials: $trials,
            max_nodes: $max,
            min_nodes: $min,
            trial: $f,
        }
    };
}

static SUITES: &[Suite] = &[
    suite!("tc", 1, 500, 12, 2, tc),
    suite!("rpq", 2, 300, 10, 1, rpq),
    suite!("rpq-locality", 2, 100, 10, 4, rpq_locality),
    suite!("cfl", 3, 200, 8, 2, cfl),
    suite!("cfl-soundness", 3, 20, 5, 2, cfl_soundness),
    suite!("dist-ins", 4, 200, 8, 1, dist_ins),
    suite!("dist-acyclic", 4, 200, 8, 2, dist_acyclic),
    suite!("dist-undirected", 4, 200, 8, 1, dist_undirected),
    suite!("anbncn", 4, 30, 16, 2, anbncn),
    suite!("parikh", 5, 150, 6, 1, parikh),
    suite!("parikh-k1", 5, 50, 6, 1, parikh_k1),
    suite!("crpq", 6, 100, 6, 1, crpq),
    suite!("crpq-doubling", 6, 30, 3, 1, crpq_doubling),
    suite!("ecrpq", 7, 100, 5, 2, ecrpq),
    suite!("product", 8, 150, 4, 1, product),
    suite!("neps-insert-only", 8, 150, 4, 1, neps_insert_only),
    suite!("neps-acyclic", 8, 150, 4, 1, neps_acyclic),
    suite!("neps-undirected", 8, 150, 4, 1, neps_undirected),
    suite!("parity-system", 8, 150, 4, 1, parity_system),
    suite!("labeled-product", 8, 100, 4, 1, labeled_product),
    suite!("gf2", 8, 200, 6, 1, gf2),
    suite!("palindrome", 8, 100, 6, 1, palindrome),
    suite!("scripts", 9, 100, 6, 3, scripts),
];

fn pairs_of(t: &TcState) -> BTreeSet<(usize, usize)> {
    t.pairs().into_iter().collect()
}

fn tc(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(2..=c.cap);
    let mut g = LabeledGraph::new(n, gen::alphabet(2), true);
    let mut t = TcState::new(n);
    let steps = rng.gen_range(1..=40);
    for m in gen::dag_script(rng, &g.clone(), steps, 0.35) {
        t.apply(&mut g, &m)?;
        same(pairs_of(&t), oracle::reach(&g), format_args!("T after {m}"))?;
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let closes = !oracle::is_acyclic(&g.with_mod(&Modification::insert(Sym(0), u, v))?);
        same(t.cycle_check(u, v), closes, format_args!("cycle_check({u},{v})"))?;
    }
    Ok(())
}

fn rpq(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let al = gen::alphabet(rng.gen_range(1..=3));
    let dfa = gen::dfa(rng, &al, 5);
    let n = rng.gen_range(1..=c.cap);
    let g0 = LabeledGraph::new(n, al, true);
    let mut g = g0.clone();
    let mut s = RpqState::new(dfa.clone(), n);
    let steps = rng.gen_range(1..=30);
    for m in gen::insert_script(rng, &g0, steps) {
        s.apply(&m)?;
        g.apply_mod(&m)?;
        same(s.query(), oracle::rpq(&g, &dfa), format_args!("answer after {m}"))?;
    }
    Ok(())
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BitMatrix {
    let mut m = BitMatrix::new(n, n);
    for x in 0..n {
        for y in 0..n {
            m.set(x, y, rng.gen_bool(p));
        }
    }
    m
}

/// Two states with arbitrary relations that agree on all pairs over
/// `{x, y, u, v}` must compute the same update for `(x, y)`.
fn rpq_locality(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let al = gen::alphabet(rng.gen_range(1..=3));
    let dfa = gen::dfa(rng, &al, 5);
    let n = rng.gen_range(4..=c.cap);
    let qn = dfa.num_states();
    let pick = |rng: &mut ChaCha8Rng| rng.gen_range(0..n);
    let (x, y, u, v) = (pick(rng), pick(rng), pick(rng), pick(rng));
    let sym = Sym(rng.gen_range(0..al.len()) as u16);
    let shared = [x, y, u, v];
    let a: Vec<BitMatrix> = (0..qn * qn).map(|_| random_matrix(rng, n, 0.3)).collect();
    let mut b: Vec<BitMatrix> = (0..qn * qn).map(|_| random_matrix(rng, n, 0.3)).collect();
    for (ra, rb) in a.iter().zip(&mut b) {
        for &i in &shared {
            for &j in &shared {
                rb.set(i, j, ra.contains(i, j));
            }
        }
    }
    let sa = RpqState::from_relations(dfa.clone(), n, a)?;
    let sb = RpqState::from_relations(dfa, n, b)?;
    let na = sa.inserted(sym, u, v);
    for p in 0..qn {
        for q in 0..qn {
            let ea = sa.inserted_entry(sym, u, v, p, q, x, y);
            same(ea, sb.inserted_entry(sym, u, v, p, q, x, y), format_args!("R_{p},{q}({x},{y})"))?;
            same(ea, na.relation(p, q).contains(x, y), "single entry vs full update")?;
        }
    }
    Ok(())
}

fn grammar(rng: &mut ChaCha8Rng, index: usize) -> CnfGrammar {
    let al = gen::alphabet(2);
    match index % 3 {
        0 => gen::dyck(&al),
        1 => gen::anbn(&al),
        _ => gen::cnf(rng, &al, 6),
    }
}

fn cfl(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let grammar = grammar(rng, c.index);
    let n = rng.gen_range(2..=c.cap);
    let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
    let steps = rng.gen_range(1..=25);
    let mut s = CflState::new(grammar, n);
    for m in gen::dag_script(rng, &g0, steps, 0.35) {
        s.apply(&m)?;
        same(s.query(), oracle::cfl(s.graph(), s.grammar()), format_args!("answer after {m}"))?;
    }
    Ok(())
}

fn cfl_soundness(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let grammar = grammar(rng, c.index);
    let n = rng.gen_range(2..=c.cap);
    let g0 = LabeledGraph::new(n, grammar.alphabet().clone(), true);
    let mut s = CflState::new(grammar, n);
    for m in gen::dag_script(rng, &g0, 12, 0.3) {
        s.apply(&m)?;
    }
    let v = s.grammar().num_vars();
    for x in 0..v {
        for y in 0..v {
            let want = oracle::cfl_derived_by_paths(s.graph(), s.grammar(), x, &[y], 1 << 22)?;
            same(s.derived(x, &[y])?, want, format_args!("R_{{{x}->{y}}}"))?;
        }
    }
    Ok(())
}

fn lengths_agree(s: &dyn PathLengths, g: &LabeledGraph, lmax: usize, ctx: impl fmt::Display) -> TrialResult {
    let want = oracle::length_sets(g, lmax);
    for x in 0..g.n() {
        for y in 0..g.n() {
            for l in 0..=lmax {
                same(s.has_length(x, y, l)?, want.contains(x, y, l), format_args!("{ctx}: ({x},{y}) length {l}"))?;
            }
        }
    }
    Ok(())
}

fn dist_ins(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(1..=c.cap);
    let lmax = rng.gen_range(1..=20);
    let g0 = LabeledGraph::new(n, gen::alphabet(1), true);
    let mut g = g0.clone();
    let mut s = InsDistState::new(n, Some(lmax))?;
    let steps = rng.gen_range(1..=15);
    for m in gen::insert_script(rng, &g0, steps) {
        g.apply_mod(&m)?;
        s.apply(&m)?;
        lengths_agree(&s, &g, lmax, format_args!("after {m}"))?;
    }
    match s.has_length(0, 0, lmax + 1) {
        Err(Error::BoundExceeded { .. }) => Ok(()),
        other => Err(Failure(format!("length beyond Lmax gave {other:?}"))),
    }
}

fn dist_acyclic(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(2..=c.cap);
    let mut s = AcyDistState::new(gen::alphabet(2), n);
    let steps = rng.gen_range(1..=30);
    for m in gen::dag_script(rng, &s.graph().clone(), steps, 0.35) {
        s.apply(&m)?;
        lengths_agree(&s, s.graph(), n, format_args!("after {m}"))?;
    }
    Ok(())
}

fn dist_undirected(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(1..=c.cap);
    let mut s = UndirDistState::new(gen::alphabet(2), n);
    let steps = rng.gen_range(1..=20);
    for m in gen::undirected_script(rng, &s.graph().clone(), steps, 0.3) {
        s.apply(&m)?;
        lengths_agree(&s, s.graph(), 2 * n + 2, format_args!("after {m}"))?;
    }
    Ok(())
}

/// Labeled chains `aᵐbᵐcᵐ` for `m = 0..=5` (one per trial index), then
/// random DAGs.
fn anbncn(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let labels = [Sym(0), Sym(1), Sym(2)];
    let al = gen::alphabet(3);
    let chain = c.index % 6;
    if c.index < 6 && 3 * chain < c.cap {
        let n = 3 * chain + 1;
        let mut s = AnBnCnState::new(al, n, labels);
        for i in 0..3 * chain {
            s.apply(&Modification::insert(labels[i / chain], i, i + 1))?;
        }
        same(s.query().contains(&(0, n - 1)), true, "chain endpoints")?;
        same(s.query(), oracle::anbncn(s.graph(), labels, 1 << 20)?, "chain answer")?;
        if chain > 0 {
            let mid = chain + chain / 2;
            s.apply(&Modification::delete(Sym(1), mid, mid + 1))?;
            s.apply(&Modification::insert(Sym(0), mid, mid + 1))?;
            same(s.query().contains(&(0, n - 1)), false, "broken chain endpoints")?;
            same(s.query(), oracle::anbncn(s.graph(), labels, 1 << 20)?, "broken chain answer")?;
        }
        return Ok(());
    }
    let n = rng.gen_range(2..=c.cap.min(8));
    let mut s = AnBnCnState::new(al, n, labels);
    for m in gen::dag_script(rng, &s.graph().clone(), 20, 0.25) {
        s.apply(&m)?;
        same(s.query(), oracle::anbncn(s.graph(), labels, 1 << 20)?, format_args!("after {m}"))?;
    }
    Ok(())
}

fn parikh(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=c.cap);
    let lmax = rng.gen_range(1..=12);
    let g0 = LabeledGraph::new(n, gen::alphabet(k), true);
    let mut g = g0.clone();
    let mut s = ParikhState::new(n, k, lmax)?;
    let steps = rng.gen_range(1..=10);
    for m in gen::insert_script(rng, &g0, steps) {
        g.apply_mod(&m)?;
        s.apply(&m)?;
        let got: oracle::ParikhSet = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .flat_map(|(x, y)| s.vectors(x, y).map(move |v| (x, y, v)).collect::<Vec<_>>())
            .collect();
        same(got, oracle::parikh(&g, lmax), format_args!("vectors after {m}"))?;
    }
    Ok(())
}

fn parikh_k1(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(1..=c.cap);
    let lmax = rng.gen_range(1..=12);
    let g = LabeledGraph::new(n, gen::alphabet(1), true);
    let mut p = ParikhState::new(n, 1, lmax)?;
    let mut d = InsDistState::new(n, Some(lmax))?;
    for m in gen::insert_script(rng, &g, 10) {
        p.apply(&m)?;
        d.apply(&m)?;
        for x in 0..n {
            for y in 0..n {
                for t in 0..=lmax {
                    same(p.sums(x, y, t), d.sums(x, y, t), format_args!("S vs A at ({x},{y},{t})"))?;
                }
            }
        }
    }
    Ok(())
}

fn crpq(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let al = gen::alphabet(rng.gen_range(1..=2));
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=c.cap);
    let lmax = rng.gen_range(2..=5);
    let query = gen::crpq_query(rng, &al, m, 3, 2);
    let g0 = LabeledGraph::new(n, al, true);
    let mut s = CrpqState::new(query.clone(), &g0, Some(lmax))?;
    let mut prev = s.query();
    for md in gen::insert_script(rng, &g0, 10) {
        s.apply(&md)?;
        let got = s.query();
        same(&got, &oracle::crpq(&query, s.graph(), lmax), format_args!("answer after {md}"))?;
        same(prev.is_subset(&got), true, "monotone under insertions")?;
        prev = got;
    }
    Ok(())
}

/// The default bound and twice it give the same answers.
fn crpq_doubling(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let al = gen::alphabet(rng.gen_range(1..=2));
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=c.cap);
    let query = gen::crpq_query(rng, &al, m, 2, 2);
    let g0 = LabeledGraph::new(n, al, true);
    let mut s = CrpqState::new(query.clone(), &g0, None)?;
    let mut t = CrpqState::new(query, &g0, Some(2 * s.lmax()))?;
    for md in gen::insert_script(rng, &g0, 6) {
        s.apply(&md)?;
        t.apply(&md)?;
        same(s.query(), t.query(), format_args!("Lmax {} vs {} after {md}", s.lmax(), t.lmax()))?;
    }
    Ok(())
}

/// Per-copy DAG scripts interleaved into one `(copy, modification)` list.
fn interleaved(rng: &mut ChaCha8Rng, copies: &[LabeledGraph], steps: usize) -> Vec<(usize, Modification)> {
    let mut queues: Vec<Vec<Modification>> = copies
        .iter()
        .map(|g| {
            let mut s = gen::dag_script(rng, g, steps, 0.3);
            s.reverse();
            s
        })
        .collect();
    let mut out = Vec::new();
    while let Some(&i) = (0..queues.len())
        .filter(|&i| !queues[i].is_empty())
        .collect::<Vec<_>>()
        .choose(rng)
    {
        out.push((i, queues[i].pop().expect("non-empty queue")));
    }
    out
}

fn ecrpq(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let al = gen::alphabet(rng.gen_range(1..=2));
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(2..=c.cap);
    // plans of at most four states
    let (query, plan) = loop {
        let q = gen::ecrpq_query(rng, &al, m, 4, 2);
        let plan = EcrpqPlan::compile(q.clone())?;
        if plan.automaton().num_states() <= 4 {
            break (q, plan);
        }
    };
    let mut s = EcrpqState::new(plan, n)?;
    let copies = vec![LabeledGraph::new(n, al, true); m];
    for (i, md) in interleaved(rng, &copies, 8) {
        s.apply(i, &md)?;
        let want = oracle::ecrpq(&query, s.copies(), 1 << 20)?;
        same(s.query(), want, format_args!("answer after {md} on copy {i}"))?;
    }
    Ok(())
}

fn node_tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    dims.iter().fold(vec![vec![]], |acc, &d| {
        acc.into_iter()
            .flat_map(|t| {
                (0..d).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect()
    })
}

/// Compares `reach` on every pair of product nodes with BFS on the explicit
/// product.
fn product_agrees(
    graphs: &[&LabeledGraph],
    spec: &NepsSpec,
    reach: impl Fn(&[usize], &[usize]) -> crate::Result<bool>,
    ctx: impl fmt::Display,
) -> TrialResult {
    let p = oracle::neps_product(graphs, spec, 1 << 12)?;
    let dims: Vec<usize> = graphs.iter().map(|g| g.n()).collect();
    let all = node_tuples(&dims);
    for xs in &all {
        for ys in &all {
            same(reach(xs, ys)?, p.reach(xs, ys), format_args!("{ctx}: {xs:?} -> {ys:?}"))?;
        }
    }
    Ok(())
}

fn factor_scripts(
    rng: &mut ChaCha8Rng,
    graphs: &[LabeledGraph],
    regime: Regime,
    steps: usize,
) -> Vec<Vec<Modification>> {
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

fn factors(rng: &mut ChaCha8Rng, cap: usize, regime: Regime) -> Vec<LabeledGraph> {
    let m = rng.gen_range(1..=3);
    (0..m)
        .map(|_| LabeledGraph::new(rng.gen_range(1..=cap), gen::alphabet(1), regime != Regime::Undirected))
        .collect()
}

const REGIMES: [Regime; 3] = [Regime::InsertOnly, Regime::Acyclic, Regime::Undirected];

fn product(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let regime = REGIMES[c.index % 3];
    let graphs = factors(rng, c.cap, regime);
    let m = graphs.len();
    let mut scripts = factor_scripts(rng, &graphs, regime, 6);
    let mut s = ProductState::new(regime, graphs, None)?;
    let spec = NepsSpec::tensor(m);
    for step in 0..6 {
        let i = rng.gen_range(0..m);
        if let Some(md) = scripts[i].pop() {
            s.apply(i, &md)?;
        }
        product_agrees(&s.graphs(), &spec, |x, y| s.reach(x, y), format_args!("{regime} step {step}"))?;
    }
    Ok(())
}

fn neps(rng: &mut ChaCha8Rng, c: Ctx, regime: Regime) -> TrialResult {
    let graphs = factors(rng, c.cap, regime);
    let m = graphs.len();
    let spec = gen::neps(rng, m, 3);
    let mut scripts = factor_scripts(rng, &graphs, regime, 6);
    let mut s = NepsState::new(spec, regime, graphs, None)?;
    for step in 0..6 {
        let i = rng.gen_range(0..m);
        if let Some(md) = scripts[i].pop() {
            s.apply(i, &md)?;
        }
        if rng.gen_bool(0.3) {
            let r = rng.gen_range(0..s.spec().rules().len());
            s.flip(r, rng.gen_range(0..m))?;
        }
        product_agrees(&s.graphs(), s.spec(), |x, y| s.reach(x, y), format_args!("step {step}"))?;
    }
    Ok(())
}

fn neps_insert_only(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    neps(rng, c, Regime::InsertOnly)
}

fn neps_acyclic(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    neps(rng, c, Regime::Acyclic)
}

fn neps_undirected(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    neps(rng, c, Regime::Undirected)
}

/// Rank-based solvability of the undirected parity system against trying
/// every `x⃗ ∈ {0,1}^k`.
fn parity_system(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let m = rng.gen_range(1..=3);
    let spec = gen::neps(rng, m, 4);
    let graphs: Vec<LabeledGraph> = (0..m)
        .map(|_| {
            let g = LabeledGraph::new(rng.gen_range(1..=c.cap), gen::alphabet(1), false);
            let mut h = g.clone();
            for md in gen::undirected_script(rng, &g, 5, 0.2) {
                h.apply_mod(&md).expect("generated modification is valid");
            }
            h
        })
        .collect();
    let dims: Vec<usize> = graphs.iter().map(LabeledGraph::n).collect();
    let s = NepsState::new(spec, Regime::Undirected, graphs, None)?;
    for xs in node_tuples(&dims) {
        for ys in node_tuples(&dims) {
            let Some((b, d)) = s.parity_system(&xs, &ys) else {
                continue;
            };
            let k = b.num_cols();
            let by_enum = (0u32..1 << k).any(|p| {
                (0..b.num_rows()).all(|i| {
                    let ones = (0..k).filter(|&j| p >> j & 1 == 1 && b.get(i, j)).count();
                    (ones % 2 == 1) == d[i]
                })
            });
            same(b.solvable(&d), by_enum, format_args!("{xs:?} -> {ys:?}"))?;
        }
    }
    Ok(())
}

fn labeled_product(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let m = rng.gen_range(1..=3);
    let al = gen::alphabet(rng.gen_range(1..=2));
    let graphs: Vec<LabeledGraph> = (0..m)
        .map(|_| LabeledGraph::new(rng.gen_range(1..=c.cap), al.clone(), true))
        .collect();
    let mut scripts = factor_scripts(rng, &graphs, Regime::Acyclic, 8);
    let mut s = LabeledProductState::new(graphs)?;
    for step in 0..8 {
        let i = rng.gen_range(0..m);
        if let Some(md) = scripts[i].pop() {
            s.apply(i, &md)?;
        }
        let refs: Vec<&LabeledGraph> = s.factors().iter().collect();
        let p = oracle::labeled_product(&refs, 1 << 12)?;
        let dims: Vec<usize> = refs.iter().map(|g| g.n()).collect();
        for xs in node_tuples(&dims) {
            for ys in node_tuples(&dims) {
                same(s.reach(&xs, &ys)?, p.reach(&xs, &ys), format_args!("step {step}: {xs:?} -> {ys:?}"))?;
            }
        }
    }
    Ok(())
}

/// Rank against the size of the row span, and invariance under replacing a
/// row by a combination that includes it.
fn gf2(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let rows = rng.gen_range(1..=c.cap);
    let cols = rng.gen_range(1..=c.cap);
    let bits: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.5)).collect()).collect();
    let as_word = |row: &[bool]| row.iter().enumerate().fold(0u32, |w, (j, &b)| w | (b as u32) << j);
    let span: BTreeSet<u32> = (0u32..1 << rows)
        .map(|combo| {
            (0..rows)
                .filter(|&r| combo >> r & 1 == 1)
                .fold(0, |acc, r| acc ^ as_word(&bits[r]))
        })
        .collect();
    let rank = Gf2Matrix::from_rows(&bits).rank();
    same(1usize << rank, span.len(), "2^rank vs span size")?;
    let r = rng.gen_range(0..rows);
    let mut replaced = bits.clone();
    for (o, other) in bits.iter().enumerate() {
        if o != r && rng.gen_bool(0.5) {
            for (a, &b) in replaced[r].iter_mut().zip(other) {
                *a ^= b;
            }
        }
    }
    same(Gf2Matrix::from_rows(&replaced).rank(), rank, "rank after row replacement")
}

fn palindrome(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let n = rng.gen_range(1..=c.cap);
    let g = LabeledGraph::new(n, gen::alphabet(rng.gen_range(1..=2)), true);
    let mut s = PalindromeState::new(&g)?;
    for md in gen::dag_script(rng, &g, 12, 0.3) {
        s.apply(&md)?;
        same(s.query(), oracle::palindromes(s.graph(), 1 << 16)?, format_args!("answer after {md}"))?;
    }
    Ok(())
}

fn script_line(al: &Alphabet, m: &Modification) -> String {
    let op = if m.is_insert() { "ins" } else { "del" };
    format!("{op} {} {} {}", al.name(m.sym), m.u, m.v)
}

fn replay(setup: &Setup, script: &str) -> Result<(Vec<String>, Result<(), usize>, Session), Failure> {
    let mut s = Session::new(setup.clone())?;
    let mut out = Vec::new();
    let r = run_script(&mut s, script, &mut |l| out.push(l.to_string())).map_err(|e| e.line);
    Ok((out, r, s))
}

/// A random script, valid up to one randomly placed line that may fail:
/// replaying twice gives identical output, and a failure leaves the output
/// and the state of the script prefix before it.
fn scripts(rng: &mut ChaCha8Rng, c: Ctx) -> TrialResult {
    let programs = [
        Program::Tc,
        Program::Rpq,
        Program::Cfl,
        Program::DistIns,
        Program::DistAcyclic,
        Program::DistUndirected,
        Program::Palindrome,
        Program::Neps,
    ];
    let program = programs[c.index % programs.len()];
    let n = rng.gen_range(3..=c.cap);
    let al = gen::alphabet(2);
    let directed = program != Program::DistUndirected;
    let g0 = LabeledGraph::new(n, al.clone(), directed);
    let mut setup = Setup::new(program, g0.clone());
    match program {
        Program::Rpq => setup.dfa = Some(gen::dfa(rng, &al, 3)),
        Program::Cfl => setup.grammar = Some(gen::dyck(&al)),
        Program::DistIns => setup.lmax = Some(2 * n),
        Program::Neps => {
            setup.neps = Some(gen::neps(rng, 2, 3));
            setup.regime = Some(Regime::Acyclic);
        }
        _ => {}
    }
    let mods = match program {
        Program::Rpq | Program::DistIns => gen::insert_script(rng, &g0, 8),
        Program::DistUndirected => gen::undirected_script(rng, &g0, 8, 0.3),
        _ => gen::dag_script(rng, &g0, 8, 0.3),
    };
    let mut lines: Vec<String> = Vec::new();
    for m in &mods {
        lines.push(script_line(&al, m));
        if rng.gen_bool(0.4) {
            lines.push("query".into());
        }
        if program == Program::Neps && rng.gen_bool(0.2) {
            lines.push(format!("flip {} {}", rng.gen_range(0..3), rng.gen_range(0..2)));
        }
    }
    let bad = match rng.gen_range(0..3) {
        0 => format!("ins a {} {}", rng.gen_range(0..n), rng.gen_range(0..n)),
        1 => format!("del b {} {}", rng.gen_range(0..n), rng.gen_range(0..n)),
        _ => format!("ins a 0 {n}"),
    };
    let at = rng.gen_range(0..=lines.len());
    lines.insert(at, bad);
    lines.push("query".into());
    let script = lines.join("\n");

    let (out1, r1, s1) = replay(&setup, &script)?;
    let (out2, r2, _) = replay(&setup, &script)?;
    same(&out1, &out2, "two replays")?;
    same(r1, r2, "two replays")?;
    if let Err(line) = r1 {
        let prefix = lines[..line - 1].join("\n");
        let (out_p, r_p, s_p) = replay(&setup, &prefix)?;
        same(r_p, Ok(()), "prefix replay")?;
        same(&out1, &out_p, format_args!("output before failing line {line}"))?;
        same(s1.answer(&[])?, s_p.answer(&[])?, "state after the failing line")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names: BTreeSet<&str> = SUITES.iter().map(|s| s.name).collect();
        assert_eq!(names.len(), SUITES.len());
    }

    #[test]
    fn every_suite_passes_a_few_trials() {
        for s in suites() {
            let o = s.run(3, 7, None);
            assert!(o.failures.is_empty(), "{}: {:?}", s.name, o.failures);
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let s = find("rpq").unwrap();
        let a: Vec<u32> = (0..4).map(|_| s.rng(1, 2).gen()).collect();
        let b: Vec<u32> = (0..4).map(|_| s.rng(1, 2).gen()).collect();
        assert_eq!(a, b);
        assert_ne!(s.rng(1, 2).gen::<u64>(), s.rng(1, 3).gen::<u64>());
    }
}
