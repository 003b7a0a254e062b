//! Script replay: a loaded program answers `query` lines while the script
//! modifies the graph.
//!
//! Script lines are `ins <σ> <u> <v> [@i]`, `del <σ> <u> <v> [@i]`,
//! `flip <rule> <bit>` and `query [<node>...]`. `@i` addresses one factor or
//! copy; without it a modification goes to all of them. `query` arguments
//! restrict the answer to tuples starting with those nodes. `#` starts a
//! comment.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::cfl::CflState;
use crate::dist::{AcyDistState, InsDistState, ParikhState, PathLengths, UndirDistState};
use crate::ecrpq::{CrpqState, EcrpqPlan, EcrpqState};
use crate::error::{Error, Result};
use crate::graph::{Alphabet, LabeledGraph, Modification, TcState};
use crate::product::{NepsState, PalindromeState, ProductState, Regime};
use crate::rpq::RpqState;
use crate::specs::{CnfGrammar, Dfa, EcrpqQuery, NepsSpec, PathAtom, RelAtom, SyncAutomaton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Program {
    Tc,
    Rpq,
    Cfl,
    DistIns,
    DistAcyclic,
    DistUndirected,
    Parikh,
    Crpq,
    Ecrpq,
    Product,
    Neps,
    Palindrome,
}

impl Program {
    pub const ALL: [Program; 12] = [
        Program::Tc,
        Program::Rpq,
        Program::Cfl,
        Program::DistIns,
        Program::DistAcyclic,
        Program::DistUndirected,
        Program::Parikh,
        Program::Crpq,
        Program::Ecrpq,
        Program::Product,
        Program::Neps,
        Program::Palindrome,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Program::Tc => "tc",
            Program::Rpq => "rpq",
            Program::Cfl => "cfl",
            Program::DistIns => "dist-ins",
            Program::DistAcyclic => "dist-acyclic",
            Program::DistUndirected => "dist-undirected",
            Program::Parikh => "parikh",
            Program::Crpq => "crpq",
            Program::Ecrpq => "ecrpq",
            Program::Product => "product",
            Program::Neps => "neps",
            Program::Palindrome => "palindrome",
        }
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Program> {
        Program::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown program `{s}`")))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a program may need, already parsed.
#[derive(Debug, Clone)]
pub struct Setup {
    pub program: Program,
    /// One graph, or one per factor/copy.
    pub graphs: Vec<LabeledGraph>,
    pub dfa: Option<Dfa>,
    pub grammar: Option<CnfGrammar>,
    pub query: Option<EcrpqQuery>,
    pub neps: Option<NepsSpec>,
    pub lmax: Option<usize>,
    pub regime: Option<Regime>,
}

impl Setup {
    pub fn new(program: Program, graph: LabeledGraph) -> Setup {
        Setup {
            program,
            graphs: vec![graph],
            dfa: None,
            grammar: None,
            query: None,
            neps: None,
            lmax: None,
            regime: None,
        }
    }
}

/// The query over `m` paths whose labels the relation accepts, with all
/// endpoints in the head.
pub fn relation_query(a: SyncAutomaton) -> Result<EcrpqQuery> {
    let m = a.arity();
    let vars = (0..m).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect();
    let atoms = (0..m)
        .map(|i| PathAtom {
            x: 2 * i,
            path: format!("p{i}"),
            y: 2 * i + 1,
        })
        .collect();
    let alphabet = a.alphabet().clone();
    let rel = RelAtom {
        automaton: a,
        paths: (0..m).collect(),
    };
    EcrpqQuery::new(alphabet, vars, (0..2 * m).collect(), atoms, vec![rel], vec![])
}

/// A query answer. Product programs split each tuple into source and target
/// node tuples for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub split: Option<usize>,
    pub tuples: BTreeSet<Vec<usize>>,
}

fn fmt_tuple(t: &[usize]) -> String {
    let inner: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

impl Answer {
    /// One line per tuple in lexicographic order, each prefixed by `line:`.
    pub fn lines(&self, line: usize) -> Vec<String> {
        if self.tuples.is_empty() {
            return vec![format!("{line}: (empty)")];
        }
        self.tuples
            .iter()
            .map(|t| match self.split {
                Some(k) => format!("{line}: ({},{})", fmt_tuple(&t[..k]), fmt_tuple(&t[k..])),
                None => format!("{line}: {}", fmt_tuple(t)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Modify { m: Modification, target: Option<usize> },
    Flip { rule: usize, bit: usize },
    Query(Vec<usize>),
}

fn parse_num(tok: &str, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Invalid(format!("expected {what}, got `{tok}`")))
}

/// Parses one script line; `None` for blank and comment lines.
pub fn parse_command(line: &str, alphabet: &Alphabet) -> Result<Option<Command>> {
    let line = line.split('#').next().unwrap_or("");
    let toks: Vec<&str> = line.split_whitespace().collect();
    let Some(&head) = toks.first() else {
        return Ok(None);
    };
    let cmd = match head {
        "ins" | "del" => {
            let (args, target) = match toks.last() {
                Some(t) if t.starts_with('@') => {
                    (&toks[1..toks.len() - 1], Some(parse_num(&t[1..], "a factor index")?))
                }
                _ => (&toks[1..], None),
            };
            let [sym, u, v] = args else {
                return Err(Error::Invalid(format!("expected `{head} <symbol> <u> <v> [@i]`")));
            };
            let sym = alphabet.lookup(sym)?;
            let (u, v) = (parse_num(u, "a node")?, parse_num(v, "a node")?);
            let m = if head == "ins" {
                Modification::insert(sym, u, v)
            } else {
                Modification::delete(sym, u, v)
            };
            Command::Modify { m, target }
        }
        "flip" => {
            let [_, rule, bit] = toks[..] else {
                return Err(Error::Invalid("expected `flip <rule> <bit>`".into()));
            };
            Command::Flip {
                rule: parse_num(rule, "a rule index")?,
                bit: parse_num(bit, "a factor index")?,
            }
        }
        "query" => Command::Query(
            toks[1..]
                .iter()
                .map(|t| parse_num(t, "a node"))
                .collect::<Result<_>>()?,
        ),
        _ => return Err(Error::Invalid(format!("unknown command `{head}`"))),
    };
    Ok(Some(cmd))
}

#[derive(Debug, Clone)]
enum Engine {
    Tc { graph: LabeledGraph, tc: TcState },
    Rpq(RpqState),
    Cfl(CflState),
    DistIns { graph: LabeledGraph, dist: InsDistState },
    DistAcyclic(AcyDistState),
    DistUndirected { dist: UndirDistState, bound: usize },
    Parikh { graph: LabeledGraph, state: ParikhState },
    Crpq(CrpqState),
    Ecrpq(EcrpqState),
    Product(ProductState),
    Neps(NepsState),
    Palindrome(PalindromeState),
}

/// A program loaded on its graph, ready to replay script lines.
#[derive(Debug, Clone)]
pub struct Session {
    alphabet: Alphabet,
    engine: Engine,
}

fn single(setup: &Setup) -> Result<LabeledGraph> {
    match &setup.graphs[..] {
        [g] => Ok(g.clone()),
        _ => Err(Error::Invalid(format!("the {} program takes exactly one graph", setup.program))),
    }
}

fn need<T: Clone>(x: &Option<T>, flag: &str, program: Program) -> Result<T> {
    x.clone()
        .ok_or_else(|| Error::Invalid(format!("the {program} program needs {flag}")))
}

fn replay(g: &LabeledGraph, mut apply: impl FnMut(&Modification) -> Result<()>) -> Result<()> {
    for e in g.edges() {
        if g.is_directed() || e.u <= e.v {
            apply(&Modification::insert(e.sym, e.u, e.v))?;
        }
    }
    Ok(())
}

/// `m` copies of the setup's graphs: the given ones, or the single graph
/// repeated.
fn copies(setup: &Setup, m: usize) -> Result<Vec<LabeledGraph>> {
    match setup.graphs.len() {
        1 => Ok(vec![setup.graphs[0].clone(); m]),
        k if k == m => Ok(setup.graphs.clone()),
        k => Err(Error::Invalid(format!("{k} graphs given, {m} needed"))),
    }
}

fn default_regime(setup: &Setup) -> Regime {
    setup.regime.unwrap_or(if setup.graphs.iter().all(LabeledGraph::is_directed) {
        Regime::InsertOnly
    } else {
        Regime::Undirected
    })
}

impl Session {
    pub fn new(setup: Setup) -> Result<Session> {
        let p = setup.program;
        let first = setup
            .graphs
            .first()
            .ok_or_else(|| Error::Invalid("no graph given".into()))?;
        let alphabet = first.alphabet().clone();
        if setup.graphs.iter().any(|g| g.alphabet() != &alphabet) {
            return Err(Error::Invalid("all graphs must share one alphabet".into()));
        }
        let engine = match p {
            Program::Tc => {
                let g = single(&setup)?;
                let mut graph = LabeledGraph::new(g.n(), alphabet.clone(), g.is_directed());
                let mut tc = TcState::new(g.n());
                replay(&g, |m| tc.apply(&mut graph, m))?;
                Engine::Tc { graph, tc }
            }
            Program::Rpq => {
                let g = single(&setup)?;
                let mut s = RpqState::new(need(&setup.dfa, "--dfa", p)?, g.n());
                if !g.is_directed() {
                    return Err(Error::Invalid("the rpq program needs a directed graph".into()));
                }
                replay(&g, |m| s.apply(m))?;
                Engine::Rpq(s)
            }
            Program::Cfl => Engine::Cfl(CflState::from_graph(
                need(&setup.grammar, "--grammar", p)?,
                &single(&setup)?,
            )?),
            Program::DistIns => {
                let g = single(&setup)?;
                if !g.is_directed() {
                    return Err(Error::Invalid("the dist-ins program needs a directed graph".into()));
                }
                let mut dist = InsDistState::new(g.n(), setup.lmax)?;
                replay(&g, |m| dist.apply(m))?;
                Engine::DistIns { graph: g, dist }
            }
            Program::DistAcyclic => {
                let g = single(&setup)?;
                if !g.is_directed() {
                    return Err(Error::Invalid("the dist-acyclic program needs a directed graph".into()));
                }
                let mut s = AcyDistState::new(alphabet.clone(), g.n());
                replay(&g, |m| s.apply(m))?;
                Engine::DistAcyclic(s)
            }
            Program::DistUndirected => {
                let g = single(&setup)?;
                let bound = setup.lmax.unwrap_or(2 * g.n() + 2);
                Engine::DistUndirected {
                    dist: UndirDistState::from_graph(g)?,
                    bound,
                }
            }
            Program::Parikh => {
                let g = single(&setup)?;
                if !g.is_directed() {
                    return Err(Error::Invalid("the parikh program needs a directed graph".into()));
                }
                let mut state = ParikhState::new(g.n(), alphabet.len(), setup.lmax.unwrap_or(g.n()))?;
                replay(&g, |m| state.apply(m))?;
                Engine::Parikh { graph: g, state }
            }
            Program::Crpq => Engine::Crpq(CrpqState::new(
                need(&setup.query, "--ecrpq or --sync", p)?,
                &single(&setup)?,
                setup.lmax,
            )?),
            Program::Ecrpq => {
                let plan = EcrpqPlan::compile(need(&setup.query, "--ecrpq or --sync", p)?)?;
                let cs = copies(&setup, plan.tapes())?;
                Engine::Ecrpq(EcrpqState::from_copies(plan, cs)?)
            }
            Program::Product => Engine::Product(ProductState::new(
                default_regime(&setup),
                setup.graphs.clone(),
                setup.lmax,
            )?),
            Program::Neps => {
                let spec = need(&setup.neps, "--neps", p)?;
                let cs = copies(&setup, spec.factors())?;
                Engine::Neps(NepsState::new(spec, default_regime(&setup), cs, setup.lmax)?)
            }
            Program::Palindrome => Engine::Palindrome(PalindromeState::new(&single(&setup)?)?),
        };
        Ok(Session { alphabet, engine })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Runs one command. On error the session is left as it was.
    pub fn execute(&mut self, cmd: &Command) -> Result<Option<Answer>> {
        match cmd {
            Command::Query(prefix) => self.answer(prefix).map(Some),
            Command::Modify { m, target } => {
                let mut next = self.engine.clone();
                next.modify(m, *target)?;
                self.engine = next;
                Ok(None)
            }
            Command::Flip { rule, bit } => match &mut self.engine {
                Engine::Neps(s) => s.flip(*rule, *bit).map(|_| None),
                _ => Err(Error::Invalid("`flip` applies to the neps program only".into())),
            },
        }
    }

    /// The current answer, restricted to tuples starting with `prefix`.
    pub fn answer(&self, prefix: &[usize]) -> Result<Answer> {
        let keep = |t: &Vec<usize>| t.len() >= prefix.len() && t[..prefix.len()] == *prefix;
        let pairs = |set: BTreeSet<(usize, usize)>| -> BTreeSet<Vec<usize>> {
            set.into_iter().map(|(x, y)| vec![x, y]).collect()
        };
        let mut split = None;
        let tuples: BTreeSet<Vec<usize>> = match &self.engine {
            Engine::Tc { tc, .. } => tc.pairs().into_iter().map(|(x, y)| vec![x, y]).collect(),
            Engine::Rpq(s) => pairs(s.query()),
            Engine::Cfl(s) => pairs(s.query()),
            Engine::DistIns { graph, dist } => lengths(dist, graph.n(), dist.lmax(), prefix)?,
            Engine::DistAcyclic(s) => lengths(s, s.graph().n(), s.graph().n().saturating_sub(1), prefix)?,
            Engine::DistUndirected { dist, bound } => lengths(dist, dist.graph().n(), *bound, prefix)?,
            Engine::Parikh { graph, state } => {
                let n = graph.n();
                let mut out = BTreeSet::new();
                for x in 0..n {
                    for y in 0..n {
                        for v in state.vectors(x, y) {
                            out.insert([vec![x, y], v].concat());
                        }
                    }
                }
                out
            }
            Engine::Crpq(s) => s.query(),
            Engine::Ecrpq(s) => s.query(),
            Engine::Product(s) => {
                let dims: Vec<usize> = s.graphs().iter().map(|g| g.n()).collect();
                split = Some(dims.len());
                product_pairs(&dims, prefix, |xs, ys| s.reach(xs, ys))?
            }
            Engine::Neps(s) => {
                let dims: Vec<usize> = s.graphs().iter().map(|g| g.n()).collect();
                split = Some(dims.len());
                product_pairs(&dims, prefix, |xs, ys| s.reach(xs, ys))?
            }
            Engine::Palindrome(s) => pairs(s.query()),
        };
        Ok(Answer {
            split,
            tuples: tuples.into_iter().filter(keep).collect(),
        })
    }
}

impl Engine {
    fn modify(&mut self, m: &Modification, target: Option<usize>) -> Result<()> {
        let single_target = || match target {
            None | Some(0) => Ok(()),
            Some(i) => Err(Error::Invalid(format!("factor @{i} out of range; there is one graph"))),
        };
        match self {
            Engine::Ecrpq(s) => match target {
                Some(i) if i >= s.copies().len() => {
                    Err(Error::Invalid(format!("copy @{i} out of range")))
                }
                Some(i) => s.apply(i, m),
                None => s.apply_all(m),
            },
            Engine::Product(s) => {
                let k = s.graphs().len();
                for i in target.map_or(0..k, |i| i..i + 1) {
                    s.apply(i, m)?;
                }
                Ok(())
            }
            Engine::Neps(s) => {
                let k = s.graphs().len();
                for i in target.map_or(0..k, |i| i..i + 1) {
                    s.apply(i, m)?;
                }
                Ok(())
            }
            _ => {
                single_target()?;
                match self {
                    Engine::Tc { graph, tc } => tc.apply(graph, m),
                    Engine::Rpq(s) => s.apply(m),
                    Engine::Cfl(s) => s.apply(m),
                    Engine::DistIns { graph, dist } => {
                        graph.check_mod(m)?;
                        dist.apply(m)?;
                        graph.apply_mod(m).map(|_| ())
                    }
                    Engine::DistAcyclic(s) => s.apply(m),
                    Engine::DistUndirected { dist, .. } => dist.apply(m),
                    Engine::Parikh { graph, state } => {
                        graph.check_mod(m)?;
                        state.apply(m)?;
                        graph.apply_mod(m).map(|_| ())
                    }
                    Engine::Crpq(s) => s.apply(m),
                    Engine::Palindrome(s) => s.apply(m),
                    Engine::Ecrpq(_) | Engine::Product(_) | Engine::Neps(_) => unreachable!(),
                }
            }
        }
    }
}

/// `(x, y, ℓ)` for every length `ℓ ≤ bound` the relation holds.
fn lengths(d: &dyn PathLengths, n: usize, bound: usize, prefix: &[usize]) -> Result<BTreeSet<Vec<usize>>> {
    let mut out = BTreeSet::new();
    for x in (0..n).filter(|&x| prefix.first().is_none_or(|&p| p == x)) {
        for y in (0..n).filter(|&y| prefix.get(1).is_none_or(|&p| p == y)) {
            for l in 0..=bound {
                if d.has_length(x, y, l)? {
                    out.insert(vec![x, y, l]);
                }
            }
        }
    }
    Ok(out)
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

fn product_pairs(
    dims: &[usize],
    prefix: &[usize],
    reach: impl Fn(&[usize], &[usize]) -> Result<bool>,
) -> Result<BTreeSet<Vec<usize>>> {
    let all = node_tuples(dims);
    let mut out = BTreeSet::new();
    for xs in &all {
        for ys in &all {
            let t = [xs.as_slice(), ys.as_slice()].concat();
            if t.iter().zip(prefix).any(|(a, b)| a != b) {
                continue;
            }
            if reach(xs, ys)? {
                out.insert(t);
            }
        }
    }
    Ok(out)
}

/// A script line that failed; everything before it was emitted.
#[derive(Debug)]
pub struct ScriptError {
    pub line: usize,
    pub error: Error,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "script line {}: {}", self.line, self.error)
    }
}

impl std::error::Error for ScriptError {}

/// Replays `script`, passing every output line to `emit`. Stops at the first
/// failing line, with the session as it was before that line.
pub fn run_script(
    session: &mut Session,
    script: &str,
    emit: &mut dyn FnMut(&str),
) -> std::result::Result<(), ScriptError> {
    for (idx, raw) in script.lines().enumerate() {
        let line = idx + 1;
        let fail = |error| ScriptError { line, error };
        let Some(cmd) = parse_command(raw, &session.alphabet).map_err(fail)? else {
            continue;
        };
        if let Some(answer) = session.execute(&cmd).map_err(fail)? {
            for l in answer.lines(line) {
                emit(&l);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_graph() -> LabeledGraph {
        LabeledGraph::parse("domain 3\nalphabet a b\nmode directed\n").unwrap()
    }

    fn run(setup: Setup, script: &str) -> (Vec<String>, Option<usize>) {
        let mut s = Session::new(setup).unwrap();
        let mut out = Vec::new();
        let r = run_script(&mut s, script, &mut |l| out.push(l.to_string()));
        (out, r.err().map(|e| e.line))
    }

    #[test]
    fn rpq_a_star() {
        let g = chain_graph();
        let mut setup = Setup::new(Program::Rpq, g.clone());
        setup.dfa = Some(Dfa::from_regex(g.alphabet(), "a*").unwrap());
        let (out, err) = run(setup, "ins a 0 1\nquery\n");
        assert_eq!(err, None);
        assert_eq!(out, ["2: (0,0)", "2: (0,1)", "2: (1,1)", "2: (2,2)"]);
    }

    #[test]
    fn cfl_cycle_names_line() {
        let g = chain_graph();
        let mut setup = Setup::new(Program::Cfl, g.clone());
        setup.grammar = Some(CnfGrammar::parse("start S\nrule S -> a b\n", g.alphabet()).unwrap());
        let (out, err) = run(setup, "ins a 0 1\nins b 1 2\nquery\nins a 2 0\nquery\n");
        assert_eq!(out, ["3: (0,2)"]);
        assert_eq!(err, Some(4));
    }

    #[test]
    fn failing_line_rolls_back() {
        let mut s = Session::new(Setup::new(Program::Tc, chain_graph())).unwrap();
        let mut out = Vec::new();
        run_script(&mut s, "ins a 0 1\nins a 1 2\n", &mut |l| out.push(l.to_string())).unwrap();
        let before = s.answer(&[]).unwrap();
        assert!(run_script(&mut s, "ins a 2 0\n", &mut |_| {}).is_err());
        assert_eq!(s.answer(&[]).unwrap(), before);
    }

    #[test]
    fn query_prefix_and_empty() {
        let (out, _) = run(Setup::new(Program::Palindrome, chain_graph()), "query\nins a 0 1\nquery 0\nquery 1 0\n");
        assert_eq!(out, ["1: (0,0)", "1: (1,1)", "1: (2,2)", "3: (0,0)", "3: (0,1)", "4: (empty)"]);
    }

    #[test]
    fn neps_flip_and_factor_targets() {
        let g = LabeledGraph::parse("domain 2\nalphabet a\nmode directed\n").unwrap();
        let mut setup = Setup::new(Program::Neps, g);
        setup.neps = Some(NepsSpec::parse("factors 2\nrule 11\n").unwrap());
        setup.regime = Some(Regime::Acyclic);
        let (out, err) = run(setup, "ins a 0 1 @0\nquery 0 0 1\nflip 0 1\nquery 0 0 1\n");
        assert_eq!(err, None);
        assert_eq!(out, ["2: (empty)", "4: ((0,0),(1,0))"]);
    }

    #[test]
    fn bad_lines_are_errors() {
        let al = Alphabet::letters("ab");
        assert!(parse_command("ins c 0 1", &al).is_err());
        assert!(parse_command("ins a 0", &al).is_err());
        assert!(parse_command("frob", &al).is_err());
        assert_eq!(parse_command("  # note", &al).unwrap(), None);
        assert!(matches!(
            parse_command("del b 1 2 @3", &al).unwrap(),
            Some(Command::Modify { target: Some(3), .. })
        ));
    }
}
