use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{parse_usize, strip_comment, Alphabet, Sym};

/// Total deterministic automaton over a graph alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    num_states: usize,
    start: usize,
    finals: Vec<bool>,
    delta: Vec<usize>,
}

impl Dfa {
    /// Builds a DFA from a partial transition list, adding a rejecting sink
    /// when some `(state, symbol)` pair has no transition.
    pub fn new(
        alphabet: Alphabet,
        num_states: usize,
        start: usize,
        finals: &[usize],
        transitions: &[(usize, Sym, usize)],
    ) -> Result<Dfa> {
        if num_states == 0 || start >= num_states {
            return Err(Error::Invalid(format!(
                "start state {start} outside 0..{num_states}"
            )));
        }
        let k = alphabet.len();
        let mut delta = vec![usize::MAX; num_states * k];
        for &(p, a, q) in transitions {
            if p >= num_states || q >= num_states {
                return Err(Error::Invalid(format!("transition {p} -> {q} out of range")));
            }
            if a.index() >= k {
                return Err(Error::UnknownSymbol(format!("#{}", a.0)));
            }
            let slot = &mut delta[p * k + a.index()];
            if *slot != usize::MAX && *slot != q {
                return Err(Error::NondeterministicSpec {
                    state: p,
                    sym: alphabet.name(a).to_string(),
                });
            }
            *slot = q;
        }
        let mut fin = vec![false; num_states];
        for &f in finals {
            if f >= num_states {
                return Err(Error::Invalid(format!("final state {f} out of range")));
            }
            fin[f] = true;
        }
        let mut n = num_states;
        if delta.contains(&usize::MAX) {
            let sink = n;
            n += 1;
            fin.push(false);
            delta.extend(std::iter::repeat(sink).take(k));
            for d in &mut delta {
                if *d == usize::MAX {
                    *d = sink;
                }
            }
        }
        Ok(Dfa {
            alphabet,
            num_states: n,
            start,
            finals: fin,
            delta,
        })
    }

    /// Parses either `regex <expr>` or the explicit format
    /// `states / start / final / trans`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Dfa> {
        let mut states = None;
        let mut start = None;
        let mut finals = Vec::new();
        let mut trans = Vec::new();
        let mut regex = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            let Some((head, rest)) = body.split_once(char::is_whitespace).or_else(|| {
                (!body.is_empty()).then_some((body, ""))
            }) else {
                continue;
            };
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let at = |e: Error| Error::parse(line, e.to_string());
            match head {
                "regex" => regex = Some((line, rest.trim().to_string())),
                "states" => {
                    let [q] = toks[..] else {
                        return Err(Error::parse(line, "expected `states <count>`"));
                    };
                    states = Some(parse_usize(q, line)?);
                }
                "start" => {
                    let [q] = toks[..] else {
                        return Err(Error::parse(line, "expected `start <state>`"));
                    };
                    start = Some(parse_usize(q, line)?);
                }
                "final" => {
                    for t in toks {
                        finals.push(parse_usize(t, line)?);
                    }
                }
                "trans" => {
                    let [p, a, q] = toks[..] else {
                        return Err(Error::parse(line, "expected `trans <p> <sym> <q>`"));
                    };
                    let sym = alphabet.lookup(a).map_err(at)?;
                    trans.push((parse_usize(p, line)?, sym, parse_usize(q, line)?));
                }
                other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
            }
        }
        if let Some((line, expr)) = regex {
            return Dfa::from_regex(alphabet, &expr).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(line, msg),
                e => Error::parse(line, e.to_string()),
            });
        }
        let states = states.ok_or_else(|| Error::parse(0, "missing `states`"))?;
        let start = start.ok_or_else(|| Error::parse(0, "missing `start`"))?;
        Dfa::new(alphabet.clone(), states, start, &finals, &trans)
    }

    /// Compiles a regular expression: single characters are symbols, `[name]`
    /// names a multi-character symbol, `.` is any symbol and `()` is the empty
    /// word. Operators: `|`, `*`, `+`, `?`, parentheses. Whitespace is ignored.
    pub fn from_regex(alphabet: &Alphabet, expr: &str) -> Result<Dfa> {
        let ast = RegexParser::new(expr, alphabet).parse()?;
        let mut nfa = Thompson::default();
        let (s, f) = nfa.build(&ast, alphabet.len());
        Ok(nfa.determinize(alphabet.clone(), s, f).minimized())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_states).filter(|&q| self.finals[q])
    }

    #[inline]
    pub fn step(&self, p: usize, a: Sym) -> usize {
        self.delta[p * self.alphabet.len() + a.index()]
    }

    pub fn run(&self, word: &[Sym]) -> usize {
        word.iter().fold(self.start, |q, &a| self.step(q, a))
    }

    pub fn accepts(&self, word: &[Sym]) -> bool {
        self.finals[self.run(word)]
    }

    pub fn accepts_empty(&self) -> bool {
        self.finals[self.start]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Sym, usize)> + '_ {
        let syms: Vec<Sym> = self.alphabet.symbols().collect();
        (0..self.num_states).flat_map(move |p| {
            syms.clone().into_iter().map(move |a| (p, a, self.step(p, a)))
        })
    }

    /// Moore partition refinement over reachable states.
    pub fn minimized(&self) -> Dfa {
        let k = self.alphabet.len();
        let mut reach = vec![false; self.num_states];
        let mut stack = vec![self.start];
        reach[self.start] = true;
        while let Some(p) = stack.pop() {
            for a in self.alphabet.symbols() {
                let q = self.step(p, a);
                if !reach[q] {
                    reach[q] = true;
                    stack.push(q);
                }
            }
        }
        let live: Vec<usize> = (0..self.num_states).filter(|&q| reach[q]).collect();
        let mut class = vec![0usize; self.num_states];
        for &q in &live {
            class[q] = usize::from(self.finals[q]);
        }
        let mut count = 0;
        loop {
            let mut sigs: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![0usize; self.num_states];
            for &q in &live {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[q]);
                sig.extend(self.alphabet.symbols().map(|a| class[self.step(q, a)]));
                let fresh = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(fresh);
            }
            let classes = sigs.len();
            class = next;
            if classes == count {
                break;
            }
            count = classes;
        }
        // renumber so the start state's class is 0 and numbering follows BFS
        let mut order = vec![usize::MAX; count];
        let mut queue = std::collections::VecDeque::from([self.start]);
        let mut seen = vec![false; self.num_states];
        seen[self.start] = true;
        let mut next_id = 0;
        while let Some(p) = queue.pop_front() {
            if order[class[p]] == usize::MAX {
                order[class[p]] = next_id;
                next_id += 1;
            }
            for a in self.alphabet.symbols() {
                let q = self.step(p, a);
                if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        let mut delta = vec![0; count * k];
        let mut finals = vec![false; count];
        for &q in &live {
            let c = order[class[q]];
            finals[c] = self.finals[q];
            for a in self.alphabet.symbols() {
                delta[c * k + a.index()] = order[class[self.step(q, a)]];
            }
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            num_states: count,
            start: 0,
            finals,
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Regex {
    Empty,
    Sym(Sym),
    Any,
    Cat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

struct RegexParser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> RegexParser<'a> {
    fn new(src: &str, alphabet: &'a Alphabet) -> Self {
        RegexParser {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            alphabet,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(1, format!("regex at column {}: {}", self.pos + 1, msg.into()))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Regex> {
        let r = self.alt()?;
        if let Some(c) = self.peek() {
            return Err(self.err(format!("unexpected `{c}`")));
        }
        Ok(r)
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut r = self.concat()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.concat()?;
            r = Regex::Alt(Box::new(r), Box::new(rhs));
        }
        Ok(r)
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut r: Option<Regex> = None;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let next = self.postfix()?;
            r = Some(match r {
                None => next,
                Some(prev) => Regex::Cat(Box::new(prev), Box::new(next)),
            });
        }
        r.ok_or_else(|| self.err("empty alternative; write `()` for the empty word"))
    }

    fn postfix(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        while let Some(c) = self.peek() {
            r = match c {
                '*' => Regex::Star(Box::new(r)),
                '+' => Regex::Cat(Box::new(r.clone()), Box::new(Regex::Star(Box::new(r)))),
                '?' => Regex::Alt(Box::new(r), Box::new(Regex::Empty)),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match c {
            '(' => {
                if self.peek() == Some(')') {
                    self.pos += 1;
                    return Ok(Regex::Empty);
                }
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.err("missing `)`"));
                }
                self.pos += 1;
                Ok(r)
            }
            '.' => Ok(Regex::Any),
            '[' => {
                let end = self.chars[self.pos..]
                    .iter()
                    .position(|&c| c == ']')
                    .ok_or_else(|| self.err("missing `]`"))?;
                let name: String = self.chars[self.pos..self.pos + end].iter().collect();
                self.pos += end + 1;
                self.symbol(&name)
            }
            '*' | '+' | '?' | '|' | ')' | ']' => Err(self.err(format!("unexpected `{c}`"))),
            c => self.symbol(&c.to_string()),
        }
    }

    fn symbol(&self, name: &str) -> Result<Regex> {
        self.alphabet
            .lookup(name)
            .map(Regex::Sym)
            .map_err(|e| self.err(e.to_string()))
    }
}

#[derive(Default)]
struct Thompson {
    eps: Vec<Vec<usize>>,
    sym: Vec<Vec<(usize, usize)>>,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.sym.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &Regex, k: usize) -> (usize, usize) {
        let s = self.state();
        let f = self.state();
        match r {
            Regex::Empty => self.eps[s].push(f),
            Regex::Sym(a) => self.sym[s].push((a.index(), f)),
            Regex::Any => {
                for a in 0..k {
                    self.sym[s].push((a, f));
                }
            }
            Regex::Cat(a, b) => {
                let (s1, f1) = self.build(a, k);
                let (s2, f2) = self.build(b, k);
                self.eps[s].push(s1);
                self.eps[f1].push(s2);
                self.eps[f2].push(f);
            }
            Regex::Alt(a, b) => {
                for r in [a, b] {
                    let (s1, f1) = self.build(r, k);
                    self.eps[s].push(s1);
                    self.eps[f1].push(f);
                }
            }
            Regex::Star(a) => {
                let (s1, f1) = self.build(a, k);
                self.eps[s].extend([s1, f]);
                self.eps[f1].extend([s1, f]);
            }
        }
        (s, f)
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(p) = stack.pop() {
            for &q in &self.eps[p] {
                if set.insert(q) {
                    stack.push(q);
                }
            }
        }
    }

    fn determinize(&self, alphabet: Alphabet, start: usize, fin: usize) -> Dfa {
        let k = alphabet.len();
        let mut init = BTreeSet::from([start]);
        self.closure(&mut init);
        let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::from([(init.clone(), 0)]);
        let mut sets = vec![init];
        let mut delta = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            for a in 0..k {
                let mut next = BTreeSet::new();
                for &p in &sets[i] {
                    for &(b, q) in &self.sym[p] {
                        if b == a {
                            next.insert(q);
                        }
                    }
                }
                self.closure(&mut next);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        ids.insert(next.clone(), sets.len());
                        sets.push(next);
                        sets.len() - 1
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        Dfa {
            alphabet,
            num_states: sets.len(),
            start: 0,
            finals: sets.iter().map(|s| s.contains(&fin)).collect(),
            delta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::letters("ab")
    }

    fn word(s: &str) -> Vec<Sym> {
        let al = ab();
        s.chars().map(|c| al.lookup(&c.to_string()).unwrap()).collect()
    }

    #[test]
    fn a_star_is_one_state_plus_sink() {
        let d = Dfa::from_regex(&ab(), "a*").unwrap();
        assert_eq!(d.num_states(), 2);
        assert!(d.is_final(d.start()));
        assert_eq!(d.step(d.start(), Sym(0)), d.start());
        let sink = d.step(d.start(), Sym(1));
        assert!(!d.is_final(sink));
    }

    #[test]
    fn fixed_word_is_a_chain() {
        let d = Dfa::from_regex(&ab(), "aaa").unwrap();
        assert_eq!(d.num_states(), 5);
        assert!(d.accepts(&word("aaa")));
        assert!(!d.accepts(&word("aa")));
        assert_eq!(d.finals().count(), 1);
    }

    #[test]
    fn explicit_format_completes_with_sink() {
        let text = "states 2\nstart 0\nfinal 1\ntrans 0 a 1\n";
        let d = Dfa::parse(text, &ab()).unwrap();
        assert_eq!(d.num_states(), 3);
        assert!(d.accepts(&word("a")));
        assert!(!d.accepts(&word("ab")));
        assert!(!d.accepts(&word("b")));
    }

    #[test]
    fn duplicate_transition_rejected() {
        let text = "states 2\nstart 0\nfinal 1\ntrans 0 a 1\ntrans 0 a 0\n";
        assert!(matches!(
            Dfa::parse(text, &ab()),
            Err(Error::NondeterministicSpec { state: 0, .. })
        ));
    }

    #[test]
    fn regex_operators() {
        let d = Dfa::from_regex(&ab(), "(ab)+|()").unwrap();
        for (w, ok) in [("", true), ("ab", true), ("abab", true), ("a", false), ("ba", false)] {
            assert_eq!(d.accepts(&word(w)), ok, "{w}");
        }
        let d = Dfa::from_regex(&ab(), "a?.b").unwrap();
        for (w, ok) in [("ab", true), ("bb", true), ("abb", true), ("b", false), ("aab", true)] {
            assert_eq!(d.accepts(&word(w)), ok, "{w}");
        }
    }

    #[test]
    fn bracketed_symbol_names() {
        let al = Alphabet::new(["knows", "likes"]).unwrap();
        let d = Dfa::from_regex(&al, "[knows]+[likes]").unwrap();
        assert!(d.accepts(&[Sym(0), Sym(0), Sym(1)]));
        assert!(!d.accepts(&[Sym(1)]));
    }

    #[test]
    fn regex_errors() {
        assert!(Dfa::from_regex(&ab(), "a|").is_err());
        assert!(Dfa::from_regex(&ab(), "(a").is_err());
        assert!(matches!(
            Dfa::parse("regex c", &ab()),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
