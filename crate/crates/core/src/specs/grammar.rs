use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{strip_comment, Alphabet, Sym};

/// Right-hand side item of a general context-free rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Var(usize),
    Term(Sym),
}

/// Context-free grammar in Chomsky normal form. Variable 0 is not special;
/// `start()` names the start variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfGrammar {
    alphabet: Alphabet,
    names: Vec<String>,
    start: usize,
    binary: Vec<(usize, usize, usize)>,
    terminal: Vec<(usize, Sym)>,
    start_eps: bool,
}

impl CnfGrammar {
    /// Builds a grammar that is already in CNF, checking the invariants.
    pub fn new(
        alphabet: Alphabet,
        names: Vec<String>,
        start: usize,
        binary: Vec<(usize, usize, usize)>,
        terminal: Vec<(usize, Sym)>,
        start_eps: bool,
    ) -> Result<CnfGrammar> {
        let v = names.len();
        if start >= v {
            return Err(Error::Invalid("start variable out of range".into()));
        }
        for &(x, y, z) in &binary {
            if x >= v || y >= v || z >= v {
                return Err(Error::Invalid("rule variable out of range".into()));
            }
            if start_eps && (y == start || z == start) {
                return Err(Error::Invalid(
                    "start variable with an epsilon rule occurs on a right-hand side".into(),
                ));
            }
        }
        for &(x, a) in &terminal {
            if x >= v || a.index() >= alphabet.len() {
                return Err(Error::Invalid("terminal rule out of range".into()));
            }
        }
        let mut g = CnfGrammar {
            alphabet,
            names,
            start,
            binary,
            terminal,
            start_eps,
        };
        g.binary.sort_unstable();
        g.binary.dedup();
        g.terminal.sort_unstable();
        g.terminal.dedup();
        Ok(g)
    }

    /// Parses `start <S>` and `rule <X> -> <sym> ...` lines (`eps` for the
    /// empty right-hand side) and normalizes to CNF. Right-hand tokens that
    /// never occur on a left-hand side must be alphabet symbols.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<CnfGrammar> {
        let mut start = None;
        let mut raw: Vec<(usize, String, Vec<String>)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let toks: Vec<&str> = strip_comment(line).split_whitespace().collect();
            match toks.first() {
                None => {}
                Some(&"start") => {
                    let [_, s] = toks[..] else {
                        return Err(Error::parse(line_no, "expected `start <variable>`"));
                    };
                    start = Some(s.to_string());
                }
                Some(&"rule") => {
                    if toks.len() < 4 || toks[2] != "->" {
                        return Err(Error::parse(line_no, "expected `rule <X> -> <symbols>`"));
                    }
                    let rhs: Vec<String> = if toks[3..] == ["eps"] {
                        Vec::new()
                    } else {
                        toks[3..].iter().map(|s| s.to_string()).collect()
                    };
                    raw.push((line_no, toks[1].to_string(), rhs));
                }
                Some(other) => {
                    return Err(Error::parse(line_no, format!("unknown directive `{other}`")))
                }
            }
        }
        let start = start.ok_or_else(|| Error::parse(0, "missing `start`"))?;
        let mut names: Vec<String> = vec![start.clone()];
        for (_, lhs, _) in &raw {
            if !names.contains(lhs) {
                names.push(lhs.clone());
            }
        }
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut rules = Vec::new();
        for (line_no, lhs, rhs) in &raw {
            let mut items = Vec::new();
            for tok in rhs {
                let item = match index.get(tok.as_str()) {
                    Some(&v) => Item::Var(v),
                    None => Item::Term(
                        alphabet
                            .lookup(tok)
                            .map_err(|e| Error::parse(*line_no, e.to_string()))?,
                    ),
                };
                items.push(item);
            }
            rules.push((index[lhs.as_str()], items));
        }
        Ok(to_cnf(alphabet.clone(), names, 0, rules))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn derives_empty(&self) -> bool {
        self.start_eps
    }

    pub fn binary_rules(&self) -> &[(usize, usize, usize)] {
        &self.binary
    }

    pub fn terminal_rules(&self) -> &[(usize, Sym)] {
        &self.terminal
    }

    /// CYK membership test.
    pub fn accepts(&self, word: &[Sym]) -> bool {
        if word.is_empty() {
            return self.start_eps;
        }
        let table = self.cyk_table(word);
        table[0][word.len() - 1].contains(&self.start)
    }

    /// `table[i][j]` holds the variables deriving `word[i..=j]`.
    pub fn cyk_table(&self, word: &[Sym]) -> Vec<Vec<BTreeSet<usize>>> {
        let n = word.len();
        let mut t = vec![vec![BTreeSet::new(); n]; n];
        for (i, &a) in word.iter().enumerate() {
            for &(x, b) in &self.terminal {
                if a == b {
                    t[i][i].insert(x);
                }
            }
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len - 1;
                for m in i..j {
                    for &(x, y, z) in &self.binary {
                        if t[i][m].contains(&y) && t[m + 1][j].contains(&z) {
                            t[i][j].insert(x);
                        }
                    }
                }
            }
        }
        t
    }
}

/// Standard START/TERM/BIN/DEL/UNIT normalization followed by removal of
/// useless variables.
pub fn to_cnf(
    alphabet: Alphabet,
    mut names: Vec<String>,
    start: usize,
    rules: Vec<(usize, Vec<Item>)>,
) -> CnfGrammar {
    let mut rules: BTreeSet<(usize, Vec<Item>)> = rules.into_iter().collect();
    let fresh = |names: &mut Vec<String>, base: &str| {
        let mut name = base.to_string();
        while names.contains(&name) {
            name.push('\'');
        }
        names.push(name);
        names.len() - 1
    };

    // START
    let base = format!("{}0", names[start]);
    let s0 = fresh(&mut names, &base);
    rules.insert((s0, vec![Item::Var(start)]));

    // TERM
    let mut term_var: HashMap<Sym, usize> = HashMap::new();
    let mut next = BTreeSet::new();
    for (x, rhs) in std::mem::take(&mut rules) {
        if rhs.len() < 2 {
            next.insert((x, rhs));
            continue;
        }
        let rhs = rhs
            .into_iter()
            .map(|it| match it {
                Item::Term(a) => Item::Var(*term_var.entry(a).or_insert_with(|| {
                    let v = fresh(&mut names, &format!("T_{}", alphabet.name(a)));
                    next.insert((v, vec![Item::Term(a)]));
                    v
                })),
                v => v,
            })
            .collect();
        next.insert((x, rhs));
    }
    rules = next;

    // BIN
    let mut next = BTreeSet::new();
    for (x, rhs) in std::mem::take(&mut rules) {
        if rhs.len() <= 2 {
            next.insert((x, rhs));
            continue;
        }
        let mut lhs = x;
        for i in 0..rhs.len() - 2 {
            let base = format!("{}_{}", names[x], i + 1);
            let v = fresh(&mut names, &base);
            next.insert((lhs, vec![rhs[i], Item::Var(v)]));
            lhs = v;
        }
        next.insert((lhs, rhs[rhs.len() - 2..].to_vec()));
    }
    rules = next;

    // DEL
    let mut nullable = vec![false; names.len()];
    loop {
        let mut changed = false;
        for (x, rhs) in &rules {
            if !nullable[*x]
                && rhs.iter().all(|it| matches!(it, Item::Var(v) if nullable[*v]))
            {
                nullable[*x] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let start_eps = nullable[s0];
    let mut next = BTreeSet::new();
    for (x, rhs) in &rules {
        match rhs[..] {
            [] => {}
            [a, b] => {
                next.insert((*x, vec![a, b]));
                if matches!(a, Item::Var(v) if nullable[v]) {
                    next.insert((*x, vec![b]));
                }
                if matches!(b, Item::Var(v) if nullable[v]) {
                    next.insert((*x, vec![a]));
                }
            }
            _ => {
                next.insert((*x, rhs.clone()));
            }
        }
    }
    rules = next;

    // UNIT
    let v = names.len();
    let mut unit = vec![vec![false; v]; v];
    for (x, row) in unit.iter_mut().enumerate() {
        row[x] = true;
    }
    loop {
        let mut changed = false;
        for (x, rhs) in &rules {
            if let [Item::Var(y)] = rhs[..] {
                for w in 0..v {
                    if unit[w][*x] && !unit[w][y] {
                        unit[w][y] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut binary = BTreeSet::new();
    let mut terminal = BTreeSet::new();
    for (y, rhs) in &rules {
        for x in (0..v).filter(|&x| unit[x][*y]) {
            match rhs[..] {
                [Item::Term(a)] => {
                    terminal.insert((x, a));
                }
                [Item::Var(b), Item::Var(c)] => {
                    binary.insert((x, b, c));
                }
                _ => {}
            }
        }
    }

    // useless variables
    let mut productive = vec![false; v];
    for &(x, _) in &terminal {
        productive[x] = true;
    }
    loop {
        let mut changed = false;
        for &(x, b, c) in &binary {
            if !productive[x] && productive[b] && productive[c] {
                productive[x] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    binary.retain(|&(x, b, c)| productive[x] && productive[b] && productive[c]);
    let mut reachable = vec![false; v];
    reachable[s0] = true;
    let mut stack = vec![s0];
    while let Some(x) = stack.pop() {
        for &(y, b, c) in &binary {
            if y == x {
                for w in [b, c] {
                    if !reachable[w] {
                        reachable[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
    }
    let mut keep: Vec<usize> = (0..v).filter(|&x| reachable[x] && (productive[x] || x == s0)).collect();
    keep.sort_by_key(|&x| (x != s0, x));
    let mut rename = vec![usize::MAX; v];
    for (i, &x) in keep.iter().enumerate() {
        rename[x] = i;
    }
    let mut kept_names: Vec<String> = keep.iter().map(|&x| names[x].clone()).collect();
    // give the new start the user's start name when the old one disappeared
    if rename[start] == usize::MAX {
        kept_names[0] = names[start].clone();
    }
    let binary = binary
        .into_iter()
        .filter(|&(x, _, _)| rename[x] != usize::MAX)
        .map(|(x, b, c)| (rename[x], rename[b], rename[c]))
        .collect();
    let terminal = terminal
        .into_iter()
        .filter(|&(x, _)| rename[x] != usize::MAX)
        .map(|(x, a)| (rename[x], a))
        .collect();
    CnfGrammar::new(alphabet, kept_names, 0, binary, terminal, start_eps)
        .expect("normalization preserves CNF invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(alphabet: &Alphabet, max_len: usize) -> Vec<Vec<Sym>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for a in alphabet.symbols() {
                    let mut w2: Vec<Sym> = w.clone();
                    w2.push(a);
                    next.push(w2);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn anbn_normalizes() {
        let al = Alphabet::letters("ab");
        let g = CnfGrammar::parse("start S\nrule S -> a S b\nrule S -> eps\n", &al).unwrap();
        assert!(g.derives_empty());
        for &(_, y, z) in g.binary_rules() {
            assert_ne!(y, g.start());
            assert_ne!(z, g.start());
        }
        for w in words(&al, 8) {
            let n = w.len() / 2;
            let expect = w.len() % 2 == 0
                && w[..n].iter().all(|&s| s == Sym(0))
                && w[n..].iter().all(|&s| s == Sym(1));
            assert_eq!(g.accepts(&w), expect, "{w:?}");
        }
    }

    #[test]
    fn dyck_normalizes() {
        let al = Alphabet::new(["(", ")"]).unwrap();
        let g = CnfGrammar::parse("start S\nrule S -> S S\nrule S -> ( S )\nrule S -> eps\n", &al)
            .unwrap();
        let w = |s: &str| -> Vec<Sym> {
            s.chars().map(|c| if c == '(' { Sym(0) } else { Sym(1) }).collect()
        };
        assert!(g.accepts(&w("(())")));
        assert!(g.accepts(&w("()()")));
        assert!(!g.accepts(&w("(()")));
        assert!(!g.accepts(&w(")(")));
    }

    #[test]
    fn cnf_input_is_a_fixpoint_up_to_renaming() {
        let al = Alphabet::letters("ab");
        let text = "start S\nrule S -> A B\nrule A -> a\nrule B -> b\n";
        let g = CnfGrammar::parse(text, &al).unwrap();
        assert_eq!(g.num_vars(), 3);
        assert_eq!(g.binary_rules().len(), 1);
        assert_eq!(g.terminal_rules().len(), 2);
        assert!(!g.derives_empty());
        assert_eq!(g.var_name(g.start()), "S");
    }

    #[test]
    fn empty_language_allowed() {
        let al = Alphabet::letters("a");
        let g = CnfGrammar::parse("start S\nrule S -> S a\n", &al).unwrap();
        assert!(g.binary_rules().is_empty() && g.terminal_rules().is_empty());
        assert!(!g.accepts(&[]) && !g.accepts(&[Sym(0)]));
    }

    #[test]
    fn unknown_terminal_names_line() {
        let al = Alphabet::letters("a");
        assert!(matches!(
            CnfGrammar::parse("start S\nrule S -> a\nrule S -> c\n", &al),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn explicit_cnf_rejects_eps_start_on_rhs() {
        let al = Alphabet::letters("a");
        assert!(CnfGrammar::new(al, vec!["S".into()], 0, vec![(0, 0, 0)], vec![], true).is_err());
    }
}
