use crate::error::{Error, Result};
use crate::graph::{parse_usize, strip_comment, Alphabet, Sym};
use crate::specs::Dfa;

/// One letter of a synchronous automaton: a symbol or `None` (padding) per tape.
pub type Letter = Box<[Option<Sym>]>;

/// Nondeterministic synchronous `m`-tape automaton with end padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncAutomaton {
    arity: usize,
    alphabet: Alphabet,
    num_states: usize,
    start: usize,
    finals: Vec<bool>,
    trans: Vec<(usize, Letter, usize)>,
}

impl SyncAutomaton {
    pub fn new(
        alphabet: Alphabet,
        arity: usize,
        num_states: usize,
        start: usize,
        finals: &[usize],
        trans: Vec<(usize, Letter, usize)>,
    ) -> Result<SyncAutomaton> {
        if arity == 0 {
            return Err(Error::Invalid("arity must be positive".into()));
        }
        if start >= num_states {
            return Err(Error::Invalid(format!("start state {start} out of range")));
        }
        let mut fin = vec![false; num_states];
        for &f in finals {
            *fin.get_mut(f)
                .ok_or_else(|| Error::Invalid(format!("final state {f} out of range")))? = true;
        }
        for (p, letter, q) in &trans {
            if *p >= num_states || *q >= num_states {
                return Err(Error::Invalid(format!("transition {p} -> {q} out of range")));
            }
            if letter.len() != arity {
                return Err(Error::Invalid(format!(
                    "letter of width {} on a {arity}-tape automaton",
                    letter.len()
                )));
            }
            if letter.iter().all(Option::is_none) {
                return Err(Error::Invalid("letter pads every tape".into()));
            }
        }
        let mut a = SyncAutomaton {
            arity,
            alphabet,
            num_states,
            start,
            finals: fin,
            trans,
        };
        a.trans.sort();
        a.trans.dedup();
        Ok(a)
    }

    /// Parses `arity / states / start / final / trans <p> <s1,...,sm> <q>`
    /// with `_` for padding.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<SyncAutomaton> {
        let (mut arity, mut states, mut start) = (None, None, None);
        let mut finals = Vec::new();
        let mut trans = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            let one = |what: &str| -> Result<usize> {
                match toks[1..] {
                    [v] => parse_usize(v, line),
                    _ => Err(Error::parse(line, format!("expected `{what} <n>`"))),
                }
            };
            match toks.first() {
                None => {}
                Some(&"arity") => arity = Some(one("arity")?),
                Some(&"states") => states = Some(one("states")?),
                Some(&"start") => start = Some(one("start")?),
                Some(&"final") => {
                    for t in &toks[1..] {
                        finals.push(parse_usize(t, line)?);
                    }
                }
                Some(&"trans") => {
                    let [_, p, letter, q] = toks[..] else {
                        return Err(Error::parse(line, "expected `trans <p> <s1,..,sm> <q>`"));
                    };
                    let letter = letter
                        .split(',')
                        .map(|s| match s {
                            "_" => Ok(None),
                            s => alphabet
                                .lookup(s)
                                .map(Some)
                                .map_err(|e| Error::parse(line, e.to_string())),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    trans.push((
                        line,
                        parse_usize(p, line)?,
                        letter.into_boxed_slice(),
                        parse_usize(q, line)?,
                    ));
                }
                Some(other) => {
                    return Err(Error::parse(line, format!("unknown directive `{other}`")))
                }
            }
        }
        let arity = arity.ok_or_else(|| Error::parse(0, "missing `arity`"))?;
        let states = states.ok_or_else(|| Error::parse(0, "missing `states`"))?;
        let start = start.ok_or_else(|| Error::parse(0, "missing `start`"))?;
        for (line, _, letter, _) in &trans {
            if letter.len() != arity {
                return Err(Error::parse(*line, format!("letter width differs from arity {arity}")));
            }
            if letter.iter().all(Option::is_none) {
                return Err(Error::parse(*line, "letter pads every tape"));
            }
        }
        let trans = trans.into_iter().map(|(_, p, l, q)| (p, l, q)).collect();
        SyncAutomaton::new(alphabet.clone(), arity, states, start, &finals, trans)
    }

    /// The 1-tape automaton of a DFA.
    pub fn from_dfa(dfa: &Dfa) -> SyncAutomaton {
        let trans = dfa
            .transitions()
            .map(|(p, a, q)| (p, vec![Some(a)].into_boxed_slice(), q))
            .collect();
        let finals: Vec<usize> = dfa.finals().collect();
        SyncAutomaton::new(dfa.alphabet().clone(), 1, dfa.num_states(), dfa.start(), &finals, trans)
            .expect("dfa is well-formed")
    }

    /// `{(w_1, ..., w_m) : all w_i equal}`.
    pub fn equality(alphabet: &Alphabet, arity: usize) -> SyncAutomaton {
        let trans = alphabet
            .symbols()
            .map(|a| (0, vec![Some(a); arity].into_boxed_slice(), 0))
            .collect();
        SyncAutomaton::new(alphabet.clone(), arity, 1, 0, &[0], trans).expect("well-formed")
    }

    /// `{(w_1, w_2) : |w_1| = |w_2|}`.
    pub fn equal_length(alphabet: &Alphabet) -> SyncAutomaton {
        let mut trans = Vec::new();
        for a in alphabet.symbols() {
            for b in alphabet.symbols() {
                trans.push((0, vec![Some(a), Some(b)].into_boxed_slice(), 0));
            }
        }
        SyncAutomaton::new(alphabet.clone(), 2, 1, 0, &[0], trans).expect("well-formed")
    }

    pub fn arity(&self) -> usize {
        self.arity
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

    pub fn transitions(&self) -> &[(usize, Letter, usize)] {
        &self.trans
    }

    /// States on some path from the start state to a final state.
    pub fn useful_states(&self) -> Vec<bool> {
        let n = self.num_states;
        let mut fwd = vec![false; n];
        fwd[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(p) = stack.pop() {
            for (a, _, b) in &self.trans {
                if *a == p && !fwd[*b] {
                    fwd[*b] = true;
                    stack.push(*b);
                }
            }
        }
        let mut bwd = self.finals.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| bwd[q]).collect();
        while let Some(q) = stack.pop() {
            for (a, _, b) in &self.trans {
                if *b == q && !bwd[*a] {
                    bwd[*a] = true;
                    stack.push(*a);
                }
            }
        }
        (0..n).map(|q| fwd[q] && bwd[q]).collect()
    }

    /// Checks that on every tape, padding is never followed by a symbol along
    /// a run that can still reach a final state.
    pub fn validate(&self) -> Result<()> {
        let useful = self.useful_states();
        let live: Vec<&(usize, Letter, usize)> = self
            .trans
            .iter()
            .filter(|(p, _, q)| useful[*p] && useful[*q])
            .collect();
        for tape in 0..self.arity {
            let mut padded = vec![false; self.num_states];
            let mut stack = Vec::new();
            for (_, letter, q) in &live {
                if letter[tape].is_none() && !padded[*q] {
                    padded[*q] = true;
                    stack.push(*q);
                }
            }
            while let Some(p) = stack.pop() {
                for (a, _, b) in &live {
                    if *a == p && !padded[*b] {
                        padded[*b] = true;
                        stack.push(*b);
                    }
                }
            }
            let mut bad: Vec<usize> = live
                .iter()
                .filter(|(p, letter, _)| padded[*p] && letter[tape].is_some())
                .map(|(p, _, _)| *p)
                .collect();
            bad.sort_unstable();
            if let Some(&state) = bad.first() {
                return Err(Error::PaddingViolation { tape, state });
            }
        }
        Ok(())
    }

    /// Membership of a word tuple, padding shorter words at the end.
    pub fn accepts(&self, words: &[Vec<Sym>]) -> bool {
        let reached = self.states_after(self.start, words);
        (0..self.num_states).any(|q| reached[q] && self.finals[q])
    }

    /// States reachable from `from` by reading the padded encoding of `words`.
    pub fn states_after(&self, from: usize, words: &[Vec<Sym>]) -> Vec<bool> {
        assert_eq!(words.len(), self.arity);
        let len = words.iter().map(Vec::len).max().unwrap_or(0);
        let mut cur = vec![false; self.num_states];
        cur[from] = true;
        for pos in 0..len {
            let letter: Vec<Option<Sym>> = words.iter().map(|w| w.get(pos).copied()).collect();
            let mut next = vec![false; self.num_states];
            for (p, l, q) in &self.trans {
                if cur[*p] && l[..] == letter[..] {
                    next[*q] = true;
                }
            }
            cur = next;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::letters("ab")
    }

    #[test]
    fn equal_length_has_no_padding() {
        let a = SyncAutomaton::equal_length(&ab());
        assert!(a.validate().is_ok());
        assert!(a.accepts(&[vec![Sym(0), Sym(0)], vec![Sym(1), Sym(0)]]));
        assert!(!a.accepts(&[vec![Sym(0)], vec![Sym(1), Sym(0)]]));
    }

    #[test]
    fn prefix_relation_is_valid() {
        let text = "arity 2\nstates 2\nstart 0\nfinal 0 1\n\
                    trans 0 a,a 0\ntrans 0 b,b 0\n\
                    trans 0 _,a 1\ntrans 0 _,b 1\ntrans 1 _,a 1\ntrans 1 _,b 1\n";
        let a = SyncAutomaton::parse(text, &ab()).unwrap();
        assert!(a.validate().is_ok());
        assert!(a.accepts(&[vec![Sym(0)], vec![Sym(0), Sym(1)]]));
        assert!(!a.accepts(&[vec![Sym(1)], vec![Sym(0), Sym(1)]]));
    }

    #[test]
    fn symbol_after_padding_is_a_violation() {
        let text = "arity 2\nstates 3\nstart 0\nfinal 2\ntrans 0 _,a 1\ntrans 1 b,a 2\n";
        let a = SyncAutomaton::parse(text, &ab()).unwrap();
        let err = a.validate().unwrap_err();
        assert_eq!(err, Error::PaddingViolation { tape: 0, state: 1 });
        assert_eq!(err.to_string(), "padding violation on tape 1 at state 1");
    }

    #[test]
    fn dead_branches_are_ignored() {
        // the violating transition leads nowhere accepting
        let text = "arity 2\nstates 3\nstart 0\nfinal 0\ntrans 0 a,a 0\ntrans 0 _,a 1\ntrans 1 b,a 2\n";
        let a = SyncAutomaton::parse(text, &ab()).unwrap();
        assert!(a.validate().is_ok());
    }

    #[test]
    fn all_padding_letter_rejected() {
        let text = "arity 2\nstates 1\nstart 0\nfinal 0\ntrans 0 _,_ 0\n";
        assert!(matches!(
            SyncAutomaton::parse(text, &ab()),
            Err(Error::Parse { line: 5, .. })
        ));
    }
}
