use crate::error::{Error, Result};
use crate::graph::{strip_comment, Alphabet};
use crate::specs::{Dfa, SyncAutomaton};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAtom {
    pub x: usize,
    pub path: String,
    pub y: usize,
}

/// A regular relation applied to a tuple of path variables (atom indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelAtom {
    pub automaton: SyncAutomaton,
    pub paths: Vec<usize>,
}

/// One row `c · ℓ >= bound` of the linear constraint system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub bound: i64,
}

impl Constraint {
    pub fn holds(&self, counts: &[usize]) -> bool {
        let lhs: i128 = self
            .coeffs
            .iter()
            .zip(counts)
            .map(|(&c, &l)| c as i128 * l as i128)
            .sum();
        lhs >= self.bound as i128
    }
}

/// Conjunctive query over path atoms with regular relations and linear
/// constraints on symbol counts. Counts are ordered atom-major: entry
/// `i * k + j` counts symbol `j` on the path of atom `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcrpqQuery {
    pub alphabet: Alphabet,
    pub vars: Vec<String>,
    pub head: Vec<usize>,
    pub atoms: Vec<PathAtom>,
    pub relations: Vec<RelAtom>,
    pub constraints: Vec<Constraint>,
}

impl EcrpqQuery {
    pub fn new(
        alphabet: Alphabet,
        vars: Vec<String>,
        head: Vec<usize>,
        atoms: Vec<PathAtom>,
        relations: Vec<RelAtom>,
        constraints: Vec<Constraint>,
    ) -> Result<EcrpqQuery> {
        let q = EcrpqQuery {
            alphabet,
            vars,
            head,
            atoms,
            relations,
            constraints,
        };
        q.check()?;
        Ok(q)
    }

    fn check(&self) -> Result<()> {
        let nv = self.vars.len();
        for (i, v) in self.vars.iter().enumerate() {
            if self.vars[..i].contains(v) {
                return Err(Error::Invalid(format!("duplicate variable `{v}`")));
            }
        }
        if self.head.iter().any(|&h| h >= nv) || self.atoms.iter().any(|a| a.x >= nv || a.y >= nv)
        {
            return Err(Error::Invalid("variable index out of range".into()));
        }
        if let Some(&h) = self
            .head
            .iter()
            .find(|&&h| !self.atoms.iter().any(|a| a.x == h || a.y == h))
        {
            return Err(Error::Invalid(format!(
                "head variable `{}` occurs in no atom",
                self.vars[h]
            )));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if self.atoms[..i].iter().any(|b| b.path == a.path) {
                return Err(Error::Invalid(format!("path variable `{}` bound twice", a.path)));
            }
        }
        for r in &self.relations {
            if r.paths.len() != r.automaton.arity() {
                return Err(Error::Invalid(format!(
                    "relation of arity {} applied to {} paths",
                    r.automaton.arity(),
                    r.paths.len()
                )));
            }
            for (i, &p) in r.paths.iter().enumerate() {
                if p >= self.atoms.len() {
                    return Err(Error::Invalid("relation path out of range".into()));
                }
                if r.paths[..i].contains(&p) {
                    return Err(Error::Invalid("relation repeats a path variable".into()));
                }
            }
            r.automaton.validate()?;
        }
        let width = self.count_width();
        for c in &self.constraints {
            if c.coeffs.len() != width {
                return Err(Error::Invalid(format!(
                    "constraint has {} coefficients, expected {width}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }

    /// Number of entries of the count vector ℓ.
    pub fn count_width(&self) -> usize {
        self.atoms.len() * self.alphabet.len()
    }

    pub fn constraints_hold(&self, counts: &[usize]) -> bool {
        self.constraints.iter().all(|c| c.holds(counts))
    }

    /// Parses the query format. `load` resolves relation file names.
    pub fn parse(
        text: &str,
        alphabet: &Alphabet,
        load: &dyn Fn(&str) -> Result<String>,
    ) -> Result<EcrpqQuery> {
        let mut vars: Vec<String> = Vec::new();
        let mut head_names: Vec<(usize, Vec<String>)> = Vec::new();
        let mut atoms: Vec<(usize, String, String, String)> = Vec::new();
        let mut rels: Vec<(usize, SyncAutomaton, Vec<String>)> = Vec::new();
        let mut constraints = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            let at = |e: Error| match e {
                Error::Parse { line: l, msg } => {
                    Error::parse(line, format!("in referenced spec, line {l}: {msg}"))
                }
                e => Error::parse(line, e.to_string()),
            };
            match toks.first() {
                None => {}
                Some(&"vars") => vars.extend(toks[1..].iter().map(|s| s.to_string())),
                Some(&"head") => {
                    head_names.push((line, toks[1..].iter().map(|s| s.to_string()).collect()))
                }
                Some(&"atom") => {
                    let [_, x, p, y] = toks[..] else {
                        return Err(Error::parse(line, "expected `atom <x> <path> <y>`"));
                    };
                    atoms.push((line, x.into(), p.into(), y.into()));
                }
                Some(&"rel") => {
                    if toks.len() < 3 {
                        return Err(Error::parse(line, "expected `rel <source> <path>...`"));
                    }
                    let aut = match toks[1].strip_prefix("regex:") {
                        Some(expr) => {
                            SyncAutomaton::from_dfa(&Dfa::from_regex(alphabet, expr).map_err(at)?)
                        }
                        None => SyncAutomaton::parse(&load(toks[1]).map_err(at)?, alphabet)
                            .map_err(at)?,
                    };
                    rels.push((line, aut, toks[2..].iter().map(|s| s.to_string()).collect()));
                }
                Some(&"constraint") => {
                    let n = toks.len();
                    if n < 3 || toks[n - 2] != ">=" {
                        return Err(Error::parse(line, "expected `constraint <c>... >= <b>`"));
                    }
                    let num = |s: &str| -> Result<i64> {
                        s.parse()
                            .map_err(|_| Error::parse(line, format!("bad integer `{s}`")))
                    };
                    let coeffs = toks[1..n - 2].iter().map(|s| num(s)).collect::<Result<_>>()?;
                    constraints.push((line, Constraint { coeffs, bound: num(toks[n - 1])? }));
                }
                Some(other) => {
                    return Err(Error::parse(line, format!("unknown directive `{other}`")))
                }
            }
        }
        let var = |line: usize, name: &str| -> Result<usize> {
            vars.iter().position(|v| v == name).ok_or_else(|| {
                let what = if atoms.iter().any(|a| a.2 == name) {
                    "path variables cannot appear in the head"
                } else {
                    "undeclared variable"
                };
                Error::parse(line, format!("{what}: `{name}`"))
            })
        };
        let mut head = Vec::new();
        for (line, names) in &head_names {
            for n in names {
                head.push(var(*line, n)?);
            }
        }
        let mut path_atoms = Vec::new();
        for (line, x, p, y) in &atoms {
            if vars.contains(p) {
                return Err(Error::parse(*line, format!("`{p}` is a node variable")));
            }
            path_atoms.push(PathAtom {
                x: var(*line, x)?,
                path: p.clone(),
                y: var(*line, y)?,
            });
        }
        let mut relations = Vec::new();
        for (line, automaton, paths) in rels {
            let paths = paths
                .iter()
                .map(|p| {
                    path_atoms
                        .iter()
                        .position(|a| &a.path == p)
                        .ok_or_else(|| Error::parse(line, format!("unknown path variable `{p}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            automaton.validate().map_err(|e| Error::parse(line, e.to_string()))?;
            relations.push(RelAtom { automaton, paths });
        }
        let width = path_atoms.len() * alphabet.len();
        for (line, c) in &constraints {
            if c.coeffs.len() != width {
                return Err(Error::parse(
                    *line,
                    format!("expected {width} coefficients, got {}", c.coeffs.len()),
                ));
            }
        }
        EcrpqQuery::new(
            alphabet.clone(),
            vars,
            head,
            path_atoms,
            relations,
            constraints.into_iter().map(|(_, c)| c).collect(),
        )
        .map_err(|e| Error::parse(0, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_files(name: &str) -> Result<String> {
        Err(Error::Invalid(format!("no file {name}")))
    }

    #[test]
    fn parses_query_with_regex_relation() {
        let al = Alphabet::letters("ab");
        let text = "vars x y\nhead x y\natom x p y\nrel regex:a*b* p\nconstraint 1 -1 >= 0\nconstraint -1 1 >= 0\n";
        let q = EcrpqQuery::parse(text, &al, &no_files).unwrap();
        assert_eq!(q.atoms.len(), 1);
        assert_eq!(q.relations[0].automaton.arity(), 1);
        assert!(q.constraints_hold(&[2, 2]));
        assert!(!q.constraints_hold(&[2, 1]));
    }

    #[test]
    fn path_variable_in_head_rejected() {
        let al = Alphabet::letters("a");
        let text = "vars x y\nhead p\natom x p y\n";
        let err = EcrpqQuery::parse(text, &al, &no_files).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(err.to_string().contains("head"));
    }

    #[test]
    fn relation_file_is_loaded() {
        let al = Alphabet::letters("ab");
        let sync = "arity 2\nstates 1\nstart 0\nfinal 0\ntrans 0 a,b 0\n";
        let load = |name: &str| -> Result<String> {
            assert_eq!(name, "eq.sync");
            Ok(sync.to_string())
        };
        let text = "vars x y u v\nhead x u\natom x p y\natom u q v\nrel eq.sync p q\n";
        let q = EcrpqQuery::parse(text, &al, &load).unwrap();
        assert_eq!(q.relations[0].paths, vec![0, 1]);
        assert_eq!(q.count_width(), 4);
    }

    #[test]
    fn constraint_width_checked() {
        let al = Alphabet::letters("ab");
        let text = "vars x y\nhead x\natom x p y\nconstraint 1 >= 0\n";
        assert!(matches!(
            EcrpqQuery::parse(text, &al, &no_files),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
