use crate::error::{Error, Result};
use crate::graph::{parse_usize, strip_comment};

/// Transition rules of a generalized product: rule `j` moves exactly the
/// factors `i` with `rules[j][i] == true` and keeps the others fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NepsSpec {
    factors: usize,
    rules: Vec<Vec<bool>>,
}

impl NepsSpec {
    pub fn new(factors: usize, rules: Vec<Vec<bool>>) -> Result<NepsSpec> {
        if factors == 0 {
            return Err(Error::Invalid("a product needs at least one factor".into()));
        }
        if let Some(r) = rules.iter().find(|r| r.len() != factors) {
            return Err(Error::Invalid(format!(
                "rule of length {} for {factors} factors",
                r.len()
            )));
        }
        Ok(NepsSpec { factors, rules })
    }

    /// Cartesian product: one rule per factor moving only that factor.
    pub fn cartesian(factors: usize) -> NepsSpec {
        let rules = (0..factors)
            .map(|j| (0..factors).map(|i| i == j).collect())
            .collect();
        NepsSpec { factors, rules }
    }

    /// Tensor product: a single rule moving every factor.
    pub fn tensor(factors: usize) -> NepsSpec {
        NepsSpec {
            factors,
            rules: vec![vec![true; factors]],
        }
    }

    /// Parses `factors <m>` and `rule <bits>` lines; bits may be written
    /// as `101` or `1 0 1`.
    pub fn parse(text: &str) -> Result<NepsSpec> {
        let mut factors = None;
        let mut rules = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            match toks.first() {
                None => {}
                Some(&"factors") => {
                    let [_, m] = toks[..] else {
                        return Err(Error::parse(line, "expected `factors <m>`"));
                    };
                    factors = Some(parse_usize(m, line)?);
                }
                Some(&"rule") => {
                    let bits = toks[1..]
                        .concat()
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(Error::parse(line, format!("bad bit `{c}`"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rules.push((line, bits));
                }
                Some(other) => {
                    return Err(Error::parse(line, format!("unknown directive `{other}`")))
                }
            }
        }
        let m = factors.ok_or_else(|| Error::parse(0, "missing `factors`"))?;
        if let Some((line, r)) = rules.iter().find(|(_, r)| r.len() != m) {
            return Err(Error::parse(*line, format!("rule has {} bits, expected {m}", r.len())));
        }
        NepsSpec::new(m, rules.into_iter().map(|(_, r)| r).collect())
            .map_err(|e| Error::parse(0, e.to_string()))
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn rules(&self) -> &[Vec<bool>] {
        &self.rules
    }

    pub fn entry(&self, factor: usize, rule: usize) -> bool {
        self.rules[rule][factor]
    }

    /// Flips bit `factor` of rule `rule`.
    pub fn flip(&mut self, rule: usize, factor: usize) -> Result<()> {
        let bit = self
            .rules
            .get_mut(rule)
            .and_then(|r| r.get_mut(factor))
            .ok_or_else(|| Error::Invalid(format!("no bit {factor} in rule {rule}")))?;
        *bit = !*bit;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("factors {}\n", self.factors);
        for r in &self.rules {
            let bits: String = r.iter().map(|&b| if b { '1' } else { '0' }).collect();
            s.push_str(&format!("rule {bits}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_flip() {
        let mut s = NepsSpec::parse("factors 2\nrule 1 1\nrule 10\n").unwrap();
        assert_eq!(s.rules(), &[vec![true, true], vec![true, false]]);
        s.flip(0, 0).unwrap();
        assert_eq!(s.rules()[0], vec![false, true]);
        assert_eq!(NepsSpec::parse(&s.to_text()).unwrap(), s);
        assert!(s.flip(2, 0).is_err());
    }

    #[test]
    fn wrong_rule_width_names_line() {
        assert!(matches!(
            NepsSpec::parse("factors 3\nrule 101\nrule 11\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
