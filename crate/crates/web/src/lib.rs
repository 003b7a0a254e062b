//! wasm-bindgen wrapper behind `www/index.html`: one program loaded on a
//! graph, edited one script line at a time.

use dynq::session::{parse_command, Command, Program, Session, Setup};
use dynq::specs::{CnfGrammar, Dfa, NepsSpec};
use dynq::LabeledGraph;
use wasm_bindgen::prelude::*;

const PRESETS: [(&str, &str, &str); 3] = [
    ("rpq", include_str!("../../../data/chain.graph"), include_str!("../../../data/a-star.dfa")),
    ("cfl", include_str!("../../../data/chain.graph"), include_str!("../../../data/dyck.cfg")),
    ("neps", include_str!("../../../data/chain.graph"), include_str!("../../../data/grid.neps")),
];

/// Graph text for a preset program.
#[wasm_bindgen]
pub fn preset_graph(program: &str) -> Option<String> {
    PRESETS.iter().find(|p| p.0 == program).map(|p| p.1.to_string())
}

/// Automaton, grammar or rule text for a preset program.
#[wasm_bindgen]
pub fn preset_spec(program: &str) -> Option<String> {
    PRESETS.iter().find(|p| p.0 == program).map(|p| p.2.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    session: Session,
    // mirrors of the session's graphs, for drawing
    graphs: Vec<LabeledGraph>,
    neps: Option<NepsSpec>,
}

#[wasm_bindgen]
impl Demo {
    /// Loads `rpq`, `cfl` or `neps` on `graph`; `spec` is the DFA, grammar or
    /// rule matrix. A neps graph is copied once per factor.
    #[wasm_bindgen(constructor)]
    pub fn new(program: &str, graph: &str, spec: &str) -> Result<Demo, String> {
        let program: Program = program.parse().map_err(|e| format!("{e}"))?;
        let g = LabeledGraph::parse(graph).map_err(|e| format!("graph: {e}"))?;
        let al = g.alphabet().clone();
        let mut setup = Setup::new(program, g.clone());
        let mut graphs = vec![g.clone()];
        let spec_err = |e: dynq::Error| format!("spec: {e}");
        match program {
            Program::Rpq => setup.dfa = Some(Dfa::parse(spec, &al).map_err(spec_err)?),
            Program::Cfl => setup.grammar = Some(CnfGrammar::parse(spec, &al).map_err(spec_err)?),
            Program::Neps => {
                let s = NepsSpec::parse(spec).map_err(spec_err)?;
                graphs = vec![g; s.factors()];
                setup.neps = Some(s);
            }
            _ => return Err(format!("the demo runs rpq, cfl and neps, not {program}")),
        }
        let neps = setup.neps.clone();
        let session = Session::new(setup).map_err(|e| e.to_string())?;
        Ok(Demo { session, graphs, neps })
    }

    /// Runs one script line and returns what it prints, one tuple per line.
    pub fn exec(&mut self, line: &str) -> Result<String, String> {
        let Some(cmd) = parse_command(line, self.session.alphabet()).map_err(|e| e.to_string())? else {
            return Ok(String::new());
        };
        let answer = self.session.execute(&cmd).map_err(|e| e.to_string())?;
        match &cmd {
            Command::Modify { m, target } => {
                let k = self.graphs.len();
                for i in target.map_or(0..k, |i| i..i + 1) {
                    self.graphs[i].apply_mod(m).map_err(|e| e.to_string())?;
                }
            }
            Command::Flip { rule, bit } => {
                if let Some(s) = &mut self.neps {
                    s.flip(*rule, *bit).map_err(|e| e.to_string())?;
                }
            }
            Command::Query(_) => {}
        }
        Ok(answer.map_or(String::new(), |a| {
            a.lines(0)
                .into_iter()
                .map(|l| l.trim_start_matches("0: ").to_string())
                .collect::<Vec<_>>()
                .join("\n")
        }))
    }

    pub fn factors(&self) -> usize {
        self.graphs.len()
    }

    pub fn nodes(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn symbols(&self) -> Vec<String> {
        self.graphs[0].alphabet().names().to_vec()
    }

    /// Edges as flat `(factor, u, symbol, v)` quadruples.
    pub fn edges(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, g) in self.graphs.iter().enumerate() {
            for e in g.edges() {
                out.extend([i as u32, e.u as u32, e.sym.index() as u32, e.v as u32]);
            }
        }
        out
    }

    /// The rule matrix as rows of 0/1 characters, one per rule.
    pub fn rules(&self) -> Vec<String> {
        self.neps.as_ref().map_or(vec![], |s| {
            s.rules()
                .iter()
                .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect()
        })
    }
}
