//! Per-modification latency of incremental updates against recomputing the
//! answer from scratch with the oracles.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cfl::CflState;
use crate::dist::{AcyDistState, InsDistState, ParikhState, UndirDistState};
use crate::ecrpq::{CrpqState, EcrpqPlan, EcrpqState};
use crate::error::Result;
use crate::graph::{LabeledGraph, Modification, TcState};
use crate::product::{NepsState, PalindromeState, ProductState, Regime};
use crate::rpq::RpqState;
use crate::session::Program;
use crate::specs::NepsSpec;
use crate::{gen, oracle};

#[derive(Debug, Clone)]
pub struct Sample {
    pub program: Program,
    pub trial: usize,
    pub step: usize,
    pub nodes: usize,
    pub insert: bool,
    pub incremental: Duration,
    pub recompute: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = black_box(f());
    (out, t.elapsed())
}

/// Samples every step of `trials` random scripts per program on graphs of
/// `max_nodes` nodes.
pub fn run(programs: &[Program], trials: usize, seed: u64, max_nodes: usize) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for &p in programs {
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64) << 8 ^ p as u64);
            let mut steps = Vec::new();
            measure(p, &mut rng, max_nodes.max(2), &mut steps)?;
            out.extend(steps.into_iter().enumerate().map(|(step, (m, inc, rec))| Sample {
                program: p,
                trial,
                step,
                nodes: max_nodes.max(2),
                insert: m.is_insert(),
                incremental: inc,
                recompute: rec,
            }));
        }
    }
    Ok(out)
}

type Steps = Vec<(Modification, Duration, Duration)>;

fn measure(p: Program, rng: &mut ChaCha8Rng, n: usize, steps: &mut Steps) -> Result<()> {
    const STEPS: usize = 20;
    let al = gen::alphabet(2);
    let g0 = LabeledGraph::new(n, al.clone(), p != Program::DistUndirected);
    match p {
        Program::Tc => {
            let (mut g, mut t) = (g0.clone(), TcState::new(n));
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| t.apply(&mut g, &m));
                r?;
                let (_, rec) = timed(|| oracle::reach(&g));
                steps.push((m, inc, rec));
            }
        }
        Program::Rpq => {
            let dfa = gen::dfa(rng, &al, 4);
            let (mut g, mut s) = (g0.clone(), RpqState::new(dfa.clone(), n));
            for m in gen::insert_script(rng, &g0, STEPS) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                g.apply_mod(&m)?;
                let (_, rec) = timed(|| oracle::rpq(&g, &dfa));
                steps.push((m, inc, rec));
            }
        }
        Program::Cfl => {
            let mut s = CflState::new(gen::dyck(&al), n);
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                let (_, rec) = timed(|| oracle::cfl(s.graph(), s.grammar()));
                steps.push((m, inc, rec));
            }
        }
        Program::DistIns => {
            let (mut g, mut s) = (g0.clone(), InsDistState::new(n, None)?);
            for m in gen::insert_script(rng, &g0, STEPS) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                g.apply_mod(&m)?;
                let (_, rec) = timed(|| oracle::length_sets(&g, s.lmax()));
                steps.push((m, inc, rec));
            }
        }
        Program::DistAcyclic => {
            let mut s = AcyDistState::new(al.clone(), n);
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                let (_, rec) = timed(|| oracle::length_sets(s.graph(), n));
                steps.push((m, inc, rec));
            }
        }
        Program::DistUndirected => {
            let mut s = UndirDistState::new(al.clone(), n);
            for m in gen::undirected_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                let (_, rec) = timed(|| oracle::length_sets(s.graph(), 2 * n + 2));
                steps.push((m, inc, rec));
            }
        }
        Program::Parikh => {
            let lmax = n;
            let (mut g, mut s) = (g0.clone(), ParikhState::new(n, al.len(), lmax)?);
            for m in gen::insert_script(rng, &g0, STEPS) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                g.apply_mod(&m)?;
                let (_, rec) = timed(|| oracle::parikh(&g, lmax));
                steps.push((m, inc, rec));
            }
        }
        Program::Crpq => {
            let lmax = n;
            let query = gen::crpq_query(rng, &al, 2, 3, 2);
            let mut s = CrpqState::new(query.clone(), &g0, Some(lmax))?;
            for m in gen::insert_script(rng, &g0, STEPS) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                let (_, rec) = timed(|| oracle::crpq(&query, s.graph(), lmax));
                steps.push((m, inc, rec));
            }
        }
        Program::Ecrpq => {
            let query = gen::ecrpq_query(rng, &al, 2, 3, 2);
            let mut s = EcrpqState::new(EcrpqPlan::compile(query.clone())?, n)?;
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| s.apply_all(&m));
                r?;
                let (r, rec) = timed(|| oracle::ecrpq(&query, s.copies(), 1 << 24));
                r?;
                steps.push((m, inc, rec));
            }
        }
        Program::Product => {
            let mut s = ProductState::new(Regime::Acyclic, vec![g0.clone(), g0.clone()], None)?;
            let (xs, ys) = ([0, 0], [n - 1, n - 1]);
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| {
                    s.apply(0, &m)?;
                    s.apply(1, &m)?;
                    s.reach(&xs, &ys)
                });
                r?;
                let spec = NepsSpec::tensor(2);
                let (r, rec) = timed(|| oracle::neps_product(&s.graphs(), &spec, 1 << 16).map(|p| p.reach(&xs, &ys)));
                r?;
                steps.push((m, inc, rec));
            }
        }
        Program::Neps => {
            let spec = gen::neps(rng, 2, 3);
            let mut s = NepsState::new(spec, Regime::Acyclic, vec![g0.clone(), g0.clone()], None)?;
            let (xs, ys) = ([0, 0], [n - 1, n - 1]);
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| {
                    s.apply(0, &m)?;
                    s.apply(1, &m)?;
                    s.reach(&xs, &ys)
                });
                r?;
                let (r, rec) = timed(|| oracle::neps_product(&s.graphs(), s.spec(), 1 << 16).map(|p| p.reach(&xs, &ys)));
                r?;
                steps.push((m, inc, rec));
            }
        }
        Program::Palindrome => {
            let mut s = PalindromeState::new(&g0)?;
            for m in gen::dag_script(rng, &g0, STEPS, 0.3) {
                let (r, inc) = timed(|| s.apply(&m));
                r?;
                let (r, rec) = timed(|| oracle::palindromes(s.graph(), 1 << 24));
                r?;
                steps.push((m, inc, rec));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_program_samples() {
        let samples = run(&Program::ALL, 1, 3, 4).unwrap();
        for p in Program::ALL {
            assert!(samples.iter().any(|s| s.program == p), "{p}");
        }
    }
}
