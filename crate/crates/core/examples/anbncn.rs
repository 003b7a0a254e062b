//! Maintains the pairs joined by an `aⁿbⁿcⁿ`-labeled path, a query no
//! context-free grammar expresses, while a chain is built and then broken.

use dynq::dist::AnBnCnState;
use dynq::{Alphabet, Modification, Sym};

fn main() {
    let al = Alphabet::letters("abc");
    let labels = [Sym(0), Sym(1), Sym(2)];
    let m = 3;
    let n = 3 * m + 1;
    let mut s = AnBnCnState::new(al.clone(), n, labels);
    for i in 0..3 * m {
        let sym = labels[i / m];
        s.apply(&Modification::insert(sym, i, i + 1)).expect("chain stays acyclic");
        println!("ins {} {i} {}: {:?}", al.name(sym), i + 1, non_trivial(&s));
    }
    s.apply(&Modification::delete(Sym(1), m + 1, m + 2)).expect("edge exists");
    println!("del b {} {}: {:?}", m + 1, m + 2, non_trivial(&s));
}

fn non_trivial(s: &AnBnCnState) -> Vec<(usize, usize)> {
    s.query().into_iter().filter(|(x, y)| x != y).collect()
}
