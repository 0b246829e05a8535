use std::collections::HashMap;

use catalan_lattice::kauffman::Oracle;
use catalan_lattice::maxseq::{beta, c_prime, max_sequence, sequence_realizes, upper_arcs};
use catalan_lattice::states::{enumerate_catalan, Connection, StateError};

/// Best row sequence for every state reached by some row-sorted grid.
fn best_sequences(m: usize, n: usize) -> HashMap<Connection, Vec<usize>> {
    let mut best: HashMap<Connection, Vec<usize>> = HashMap::new();
    let total = (n + 1).pow(m as u32);
    for code in 0..total {
        let b: Vec<usize> = (0..m).map(|j| code / (n + 1).pow(j as u32) % (n + 1)).collect();
        let c = sequence_realizes(&b, n);
        let entry = best.entry(c).or_insert_with(|| b.clone());
        if b.iter().sum::<usize>() > entry.iter().sum::<usize>() {
            *entry = b;
        }
    }
    best
}

#[test]
fn closed_formula_is_the_maximum() {
    for m in 1..=4 {
        for n in 1..=3 {
            let best = best_sequences(m, n);
            for c in enumerate_catalan(m, n) {
                if c.has_bottom_returns() || !c.is_realizable().unwrap() {
                    continue;
                }
                let s = max_sequence(&c).unwrap();
                assert_eq!(sequence_realizes(&s.b, n), c, "{c}");
                let brute = best.get(&c).expect("every realizable state is a row-sorted image");
                assert_eq!(s.b, *brute, "{c}");
                assert_eq!(s.beta, beta(&c).unwrap());
            }
        }
    }
}

#[test]
fn beta_is_the_top_degree() {
    let oracle = Oracle::new(20);
    for (m, n) in [(1, 3), (2, 2), (2, 3), (3, 3), (4, 2)] {
        for c in enumerate_catalan(m, n) {
            if c.has_bottom_returns() || !c.is_realizable().unwrap() {
                continue;
            }
            let top = oracle.coefficient(&c).unwrap().max_degree().unwrap();
            assert_eq!(top, 2 * beta(&c).unwrap() as i64 - (m * n) as i64, "{c}");
        }
    }
}

#[test]
fn rejects_states_outside_the_formula() {
    let bottom: Connection = "cat(1,2): T1-T2, L1-R1, B1-B2".parse().unwrap();
    assert_eq!(beta(&bottom), Err(StateError::HasBottomReturns));
    let mut unrealizable = 0;
    for c in enumerate_catalan(2, 3) {
        if !c.has_bottom_returns() && !c.is_realizable().unwrap() {
            unrealizable += 1;
            assert_eq!(beta(&c), Err(StateError::NotRealizable));
        }
    }
    assert!(unrealizable > 0);
}

#[test]
fn c_prime_shape() {
    let c = c_prime(2);
    assert_eq!((c.m(), c.n()), (6, 4));
    assert_eq!(upper_arcs(&c).unwrap().len(), 6);
    assert_eq!(max_sequence(&c).unwrap().b, vec![3, 4, 3, 4, 3, 2]);
}
