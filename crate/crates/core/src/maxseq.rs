//! Maximal row sequences and `β(C)` from the closed formulas in the
//! boundary coordinate `ι`.

use crate::kauffman::{smooth, MarkerGrid};
use crate::states::{coordinate, BoundaryPoint, Connection, StateError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSequence {
    pub b: Vec<usize>,
    pub beta: usize,
}

impl MaxSequence {
    pub fn new(b: Vec<usize>) -> Self {
        let beta = b.iter().sum();
        Self { b, beta }
    }
}

fn check(c: &Connection) -> Result<(), StateError> {
    if !c.is_catalan() {
        return Err(StateError::NotCatalan(c.n_top(), c.n_bottom()));
    }
    if c.has_bottom_returns() {
        return Err(StateError::HasBottomReturns);
    }
    if !c.is_realizable()? {
        return Err(StateError::NotRealizable);
    }
    Ok(())
}

/// Arcs with no bottom end as coordinate pairs `(ι(p), ι(q))`, `ι(p) < ι(q)`.
pub fn upper_arcs(c: &Connection) -> Result<Vec<(i64, i64)>, StateError> {
    let (m, n) = (c.m(), c.n());
    let mut out = Vec::new();
    for (p, q) in c.arcs() {
        let (Ok(a), Ok(b)) = (coordinate(p, m, n), coordinate(q, m, n)) else { continue };
        out.push((a.min(b), a.max(b)));
    }
    Ok(out)
}

pub fn beta(c: &Connection) -> Result<usize, StateError> {
    check(c)?;
    let (m, n) = (c.m() as i64, c.n() as i64);
    let sum: i64 = upper_arcs(c)?.iter().map(|&(p, q)| p.min(1 - q)).sum();
    let b = m * n + m * (m - 1) / 2 + sum;
    Ok(usize::try_from(b).expect("β is nonnegative on realizable states"))
}

pub fn max_sequence(c: &Connection) -> Result<MaxSequence, StateError> {
    check(c)?;
    let (m, n) = (c.m(), c.n() as i64);
    let arcs = upper_arcs(c)?;
    let (s1, s2): (Vec<_>, Vec<_>) = arcs.into_iter().partition(|&(p, q)| p + q >= 1);
    let mut b = vec![0i64; m];
    let mut i1 = vec![false; m + 1];
    for &(_, q) in &s1 {
        b[q as usize - 1] = n;
        i1[q as usize] = true;
    }
    let i2: Vec<i64> = (1..=m as i64).filter(|&j| !i1[j as usize]).collect();
    let mut i3: Vec<i64> = s2.iter().map(|&(p, _)| p).collect();
    i3.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(i2.len(), i3.len(), "index sets pair up on realizable states");
    for (&i, &l) in i2.iter().zip(&i3) {
        b[i as usize - 1] = n + (i - 1) + l;
    }
    let b = b
        .into_iter()
        .map(|x| {
            assert!((0..=n).contains(&x), "row value in range on realizable states");
            x as usize
        })
        .collect();
    Ok(MaxSequence::new(b))
}

/// State of the grid whose row `j` has `b_j` positive markers then negatives.
pub fn sequence_realizes(b: &[usize], n: usize) -> Connection {
    let r = smooth(&MarkerGrid::row_sorted(b, n));
    assert_eq!(r.loops, 0, "row-sorted grids close no loops");
    r.state
}

/// The state `C'_k` in `Cat(2k+2, 4)`: two top returns, `k` returns on each
/// side pairing rows `2j-1, 2j`, and the four bottom points joined to the
/// two lowest rows of each side.
pub fn c_prime(k: usize) -> Connection {
    let m = 2 * k + 2;
    let mut arcs = vec![
        (BoundaryPoint::top(1), BoundaryPoint::top(2)),
        (BoundaryPoint::top(3), BoundaryPoint::top(4)),
        (BoundaryPoint::bottom(1), BoundaryPoint::left(m)),
        (BoundaryPoint::bottom(2), BoundaryPoint::left(m - 1)),
        (BoundaryPoint::bottom(3), BoundaryPoint::right(m - 1)),
        (BoundaryPoint::bottom(4), BoundaryPoint::right(m)),
    ];
    for j in 1..=k {
        arcs.push((BoundaryPoint::left(2 * j - 1), BoundaryPoint::left(2 * j)));
        arcs.push((BoundaryPoint::right(2 * j - 1), BoundaryPoint::right(2 * j)));
    }
    Connection::catalan(m, 4, &arcs).expect("C'_k is noncrossing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::enumerate_catalan;

    #[test]
    fn c_prime_values() {
        for k in 1..=5 {
            let c = c_prime(k);
            assert_eq!(beta(&c).unwrap(), 7 * k + 5);
            let s = max_sequence(&c).unwrap();
            for j in 1..=k {
                assert_eq!(s.b[2 * j - 1], 4);
            }
            for j in 1..=k + 1 {
                assert_eq!(s.b[2 * j - 2], 3);
            }
            assert_eq!(s.b[2 * k + 1], 2);
            assert_eq!(s.beta, 7 * k + 5);
            assert_eq!(sequence_realizes(&s.b, 4), c);
        }
    }

    #[test]
    fn empty_grid() {
        let c = Connection::identity(3);
        assert_eq!(beta(&c).unwrap(), 0);
        assert_eq!(max_sequence(&c).unwrap().b, Vec::<usize>::new());
    }

    #[test]
    fn corner_row() {
        for n in 1..=4 {
            let s = MaxSequence::new(vec![n]);
            let c = sequence_realizes(&s.b, n);
            assert_eq!(c.partner_of(BoundaryPoint::top(n)).unwrap(), BoundaryPoint::right(1));
            assert_eq!(max_sequence(&c).unwrap(), s);
        }
    }

    #[test]
    fn round_trip_small() {
        for m in 1..=3 {
            for n in 1..=3 {
                for c in enumerate_catalan(m, n) {
                    if c.has_bottom_returns() || !c.is_realizable().unwrap() {
                        assert!(beta(&c).is_err());
                        continue;
                    }
                    let s = max_sequence(&c).unwrap();
                    assert_eq!(s.beta, beta(&c).unwrap());
                    assert_eq!(sequence_realizes(&s.b, n), c, "{c}");
                }
            }
        }
    }
}
