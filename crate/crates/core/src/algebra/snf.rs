//! Smith normal form over `F_q[t]`, used for the structure of finitely
//! generated torsion `A`-modules given by relation matrices.

use super::poly::{Poly, PolyRing};
use super::{PrimeField, Ring};

/// Invariant factors `d_1 | d_2 | ...` of `m` (monic, nonzero ones only),
/// plus the rank deficiency (number of zero diagonal entries among
/// `min(rows, cols)`).
pub fn invariant_factors(ring: &PolyRing<PrimeField>, m: &[Vec<Poly<u64>>]) -> (Vec<Poly<u64>>, usize) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<Poly<u64>>> = m.to_vec();
    let n = rows.min(cols);
    let mut diag = Vec::new();
    for k in 0..n {
        loop {
            // smallest-degree nonzero entry in the lower-right block
            let mut best: Option<(usize, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(k) {
                for (j, e) in row.iter().enumerate().skip(k) {
                    if let Some(d) = e.degree() {
                        if best.map_or(true, |b| d < b.2) {
                            best = Some((i, j, d));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                break;
            };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let piv = a[k][k].clone();
            let mut dirty = false;
            for i in k + 1..rows {
                let (q, r) = ring.divrem(&a[i][k], &piv);
                if !q.is_zero() {
                    for j in k..cols {
                        let v = ring.sub(&a[i][j], &ring.mul(&q, &a[k][j]));
                        a[i][j] = v;
                    }
                }
                dirty |= !r.is_zero();
            }
            for j in k + 1..cols {
                let (q, r) = ring.divrem(&a[k][j], &piv);
                if !q.is_zero() {
                    for row in a.iter_mut().skip(k) {
                        let v = ring.sub(&row[j], &ring.mul(&q, &row[k]));
                        row[j] = v;
                    }
                }
                dirty |= !r.is_zero();
            }
            if dirty {
                continue;
            }
            // pivot must divide the rest of the block
            let mut fixed = true;
            'outer: for i in k + 1..rows {
                for j in k + 1..cols {
                    if !ring.divides(&piv, &a[i][j]) {
                        for jj in k..cols {
                            let v = ring.add(&a[k][jj], &a[i][jj]);
                            a[k][jj] = v;
                        }
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if k < rows && k < cols && !a[k][k].is_zero() {
            diag.push(ring.monic(&a[k][k]));
        } else {
            // remaining block is zero
            let zeros = n - k;
            return (diag, zeros);
        }
    }
    (diag, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Var;

    #[test]
    fn diagonalizes_small_example() {
        let f = PrimeField::new(2).unwrap();
        let r = PolyRing::new(f, Var::T);
        let t = r.gen();
        let t1 = r.from_ints(&[1, 1]);
        // diag(t, t+1) ~ diag(1, t(t+1))
        let m = vec![vec![t.clone(), r.zero()], vec![r.zero(), t1.clone()]];
        let (d, z) = invariant_factors(&r, &m);
        assert_eq!(z, 0);
        assert_eq!(d, vec![r.one(), r.mul(&t, &t1)]);
        let m = vec![vec![t.clone(), t.clone()], vec![t.clone(), t.clone()]];
        let (d, z) = invariant_factors(&r, &m);
        assert_eq!((d, z), (vec![t], 1));
    }
}
