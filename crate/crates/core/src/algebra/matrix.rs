use serde::{Deserialize, Serialize};

use super::poly::{Poly, PolyRing, Var};
use super::Ring;

/// Small dense square-or-rectangular matrix over an arbitrary commutative ring.
///
/// Determinants use cofactor expansion, so this is meant for the `r x r`
/// Galois-image matrices (`r` at most a handful), not for bulk linear algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_rows(rows: Vec<Vec<E>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<E> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        Self { rows: r, cols: c, data }
    }

    pub fn from_columns(cols: Vec<Vec<E>>) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in &cols {
                data.push(col[i].clone());
            }
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<F: Clone>(&self, f: impl Fn(&E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in 0..self.rows {
            if i == skip_row {
                continue;
            }
            for j in 0..self.cols {
                if j != skip_col {
                    data.push(self.get(i, j).clone());
                }
            }
        }
        Self {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }
}

/// Matrix arithmetic in the context of a coefficient ring.
#[derive(Clone, Debug)]
pub struct MatrixRing<R> {
    ring: R,
    n: usize,
}

impl<R: Ring> MatrixRing<R> {
    pub fn new(ring: R, n: usize) -> Self {
        Self { ring, n }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> Matrix<R::Elem> {
        self.scalar(self.ring.one())
    }

    pub fn scalar(&self, c: R::Elem) -> Matrix<R::Elem> {
        let rows = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| if i == j { c.clone() } else { self.ring.zero() })
                    .collect()
            })
            .collect();
        Matrix::from_rows(rows)
    }

    pub fn mul(&self, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
        assert_eq!(a.cols, b.rows);
        let r = &self.ring;
        let mut data = Vec::with_capacity(a.rows * b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc = r.zero();
                for k in 0..a.cols {
                    acc = r.add(&acc, &r.mul(a.get(i, k), b.get(k, j)));
                }
                data.push(acc);
            }
        }
        Matrix {
            rows: a.rows,
            cols: b.cols,
            data,
        }
    }

    pub fn add(&self, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
        Matrix {
            rows: a.rows,
            cols: a.cols,
            data: a.data.iter().zip(&b.data).map(|(x, y)| self.ring.add(x, y)).collect(),
        }
    }

    pub fn sub(&self, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Matrix<R::Elem> {
        Matrix {
            rows: a.rows,
            cols: a.cols,
            data: a.data.iter().zip(&b.data).map(|(x, y)| self.ring.sub(x, y)).collect(),
        }
    }

    pub fn mul_vec(&self, a: &Matrix<R::Elem>, v: &[R::Elem]) -> Vec<R::Elem> {
        (0..a.rows)
            .map(|i| {
                (0..a.cols).fold(self.ring.zero(), |acc, k| {
                    self.ring.add(&acc, &self.ring.mul(a.get(i, k), &v[k]))
                })
            })
            .collect()
    }

    pub fn det(&self, a: &Matrix<R::Elem>) -> R::Elem {
        det_generic(&self.ring, a)
    }

    /// `det(x I - a)` in `R[x]`.
    pub fn charpoly(&self, a: &Matrix<R::Elem>) -> Poly<R::Elem> {
        let pr = PolyRing::new(self.ring.clone(), Var::X);
        let n = a.rows;
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = pr.constant(self.ring.neg(a.get(i, j)));
                        if i == j {
                            pr.add(&c, &pr.gen())
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        det_generic(&pr, &Matrix::from_rows(rows))
    }

    /// Inverse via the adjugate; `None` when the determinant is not a unit.
    pub fn inverse(&self, a: &Matrix<R::Elem>) -> Option<Matrix<R::Elem>> {
        let r = &self.ring;
        let d_inv = r.inv(&self.det(a))?;
        let n = a.rows;
        if n == 1 {
            return Some(Matrix::from_rows(vec![vec![d_inv]]));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // adj[i][j] = (-1)^(i+j) det(minor(j, i))
                let c = self.det(&a.minor(j, i));
                let c = if (i + j) % 2 == 1 { r.neg(&c) } else { c };
                data.push(r.mul(&c, &d_inv));
            }
        }
        Some(Matrix {
            rows: n,
            cols: n,
            data,
        })
    }

    pub fn is_scalar(&self, a: &Matrix<R::Elem>) -> bool {
        let c = a.get(0, 0);
        (0..a.rows).all(|i| {
            (0..a.cols).all(|j| {
                if i == j {
                    a.get(i, j) == c
                } else {
                    self.ring.is_zero(a.get(i, j))
                }
            })
        })
    }

    /// Multiplicative order, `None` if it exceeds `cap`.
    pub fn order(&self, a: &Matrix<R::Elem>, cap: u64) -> Option<u64> {
        let id = self.identity();
        let mut cur = a.clone();
        for k in 1..=cap {
            if cur == id {
                return Some(k);
            }
            cur = self.mul(&cur, a);
        }
        None
    }

    pub fn pow(&self, a: &Matrix<R::Elem>, mut e: u64) -> Matrix<R::Elem> {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

fn det_generic<R: Ring>(r: &R, a: &Matrix<R::Elem>) -> R::Elem {
    assert_eq!(a.rows, a.cols, "determinant of non-square matrix");
    match a.rows {
        0 => r.one(),
        1 => a.get(0, 0).clone(),
        2 => r.sub(
            &r.mul(a.get(0, 0), a.get(1, 1)),
            &r.mul(a.get(0, 1), a.get(1, 0)),
        ),
        n => {
            let mut acc = r.zero();
            for j in 0..n {
                if r.is_zero(a.get(0, j)) {
                    continue;
                }
                let term = r.mul(a.get(0, j), &det_generic(r, &a.minor(0, j)));
                acc = if j % 2 == 0 { r.add(&acc, &term) } else { r.sub(&acc, &term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;

    #[test]
    fn charpoly_annihilates() {
        let f = PrimeField::new(5).unwrap();
        let mr = MatrixRing::new(f, 3);
        let a = Matrix::from_rows(vec![vec![1, 2, 3], vec![0, 4, 1], vec![2, 2, 0]]);
        let cp = mr.charpoly(&a);
        assert_eq!(cp.degree(), Some(3));
        // Cayley-Hamilton
        let mut acc = mr.scalar(0);
        for c in cp.coeffs().iter().rev() {
            acc = mr.add(&mr.mul(&acc, &a), &mr.scalar(*c));
        }
        assert_eq!(acc, mr.scalar(0));
        let inv = mr.inverse(&a).unwrap();
        assert_eq!(mr.mul(&a, &inv), mr.identity());
    }
}
