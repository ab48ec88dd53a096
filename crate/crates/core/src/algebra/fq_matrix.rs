use serde::{Deserialize, Serialize};

use super::{PrimeField, Ring};

/// Dense row-major matrix over a prime field `F_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FqMatrix {
    q: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: FqMatrix,
    pub pivots: Vec<usize>,
}

impl FqMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            q: field.p(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(field, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, x) in r.iter().enumerate() {
                m.set(i, j, x % field.p());
            }
        }
        m
    }

    pub fn from_columns(field: PrimeField, rows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x % field.p());
            }
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.q).expect("prime")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self {
            q: self.q,
            rows: self.cols,
            cols: self.rows,
            data: vec![0; self.data.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let q = self.q;
        let mut out = vec![0u64; self.rows * other.cols];
        for i in 0..self.rows {
            let acc = &mut out[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for (o, b) in acc.iter_mut().zip(other.row(k)) {
                    *o = (*o + a * b) % q;
                }
            }
        }
        FqMatrix {
            q,
            rows: self.rows,
            cols: other.cols,
            data: out,
        }
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (a, b)| (acc + a * b) % self.q)
            })
            .collect()
    }

    pub fn add(&self, other: &FqMatrix) -> FqMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FqMatrix {
            q: self.q,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a + b) % self.q)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == 0)
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    pub fn echelon(&self) -> Echelon {
        let f = self.field();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(&m.get(r, c)).unwrap();
            for j in c..m.cols {
                let v = f.mul(&m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                let neg = f.neg(&factor);
                for j in c..m.cols {
                    let v = m.get(r, j);
                    if v != 0 {
                        let cur = m.get(i, j);
                        m.set(i, j, (cur + neg * v) % self.q);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Canonical null-space basis: one vector per free column, with a 1 in
    /// that column and zeros in the other free columns.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let e = self.echelon();
        let f = self.field();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, c) in e.pivots.iter().enumerate() {
                v[*c] = Some(r);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (r, c) in e.pivots.iter().enumerate() {
                v[*c] = f.neg(&e.matrix.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Some solution of `self * x = b`, or `None`.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = FqMatrix::zeros(self.field(), self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i] % self.q);
        }
        let e = aug.echelon();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (r, c) in e.pivots.iter().enumerate() {
            x[*c] = e.matrix.get(r, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<FqMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = FqMatrix::zeros(self.field(), n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let e = aug.echelon();
        if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = FqMatrix::zeros(self.field(), n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, e.matrix.get(i, n + j));
            }
        }
        Some(inv)
    }
}

/// Incrementally maintained row space, used for greedy independence tests.
#[derive(Clone, Debug)]
pub struct RowSpace {
    field: PrimeField,
    dim: usize,
    /// Rows in echelon form with their pivot positions.
    rows: Vec<(usize, Vec<u64>)>,
}

impl RowSpace {
    pub fn new(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the space; zero result means `v` is in the span.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut w = v.to_vec();
        for (piv, row) in &self.rows {
            let c = w[*piv];
            if c != 0 {
                let neg = f.neg(&c);
                for (x, y) in w.iter_mut().zip(row) {
                    *x = (*x + neg * y) % f.p();
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|x| *x == 0)
    }

    /// Adds `v`; returns `false` if it was already in the span.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let f = self.field;
        let w = self.reduce(v);
        let Some(piv) = w.iter().position(|x| *x != 0) else {
            return false;
        };
        let inv = f.inv(&w[piv]).unwrap();
        let w: Vec<u64> = w.iter().map(|x| f.mul(x, &inv)).collect();
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv];
            if c != 0 {
                let neg = f.neg(&c);
                for (x, y) in row.iter_mut().zip(&w) {
                    *x = (*x + neg * y) % f.p();
                }
            }
        }
        self.rows.push((piv, w));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(FqMatrix::identity(f(3), 4).kernel().is_empty());
    }

    #[test]
    fn zero_matrix_kernel() {
        assert_eq!(FqMatrix::zeros(f(2), 2, 2).kernel().len(), 2);
    }

    #[test]
    fn solve_and_inverse() {
        let m = FqMatrix::from_rows(f(5), &[vec![1, 2], vec![3, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FqMatrix::identity(f(5), 2));
        let x = m.solve(&[1, 0]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![1, 0]);
        let sing = FqMatrix::from_rows(f(5), &[vec![1, 2], vec![2, 4]]);
        assert!(sing.inverse().is_none());
        assert!(sing.solve(&[1, 0]).is_none());
    }

    #[test]
    fn row_space_tracks_rank() {
        let mut s = RowSpace::new(f(3), 3);
        assert!(s.insert(&[1, 2, 0]));
        assert!(s.insert(&[0, 1, 1]));
        assert!(!s.insert(&[1, 0, 1]));
        assert_eq!(s.rank(), 2);
    }
}
