//! Sparse Gaussian elimination for the absorbing-chain systems.
//!
//! The matrices here are `I - Q` (or `I - tQ`) for the transient block `Q`
//! of an absorbing chain. Every leading principal submatrix of such a
//! matrix is nonsingular, so elimination in natural order never meets a
//! zero pivot for a valid model. A zero pivot is still checked and
//! reported as [`Error::Singular`].

use crate::error::{Error, Result};
use crate::numeric::Field;

type Row<F> = Vec<(usize, F)>;

/// Square sparse matrix given row by row as `(column, value)` entries.
#[derive(Clone, Debug)]
pub struct SparseMatrix<F> {
    rows: Vec<Row<F>>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn new(n: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `value` to entry `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: F) {
        let r = &mut self.rows[row];
        match r.binary_search_by_key(&col, |(c, _)| *c) {
            Ok(pos) => {
                let acc = std::mem::replace(&mut r[pos].1, F::zero());
                r[pos].1 = acc + value;
            }
            Err(pos) => r.insert(pos, (col, value)),
        }
    }

    pub fn factor(self) -> Result<Factorization<F>> {
        let n = self.rows.len();
        let mut rows = self.rows;
        for r in rows.iter_mut() {
            r.retain(|(_, v)| !v.is_zero());
        }
        // rows below the diagonal that still hold an entry in each column
        let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, r) in rows.iter().enumerate() {
            for &(c, _) in r {
                if c < i {
                    pending[c].push(i);
                }
            }
        }
        let mut multipliers: Vec<(usize, usize, F)> = Vec::new();
        for k in 0..n {
            let pivot_row = std::mem::take(&mut rows[k]);
            let pivot = match pivot_row.first() {
                Some((c, v)) if *c == k && !v.is_zero() => v.clone(),
                _ => return Err(Error::Singular(k)),
            };
            let mut targets = std::mem::take(&mut pending[k]);
            targets.sort_unstable();
            targets.dedup();
            for j in targets {
                let row = std::mem::take(&mut rows[j]);
                let Some(pos) = row.iter().position(|(c, _)| *c == k) else {
                    rows[j] = row;
                    continue;
                };
                let factor = row[pos].1.div_ref(&pivot);
                let mut merged: Row<F> = Vec::with_capacity(row.len() + pivot_row.len());
                let mut a = row.into_iter().peekable();
                let mut b = pivot_row.iter().skip(1).peekable();
                loop {
                    match (a.peek(), b.peek()) {
                        (None, None) => break,
                        (Some((ca, _)), Some((cb, _))) if ca == cb => {
                            let (c, mut v) = a.next().expect("peeked");
                            let (_, pv) = b.next().expect("peeked");
                            v.sub_mul(&factor, pv);
                            if !v.is_zero() {
                                merged.push((c, v));
                            }
                        }
                        (Some((ca, _)), Some((cb, _))) if cb < ca => {
                            let (c, pv) = b.next().map(|(c, v)| (*c, v)).expect("peeked");
                            let mut v = F::zero();
                            v.sub_mul(&factor, pv);
                            if c < j {
                                pending[c].push(j);
                            }
                            merged.push((c, v));
                        }
                        (Some(_), _) => {
                            let (c, v) = a.next().expect("peeked");
                            if c != k {
                                merged.push((c, v));
                            }
                        }
                        (None, Some(_)) => {
                            let (c, pv) = b.next().map(|(c, v)| (*c, v)).expect("peeked");
                            let mut v = F::zero();
                            v.sub_mul(&factor, pv);
                            if c < j {
                                pending[c].push(j);
                            }
                            merged.push((c, v));
                        }
                    }
                }
                rows[j] = merged;
                multipliers.push((j, k, factor));
            }
            rows[k] = pivot_row;
        }
        Ok(Factorization {
            upper: rows,
            multipliers,
        })
    }
}

/// `LU` factors: unit lower part as ordered elimination steps, upper part
/// as sparse rows whose first entry is the pivot.
#[derive(Clone, Debug)]
pub struct Factorization<F> {
    upper: Vec<Row<F>>,
    multipliers: Vec<(usize, usize, F)>,
}

impl<F: Field> Factorization<F> {
    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn solve(&self, rhs: &[F]) -> Vec<F> {
        assert_eq!(rhs.len(), self.upper.len(), "right-hand side length");
        let mut y = rhs.to_vec();
        for (j, k, factor) in &self.multipliers {
            let yk = y[*k].clone();
            y[*j].sub_mul(factor, &yk);
        }
        let n = self.upper.len();
        let mut x: Vec<F> = vec![F::zero(); n];
        for k in (0..n).rev() {
            let row = &self.upper[k];
            let mut acc = y[k].clone();
            for (c, v) in row.iter().skip(1) {
                acc.sub_mul(v, &x[*c]);
            }
            x[k] = acc.div_ref(&row[0].1);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational::{ratio, Rational};

    fn dense_mul(m: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
        m.iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn solves_small_system() {
        // [2 1 0; 1 3 1; 0 1 4] x = [3, 5, 5] -> x = [1, 1, 1]
        let mut m = SparseMatrix::new(3);
        for (r, c, v) in [(0, 0, 2), (0, 1, 1), (1, 0, 1), (1, 1, 3), (1, 2, 1), (2, 1, 1), (2, 2, 4)] {
            m.add(r, c, ratio(v, 1));
        }
        let lu = m.factor().unwrap();
        let x = lu.solve(&[ratio(3, 1), ratio(5, 1), ratio(5, 1)]);
        assert_eq!(x, vec![ratio(1, 1); 3]);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut m: SparseMatrix<Rational> = SparseMatrix::new(2);
        m.add(0, 1, ratio(1, 1));
        m.add(1, 0, ratio(1, 1));
        assert!(matches!(m.factor(), Err(Error::Singular(0))));
    }

    proptest::proptest! {
        /// Random diagonally dominant sparse systems with fill-in.
        #[test]
        fn residual_is_zero(
            n in 1usize..9,
            entries in proptest::collection::vec((0usize..9, 0usize..9, -5i64..5), 0..30),
            rhs in proptest::collection::vec(-9i64..9, 9),
        ) {
            let mut dense = vec![vec![Rational::from_integer(0.into()); n]; n];
            let mut m = SparseMatrix::new(n);
            for (r, c, v) in entries {
                if r < n && c < n && r != c {
                    dense[r][c] += ratio(v, 1);
                    m.add(r, c, ratio(v, 1));
                }
            }
            for (i, row) in dense.iter_mut().enumerate() {
                let off: Rational = row.iter().map(|v| if v < &ratio(0, 1) { -v.clone() } else { v.clone() }).sum();
                let d = off + ratio(1, 1);
                row[i] = d.clone();
                m.add(i, i, d);
            }
            let b: Vec<Rational> = rhs[..n].iter().map(|&v| ratio(v, 1)).collect();
            let x = m.factor().unwrap().solve(&b);
            proptest::prop_assert_eq!(dense_mul(&dense, &x), b);
        }
    }
}
