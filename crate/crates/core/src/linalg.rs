//! Dense matrices over a cyclotomic field.

use crate::scalar::CycScalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub conductor: u32,
    pub data: Vec<CycScalar>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = CycScalar;
    fn index(&self, (i, j): (usize, usize)) -> &CycScalar {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CycScalar {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize, l: u32) -> Self {
        Mat { rows, cols, conductor: l, data: vec![CycScalar::zero(l); rows * cols] }
    }

    pub fn identity(n: usize, l: u32) -> Self {
        let mut m = Self::zeros(n, n, l);
        for i in 0..n {
            m[(i, i)] = CycScalar::one(l);
        }
        m
    }

    pub fn scalar(x: CycScalar) -> Self {
        Mat { rows: 1, cols: 1, conductor: x.conductor(), data: vec![x] }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, s: &CycScalar) -> Mat {
        Mat { data: self.data.iter().map(|x| x * s).collect(), ..self.clone() }
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let mut out = Mat::zeros(self.rows, o.cols, self.conductor);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[CycScalar]) -> Vec<CycScalar> {
        (0..self.rows)
            .map(|i| {
                let mut s = CycScalar::zero(self.conductor);
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        s += &(a * x);
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat { data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        Mat { data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows, self.conductor);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Kronecker product, with `self`'s index varying slowest.
    pub fn kron(&self, o: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows * o.rows, self.cols * o.cols, self.conductor);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out[(i * o.rows + k, j * o.cols + l)] = a * &o[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> CycScalar {
        let mut s = CycScalar::zero(self.conductor);
        for i in 0..self.rows.min(self.cols) {
            s += &self[(i, i)];
        }
        s
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self[(r, c)].inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &self[(i, j)] - &(&f * &self[(r, j)]);
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right null space {x : self·x = 0}.
    pub fn nullspace(&self) -> Vec<Vec<CycScalar>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let l = self.conductor;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![CycScalar::zero(l); self.cols];
                v[f] = CycScalar::one(l);
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -&m[(r, f)];
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n, self.conductor);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = CycScalar::one(self.conductor);
        }
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut out = Mat::zeros(n, n, self.conductor);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(out)
    }

    /// Rows stacked as a matrix.
    pub fn from_rows(rows: &[Vec<CycScalar>], cols: usize, l: u32) -> Mat {
        let mut m = Mat::zeros(rows.len(), cols, l);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }
}

/// Basis of the intersection of null spaces of several square blocks, or of
/// a stacked system, by row reduction.
pub fn common_nullspace(blocks: &[Mat], cols: usize, l: u32) -> Vec<Vec<CycScalar>> {
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    if rows == 0 {
        return (0..cols)
            .map(|i| (0..cols).map(|j| if i == j { CycScalar::one(l) } else { CycScalar::zero(l) }).collect())
            .collect();
    }
    let mut m = Mat::zeros(rows, cols, l);
    let mut r = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..cols {
                m[(r, j)] = b[(i, j)].clone();
            }
            r += 1;
        }
    }
    m.nullspace()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]], l: u32) -> Mat {
        let r: Vec<Vec<CycScalar>> = rows.iter().map(|row| row.iter().map(|&x| CycScalar::from_int(x, l)).collect()).collect();
        Mat::from_rows(&r, rows[0].len(), l)
    }

    #[test]
    fn inverse_and_nullspace() {
        let a = m(&[&[1, 2], &[3, 4]], 4);
        let ai = a.inverse().unwrap();
        assert_eq!(a.mul(&ai), Mat::identity(2, 4));
        let b = m(&[&[1, 2, 3], &[2, 4, 6]], 1);
        let ns = b.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(b.mul_vec(v).iter().all(|x| x.is_zero()));
        }
        assert!(m(&[&[1, 2], &[2, 4]], 1).inverse().is_none());
        let i = CycScalar::root_of_unity(1, 4);
        let c = Mat::from_rows(&[vec![i.clone(), CycScalar::zero(4)], vec![CycScalar::one(4), i.clone()]], 2, 4);
        assert_eq!(c.mul(&c.inverse().unwrap()), Mat::identity(2, 4));
        assert_eq!(a.kron(&Mat::identity(2, 4)).trace(), CycScalar::from_int(10, 4));
    }
}
