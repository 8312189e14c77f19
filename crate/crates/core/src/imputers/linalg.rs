use crate::scalar::Scalar;

/// Solves `a x = b` for square row-major `a` by Gaussian elimination with
/// partial pivoting. Returns `None` for a (numerically) singular system.
pub(crate) fn solve<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot * n + col].abs() <= T::epsilon() * T::lit(1e-3) || !a[pivot * n + col].is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Some(x)
}

/// Ridge regression with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit<T> {
    pub weights: Vec<T>,
    pub intercept: T,
}

impl<T: Scalar> RidgeFit<T> {
    pub fn predict(&self, x: impl Iterator<Item = T>) -> T {
        self.weights
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (&w, v)| acc + w * v)
    }
}

/// Fits `y ~ X w + c` minimising `|y - Xw - c|^2 + lambda |w|^2`.
/// `x` is row-major with `p` columns.
pub(crate) fn ridge<T: Scalar>(x: &[T], y: &[T], p: usize, lambda: T) -> RidgeFit<T> {
    let n = y.len();
    let nt = T::from_count(n.max(1));
    let mut xm = vec![T::zero(); p];
    for row in x.chunks_exact(p.max(1)).take(n) {
        for (m, &v) in xm.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    xm.iter_mut().for_each(|m| *m = *m / nt);
    let ym = y.iter().copied().sum::<T>() / nt;
    if p == 0 {
        return RidgeFit {
            weights: vec![],
            intercept: ym,
        };
    }
    let mut gram = vec![T::zero(); p * p];
    let mut rhs = vec![T::zero(); p];
    let mut centered = vec![T::zero(); p];
    for (row, &yi) in x.chunks_exact(p).zip(y) {
        for j in 0..p {
            centered[j] = row[j] - xm[j];
        }
        let yc = yi - ym;
        for j in 0..p {
            rhs[j] = rhs[j] + centered[j] * yc;
            for k in j..p {
                gram[j * p + k] = gram[j * p + k] + centered[j] * centered[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            gram[j * p + k] = gram[k * p + j];
        }
        gram[j * p + j] = gram[j * p + j] + lambda;
    }
    let weights = solve(gram, rhs).unwrap_or_else(|| vec![T::zero(); p]);
    let intercept = weights
        .iter()
        .zip(&xm)
        .fold(ym, |acc, (&w, &m)| acc - w * m);
    RidgeFit { weights, intercept }
}
