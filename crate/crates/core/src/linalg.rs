//! Dense symmetric eigen-decomposition.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-style shifts (the classic `tred2` / `tql2` pair
//! from EISPACK, as popularized by JAMA). `O(d^3)`, no external BLAS.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
/// `vectors` holds one unit eigenvector per column.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Array1<T>,
    pub vectors: Array2<T>,
}

pub fn symmetric_eigen<T: Scalar>(matrix: &Array2<T>) -> Result<SymmetricEigen<T>> {
    let (n, m) = matrix.dim();
    if n != m {
        return Err(Error::InvalidShape(format!("eigen-decomposition needs a square matrix, got {n}x{m}")));
    }
    if n == 0 {
        return Err(Error::InvalidShape("empty matrix".into()));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: "matrix passed to eigen-decomposition".into(),
        });
    }

    // Column-major storage: the inner loops below walk down columns.
    let mut v: Vec<T> = matrix.t().iter().copied().collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let vectors = Array2::from_shape_fn((n, n), |(row, col)| v[at(n, row, order[col])]);
    Ok(SymmetricEigen { values, vectors })
}

#[inline]
fn at(n: usize, r: usize, c: usize) -> usize {
    c * n + r
}

fn tred2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = T::zero();
                v[at(n, j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }

            for j in 0..i {
                f = d[j];
                v[at(n, j, i)] = f;
                g = e[j] + v[at(n, j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[at(n, k, j)] * d[k];
                    e[k] = e[k] + v[at(n, k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let idx = at(n, k, j);
                    v[idx] = v[idx] - (f * e[k] + g * d[k]);
                }
                d[j] = v[at(n, i - 1, j)];
                v[at(n, i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[at(n, n - 1, i)] = v[at(n, i, i)];
        v[at(n, i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[at(n, k, i + 1)] * v[at(n, k, j)];
                }
                for (k, &dk) in d.iter().enumerate().take(i + 1) {
                    let idx = at(n, k, j);
                    v[idx] = v[idx] - g * dk;
                }
            }
        }
        for k in 0..=i {
            v[at(n, k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n, n - 1, j)];
        v[at(n, n - 1, j)] = T::zero();
    }
    v[at(n, n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    const MAX_SWEEPS: usize = 60;

    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::Degenerate(
                        "eigen-decomposition did not converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let ki = at(n, k, i);
                        let ki1 = at(n, k, i + 1);
                        h = v[ki1];
                        v[ki1] = s * v[ki] + c * h;
                        v[ki] = c * v[ki] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}
