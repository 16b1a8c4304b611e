//! PCA whitening: `W = Λ^{-1/2} Vᵀ` from the biased (`1/N`) empirical
//! covariance of a population, applied as `y = W (x − μ)`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Scalar;

/// Lower bound applied to covariance eigenvalues before inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenFloor {
    /// Floor equal to this fraction of the largest eigenvalue.
    Relative(f64),
    /// Fixed floor.
    Absolute(f64),
}

impl Default for EigenFloor {
    fn default() -> Self {
        EigenFloor::Relative(1e-10)
    }
}

impl EigenFloor {
    pub fn value(&self) -> f64 {
        match *self {
            EigenFloor::Relative(v) | EigenFloor::Absolute(v) => v,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.value();
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalue floor must be a nonnegative finite number, got {v}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub floor: EigenFloor,
    /// Accumulate the covariance in parallel row blocks. Blocks are merged in
    /// a fixed order, but low-order bits can differ from the sequential path.
    pub parallel: bool,
}

const PARALLEL_BLOCK_ROWS: usize = 2048;

/// Mean, whitening matrix and eigen-spectrum of one embedding population.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningModel<T> {
    mean: Array1<T>,
    matrix: Array2<T>,
    eigenvalues: Array1<T>,
    sample_count: usize,
    epsilon: T,
}

impl<T: Scalar> WhiteningModel<T> {
    /// Fits the model to `samples`, one vector per row.
    pub fn fit(samples: ArrayView2<'_, T>, options: &FitOptions) -> Result<Self> {
        options.floor.validate()?;
        let (n, d) = samples.dim();
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "whitening needs at least 2 samples, got {n}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidShape("samples have zero dimension".into()));
        }
        if let Some(((r, c), _)) = samples.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("sample {r}, coordinate {c}"),
            });
        }

        let inv_n = T::one() / T::from_usize(n).expect("sample count fits the scalar type");
        let mean = samples
            .axis_iter(Axis(0))
            .fold(Array1::<T>::zeros(d), |acc, row| acc + row)
            * inv_n;

        let cov = if options.parallel && n > PARALLEL_BLOCK_ROWS {
            let starts: Vec<usize> = (0..n).step_by(PARALLEL_BLOCK_ROWS).collect();
            let partials: Vec<Array2<T>> = starts
                .par_iter()
                .map(|&start| {
                    let end = (start + PARALLEL_BLOCK_ROWS).min(n);
                    let centered = &samples.slice(s![start..end, ..]) - &mean;
                    centered.t().dot(&centered)
                })
                .collect();
            partials
                .into_iter()
                .fold(Array2::<T>::zeros((d, d)), |acc, p| acc + p)
        } else {
            let centered = &samples - &mean;
            centered.t().dot(&centered)
        } * inv_n;
        let half = T::lit(0.5);
        let cov = (&cov + &cov.t()) * half;

        Self::from_covariance(mean, &cov, n, options.floor)
    }

    /// Builds the model from a mean and covariance estimated elsewhere.
    pub fn from_covariance(
        mean: Array1<T>,
        covariance: &Array2<T>,
        sample_count: usize,
        floor: EigenFloor,
    ) -> Result<Self> {
        floor.validate()?;
        let d = mean.len();
        if covariance.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: covariance.nrows(),
            });
        }
        let eig = symmetric_eigen(covariance)?;
        let largest = eig.values[0].max(T::zero());
        let applied = match floor {
            EigenFloor::Relative(r) => largest * T::lit(r),
            EigenFloor::Absolute(a) => T::lit(a),
        };
        let eigenvalues = eig.values.mapv(|l| l.max(applied));
        if eigenvalues.iter().any(|&l| l <= T::zero()) {
            return Err(Error::Degenerate(
                "covariance has zero variance in some direction and the eigenvalue floor is zero"
                    .into(),
            ));
        }

        let mut vectors = eig.vectors;
        for mut col in vectors.columns_mut() {
            let mut best = 0;
            for (i, v) in col.iter().enumerate() {
                if v.abs() > col[best].abs() {
                    best = i;
                }
            }
            if col[best] < T::zero() {
                col.mapv_inplace(|v| -v);
            }
        }

        let mut matrix = vectors.reversed_axes();
        for (mut row, &l) in matrix.rows_mut().into_iter().zip(eigenvalues.iter()) {
            let scale = T::one() / l.sqrt();
            row.mapv_inplace(|v| v * scale);
        }

        Ok(Self {
            mean,
            matrix: matrix.as_standard_layout().into_owned(),
            eigenvalues,
            sample_count,
            epsilon: applied,
        })
    }

    /// Reassembles a model from stored parts.
    pub fn from_parts(
        mean: Array1<T>,
        matrix: Array2<T>,
        eigenvalues: Array1<T>,
        sample_count: usize,
        epsilon: T,
    ) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidShape("model dimension is zero".into()));
        }
        if matrix.dim() != (d, d) || eigenvalues.len() != d {
            return Err(Error::InvalidShape(format!(
                "model parts disagree: mean {d}, matrix {:?}, eigenvalues {}",
                matrix.dim(),
                eigenvalues.len()
            )));
        }
        let all_finite = mean.iter().chain(matrix.iter()).chain(eigenvalues.iter()).all(|v| v.is_finite());
        if !all_finite || !epsilon.is_finite() {
            return Err(Error::NonFinite {
                location: "whitening model parts".into(),
            });
        }
        Ok(Self {
            mean,
            matrix: matrix.as_standard_layout().into_owned(),
            eigenvalues,
            sample_count,
            epsilon,
        })
    }

    /// Zero mean, identity matrix.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: Array1::zeros(dim),
            matrix: Array2::eye(dim),
            eigenvalues: Array1::ones(dim),
            sample_count: 0,
            epsilon: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> ArrayView1<'_, T> {
        self.mean.view()
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.matrix.view()
    }

    pub fn eigenvalues(&self) -> ArrayView1<'_, T> {
        self.eigenvalues.view()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Absolute eigenvalue floor that was applied during fitting.
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    pub fn whiten(&self, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
        self.check_dim(x.len())?;
        let centered = &x - &self.mean;
        Ok(self.matrix.dot(&centered))
    }

    /// Whitens every row of `xs`.
    pub fn whiten_rows(&self, xs: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_dim(xs.ncols())?;
        let mut centered = xs.to_owned();
        centered.zip_mut_with(&self.mean, |v, &m| *v = *v - m);
        Ok(centered.dot(&self.matrix.t()))
    }

    /// Whitens rows that already had the mean subtracted.
    pub(crate) fn whiten_centered_rows(&self, centered: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_dim(centered.ncols())?;
        Ok(centered.dot(&self.matrix.t()))
    }

    /// `V Λ Vᵀ` with the floored eigenvalues: the covariance this model
    /// actually inverts.
    pub fn regularized_covariance(&self) -> Array2<T> {
        // Rows of the matrix are v_i / sqrt(λ_i); scaling by λ_i gives v_i sqrt(λ_i).
        let mut scaled = self.matrix.clone();
        for (mut row, &l) in scaled.rows_mut().into_iter().zip(self.eigenvalues.iter()) {
            row.mapv_inplace(|v| v * l);
        }
        scaled.t().dot(&scaled)
    }

    /// Same model at another precision.
    pub fn cast<U: Scalar>(&self) -> WhiteningModel<U> {
        let conv = |v: &T| U::lit(v.to_f64_lossless());
        WhiteningModel {
            mean: self.mean.map(conv),
            matrix: self.matrix.map(conv),
            eigenvalues: self.eigenvalues.map(conv),
            sample_count: self.sample_count,
            epsilon: conv(&self.epsilon),
        }
    }
}
