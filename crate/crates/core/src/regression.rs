//! Ordinary least squares for the scaling fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub slope_stderr: T,
    /// Sum of squared residuals.
    pub ssr: T,
}

/// Fit `y = slope * x + intercept`.
pub fn fit_line<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs >= 2 paired points (got {n} x, {} y)",
            ys.len()
        )));
    }
    let nf = from_usize::<T>(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::InsufficientData(
            "line fit needs distinct x values".into(),
        ));
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 {
        (ssr / (from_usize::<T>(n - 2) * sxx)).sqrt()
    } else {
        T::zero()
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        ssr,
    })
}

/// Least-squares coefficients of `y ~ sum_j c_j basis_j(x)`, plus the residual sum of squares.
pub fn fit_basis<T: Real>(xs: &[T], ys: &[T], basis: &[&dyn Fn(T) -> T]) -> Result<(Vec<T>, T)> {
    let n = xs.len();
    let m = basis.len();
    if n != ys.len() || n < m || m == 0 {
        return Err(Error::InsufficientData(format!(
            "basis fit needs at least {m} points (got {n})"
        )));
    }
    let a = DMatrix::<T>::from_fn(n, m, |i, j| basis[j](xs[i]));
    let b = DVector::<T>::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, T::default_epsilon() * from_usize(n.max(m)))
        .map_err(|e| Error::Consistency(format!("least squares: {e}")))?;
    let resid = &a * &coef - &b;
    Ok((coef.iter().copied().collect(), resid.norm_squared()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14);
        assert!((f.intercept + 2.0).abs() < 1e-13);
        assert!(f.ssr < 1e-24);
    }

    #[test]
    fn quadratic_basis_fit() {
        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x * x).collect();
        let one = |_: f64| 1.0;
        let sq = |x: f64| x * x;
        let (c, ssr) = fit_basis(&xs, &ys, &[&one, &sq]).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-13 && (c[1] + 2.0).abs() < 1e-13);
        assert!(ssr < 1e-24);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(fit_line(&[1.0], &[2.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }
}
