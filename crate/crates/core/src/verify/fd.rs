//! Central differences and a discrete winding number.

use std::f64::consts::TAU;

use crate::branch::{principal_arg, Cx};

/// Central-difference gradient of `f` at `x` with step `h`.
pub fn central_gradient<E>(mut f: impl FnMut(&[f64]) -> Result<f64, E>, x: &[f64], h: f64) -> Result<Vec<f64>, E> {
    let mut y = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let p = f(&y)?;
        y[i] = x[i] - h;
        let m = f(&y)?;
        y[i] = x[i];
        out.push((p - m) / (2.0 * h));
    }
    Ok(out)
}

/// `(2 dim + 1)`-point Laplacian of `f` at `x` with step `h`.
pub fn laplacian<E>(mut f: impl FnMut(&[f64]) -> Result<f64, E>, x: &[f64], h: f64) -> Result<f64, E> {
    let c = f(x)?;
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        acc += f(&y)?;
        y[i] = x[i] - h;
        acc += f(&y)?;
        y[i] = x[i];
        acc -= 2.0 * c;
    }
    Ok(acc / (h * h))
}

/// Turns of a closed sequence of nonzero values about the origin, from the
/// sum of principal argument increments.
pub fn winding_number(values: &[Cx]) -> i64 {
    let n = values.len();
    let total: f64 = (0..n).map(|i| principal_arg(values[(i + 1) % n] / values[i])).sum();
    (total / TAU).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let f = |x: &[f64]| Ok::<_, ()>(x[0] * x[0] + 3.0 * x[1] * x[1] - x[0] * x[1]);
        let g = central_gradient(f, &[0.5, -1.0], 1e-3).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] + 6.5).abs() < 1e-9);
        assert!((laplacian(f, &[0.5, -1.0], 1e-2).unwrap() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn winding_of_powers() {
        for k in [-2i64, 0, 1, 3] {
            let vals: Vec<Cx> = (0..64).map(|i| Cx::from_polar(1.0, TAU * i as f64 / 64.0).powi(k as i32)).collect();
            assert_eq!(winding_number(&vals), k);
        }
    }
}
