//! Hyperspherical coordinates for unit vectors in `ℝ^d`.
//!
//! `s_1 = cos φ_1`, `s_j = sin φ_1 ⋯ sin φ_{j-1} cos φ_j` for `j < d`, and
//! `s_d = sin φ_1 ⋯ sin φ_{d-1}`. The inverse uses two-argument arctangents:
//! `φ_j ∈ [0, π]` for `j < d-1` and the last angle is wrapped into `[0, 2π)`.

use crate::error::{invalid, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Maps `d-1` angles to a unit vector in `ℝ^d`.
pub fn spherical_to_cartesian<T: Scalar>(angles: &[T]) -> Vec<T> {
    let d = angles.len() + 1;
    let mut s = Vec::with_capacity(d);
    let mut sin_prod = T::one();
    for &phi in angles {
        s.push(sin_prod * phi.cos());
        sin_prod = sin_prod * phi.sin();
    }
    s.push(sin_prod);
    s
}

/// Inverse of [`spherical_to_cartesian`] on the sphere minus its coordinate singular sets.
///
/// Fails when `s` is not unit norm within `1e-9` or has fewer than two coordinates.
pub fn cartesian_to_spherical<T: Scalar>(s: &[T]) -> Result<Vec<T>> {
    let d = s.len();
    if d < 2 {
        return Err(invalid("hyperspherical coordinates need dimension >= 2"));
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite unit vector"));
    }
    let norm = s.iter().map(|&x| x * x).sum::<T>().sqrt();
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
    if (norm - T::one()).abs() > tol {
        return Err(invalid(format!("vector is not unit norm (|s| = {norm})")));
    }
    // tail[j] = sqrt(s_j^2 + ... + s_{d-1}^2), 0-based
    let mut tail = vec![T::zero(); d + 1];
    for j in (0..d).rev() {
        tail[j] = (tail[j + 1] * tail[j + 1] + s[j] * s[j]).sqrt();
    }
    let mut angles = Vec::with_capacity(d - 1);
    for j in 0..d - 2 {
        angles.push(tail[j + 1].atan2(s[j]));
    }
    angles.push(wrap_angle(s[d - 1].atan2(s[d - 2])));
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn axis_cases() {
        assert!(close(&spherical_to_cartesian(&[0.0]), &[1.0, 0.0], 1e-15));
        assert!(close(&spherical_to_cartesian(&[FRAC_PI_2]), &[0.0, 1.0], 1e-15));
        let phi = cartesian_to_spherical(&[0.0, 0.0, 1.0]).unwrap();
        assert!(close(&phi, &[FRAC_PI_2, FRAC_PI_2], 1e-15));
    }

    #[test]
    fn full_circle_reachable_in_two_dimensions() {
        for &a in &[0.3, 2.0, PI, 4.0, 5.9] {
            let phi = cartesian_to_spherical(&spherical_to_cartesian(&[a])).unwrap();
            assert!((phi[0] - a).abs() < 1e-12, "{a} -> {}", phi[0]);
        }
    }

    #[test]
    fn rejects_non_unit() {
        assert!(cartesian_to_spherical(&[1.0, 1.0]).is_err());
        assert!(cartesian_to_spherical(&[1.0]).is_err());
    }
}
