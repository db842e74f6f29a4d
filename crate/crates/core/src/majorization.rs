//! Majorization order and Schur-convexity helpers.
//!
//! Vectors are compared after sorting nondecreasing: `x ⪯ y` when every
//! partial sum of the sorted `x` is at least the matching partial sum of the
//! sorted `y` and the totals agree. Under this convention the uniform vector
//! is majorized by every vector with the same total.

use std::ops::Deref;

use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajorizationError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("entry {index} is {value}; expected a finite nonnegative number")]
    Negative { index: usize, value: f64 },
    #[error("function undefined at entry {index} (x = {value})")]
    Domain { index: usize, value: f64 },
}

/// A vector with finite nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MajorizationError> {
        if let Some((index, &value)) =
            values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(MajorizationError::Negative { index, value });
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Deref for NonnegVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for NonnegVector {
    type Error = MajorizationError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Prefix sums of `x` sorted nondecreasing.
pub fn lorenz_partial_sums(x: &[f64]) -> Vec<f64> {
    sorted(x)
        .into_iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// `x ⪯ y` with the default tolerance.
pub fn majorized_by(x: &[f64], y: &[f64]) -> Result<bool, MajorizationError> {
    majorized_by_tol(x, y, DEFAULT_TOL)
}

/// `x ⪯ y`, comparing partial sums and totals with slack
/// `tol * max(1, |sum x|)`.
pub fn majorized_by_tol(x: &[f64], y: &[f64], tol: f64) -> Result<bool, MajorizationError> {
    if x.len() != y.len() {
        return Err(MajorizationError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Ok(true);
    }
    let lx = lorenz_partial_sums(x);
    let ly = lorenz_partial_sums(y);
    let k = x.len();
    let slack = tol * lx[k - 1].abs().max(1.0);
    if (lx[k - 1] - ly[k - 1]).abs() > slack {
        return Ok(false);
    }
    Ok(lx[..k - 1].iter().zip(&ly[..k - 1]).all(|(a, b)| a >= &(b - slack)))
}

/// `sum_i theta(x_i)`; fails if `theta` is not finite at some entry.
pub fn schur_sum_value<F>(x: &[f64], theta: F) -> Result<f64, MajorizationError>
where
    F: Fn(f64) -> f64,
{
    x.iter().enumerate().try_fold(0.0, |acc, (index, &value)| {
        let t = theta(value);
        if t.is_finite() {
            Ok(acc + t)
        } else {
            Err(MajorizationError::Domain { index, value })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_is_majorized() {
        let u = [1.0 / 3.0; 3];
        assert!(majorized_by(&u, &[0.5, 0.3, 0.2]).unwrap());
        assert!(!majorized_by(&[0.5, 0.3, 0.2], &u).unwrap());
    }

    #[test]
    fn maxmin_point_of_example_one_is_majorized() {
        assert!(majorized_by(&[1.0, 1.5, 1.5], &[1.0, 1.0, 2.0]).unwrap());
    }

    #[test]
    fn unequal_totals_are_incomparable() {
        assert!(!majorized_by(&[1.0, 2.0], &[2.0, 2.0]).unwrap());
        assert!(!majorized_by(&[2.0, 2.0], &[1.0, 2.0]).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(majorized_by(&[1.0], &[1.0, 0.0]), Err(MajorizationError::LengthMismatch(1, 2)));
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(lorenz_partial_sums(&[3.0, 1.0, 2.0]), vec![1.0, 3.0, 6.0]);
        assert_eq!(lorenz_partial_sums(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(lorenz_partial_sums(&[1.0, 1.5, 1.5]), vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn schur_sums() {
        assert_eq!(schur_sum_value(&[1.0, 2.0], |v| v * v).unwrap(), 5.0);
        let v = schur_sum_value(&[1.0, 1.5, 1.5], f64::ln).unwrap();
        assert!((v - (9.0f64 / 4.0).ln()).abs() < 1e-15);
        assert_eq!(schur_sum_value(&[0.25, 4.0, 1.0], |v| v).unwrap(), 5.25);
        assert_eq!(
            schur_sum_value(&[1.0, 0.0], f64::ln),
            Err(MajorizationError::Domain { index: 1, value: 0.0 })
        );
    }

    #[test]
    fn nonneg_vector_rejects_negative() {
        assert!(NonnegVector::new(vec![1.0, -0.1]).is_err());
        assert!(NonnegVector::new(vec![f64::NAN]).is_err());
        assert_eq!(NonnegVector::new(vec![0.0, 2.0]).unwrap().total(), 2.0);
    }

    /// Random vector and a copy spread out by a few transfers from smaller
    /// to larger entries, so that `x ⪯ y`.
    fn spread_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..7)
            .prop_flat_map(|k| {
                (
                    prop::collection::vec(0.0f64..10.0, k),
                    prop::collection::vec((0usize..k, 0usize..k, 0.0f64..1.0), 1..6),
                )
            })
            .prop_map(|(x, moves)| {
                let mut y = x.clone();
                for (i, j, frac) in moves {
                    let (lo, hi) = if y[i] <= y[j] { (i, j) } else { (j, i) };
                    if lo != hi {
                        let delta = frac * y[lo];
                        y[lo] -= delta;
                        y[hi] += delta;
                    }
                }
                (x, y)
            })
    }

    proptest! {
        #[test]
        fn reflexive(x in prop::collection::vec(0.0f64..10.0, 1..8)) {
            prop_assert!(majorized_by(&x, &x).unwrap());
        }

        #[test]
        fn permutation_invariant((x, y) in spread_pair(), seed in any::<u64>()) {
            prop_assert!(majorized_by(&x, &y).unwrap());
            let mut xr = x.clone();
            let mut yr = y.clone();
            let k = x.len();
            xr.rotate_left((seed as usize) % k);
            yr.reverse();
            prop_assert!(majorized_by(&xr, &yr).unwrap());
        }

        #[test]
        fn transitive((x, y) in spread_pair(), frac in 0.0f64..1.0) {
            // Spread y once more to get z with y ⪯ z.
            let mut z = y.clone();
            let lo = (0..z.len()).min_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap();
            let hi = (0..z.len()).max_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap();
            if lo != hi {
                let d = frac * z[lo];
                z[lo] -= d;
                z[hi] += d;
            }
            prop_assert!(majorized_by(&y, &z).unwrap());
            prop_assert!(majorized_by(&x, &z).unwrap());
        }

        #[test]
        fn convex_sums_are_schur_convex((x, y) in spread_pair()) {
            let sq = |v: f64| v * v;
            let ex = |v: f64| (0.3 * v).exp();
            prop_assert!(schur_sum_value(&x, sq).unwrap() <= schur_sum_value(&y, sq).unwrap() + 1e-9);
            prop_assert!(schur_sum_value(&x, ex).unwrap() <= schur_sum_value(&y, ex).unwrap() + 1e-9);
            let concave = |v: f64| v.ln_1p();
            prop_assert!(schur_sum_value(&x, concave).unwrap() >= schur_sum_value(&y, concave).unwrap() - 1e-9);
        }

        #[test]
        fn antisymmetric_up_to_permutation((x, y) in spread_pair()) {
            if majorized_by(&y, &x).unwrap() {
                let lx = lorenz_partial_sums(&x);
                let ly = lorenz_partial_sums(&y);
                for (a, b) in lx.iter().zip(&ly) {
                    prop_assert!((a - b).abs() <= 1e-8 * lx.last().unwrap().max(1.0));
                }
            }
        }
    }
}
