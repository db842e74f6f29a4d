//! Gaussian multiple-access channels.
//!
//! The capacity region of a scalar or vector Gaussian MAC is the polymatroid
//! of its rank function, so every fair point comes from the [`maxmin`]
//! solvers. Powers are linear and rates are in nats.
//!
//! [`maxmin`]: crate::maxmin

use thiserror::Error;

use nalgebra::{DMatrix, DVector};
use crate::majorization::NonnegVector;
use crate::maxmin::{
    self, canonical_disagreement, maxmin_allocate, nash_bargaining, nbs_canonical_gensym,
    symmetric_allocate, AllocationResult, GeneralizedSymmetricSpec, MaxMinError, Mode,
};
use crate::setfn::{self, has_order_property, members, SetFnError, SubsetFunction};

const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("capacity formula needs a nonnegative argument, got {0}")]
    NegativeArgument(f64),
    #[error("matrix for user {0} is not positive definite")]
    Factorization(usize),
    #[error("unsupported request: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Solver(#[from] MaxMinError),
    #[error(transparent)]
    SetFn(#[from] SetFnError),
}

/// `C(x) = ½ ln(1 + x)`.
pub fn shannon(x: f64) -> Result<f64, MacError> {
    if x < 0.0 || x.is_nan() {
        return Err(MacError::NegativeArgument(x));
    }
    Ok(capacity(x))
}

pub(crate) fn capacity(x: f64) -> f64 {
    0.5 * x.ln_1p()
}

fn check_noise(noise: f64) -> Result<(), MacError> {
    if !(noise > 0.0 && noise.is_finite()) {
        return Err(MacError::InvalidChannel(format!("noise power must be positive, got {noise}")));
    }
    Ok(())
}

fn check_powers(powers: Vec<f64>) -> Result<NonnegVector, MacError> {
    if powers.is_empty() || powers.len() > setfn::MAX_USERS {
        return Err(MacError::InvalidChannel(format!("{} users", powers.len())));
    }
    NonnegVector::new(powers).map_err(|e| MacError::InvalidChannel(e.to_string()))
}

/// Single-antenna receiver with power limits `P` and noise power `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMac {
    powers: NonnegVector,
    noise: f64,
}

impl ScalarMac {
    pub fn new(powers: Vec<f64>, noise: f64) -> Result<Self, MacError> {
        check_noise(noise)?;
        Ok(Self { powers: check_powers(powers)?, noise })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn users(&self) -> usize {
        self.powers.len()
    }

    /// `g(S) = C(P(S)/N)`.
    pub fn rank(&self) -> SubsetFunction {
        let p = self.powers.to_vec();
        let n = self.noise;
        SubsetFunction::new(p.len(), move |s| capacity(members(s).iter().map(|&i| p[i]).sum::<f64>() / n))
            .expect("validated size")
    }

    /// The rank function as `phi(P(S))` with `phi(x) = C(x/N)`.
    pub fn generalized_symmetric(&self) -> GeneralizedSymmetricSpec {
        let n = self.noise;
        GeneralizedSymmetricSpec::new(move |x: f64| capacity(x / n), self.powers.clone())
            .expect("C(x/N) is increasing and concave")
    }

    /// Rates when every receiver treats the other users as noise.
    pub fn tin_rates(&self) -> Vec<f64> {
        let total: f64 = self.powers.iter().sum();
        self.powers
            .iter()
            .map(|&p| capacity(p / (self.noise + (total - p))))
            .collect()
    }
}

/// Receiver with `L` dimensions; user `i` transmits along the unit vector
/// `s_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMac {
    powers: NonnegVector,
    signatures: Vec<Vec<f64>>,
    noise: f64,
}

impl VectorMac {
    /// `signatures[i]` is user `i`'s length-`L` signature.
    pub fn new(powers: Vec<f64>, signatures: Vec<Vec<f64>>, noise: f64) -> Result<Self, MacError> {
        check_noise(noise)?;
        let powers = check_powers(powers)?;
        if signatures.len() != powers.len() {
            return Err(MacError::InvalidChannel(format!(
                "{} signatures for {} users",
                signatures.len(),
                powers.len()
            )));
        }
        let dim = signatures[0].len();
        if dim == 0 {
            return Err(MacError::InvalidChannel("signature length must be at least 1".into()));
        }
        for (i, s) in signatures.iter().enumerate() {
            if s.len() != dim {
                return Err(MacError::InvalidChannel(format!("signature {} has length {}", i + 1, s.len())));
            }
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(MacError::InvalidChannel(format!("signature {} has norm {norm}", i + 1)));
            }
        }
        Ok(Self { powers, signatures, noise })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn signatures(&self) -> &[Vec<f64>] {
        &self.signatures
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn users(&self) -> usize {
        self.powers.len()
    }

    pub fn dimension(&self) -> usize {
        self.signatures[0].len()
    }

    /// `I + (1/N) sum_{i in users} P_i s_i s_i^T`.
    fn gram(&self, users: impl Iterator<Item = usize>) -> DMatrix<f64> {
        let mut a = DMatrix::identity(self.dimension(), self.dimension());
        for i in users {
            let s = DVector::from_column_slice(&self.signatures[i]);
            a.ger(self.powers[i] / self.noise, &s, &s, 1.0);
        }
        a
    }

    /// `g(S) = ½ ln det(I + (1/N) sum_{i in S} P_i s_i s_i^T)`.
    ///
    /// The matrix is the identity plus a positive semidefinite sum, so a
    /// Cholesky failure means a bug rather than bad input; it panics.
    pub fn rank(&self) -> SubsetFunction {
        let ch = self.clone();
        SubsetFunction::new(self.users(), move |s| {
            let l = ch
                .gram(members(s).into_iter())
                .cholesky()
                .expect("identity plus Gram matrix is positive definite");
            l.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
        })
        .expect("validated size")
    }

    /// Single-user linear MMSE rates `C((1/N) P_i s_i^T M_i^{-1} s_i)` with
    /// `M_i = I + (1/N) sum_{j != i} P_j s_j s_j^T`.
    pub fn mmse_rates(&self) -> Result<Vec<f64>, MacError> {
        (0..self.users())
            .map(|i| {
                let chol = self
                    .gram((0..self.users()).filter(|&j| j != i))
                    .cholesky()
                    .ok_or(MacError::Factorization(i))?;
                let s = DVector::from_column_slice(&self.signatures[i]);
                let quad = s.dot(&chol.solve(&s));
                Ok(capacity(self.powers[i] / self.noise * quad))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MacChannel {
    Scalar(ScalarMac),
    Vector(VectorMac),
}

impl MacChannel {
    pub fn rank(&self) -> SubsetFunction {
        match self {
            MacChannel::Scalar(c) => c.rank(),
            MacChannel::Vector(c) => c.rank(),
        }
    }

    pub fn users(&self) -> usize {
        match self {
            MacChannel::Scalar(c) => c.users(),
            MacChannel::Vector(c) => c.users(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Disagreement {
    /// `d*_i = g(Ω) - g(Ω \ {i})`.
    Canonical,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MacCriterion {
    Symmetric,
    MaxMinPf,
    Nbs(Disagreement),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeChoice {
    #[default]
    Auto,
    Exhaustive,
    Ordered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacSolution {
    pub allocation: AllocationResult,
    pub mode: Mode,
    /// `g(Ω)`.
    pub sum_capacity: f64,
    pub efficiency: f64,
}

fn resolve_mode(ch: &MacChannel, criterion: &MacCriterion, choice: ModeChoice) -> Result<Mode, MacError> {
    let k = ch.users();
    let exhaustive_ok = k <= setfn::EXHAUSTIVE_LIMIT;
    match (ch, choice) {
        (_, ModeChoice::Exhaustive) if !exhaustive_ok => Err(MacError::Unsupported(format!(
            "exhaustive mode supports at most {} users",
            setfn::EXHAUSTIVE_LIMIT
        ))),
        (_, ModeChoice::Exhaustive) => Ok(Mode::Exhaustive),
        (MacChannel::Scalar(_), ModeChoice::Auto) => match criterion {
            // A translated rank function need not keep the order property.
            MacCriterion::Nbs(Disagreement::Point(_)) if exhaustive_ok => Ok(Mode::Exhaustive),
            _ => Ok(Mode::Ordered),
        },
        (MacChannel::Scalar(_), ModeChoice::Ordered) => Ok(Mode::Ordered),
        (MacChannel::Vector(_), ModeChoice::Auto) if exhaustive_ok => Ok(Mode::Exhaustive),
        (MacChannel::Vector(_), _) => {
            let holds = has_order_property(&ch.rank(), setfn::DEFAULT_TOL)
                .map_err(|_| MacError::Unsupported("vector channel too large to verify the order property".into()))?
                .holds_true();
            if holds {
                Ok(Mode::Ordered)
            } else {
                Err(MacError::Unsupported("vector channel lacks the order property; use exhaustive mode".into()))
            }
        }
    }
}

/// Dispatches a fair-point request to the polymatroid solvers.
pub fn solve(ch: &MacChannel, criterion: &MacCriterion, choice: ModeChoice) -> Result<MacSolution, MacError> {
    let mode = resolve_mode(ch, criterion, choice)?;
    let rank = ch.rank();
    let allocation = match criterion {
        MacCriterion::Symmetric => symmetric_allocate(&rank, mode)?,
        MacCriterion::MaxMinPf => maxmin_allocate(&rank, mode)?,
        MacCriterion::Nbs(Disagreement::Canonical) => match (ch, mode) {
            (MacChannel::Scalar(c), Mode::Ordered) => nbs_canonical_gensym(&c.generalized_symmetric())?,
            _ => nash_bargaining(&rank, &canonical_disagreement(&rank), mode)?,
        },
        MacCriterion::Nbs(Disagreement::Point(d)) => {
            if d.len() != ch.users() {
                return Err(MacError::InvalidChannel(format!(
                    "disagreement point has {} entries for {} users",
                    d.len(),
                    ch.users()
                )));
            }
            nash_bargaining(&rank, d, mode)?
        }
    };
    let efficiency = maxmin::efficiency(&allocation, &rank)?;
    Ok(MacSolution { allocation, mode, sum_capacity: rank.total(), efficiency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{is_monotone, is_submodular, DEFAULT_TOL};

    fn example_two() -> ScalarMac {
        ScalarMac::new(vec![2.0, 8.0, 200.0, 300.0], 1.0).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn shannon_values() {
        assert_eq!(shannon(0.0).unwrap(), 0.0);
        assert!((shannon(2.0).unwrap() - 0.5493).abs() < 5e-5);
        assert!((shannon(std::f64::consts::E.powi(2) - 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(shannon(-1.0), Err(MacError::NegativeArgument(-1.0)));
    }

    #[test]
    fn scalar_rank_values() {
        let g = example_two().rank();
        assert!((g.value(0b0011) - 0.5 * 11f64.ln()).abs() < 1e-15);
        assert!((g.value(0b1111) - 0.5 * 511f64.ln()).abs() < 1e-15);
        assert!((g.value(0b1111) - 3.1182).abs() < 5e-5);
        let zero = ScalarMac::new(vec![0.0; 3], 2.0).unwrap().rank();
        assert!((0..8).all(|s| zero.value(s) == 0.0));
    }

    #[test]
    fn rejects_bad_channels() {
        assert!(ScalarMac::new(vec![1.0], 0.0).is_err());
        assert!(ScalarMac::new(vec![-1.0], 1.0).is_err());
        assert!(ScalarMac::new(vec![], 1.0).is_err());
        assert!(VectorMac::new(vec![1.0], vec![vec![1.0, 1.0]], 1.0).is_err());
        assert!(VectorMac::new(vec![1.0, 1.0], vec![vec![1.0]], 1.0).is_err());
        assert!(VectorMac::new(vec![1.0, 1.0], vec![vec![1.0], vec![0.0, 1.0]], 1.0).is_err());
    }

    #[test]
    fn orthogonal_signatures_are_modular() {
        let p = vec![1.0, 3.0, 0.5];
        let s = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let ch = VectorMac::new(p.clone(), s, 2.0).unwrap();
        let g = ch.rank();
        for mask in 0..8u64 {
            let expected: f64 = members(mask).iter().map(|&i| capacity(p[i] / 2.0)).sum();
            assert!((g.value(mask) - expected).abs() < 1e-14);
        }
        let singles: Vec<f64> = p.iter().map(|&pi| capacity(pi / 2.0)).collect();
        assert!(close(&ch.mmse_rates().unwrap(), &singles, 1e-14));
    }

    #[test]
    fn identical_signatures_match_scalar() {
        let p = vec![1.0, 2.5, 0.7];
        let u = vec![0.6, 0.8];
        let ch = VectorMac::new(p.clone(), vec![u.clone(); 3], 1.5).unwrap();
        let scalar = ScalarMac::new(p, 1.5).unwrap();
        let (gv, gs) = (ch.rank(), scalar.rank());
        for mask in 0..8u64 {
            assert!((gv.value(mask) - gs.value(mask)).abs() < 1e-13);
        }
    }

    #[test]
    fn two_by_two_rank_by_explicit_determinant() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ch = VectorMac::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![h, h]], 1.0).unwrap();
        // I + s1 s1^T + s2 s2^T = [[2.5, 0.5], [0.5, 1.5]].
        let det = 2.5 * 1.5 - 0.5 * 0.5;
        assert!((ch.rank().value(0b11) - 0.5 * f64::ln(det)).abs() < 1e-14);
    }

    #[test]
    fn tin_rates_match_canonical_point() {
        let ch = example_two();
        let tin = ch.tin_rates();
        assert!(close(&tin, &[0.0020, 0.0079, 0.2483, 0.4423], 5e-5));
        assert!(close(&tin, &canonical_disagreement(&ch.rank()), 1e-12));

        let single = ScalarMac::new(vec![4.0], 2.0).unwrap();
        assert!(close(&single.tin_rates(), &[capacity(2.0)], 1e-15));

        let pair = ScalarMac::new(vec![1.0, 1.0], 1.0).unwrap();
        let expected = 0.5 * 1.5f64.ln();
        assert!(close(&pair.tin_rates(), &[expected, expected], 1e-15));
        assert!((expected - (0.5 * 3f64.ln() - 0.5 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn mmse_identical_signatures() {
        let ch = VectorMac::new(vec![1.0, 1.0], vec![vec![1.0, 0.0]; 2], 1.0).unwrap();
        let r = ch.mmse_rates().unwrap();
        assert!(close(&r, &[capacity(0.5), capacity(0.5)], 1e-14));
        assert!(close(&r, &canonical_disagreement(&ch.rank()), 1e-12));
    }

    #[test]
    fn vector_rank_is_a_rank_function() {
        let s = vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0]];
        let ch = VectorMac::new(vec![1.0, 2.0, 3.0], s, 0.5).unwrap();
        let g = ch.rank();
        assert!(is_submodular(&g, DEFAULT_TOL).unwrap().holds_true());
        assert!(is_monotone(&g, DEFAULT_TOL).unwrap().holds_true());
        assert_eq!(g.value(0), 0.0);
    }

    #[test]
    fn solve_example_two() {
        let ch = MacChannel::Scalar(example_two());
        let mm = solve(&ch, &MacCriterion::MaxMinPf, ModeChoice::Auto).unwrap();
        assert_eq!(mm.mode, Mode::Ordered);
        assert!(close(&mm.allocation.rates, &[0.5493, 0.6496, 0.9596, 0.9596], 5e-5));
        assert!((mm.efficiency - 1.0).abs() < 1e-12);

        let nbs = solve(&ch, &MacCriterion::Nbs(Disagreement::Canonical), ModeChoice::Auto).unwrap();
        assert!(close(&nbs.allocation.rates, &[0.5493, 0.6314, 0.8718, 1.0657], 5e-5));

        let sym = solve(&ch, &MacCriterion::Symmetric, ModeChoice::Exhaustive).unwrap();
        assert!(sym.allocation.rates.iter().all(|r| (r - 0.5493).abs() < 5e-5));

        let bad = solve(&ch, &MacCriterion::Nbs(Disagreement::Point(vec![0.0; 3])), ModeChoice::Auto);
        assert!(matches!(bad, Err(MacError::InvalidChannel(_))));
    }

    #[test]
    fn vector_ordered_mode_requires_order_property() {
        // Orthogonal signatures give a modular rank function, which has the
        // order property.
        let ortho = VectorMac::new(vec![1.0, 2.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        let ch = MacChannel::Vector(ortho);
        let r = solve(&ch, &MacCriterion::MaxMinPf, ModeChoice::Ordered).unwrap();
        assert_eq!(r.mode, Mode::Ordered);
        let auto = solve(&ch, &MacCriterion::MaxMinPf, ModeChoice::Auto).unwrap();
        assert_eq!(auto.mode, Mode::Exhaustive);
        assert!(close(&r.allocation.rates, &auto.allocation.rates, 1e-12));
    }
}
