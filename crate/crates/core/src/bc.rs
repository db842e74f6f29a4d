//! Gaussian broadcast channels with superposition coding.
//!
//! Users are relabeled so that noise powers are nondecreasing; allocations
//! are reported in that sorted order and carry the permutation back to the
//! caller's labels. A boundary point is described by split points
//! `0 = x_0 <= x_1 <= ... <= x_K = 1`, where `x_i P_T` is the power spent on
//! the `i` strongest users, and
//! `r_i = ½ ln((N_i + x_i P_T) / (N_i + x_{i-1} P_T))`.

use std::fmt;

use log::debug;
use thiserror::Error;

use crate::mac::capacity;
use crate::majorization::majorized_by_tol;

/// Relative stopping tolerance for both one-dimensional searches.
pub const ROOT_TOL: f64 = 1e-12;
/// Relative accuracy of `phi(N, gamma) = P_T` in the symmetric search.
pub const POWER_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BcError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid split points: {0}")]
    InvalidSplit(String),
    #[error("invalid disagreement point: {0}")]
    InvalidDisagreement(String),
    #[error("disagreement point is not strictly feasible: user {user} gets {rate} <= {floor}")]
    InfeasibleDisagreement { user: usize, rate: f64, floor: f64 },
    #[error("no zero of chi found after {evaluations} evaluations")]
    NoRoot { evaluations: usize },
}

/// Noise powers sorted nondecreasing plus the total power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BcChannel {
    noise: Vec<f64>,
    total_power: f64,
    order: Vec<usize>,
}

impl BcChannel {
    /// Sorts `noise` stably; `order()[k]` is the caller's index of the user
    /// at sorted position `k`.
    pub fn new(noise: Vec<f64>, total_power: f64) -> Result<Self, BcError> {
        if noise.is_empty() {
            return Err(BcError::InvalidChannel("at least one user is required".into()));
        }
        if let Some((i, n)) = noise.iter().enumerate().find(|(_, n)| !(n.is_finite() && **n > 0.0)) {
            return Err(BcError::InvalidChannel(format!("noise power of user {} is {n}", i + 1)));
        }
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(BcError::InvalidChannel(format!("total power must be positive, got {total_power}")));
        }
        let mut order: Vec<usize> = (0..noise.len()).collect();
        order.sort_by(|&a, &b| noise[a].total_cmp(&noise[b]));
        let sorted = order.iter().map(|&i| noise[i]).collect();
        Ok(Self { noise: sorted, total_power, order })
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn users(&self) -> usize {
        self.noise.len()
    }

    /// Same noise, different budget.
    pub fn with_total_power(&self, total_power: f64) -> Result<Self, BcError> {
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(BcError::InvalidChannel(format!("total power must be positive, got {total_power}")));
        }
        Ok(Self { total_power, ..self.clone() })
    }

    /// Reorders a per-user vector given in the caller's labels into sorted
    /// order.
    pub fn to_sorted(&self, v: &[f64]) -> Result<Vec<f64>, BcError> {
        if v.len() != self.users() {
            return Err(BcError::LengthMismatch { expected: self.users(), got: v.len() });
        }
        Ok(self.order.iter().map(|&i| v[i]).collect())
    }

    /// Inverse of [`BcChannel::to_sorted`].
    pub fn to_input_order(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcCriterion {
    Symmetric,
    ProportionalFair,
    Nbs,
    Utility,
}

impl fmt::Display for BcCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcCriterion::Symmetric => "symmetric",
            BcCriterion::ProportionalFair => "pf",
            BcCriterion::Nbs => "nbs",
            BcCriterion::Utility => "utility",
        })
    }
}

/// A boundary point, indexed by sorted position.
#[derive(Debug, Clone, PartialEq)]
pub struct BcAllocation {
    pub rates: Vec<f64>,
    pub powers: Vec<f64>,
    /// `x_1, ..., x_K`; the last entry is 1.
    pub x: Vec<f64>,
    pub sinr: Vec<f64>,
    pub criterion: BcCriterion,
    /// Function evaluations spent by the search.
    pub iterations: usize,
    /// Stationarity residual for utility criteria, `|phi - P_T| / P_T` for
    /// the symmetric point.
    pub residual: f64,
    pub order: Vec<usize>,
}

impl BcAllocation {
    fn from_split(ch: &BcChannel, x: Vec<f64>, criterion: BcCriterion) -> Self {
        let rates = split_rates(ch, &x);
        let p = ch.total_power;
        let powers = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| (xi - if i == 0 { 0.0 } else { x[i - 1] }) * p)
            .collect();
        let sinr = rates.iter().map(|r| (2.0 * r).exp_m1()).collect();
        Self { rates, powers, x, sinr, criterion, iterations: 0, residual: 0.0, order: ch.order.clone() }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn rates_input_order(&self) -> Vec<f64> {
        self.unsort(&self.rates)
    }

    pub fn powers_input_order(&self) -> Vec<f64> {
        self.unsort(&self.powers)
    }

    pub fn sinr_input_order(&self) -> Vec<f64> {
        self.unsort(&self.sinr)
    }

    fn unsort(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    /// Checks the allocation invariants against `ch`; returns a description
    /// of the first failure.
    pub fn check(&self, ch: &BcChannel, tol: f64) -> Result<(), String> {
        let k = ch.users();
        if [self.rates.len(), self.powers.len(), self.x.len(), self.sinr.len()].iter().any(|&l| l != k) {
            return Err("length mismatch".into());
        }
        let total: f64 = self.powers.iter().sum();
        if (total - ch.total_power).abs() > tol * ch.total_power.max(1.0) {
            return Err(format!("powers sum to {total}, budget {}", ch.total_power));
        }
        validate_split(&self.x).map_err(|e| e.to_string())?;
        let expected = split_rates(ch, &self.x);
        if let Some(i) = (0..k).find(|&i| (expected[i] - self.rates[i]).abs() > tol) {
            return Err(format!("rate of user {} does not match its split point", i + 1));
        }
        Ok(())
    }
}

fn validate_split(x: &[f64]) -> Result<(), BcError> {
    let mut prev = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if xi.is_nan() || xi < prev || xi > 1.0 {
            return Err(BcError::InvalidSplit(format!("x_{} = {xi} after {prev}", i + 1)));
        }
        prev = xi;
    }
    if x.last() != Some(&1.0) {
        return Err(BcError::InvalidSplit("last split point must be 1".into()));
    }
    Ok(())
}

fn split_rates(ch: &BcChannel, x: &[f64]) -> Vec<f64> {
    let p = ch.total_power;
    (0..x.len())
        .map(|i| {
            let prev = if i == 0 { 0.0 } else { x[i - 1] };
            capacity((x[i] - prev) * p / (ch.noise[i] + prev * p))
        })
        .collect()
}

/// Rates of the boundary point with split points `x` (sorted order,
/// `x.len() == K`, last entry 1).
pub fn boundary_rates(ch: &BcChannel, x: &[f64]) -> Result<Vec<f64>, BcError> {
    if x.len() != ch.users() {
        return Err(BcError::LengthMismatch { expected: ch.users(), got: x.len() });
    }
    validate_split(x)?;
    Ok(split_rates(ch, x))
}

/// Boundary point from split points, as an allocation.
pub fn allocation_from_split(ch: &BcChannel, x: &[f64], criterion: BcCriterion) -> Result<BcAllocation, BcError> {
    boundary_rates(ch, x)?;
    Ok(BcAllocation::from_split(ch, x.to_vec(), criterion))
}

/// `½ ln(1 + P_T / N_1)`: all power to the strongest user.
pub fn bc_sum_capacity(ch: &BcChannel) -> f64 {
    capacity(ch.total_power / ch.noise[0])
}

/// The `K x K` matrix mapping powers to noise at common SINR `gamma`:
/// `1/gamma` on the diagonal, `-1` below it.
pub fn g_gamma(gamma: f64, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Less => 0.0,
                    std::cmp::Ordering::Equal => 1.0 / gamma,
                    std::cmp::Ordering::Greater => -1.0,
                })
                .collect()
        })
        .collect()
}

/// Entry `(i, j)` (0-based) of the inverse of [`g_gamma`]:
/// 0 above the diagonal, `gamma` on it, `gamma^2 (1+gamma)^(i-j-1)` below.
pub fn g_gamma_inverse_entry(gamma: f64, i: usize, j: usize) -> f64 {
    match i.cmp(&j) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => gamma,
        std::cmp::Ordering::Greater => gamma * gamma * (1.0 + gamma).powi((i - j - 1) as i32),
    }
}

pub fn g_gamma_inverse(gamma: f64, k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|i| (0..k).map(|j| g_gamma_inverse_entry(gamma, i, j)).collect()).collect()
}

/// Column sums of the inverse: `theta_j = gamma (1+gamma)^(K-1-j)` for
/// 0-based `j`, since `gamma + gamma^2 sum_{m<n} (1+gamma)^m` telescopes.
pub fn theta(gamma: f64, k: usize) -> Vec<f64> {
    (0..k).map(|j| gamma * (1.0 + gamma).powi((k - 1 - j) as i32)).collect()
}

/// Total power giving every user SINR `gamma`: `sum_j N_j theta_j`.
pub fn phi_total_power(noise: &[f64], gamma: f64) -> f64 {
    theta(gamma, noise.len()).iter().zip(noise).map(|(t, n)| t * n).sum()
}

/// Common SINR with `phi(N, gamma) = P_T`, found by bisection on a bracket
/// doubled from `[0, 1]`. Returns the SINR and the number of `phi`
/// evaluations.
pub fn symmetric_sinr(ch: &BcChannel) -> (f64, usize) {
    let target = ch.total_power;
    let phi = |g: f64| phi_total_power(&ch.noise, g);
    let mut evals = 0;
    let mut hi = 1.0;
    while phi(hi) < target {
        hi *= 2.0;
        evals += 1;
    }
    let mut lo = 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        evals += 1;
        if phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        let close = (phi(hi) - target).abs() <= POWER_TOL * target;
        if close && hi - lo <= ROOT_TOL * hi {
            break;
        }
    }
    let g = if (phi(lo) - target).abs() < (phi(hi) - target).abs() { lo } else { hi };
    (g, evals)
}

/// Equal-SINR point; powers are `G_gamma^{-1} N`.
pub fn symmetric_allocate(ch: &BcChannel) -> BcAllocation {
    let (gamma, evals) = symmetric_sinr(ch);
    let k = ch.users();
    let powers: Vec<f64> = (0..k)
        .map(|i| (0..=i).map(|j| g_gamma_inverse_entry(gamma, i, j) * ch.noise[j]).sum())
        .collect();
    let total: f64 = powers.iter().sum();
    let p = ch.total_power;
    let mut x: Vec<f64> = powers
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some((*acc / p).min(1.0))
        })
        .collect();
    x[k - 1] = 1.0;
    let rate = capacity(gamma);
    BcAllocation {
        rates: vec![rate; k],
        powers,
        x,
        sinr: vec![gamma; k],
        criterion: BcCriterion::Symmetric,
        iterations: evals,
        residual: (total - p).abs() / p,
        order: ch.order.clone(),
    }
}

/// `K ½ ln(1 + gamma)` at the common SINR.
pub fn symmetric_capacity(ch: &BcChannel) -> f64 {
    ch.users() as f64 * capacity(symmetric_sinr(ch).0)
}

/// Concave increasing utility of a single rate, with an invertible
/// derivative on `(lower_bound, inf)`.
pub trait Utility {
    fn value(&self, r: f64) -> f64;
    fn marginal(&self, r: f64) -> f64;
    fn marginal_inverse(&self, y: f64) -> f64;
    /// The derivative is finite only above this rate.
    fn lower_bound(&self) -> f64 {
        0.0
    }
}

/// `weight * ln(r - shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogUtility {
    pub weight: f64,
    pub shift: f64,
}

impl LogUtility {
    pub fn proportional_fair() -> Self {
        Self { weight: 1.0, shift: 0.0 }
    }

    pub fn shifted(shift: f64) -> Self {
        Self { weight: 1.0, shift }
    }
}

impl Utility for LogUtility {
    fn value(&self, r: f64) -> f64 {
        self.weight * (r - self.shift).ln()
    }

    fn marginal(&self, r: f64) -> f64 {
        self.weight / (r - self.shift)
    }

    fn marginal_inverse(&self, y: f64) -> f64 {
        self.shift + self.weight / y
    }

    fn lower_bound(&self) -> f64 {
        self.shift
    }
}

/// Bracketing and stopping rules for the search over `x_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSearch {
    /// Points in the first scan, half geometric from `1e-12`, half uniform.
    pub scan_points: usize,
    /// Step of the uniform fallback scan.
    pub fallback_step: f64,
    /// Stop when the bracket is narrower than `tol * x_1`.
    pub tol: f64,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self { scan_points: 256, fallback_step: 1e-4, tol: ROOT_TOL }
    }
}

enum Probe {
    /// `x_1` is below the root: some rate sits at or under its utility's
    /// lower bound.
    TooSmall,
    /// `x_1` is above the root: propagation ran past `x = 1`.
    TooLarge,
    Value { chi: f64, x: Vec<f64> },
}

impl Probe {
    fn sign(&self) -> f64 {
        match self {
            Probe::TooSmall => -1.0,
            Probe::TooLarge => 1.0,
            Probe::Value { chi, .. } => chi.signum(),
        }
    }
}

/// Propagates the stationarity equations from `x_1` and evaluates
/// `chi(x_1) = U_K'(r_K)(N_{K-1} + x_{K-1}P) - U_{K-1}'(r_{K-1})(N_K + x_{K-1}P)`.
fn probe<U: Utility>(noise: &[f64], p: f64, u: &[U], x1: f64) -> Probe {
    let k = noise.len();
    let mut x = vec![1.0; k];
    let mut r = vec![0.0; k];
    x[0] = x1;
    r[0] = capacity(x1 * p / noise[0]);
    if r[0].is_nan() || r[0] <= u[0].lower_bound() {
        return Probe::TooSmall;
    }
    for i in 0..k - 2 {
        let a = noise[i] + x[i] * p;
        let b = noise[i + 1] + x[i] * p;
        r[i + 1] = u[i + 1].marginal_inverse(u[i].marginal(r[i]) * b / a);
        x[i + 1] = x[i] + b * (2.0 * r[i + 1]).exp_m1() / p;
        if x[i + 1].is_nan() || x[i + 1] > 1.0 {
            return Probe::TooLarge;
        }
    }
    let xm = x[k - 2];
    r[k - 1] = capacity((1.0 - xm) * p / (noise[k - 1] + xm * p));
    if r[k - 1].is_nan() || r[k - 1] <= u[k - 1].lower_bound() {
        return Probe::TooLarge;
    }
    let chi = u[k - 1].marginal(r[k - 1]) * (noise[k - 2] + xm * p)
        - u[k - 2].marginal(r[k - 2]) * (noise[k - 1] + xm * p);
    Probe::Value { chi, x }
}

fn scan_grid(n: usize) -> Vec<f64> {
    let half = (n / 2).max(2);
    let mut pts: Vec<f64> = (0..half)
        .map(|t| 10f64.powf(-12.0 + 12.0 * t as f64 / (half - 1) as f64))
        .chain((1..=half).map(|t| t as f64 / half as f64))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// First adjacent pair of points where the sign goes from negative to
/// positive, or an exact zero.
fn find_bracket<U: Utility>(
    ch: &BcChannel,
    u: &[U],
    pts: &[f64],
    evals: &mut usize,
) -> Option<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    for &x1 in pts {
        let s = probe(&ch.noise, ch.total_power, u, x1).sign();
        *evals += 1;
        if s == 0.0 {
            return Some((x1, x1));
        }
        if let Some((px, ps)) = prev {
            if ps < 0.0 && s > 0.0 {
                return Some((px, x1));
            }
        }
        prev = Some((x1, s));
    }
    None
}

/// `max_i |(N_i + x_i P)/U_i'(r_i) - (N_{i+1} + x_i P)/U_{i+1}'(r_{i+1})|`.
///
/// For `ln(r - d)` this is `|(r_i - d_i)(N_i + x_i P) - (r_{i+1} - d_{i+1})(N_{i+1} + x_i P)|`.
pub fn stationarity_residual<U: Utility>(ch: &BcChannel, a: &BcAllocation, u: &[U]) -> f64 {
    let p = ch.total_power;
    (0..ch.users().saturating_sub(1))
        .map(|i| {
            let lhs = (ch.noise[i] + a.x[i] * p) / u[i].marginal(a.rates[i]);
            let rhs = (ch.noise[i + 1] + a.x[i] * p) / u[i + 1].marginal(a.rates[i + 1]);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_i |r_i (N_i + x_i P) - r_{i+1} (N_{i+1} + x_i P)|`.
pub fn pf_residual(ch: &BcChannel, a: &BcAllocation) -> f64 {
    stationarity_residual(ch, a, &vec![LogUtility::proportional_fair(); ch.users()])
}

/// Maximizes `sum_i U_i(r_i)` over the boundary by a one-dimensional search
/// on `x_1`. `utilities` are indexed by sorted position.
pub fn utility_allocate_with<U: Utility>(
    ch: &BcChannel,
    utilities: &[U],
    search: &RootSearch,
) -> Result<BcAllocation, BcError> {
    let k = ch.users();
    if utilities.len() != k {
        return Err(BcError::LengthMismatch { expected: k, got: utilities.len() });
    }
    if k == 1 {
        let a = BcAllocation::from_split(ch, vec![1.0], BcCriterion::Utility);
        return Ok(a);
    }
    let mut evals = 0;
    let bracket = find_bracket(ch, utilities, &scan_grid(search.scan_points), &mut evals).or_else(|| {
        let n = (1.0 / search.fallback_step).ceil() as usize;
        let pts: Vec<f64> = (1..=n).map(|t| (t as f64 * search.fallback_step).min(1.0)).collect();
        find_bracket(ch, utilities, &pts, &mut evals)
    });
    let (mut lo, mut hi) = bracket.ok_or(BcError::NoRoot { evaluations: evals })?;
    debug!("chi changes sign in [{lo:e}, {hi:e}] after {evals} evaluations");
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= search.tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        evals += 1;
        let s = probe(&ch.noise, ch.total_power, utilities, mid).sign();
        if s == 0.0 {
            lo = mid;
            hi = mid;
        } else if s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = [lo, hi]
        .into_iter()
        .filter_map(|x1| match probe(&ch.noise, ch.total_power, utilities, x1) {
            Probe::Value { chi, x } => Some((chi.abs(), x)),
            _ => None,
        })
        .min_by(|a, b| a.0.total_cmp(&b.0));
    evals += 2;
    let (_, x) = best.ok_or(BcError::NoRoot { evaluations: evals })?;
    let mut a = BcAllocation::from_split(ch, x, BcCriterion::Utility);
    a.iterations = evals;
    a.residual = stationarity_residual(ch, &a, utilities);
    if a.check(ch, 1e-9).is_err() {
        return Err(BcError::NoRoot { evaluations: evals });
    }
    Ok(a)
}

pub fn utility_allocate<U: Utility>(ch: &BcChannel, utilities: &[U]) -> Result<BcAllocation, BcError> {
    utility_allocate_with(ch, utilities, &RootSearch::default())
}

/// Proportional-fair point (`U_i = ln`).
pub fn pf_allocate(ch: &BcChannel) -> Result<BcAllocation, BcError> {
    let mut a = utility_allocate(ch, &vec![LogUtility::proportional_fair(); ch.users()])?;
    a.criterion = BcCriterion::ProportionalFair;
    Ok(a)
}

/// Nash bargaining point for disagreement rates `d`, given in the caller's
/// user labels.
pub fn nbs_allocate(ch: &BcChannel, d: &[f64]) -> Result<BcAllocation, BcError> {
    let ds = ch.to_sorted(d)?;
    if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(BcError::InvalidDisagreement(format!("entry {} is {v}", i + 1)));
    }
    let u: Vec<LogUtility> = ds.iter().map(|&s| LogUtility::shifted(s)).collect();
    let infeasible = || {
        let (i, &floor) = ds.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        BcError::InfeasibleDisagreement { user: ch.order[i] + 1, rate: 0.0, floor }
    };
    let mut a = match utility_allocate(ch, &u) {
        Ok(a) => a,
        Err(BcError::NoRoot { .. }) => return Err(infeasible()),
        Err(e) => return Err(e),
    };
    if let Some(i) = (0..ds.len()).find(|&i| a.rates[i].is_nan() || a.rates[i] <= ds[i]) {
        return Err(BcError::InfeasibleDisagreement { user: ch.order[i] + 1, rate: a.rates[i], floor: ds[i] });
    }
    a.criterion = BcCriterion::Nbs;
    Ok(a)
}

/// Sum rate of the proportional-fair point over the sum capacity.
pub fn efficiency(a: &BcAllocation, ch: &BcChannel) -> f64 {
    a.sum_rate() / bc_sum_capacity(ch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploreStatus {
    /// `C_PF(N) <= C_PF(N')` within tolerance.
    Holds,
    Counterexample,
    /// The pair is not an equal-budget majorization pair.
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreRecord {
    pub noise: Vec<f64>,
    pub noise_spread: Vec<f64>,
    pub total_power: f64,
    pub c_pf: Option<f64>,
    pub c_pf_spread: Option<f64>,
    pub status: ExploreStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExploreReport {
    pub records: Vec<ExploreRecord>,
}

impl ExploreReport {
    pub fn count(&self, status: ExploreStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }
}

/// Compares proportional-fair sum rates across pairs `(N, N')` with
/// `N ⪯ N'`. The comparison is exploratory: a counterexample is a finding,
/// not an error.
pub fn schur_explore_pf(pairs: &[(BcChannel, BcChannel)], tol: f64) -> ExploreReport {
    let records = pairs
        .iter()
        .map(|(a, b)| {
            let mut rec = ExploreRecord {
                noise: a.noise.clone(),
                noise_spread: b.noise.clone(),
                total_power: a.total_power,
                c_pf: None,
                c_pf_spread: None,
                status: ExploreStatus::PreconditionFailed,
            };
            let same_budget = (a.total_power - b.total_power).abs() <= tol * a.total_power.max(1.0);
            let ordered = majorized_by_tol(&a.noise, &b.noise, tol).unwrap_or(false);
            if !(same_budget && ordered) {
                return rec;
            }
            if let (Ok(pa), Ok(pb)) = (pf_allocate(a), pf_allocate(b)) {
                let (ca, cb) = (pa.sum_rate(), pb.sum_rate());
                rec.c_pf = Some(ca);
                rec.c_pf_spread = Some(cb);
                rec.status = if ca <= cb + tol * cb.abs().max(1.0) {
                    ExploreStatus::Holds
                } else {
                    ExploreStatus::Counterexample
                };
            }
            rec
        })
        .collect();
    ExploreReport { records }
}
