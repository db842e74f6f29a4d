//! Fair points of the polyhedron `P(g) = {r >= 0 : r(S) <= g(S)}`.
//!
//! The max-min recursion repeatedly picks the set `S0` minimizing
//! `g(S)/|S|`, gives each member of `S0` that ratio, and continues on the
//! contraction `g'(S) = g(S ∪ S0) - g(S0)`. For submodular `g` the output is
//! the max-min fair point, which is also the proportional-fair point and
//! lies on the dominant face. Nash bargaining reduces to the same recursion
//! on the translated function `g(S) - d(S)`.

use std::fmt;
use std::sync::Arc;

use log::debug;
use thiserror::Error;

use crate::majorization::NonnegVector;
use crate::setfn::{
    self, is_submodular, mask_of, members, min_ratio_exhaustive, min_ratio_ordered, singleton,
    Mask, SetFnError, SubsetFunction, Violation,
};

/// Largest ground set on which exhaustive solves verify submodularity.
pub const VERIFY_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxMinError {
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error("function is not submodular: {0}")]
    NotSubmodular(Violation),
    #[error("singleton values are not sorted at recursion level {level} (user {user})")]
    OrderViolated { level: usize, user: usize },
    #[error("disagreement point infeasible: translated ratio {value} on {set}")]
    InfeasibleDisagreement { set: String, value: f64 },
    #[error("invalid generalized symmetric function: {0}")]
    InvalidSpec(String),
    #[error("efficiency undefined: g(Ω) = {0}")]
    ZeroCapacity(f64),
}

/// How the min-ratio set is searched at each recursion level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Scan all nonempty subsets; needs only submodularity.
    Exhaustive,
    /// Scan prefixes of the singleton-sorted order; needs the order property.
    Ordered,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Ordered => "ordered",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Symmetric,
    MaxMinPf,
    Nbs,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Symmetric => "symmetric",
            Criterion::MaxMinPf => "maxmin_pf",
            Criterion::Nbs => "nbs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mode: Mode,
    /// Exhaustive mode checks submodularity first when `K <= VERIFY_LIMIT`.
    pub verify_submodular: bool,
    /// Ordered mode re-checks the singleton sort after each contraction.
    pub verify_order: bool,
    pub tol: f64,
}

impl SolverOptions {
    pub fn new(mode: Mode) -> Self {
        Self { mode, verify_submodular: true, verify_order: false, tol: setfn::DEFAULT_TOL }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::new(Mode::Exhaustive)
    }
}

/// Rates are indexed by user (bit position); `bottleneck_chain[l]` is the
/// union of the sets frozen at levels `0..=l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub rates: Vec<f64>,
    pub bottleneck_chain: Vec<Mask>,
    pub sum_rate: f64,
    pub criterion: Criterion,
    pub disagreement: Option<Vec<f64>>,
}

impl AllocationResult {
    fn new(rates: Vec<f64>, chain: Vec<Mask>, criterion: Criterion, d: Option<Vec<f64>>) -> Self {
        let sum_rate = rates.iter().sum();
        Self { rates, bottleneck_chain: chain, sum_rate, criterion, disagreement: d }
    }

    /// Sets frozen at each level (differences of consecutive chain entries).
    pub fn levels(&self) -> Vec<Mask> {
        let mut prev = 0;
        self.bottleneck_chain
            .iter()
            .map(|&m| {
                let level = m & !prev;
                prev = m;
                level
            })
            .collect()
    }
}

/// Users sorted by singleton value, ties by index.
fn singleton_order(f: &SubsetFunction) -> Vec<usize> {
    let mut order = f.users();
    order.sort_by(|&a, &b| f.value(singleton(a)).total_cmp(&f.value(singleton(b))).then(a.cmp(&b)));
    order
}

struct Recursion {
    rates: Vec<f64>,
    chain: Vec<Mask>,
    /// `(set frozen, ratio)` per level.
    levels: Vec<(Mask, f64)>,
}

fn recurse(f: &SubsetFunction, opts: &SolverOptions) -> Result<Recursion, MaxMinError> {
    if opts.mode == Mode::Exhaustive && opts.verify_submodular && f.len() <= VERIFY_LIMIT {
        if let Some(v) = is_submodular(f, opts.tol)?.violation {
            return Err(MaxMinError::NotSubmodular(v));
        }
    }
    let order = match opts.mode {
        Mode::Ordered => singleton_order(f),
        Mode::Exhaustive => Vec::new(),
    };
    let mut rates = vec![0.0; f.width()];
    let mut chain = Vec::new();
    let mut levels = Vec::new();
    let mut current = f.clone();
    let mut frozen: Mask = 0;
    let mut pos = 0;
    while !current.is_empty() {
        let (set, ratio) = match opts.mode {
            Mode::Exhaustive => {
                let m = min_ratio_exhaustive(&current)?;
                (m.set, m.value)
            }
            Mode::Ordered => {
                let rest = &order[pos..];
                if opts.verify_order {
                    for w in rest.windows(2) {
                        if current.value(singleton(w[0])) > current.value(singleton(w[1])) + opts.tol {
                            return Err(MaxMinError::OrderViolated { level: levels.len(), user: w[1] });
                        }
                    }
                }
                let (k, ratio) = min_ratio_ordered(&current, rest)?;
                pos += k;
                (mask_of(&rest[..k]), ratio)
            }
        };
        debug!("level {}: freeze {} at {ratio}", levels.len(), setfn::DisplayMask(set));
        for i in members(set) {
            rates[i] = ratio;
        }
        frozen |= set;
        chain.push(frozen);
        levels.push((set, ratio));
        current = current.contract(set);
    }
    Ok(Recursion { rates, chain, levels })
}

/// Max-min (equivalently proportional-fair) point of `P(g)`.
pub fn maxmin_allocate(f: &SubsetFunction, mode: Mode) -> Result<AllocationResult, MaxMinError> {
    maxmin_allocate_with(f, &SolverOptions::new(mode))
}

pub fn maxmin_allocate_with(f: &SubsetFunction, opts: &SolverOptions) -> Result<AllocationResult, MaxMinError> {
    let rec = recurse(f, opts)?;
    Ok(AllocationResult::new(rec.rates, rec.chain, Criterion::MaxMinPf, None))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricCapacity {
    pub rate_per_user: f64,
    pub c_sym: f64,
    /// Tightest constraint set.
    pub tight_set: Mask,
}

/// Largest common rate `r` with `(r, .., r)` in `P(g)`, and `K r`.
pub fn symmetric_capacity(f: &SubsetFunction, mode: Mode) -> Result<SymmetricCapacity, MaxMinError> {
    let (tight_set, rate_per_user) = match mode {
        Mode::Exhaustive => {
            let m = min_ratio_exhaustive(f)?;
            (m.set, m.value)
        }
        Mode::Ordered => {
            let order = singleton_order(f);
            let (k, v) = min_ratio_ordered(f, &order)?;
            (mask_of(&order[..k]), v)
        }
    };
    Ok(SymmetricCapacity { rate_per_user, c_sym: rate_per_user * f.len() as f64, tight_set })
}

/// The symmetric point as an allocation.
pub fn symmetric_allocate(f: &SubsetFunction, mode: Mode) -> Result<AllocationResult, MaxMinError> {
    let cap = symmetric_capacity(f, mode)?;
    let mut rates = vec![0.0; f.width()];
    for i in f.users() {
        rates[i] = cap.rate_per_user;
    }
    Ok(AllocationResult::new(rates, vec![cap.tight_set], Criterion::Symmetric, None))
}

/// `d*_i = g(Ω) - g(Ω \ {i})`.
pub fn canonical_disagreement(f: &SubsetFunction) -> Vec<f64> {
    let total = f.total();
    let mut d = vec![0.0; f.width()];
    for i in f.users() {
        d[i] = total - f.value(f.ground() & !singleton(i));
    }
    d
}

/// Nash bargaining solution with disagreement point `d`.
pub fn nash_bargaining(f: &SubsetFunction, d: &[f64], mode: Mode) -> Result<AllocationResult, MaxMinError> {
    nash_bargaining_with(f, d, &SolverOptions::new(mode))
}

pub fn nash_bargaining_with(
    f: &SubsetFunction,
    d: &[f64],
    opts: &SolverOptions,
) -> Result<AllocationResult, MaxMinError> {
    let translated = f.translate(d)?;
    let rec = recurse(&translated, opts)?;
    if let Some(&(set, value)) = rec.levels.iter().find(|&&(_, v)| v < -opts.tol) {
        return Err(MaxMinError::InfeasibleDisagreement { set: setfn::DisplayMask(set).to_string(), value });
    }
    let mut rates = rec.rates;
    for i in f.users() {
        rates[i] += d[i];
    }
    Ok(AllocationResult::new(rates, rec.chain, Criterion::Nbs, Some(d.to_vec())))
}

type Phi = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `g(S) = phi(Q(S))` with `phi` increasing, concave and `phi(0) = 0`.
#[derive(Clone)]
pub struct GeneralizedSymmetricSpec {
    phi: Phi,
    q: NonnegVector,
}

impl fmt::Debug for GeneralizedSymmetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralizedSymmetricSpec").field("q", &self.q).finish()
    }
}

const PHI_GRID: usize = 64;

impl GeneralizedSymmetricSpec {
    /// Checks `phi(0) = 0`, and monotonicity and midpoint concavity on a
    /// grid over `[0, Q(Ω)]`.
    pub fn new<F>(phi: F, q: NonnegVector) -> Result<Self, MaxMinError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if q.is_empty() || q.len() > setfn::MAX_USERS {
            return Err(MaxMinError::InvalidSpec(format!("{} users", q.len())));
        }
        let tol = setfn::DEFAULT_TOL;
        let zero = phi(0.0);
        if zero.abs() > tol {
            return Err(MaxMinError::InvalidSpec(format!("phi(0) = {zero}")));
        }
        let top = q.total();
        let grid: Vec<f64> = (0..=PHI_GRID).map(|j| top * j as f64 / PHI_GRID as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| phi(x)).collect();
        if let Some(j) = vals.windows(2).position(|w| w[1] < w[0] - tol) {
            return Err(MaxMinError::InvalidSpec(format!("phi decreases near {}", grid[j + 1])));
        }
        if let Some(j) = vals.windows(3).position(|w| w[1] < 0.5 * (w[0] + w[2]) - tol) {
            return Err(MaxMinError::InvalidSpec(format!("phi not concave near {}", grid[j + 1])));
        }
        Ok(Self { phi: Arc::new(phi), q })
    }

    pub fn weights(&self) -> &[f64] {
        &self.q
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    pub fn rank_function(&self) -> SubsetFunction {
        let phi = self.phi.clone();
        let q = self.q.to_vec();
        SubsetFunction::new(q.len(), move |s| phi(members(s).iter().map(|&i| q[i]).sum()))
            .expect("size validated at construction")
    }
}

/// Canonical-disagreement Nash bargaining for a generalized symmetric rank
/// function in `O(K^2)`.
///
/// With users sorted by weight, the translated function
/// `h(S) = g(S) + sum_{i in S} g(Ω \ {i}) - |S| g(Ω)` attains its minimum
/// over sets of each size on a prefix, and every contraction stays
/// generalized symmetric with the same canonical point, so each level only
/// scans prefixes of the weight order.
pub fn nbs_canonical_gensym(spec: &GeneralizedSymmetricSpec) -> Result<AllocationResult, MaxMinError> {
    let q = spec.weights();
    let k = q.len();
    let total: f64 = q.iter().sum();
    let g_total = spec.phi(total);
    let d: Vec<f64> = q.iter().map(|&qi| g_total - spec.phi(total - qi)).collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));

    let tol = setfn::DEFAULT_TOL;
    let mut rates = vec![0.0; k];
    let mut chain = Vec::new();
    let mut frozen: Mask = 0;
    let mut frozen_weight = 0.0;
    let mut pos = 0;
    while pos < k {
        let base = spec.phi(frozen_weight);
        let mut weight = frozen_weight;
        let mut shift = 0.0;
        let ratios: Vec<f64> = order[pos..]
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                weight += q[i];
                shift += d[i];
                (spec.phi(weight) - base - shift) / (j + 1) as f64
            })
            .collect();
        let best = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let len = 1 + ratios
            .iter()
            .rposition(|&v| (v - best).abs() <= setfn::TIE_TOL * best.abs().max(1.0))
            .expect("nonempty level");
        let ratio = ratios[len - 1];
        let level = &order[pos..pos + len];
        if ratio < -tol {
            return Err(MaxMinError::InfeasibleDisagreement {
                set: setfn::DisplayMask(mask_of(level)).to_string(),
                value: ratio,
            });
        }
        for &i in level {
            rates[i] = ratio + d[i];
            frozen_weight += q[i];
        }
        frozen |= mask_of(level);
        chain.push(frozen);
        pos += len;
    }
    Ok(AllocationResult::new(rates, chain, Criterion::Nbs, Some(d)))
}

/// Sum rate over `g(Ω)`.
pub fn efficiency(result: &AllocationResult, f: &SubsetFunction) -> Result<f64, MaxMinError> {
    let cap = f.total();
    if cap == 0.0 || !cap.is_finite() {
        return Err(MaxMinError::ZeroCapacity(cap));
    }
    Ok(result.sum_rate / cap)
}

/// A failed link in the capacity-fairness chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainViolation {
    SymmetricAboveProportional,
    ProportionalAboveSum,
    SymmetricAboveMaxMin,
    MaxMinAboveSum,
    /// `C_sym = C_PF` although the PF rates are not all equal.
    EqualityWithoutSymmetry,
    /// `C_PF / C_sum <= 1/K` for `K >= 2`.
    EfficiencyAtBound,
}

/// Capacities of one region under each criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityChain {
    pub c_sym: f64,
    pub c_pf: f64,
    pub c_mm: f64,
    pub c_sum: f64,
    pub pf_rates: Vec<f64>,
}

impl CapacityChain {
    /// `C_sym <= C_PF <= C_sum`, `C_sym <= C_MM <= C_sum`, equality in the
    /// first only for symmetric PF rates, and `C_PF / C_sum > 1/K`.
    ///
    /// The equality clause allows a PF spread of `sqrt(8 mean tol)`: the
    /// AM-GM gap is quadratic in the spread, so smaller spreads cannot be
    /// resolved at `tol`.
    pub fn violations(&self, tol: f64) -> Vec<ChainViolation> {
        let mut out = Vec::new();
        if self.c_sym > self.c_pf + tol {
            out.push(ChainViolation::SymmetricAboveProportional);
        }
        if self.c_pf > self.c_sum + tol {
            out.push(ChainViolation::ProportionalAboveSum);
        }
        if self.c_sym > self.c_mm + tol {
            out.push(ChainViolation::SymmetricAboveMaxMin);
        }
        if self.c_mm > self.c_sum + tol {
            out.push(ChainViolation::MaxMinAboveSum);
        }
        let k = self.pf_rates.len();
        if k > 0 && (self.c_pf - self.c_sym).abs() <= tol {
            let mean = self.c_pf / k as f64;
            let lo = self.pf_rates.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = self.pf_rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > (8.0 * mean.abs() * tol).sqrt() + tol {
                out.push(ChainViolation::EqualityWithoutSymmetry);
            }
        }
        if k >= 2 && self.c_pf / self.c_sum <= 1.0 / k as f64 {
            out.push(ChainViolation::EfficiencyAtBound);
        }
        out
    }
}
