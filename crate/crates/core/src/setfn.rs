//! Functions on subsets of a finite ground set.
//!
//! Subsets are bit masks over user indices `0..width`. A [`SubsetFunction`]
//! carries its own ground set as a mask, so contracting by a set `S0` keeps
//! the original user indices and simply drops `S0` from the ground set.
//!
//! Exhaustive routines enumerate all `2^K` subsets of the ground set and are
//! capped at [`EXHAUSTIVE_LIMIT`] users; the order-property scan enumerates
//! triples and is capped at [`ORDER_PROPERTY_LIMIT`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

/// Bit mask over user indices.
pub type Mask = u64;

/// Largest bit width a mask can address.
pub const MAX_USERS: usize = 64;
/// Largest ground set accepted by routines that scan every subset.
pub const EXHAUSTIVE_LIMIT: usize = 24;
/// Largest ground set accepted by the order-property triple scan.
pub const ORDER_PROPERTY_LIMIT: usize = 16;
/// Default tolerance for property checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Absolute slack under which two min-ratio candidates count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetFnError {
    #[error("ground set has {size} users, exhaustive scan limit is {limit}")]
    ExhaustiveLimit { size: usize, limit: usize },
    #[error("ground set size {0} is outside 1..={MAX_USERS}")]
    InvalidSize(usize),
    #[error("value table has {got} entries, expected {expected}")]
    TableLength { got: usize, expected: usize },
    #[error("rate vector has {got} entries, expected {expected}")]
    RateLength { got: usize, expected: usize },
    #[error("order must be a permutation of the ground set")]
    BadOrder,
}

/// The ground set `{0, .., K-1}` as a count of users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self, SetFnError> {
        if size == 0 || size > MAX_USERS {
            return Err(SetFnError::InvalidSize(size));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn full(&self) -> Mask {
        full_mask(self.size)
    }
}

pub fn full_mask(width: usize) -> Mask {
    if width >= 64 {
        Mask::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn singleton(i: usize) -> Mask {
    1u64 << i
}

/// Indices of the set bits of `mask`, ascending.
pub fn members(mask: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out.push(i);
        m &= m - 1;
    }
    out
}

pub fn mask_of(users: &[usize]) -> Mask {
    users.iter().fold(0, |m, &i| m | singleton(i))
}

/// Formats a mask as `{1,3}` with 1-based user labels.
pub struct DisplayMask(pub Mask);

impl fmt::Display for DisplayMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = members(self.0).iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

type Eval = dyn Fn(Mask) -> f64 + Send + Sync;

enum Source {
    Closure {
        eval: Box<Eval>,
        memo: Mutex<HashMap<Mask, f64>>,
    },
    Contraction {
        parent: SubsetFunction,
        base: Mask,
        base_value: f64,
    },
    Translation {
        parent: SubsetFunction,
        shift: Vec<f64>,
    },
}

struct Inner {
    width: usize,
    ground: Mask,
    source: Source,
}

/// A real-valued function on the subsets of a ground set.
///
/// Cloning is cheap and clones share the memo table. Values of closure-backed
/// functions are cached after the first evaluation; contractions and
/// translations delegate to the parent and reuse its cache.
#[derive(Clone)]
pub struct SubsetFunction {
    inner: Arc<Inner>,
}

impl fmt::Debug for SubsetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubsetFunction")
            .field("width", &self.inner.width)
            .field("ground", &DisplayMask(self.inner.ground).to_string())
            .finish()
    }
}

impl SubsetFunction {
    /// Wraps an evaluator on the ground set `{0, .., k-1}`.
    pub fn new<F>(k: usize, eval: F) -> Result<Self, SetFnError>
    where
        F: Fn(Mask) -> f64 + Send + Sync + 'static,
    {
        let ground = GroundSet::new(k)?;
        Ok(Self::from_source(
            k,
            ground.full(),
            Source::Closure {
                eval: Box::new(eval),
                memo: Mutex::new(HashMap::new()),
            },
        ))
    }

    /// Builds a function from an explicit table indexed by mask.
    pub fn from_table(k: usize, values: Vec<f64>) -> Result<Self, SetFnError> {
        GroundSet::new(k)?;
        if k > EXHAUSTIVE_LIMIT {
            return Err(SetFnError::ExhaustiveLimit { size: k, limit: EXHAUSTIVE_LIMIT });
        }
        let expected = 1usize << k;
        if values.len() != expected {
            return Err(SetFnError::TableLength { got: values.len(), expected });
        }
        Self::new(k, move |s| values[s as usize])
    }

    /// `g(S) = sum of weights over S`.
    pub fn modular(weights: &[f64]) -> Result<Self, SetFnError> {
        let w = weights.to_vec();
        Self::new(weights.len(), move |s| members(s).iter().map(|&i| w[i]).sum())
    }

    fn from_source(width: usize, ground: Mask, source: Source) -> Self {
        Self { inner: Arc::new(Inner { width, ground, source }) }
    }

    /// Number of bit positions user indices may occupy.
    pub fn width(&self) -> usize {
        self.inner.width
    }

    pub fn ground(&self) -> Mask {
        self.inner.ground
    }

    /// Number of users in the ground set.
    pub fn len(&self) -> usize {
        self.inner.ground.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.inner.ground == 0
    }

    pub fn users(&self) -> Vec<usize> {
        members(self.inner.ground)
    }

    pub fn value(&self, s: Mask) -> f64 {
        debug_assert_eq!(s & !self.inner.ground, 0, "mask outside ground set");
        match &self.inner.source {
            Source::Closure { eval, memo } => {
                if let Some(v) = memo.lock().expect("memo poisoned").get(&s) {
                    return *v;
                }
                let v = eval(s);
                memo.lock().expect("memo poisoned").insert(s, v);
                v
            }
            Source::Contraction { parent, base, base_value } => parent.value(s | base) - base_value,
            Source::Translation { parent, shift } => {
                parent.value(s) - members(s).iter().map(|&i| shift[i]).sum::<f64>()
            }
        }
    }

    /// Value on the whole ground set.
    pub fn total(&self) -> f64 {
        self.value(self.inner.ground)
    }

    /// `g'(S) = g(S ∪ S0) - g(S0)` on the ground set minus `S0`.
    ///
    /// Contracting a contraction is flattened onto the original function, so
    /// repeated contraction never nests evaluators.
    pub fn contract(&self, s0: Mask) -> SubsetFunction {
        let s0 = s0 & self.inner.ground;
        let ground = self.inner.ground & !s0;
        let source = match &self.inner.source {
            Source::Contraction { parent, base, .. } => {
                let base = base | s0;
                Source::Contraction { parent: parent.clone(), base, base_value: parent.value(base) }
            }
            _ => Source::Contraction { parent: self.clone(), base: s0, base_value: self.value(s0) },
        };
        Self::from_source(self.inner.width, ground, source)
    }

    /// `h(S) = g(S) - d(S)`, the translation used for bargaining problems.
    pub fn translate(&self, d: &[f64]) -> Result<SubsetFunction, SetFnError> {
        if d.len() != self.inner.width {
            return Err(SetFnError::RateLength { got: d.len(), expected: self.inner.width });
        }
        Ok(Self::from_source(
            self.inner.width,
            self.inner.ground,
            Source::Translation { parent: self.clone(), shift: d.to_vec() },
        ))
    }

    /// Indexes the ground set densely so that scans can use contiguous tables.
    fn dense(&self) -> Dense {
        Dense { users: self.users() }
    }

    fn check_exhaustive(&self, limit: usize) -> Result<Dense, SetFnError> {
        if self.len() > limit {
            return Err(SetFnError::ExhaustiveLimit { size: self.len(), limit });
        }
        Ok(self.dense())
    }
}

/// Map between dense subset indices `0..2^n` and masks over original users.
struct Dense {
    users: Vec<usize>,
}

impl Dense {
    fn n(&self) -> usize {
        self.users.len()
    }

    fn expand(&self, dense: u64) -> Mask {
        let mut mask = 0;
        let mut d = dense;
        while d != 0 {
            let j = d.trailing_zeros() as usize;
            mask |= singleton(self.users[j]);
            d &= d - 1;
        }
        mask
    }

    fn table(&self, f: &SubsetFunction) -> Vec<f64> {
        (0..1u64 << self.n()).map(|d| f.value(self.expand(d))).collect()
    }
}

/// A concrete counterexample to a checked property.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `g(s) + g(t) < g(s ∪ t) + g(s ∩ t)`.
    Submodular { s: Mask, t: Mask },
    /// `g(set ∪ {element}) < g(set)`.
    Monotone { set: Mask, element: usize },
    /// `g(a) <= g(b)` but `g(a ∪ c) > g(b ∪ c)`.
    Order { a: Mask, b: Mask, c: Mask },
    /// The user lies in no bottleneck where its rate is largest.
    MaxMin { user: usize },
}

impl Violation {
    /// Re-evaluates the counterexample against `f`.
    pub fn reproduces(&self, f: &SubsetFunction, rates: Option<&[f64]>, tol: f64) -> bool {
        match *self {
            Violation::Submodular { s, t } => {
                f.value(s) + f.value(t) < f.value(s | t) + f.value(s & t) - tol
            }
            Violation::Monotone { set, element } => {
                f.value(set | singleton(element)) < f.value(set) - tol
            }
            Violation::Order { a, b, c } => {
                f.value(a) <= f.value(b) && f.value(a | c) > f.value(b | c) + tol
            }
            Violation::MaxMin { user } => match rates {
                Some(r) => matches!(maxmin_certificate(f, r, tol), Ok(w) if w.violation == Some(Violation::MaxMin { user })),
                None => false,
            },
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Submodular { s, t } => {
                write!(f, "submodularity fails for S={} T={}", DisplayMask(s), DisplayMask(t))
            }
            Violation::Monotone { set, element } => {
                write!(f, "adding user {} to {} decreases the value", element + 1, DisplayMask(set))
            }
            Violation::Order { a, b, c } => write!(
                f,
                "order property fails for A={} B={} C={}",
                DisplayMask(a),
                DisplayMask(b),
                DisplayMask(c)
            ),
            Violation::MaxMin { user } => {
                write!(f, "user {} is not largest in any bottleneck", user + 1)
            }
        }
    }
}

/// Outcome of a property scan: holds unless a violation was found.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyWitness {
    pub violation: Option<Violation>,
}

impl PropertyWitness {
    fn holds() -> Self {
        Self { violation: None }
    }

    fn fails(v: Violation) -> Self {
        Self { violation: Some(v) }
    }

    pub fn holds_true(&self) -> bool {
        self.violation.is_none()
    }
}

/// Submodularity via the local exchange inequality
/// `g(S+i) + g(S+j) >= g(S+i+j) + g(S)` for all `S` and `i < j` outside `S`,
/// which is equivalent to the pairwise definition and costs `O(2^K K^2)`
/// evaluations instead of `O(4^K)`. The witness is the first violating
/// `(S, i, j)` in lexicographic order, reported as the pair `(S+i, S+j)`.
pub fn is_submodular(f: &SubsetFunction, tol: f64) -> Result<PropertyWitness, SetFnError> {
    let dense = f.check_exhaustive(EXHAUSTIVE_LIMIT)?;
    let n = dense.n();
    let table = dense.table(f);
    for s in 0..1u64 << n {
        for i in 0..n {
            let bi = 1u64 << i;
            if s & bi != 0 {
                continue;
            }
            for j in (i + 1)..n {
                let bj = 1u64 << j;
                if s & bj != 0 {
                    continue;
                }
                let lhs = table[(s | bi) as usize] + table[(s | bj) as usize];
                let rhs = table[(s | bi | bj) as usize] + table[s as usize];
                if lhs < rhs - tol {
                    return Ok(PropertyWitness::fails(Violation::Submodular {
                        s: dense.expand(s | bi),
                        t: dense.expand(s | bj),
                    }));
                }
            }
        }
    }
    Ok(PropertyWitness::holds())
}

/// Monotonicity via single-element additions.
pub fn is_monotone(f: &SubsetFunction, tol: f64) -> Result<PropertyWitness, SetFnError> {
    let dense = f.check_exhaustive(EXHAUSTIVE_LIMIT)?;
    let n = dense.n();
    let table = dense.table(f);
    for s in 0..1u64 << n {
        for i in 0..n {
            let bi = 1u64 << i;
            if s & bi == 0 && table[(s | bi) as usize] < table[s as usize] - tol {
                return Ok(PropertyWitness::fails(Violation::Monotone {
                    set: dense.expand(s),
                    element: dense.users[i],
                }));
            }
        }
    }
    Ok(PropertyWitness::holds())
}

/// Order property for equal-size `A`, `B` disjoint from `C`.
///
/// Only pairs with `A ∩ B = ∅` need checking: shared elements can be moved
/// into `C` without changing either side of the implication.
pub fn has_order_property(f: &SubsetFunction, tol: f64) -> Result<PropertyWitness, SetFnError> {
    let dense = f.check_exhaustive(ORDER_PROPERTY_LIMIT)?;
    let n = dense.n();
    let full = (1u64 << n) - 1;
    let table = dense.table(f);
    for a in 1..=full {
        for b in 1..=full {
            if a == b || a & b != 0 || a.count_ones() != b.count_ones() {
                continue;
            }
            if table[a as usize] > table[b as usize] {
                continue;
            }
            let rest = full & !(a | b);
            // Enumerate every subset c of `rest`, including the empty set.
            let mut c = rest;
            loop {
                if table[(a | c) as usize] > table[(b | c) as usize] + tol {
                    return Ok(PropertyWitness::fails(Violation::Order {
                        a: dense.expand(a),
                        b: dense.expand(b),
                        c: dense.expand(c),
                    }));
                }
                if c == 0 {
                    break;
                }
                c = (c - 1) & rest;
            }
        }
    }
    Ok(PropertyWitness::holds())
}

/// Minimizing set of `g(S)/|S|` together with the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinRatio {
    pub set: Mask,
    pub value: f64,
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Exhaustive `min g(S)/|S|` over nonempty subsets of the ground set.
///
/// Near-ties resolve to the largest cardinality, then the lowest mask. The
/// reduction is two-pass (minimum first, then tie selection) so the result
/// does not depend on enumeration order.
pub fn min_ratio_exhaustive(f: &SubsetFunction) -> Result<MinRatio, SetFnError> {
    let dense = f.check_exhaustive(EXHAUSTIVE_LIMIT)?;
    let n = dense.n();
    if n == 0 {
        return Err(SetFnError::InvalidSize(0));
    }
    let ratios: Vec<(Mask, f64)> = (1..1u64 << n)
        .map(|d| {
            let m = dense.expand(d);
            (m, f.value(m) / m.count_ones() as f64)
        })
        .collect();
    let best = ratios.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let (set, value) = ratios
        .into_iter()
        .filter(|&(_, v)| ties(v, best))
        .min_by(|x, y| y.0.count_ones().cmp(&x.0.count_ones()).then(x.0.cmp(&y.0)))
        .expect("nonempty ground set");
    Ok(MinRatio { set, value })
}

/// `min_k g({order_1..order_k})/k`, returning the prefix length.
///
/// Exact when `f` has the order property and `order` sorts singleton values
/// nondecreasing; the caller owns that precondition.
pub fn min_ratio_ordered(f: &SubsetFunction, order: &[usize]) -> Result<(usize, f64), SetFnError> {
    if order.is_empty() || mask_of(order) != f.ground() || order.len() != f.len() {
        return Err(SetFnError::BadOrder);
    }
    let mut prefix = 0;
    let ratios: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            prefix |= singleton(i);
            f.value(prefix) / (k + 1) as f64
        })
        .collect();
    let best = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let k = ratios.iter().rposition(|&v| ties(v, best)).expect("nonempty order");
    Ok((k + 1, ratios[k]))
}

fn rate_sum(r: &[f64], s: Mask) -> f64 {
    members(s).iter().map(|&i| r[i]).sum()
}

/// Whether `r(S) = g(S)` within `tol`.
pub fn is_bottleneck(f: &SubsetFunction, r: &[f64], s: Mask, tol: f64) -> bool {
    (rate_sum(r, s) - f.value(s)).abs() <= tol
}

/// Every bottleneck of `r`, found by exhaustive scan.
pub fn bottlenecks(f: &SubsetFunction, r: &[f64], tol: f64) -> Result<Vec<Mask>, SetFnError> {
    if r.len() != f.width() {
        return Err(SetFnError::RateLength { got: r.len(), expected: f.width() });
    }
    let dense = f.check_exhaustive(EXHAUSTIVE_LIMIT)?;
    Ok((1..1u64 << dense.n())
        .map(|d| dense.expand(d))
        .filter(|&m| is_bottleneck(f, r, m, tol))
        .collect())
}

/// Max-min certificate: each user is largest within some bottleneck.
pub fn maxmin_certificate(f: &SubsetFunction, r: &[f64], tol: f64) -> Result<PropertyWitness, SetFnError> {
    let tight = bottlenecks(f, r, tol)?;
    for i in f.users() {
        let covered = tight.iter().any(|&b| {
            b & singleton(i) != 0 && members(b).iter().all(|&j| r[i] >= r[j] - tol)
        });
        if !covered {
            return Ok(PropertyWitness::fails(Violation::MaxMin { user: i }));
        }
    }
    Ok(PropertyWitness::holds())
}

/// Whether `r` lies in `P(g)`: nonnegative and `r(S) <= g(S)` for every `S`.
pub fn in_polyhedron(f: &SubsetFunction, r: &[f64], tol: f64) -> Result<bool, SetFnError> {
    if r.len() != f.width() {
        return Err(SetFnError::RateLength { got: r.len(), expected: f.width() });
    }
    let dense = f.check_exhaustive(EXHAUSTIVE_LIMIT)?;
    if f.users().iter().any(|&i| r[i] < -tol) {
        return Ok(false);
    }
    Ok((1..1u64 << dense.n()).all(|d| {
        let m = dense.expand(d);
        rate_sum(r, m) <= f.value(m) + tol
    }))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Users a, b, c are indices 0, 1, 2.
    pub(crate) fn example_one() -> SubsetFunction {
        // masks: ∅, a, b, ab, c, ac, bc, abc
        SubsetFunction::from_table(3, vec![0.0, 1.0, 2.0, 3.0, 3.0, 4.0, 3.0, 4.0]).unwrap()
    }

    pub(crate) fn example_two() -> SubsetFunction {
        let p = [2.0, 8.0, 200.0, 300.0];
        SubsetFunction::new(4, move |s| 0.5 * (members(s).iter().map(|&i| p[i]).sum::<f64>()).ln_1p())
            .unwrap()
    }

    fn supermodular_pair() -> SubsetFunction {
        SubsetFunction::from_table(2, vec![0.0, 1.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn example_one_is_submodular_and_monotone() {
        let g = example_one();
        assert!(is_submodular(&g, DEFAULT_TOL).unwrap().holds_true());
        assert!(is_monotone(&g, DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn modular_is_submodular() {
        let g = SubsetFunction::modular(&[0.3, 1.7, 2.0, 0.1]).unwrap();
        assert!(is_submodular(&g, DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn supermodular_witness_is_the_singletons() {
        let g = supermodular_pair();
        let w = is_submodular(&g, DEFAULT_TOL).unwrap();
        assert_eq!(w.violation, Some(Violation::Submodular { s: 0b01, t: 0b10 }));
        assert!(w.violation.unwrap().reproduces(&g, None, DEFAULT_TOL));
    }

    #[test]
    fn monotone_violation_from_translation() {
        // Translating by a large point breaks monotonicity.
        let g = example_two();
        let h = g.translate(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let w = is_monotone(&h, DEFAULT_TOL).unwrap();
        let v = w.violation.expect("translation is not monotone");
        assert!(v.reproduces(&h, None, DEFAULT_TOL));
    }

    #[test]
    fn example_one_fails_order_property() {
        let g = example_one();
        let w = has_order_property(&g, DEFAULT_TOL).unwrap();
        assert_eq!(w.violation, Some(Violation::Order { a: 0b001, b: 0b010, c: 0b100 }));
    }

    #[test]
    fn single_user_has_order_property() {
        let g = SubsetFunction::modular(&[2.0]).unwrap();
        assert!(has_order_property(&g, DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn generalized_symmetric_has_order_property() {
        let q = [0.4, 3.0, 1.1, 7.0, 2.2];
        let g = SubsetFunction::new(5, move |s| {
            let x: f64 = members(s).iter().map(|&i| q[i]).sum();
            x.sqrt()
        })
        .unwrap();
        assert!(has_order_property(&g, DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn contraction_of_example_one() {
        let g = example_one().contract(0b001);
        assert_eq!(g.ground(), 0b110);
        assert_eq!(g.value(0b010), 2.0);
        assert_eq!(g.value(0b100), 3.0);
        assert_eq!(g.value(0b110), 3.0);
    }

    #[test]
    fn contraction_by_empty_set_subtracts_empty_value() {
        let g = SubsetFunction::from_table(2, vec![0.5, 1.0, 2.0, 2.5]).unwrap();
        let h = g.contract(0);
        for s in 0..4 {
            assert_eq!(h.value(s), g.value(s) - 0.5);
        }
    }

    #[test]
    fn contraction_of_example_two() {
        let g2 = example_two().contract(0b0001);
        assert!((g2.value(0b0010) - 0.6496).abs() < 5e-5);
    }

    #[test]
    fn nested_contraction_is_flat() {
        let g = example_two();
        let twice = g.contract(0b0001).contract(0b0010);
        let once = g.contract(0b0011);
        for s in [0b0100, 0b1000, 0b1100] {
            assert!((twice.value(s) - once.value(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn min_ratio_of_example_one() {
        let m = min_ratio_exhaustive(&example_one()).unwrap();
        assert_eq!(m, MinRatio { set: 0b001, value: 1.0 });
    }

    #[test]
    fn min_ratio_ties_prefer_largest_set() {
        let g = SubsetFunction::modular(&[0.7; 4]).unwrap();
        let m = min_ratio_exhaustive(&g).unwrap();
        assert_eq!(m.set, 0b1111);
        assert!((m.value - 0.7).abs() < 1e-15);
    }

    #[test]
    fn min_ratio_of_example_two() {
        let m = min_ratio_exhaustive(&example_two()).unwrap();
        assert_eq!(m.set, 0b0001);
        assert!((m.value - 0.5493).abs() < 5e-5);
        let (k, v) = min_ratio_ordered(&example_two(), &[0, 1, 2, 3]).unwrap();
        assert_eq!(k, 1);
        assert!((v - m.value).abs() < 1e-15);
    }

    #[test]
    fn min_ratio_ordered_equal_powers_takes_full_set() {
        let g = SubsetFunction::new(3, |s| 0.5 * (s.count_ones() as f64).ln_1p()).unwrap();
        let (k, v) = min_ratio_ordered(&g, &[0, 1, 2]).unwrap();
        assert_eq!(k, 3);
        assert!((v - 0.5 * 4f64.ln() / 3.0).abs() < 1e-15);
        let ex = min_ratio_exhaustive(&g).unwrap();
        assert_eq!(ex.set, 0b111);
        assert!((ex.value - v).abs() < 1e-12);
    }

    #[test]
    fn min_ratio_ordered_single_user() {
        let g = SubsetFunction::modular(&[1.25]).unwrap();
        assert_eq!(min_ratio_ordered(&g, &[0]).unwrap(), (1, 1.25));
        assert_eq!(min_ratio_ordered(&g, &[]), Err(SetFnError::BadOrder));
    }

    #[test]
    fn bottlenecks_of_example_one() {
        let g = example_one();
        let r = [1.0, 1.5, 1.5];
        assert!(is_bottleneck(&g, &r, 0b001, DEFAULT_TOL));
        assert!(!is_bottleneck(&g, &r, 0b010, DEFAULT_TOL));
        assert!(is_bottleneck(&g, &r, 0, DEFAULT_TOL));
    }

    #[test]
    fn certificate_for_example_one() {
        let g = example_one();
        let r = [1.0, 1.5, 1.5];
        assert!(maxmin_certificate(&g, &r, DEFAULT_TOL).unwrap().holds_true());
        let bad = [1.0, 1.0, 2.0];
        let w = maxmin_certificate(&g, &bad, DEFAULT_TOL).unwrap();
        assert_eq!(w.violation, Some(Violation::MaxMin { user: 1 }));
        assert!(w.violation.unwrap().reproduces(&g, Some(&bad), DEFAULT_TOL));
    }

    #[test]
    fn certificate_single_user() {
        let g = SubsetFunction::modular(&[0.8]).unwrap();
        assert!(maxmin_certificate(&g, &[0.8], DEFAULT_TOL).unwrap().holds_true());
    }

    #[test]
    fn exhaustive_limit_is_enforced() {
        let g = SubsetFunction::new(25, |s| s.count_ones() as f64).unwrap();
        assert!(matches!(min_ratio_exhaustive(&g), Err(SetFnError::ExhaustiveLimit { size: 25, .. })));
        let h = SubsetFunction::new(17, |s| s.count_ones() as f64).unwrap();
        assert!(matches!(has_order_property(&h, DEFAULT_TOL), Err(SetFnError::ExhaustiveLimit { .. })));
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(SubsetFunction::new(0, |_| 0.0).is_err());
        assert!(SubsetFunction::from_table(2, vec![0.0; 3]).is_err());
    }
}
