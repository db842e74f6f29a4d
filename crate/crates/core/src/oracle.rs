//! Brute-force references for the solvers.
//!
//! Nothing here shares code paths with [`maxmin`](crate::maxmin) or the root
//! search in [`bc`](crate::bc): max-min comes from progressive filling,
//! proportional fairness from grid search, and face samples from greedy
//! vertices. Everything is deterministic given [`OracleConfig::seed`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::bc::{allocation_from_split, BcAllocation, BcChannel, BcCriterion, BcError};
use crate::mac::{ScalarMac, VectorMac};
use crate::setfn::{members, singleton, SetFnError, SubsetFunction};

/// Users supported by filling and sampling (every step scans all subsets).
pub const FILL_LIMIT: usize = 12;
/// Users supported by the dense grids.
pub const GRID_LIMIT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle supports at most {limit} users, got {users}")]
    TooLarge { users: usize, limit: usize },
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
    #[error("no feasible grid point at resolution {resolution}")]
    NoFeasiblePoint { resolution: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error(transparent)]
    Bc(#[from] BcError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Points per grid dimension; `None` picks 200 for up to three users
    /// and 60 for four.
    pub grid_resolution: Option<usize>,
    /// Smallest increment of progressive filling.
    pub fill_step: f64,
    pub seed: u64,
    /// Per-dimension shift of the grid, as a fraction of a cell; reused
    /// cyclically, empty means no shift.
    pub grid_offset: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { grid_resolution: None, fill_step: 1e-5, seed: 0, grid_offset: Vec::new() }
    }
}

impl OracleConfig {
    pub fn resolution(&self, users: usize) -> Result<usize, OracleError> {
        let r = self.grid_resolution.unwrap_or(if users <= 3 { 200 } else { 60 });
        if r < 2 {
            return Err(OracleError::InvalidConfig(format!("grid resolution {r} is below 2")));
        }
        Ok(r)
    }

    fn offset(&self, dim: usize) -> f64 {
        if self.grid_offset.is_empty() {
            0.0
        } else {
            self.grid_offset[dim % self.grid_offset.len()]
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        if !(self.fill_step > 0.0 && self.fill_step.is_finite()) {
            return Err(OracleError::InvalidConfig(format!("fill step {} must be positive", self.fill_step)));
        }
        if self.grid_offset.iter().any(|o| !(0.0..1.0).contains(o)) {
            return Err(OracleError::InvalidConfig("grid offsets must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// ChaCha8 generator for `(seed, stream)`; streams index instances so that
/// batches are reproducible in any order.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn check_size(k: usize, limit: usize) -> Result<(), OracleError> {
    if k > limit {
        return Err(OracleError::TooLarge { users: k, limit });
    }
    Ok(())
}

/// `g` over all subsets of the root ground set, by mask.
fn tabulate(f: &SubsetFunction) -> Vec<f64> {
    (0..1u64 << f.width()).map(|s| f.value(s & f.ground())).collect()
}

fn subset_sum(r: &[f64], s: u64) -> f64 {
    members(s).iter().map(|&i| r[i]).sum()
}

/// Raises every unfrozen rate together and freezes the members of each
/// constraint that becomes tight.
///
/// Each round grows the common increment by doubling steps from
/// `fill_step`, backs off to `fill_step`, then lands exactly on the first
/// constraint crossed by the next step.
pub fn progressive_fill_maxmin(f: &SubsetFunction, cfg: &OracleConfig) -> Result<Vec<f64>, OracleError> {
    cfg.validate()?;
    let k = f.width();
    check_size(k, FILL_LIMIT)?;
    let g = tabulate(f);
    let ground = f.ground();
    let sets: Vec<u64> = (1..1u64 << k).filter(|s| s & !ground == 0).collect();
    let mut r = vec![0.0; k];
    let mut frozen = !ground;
    let tight_tol = |v: f64| 1e-9 * v.abs().max(1.0);

    while frozen & ground != ground {
        let free = ground & !frozen;
        let grown = |r: &[f64], t: f64, s: u64| subset_sum(r, s) + t * (s & free).count_ones() as f64;
        let fits = |r: &[f64], t: f64| sets.iter().all(|&s| s & free == 0 || grown(r, t, s) <= g[s as usize]);

        let mut step = cfg.fill_step;
        loop {
            if fits(&r, step) {
                for i in members(free) {
                    r[i] += step;
                }
                step *= 2.0;
            } else if step > cfg.fill_step {
                step *= 0.5;
            } else {
                break;
            }
        }
        let t = sets
            .iter()
            .filter(|&&s| s & free != 0 && grown(&r, step, s) > g[s as usize])
            .map(|&s| (g[s as usize] - subset_sum(&r, s)) / (s & free).count_ones() as f64)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        for i in members(free) {
            r[i] += t;
        }
        let mut newly = 0;
        for &s in &sets {
            if s & free != 0 && (g[s as usize] - subset_sum(&r, s)).abs() <= tight_tol(g[s as usize]) {
                newly |= s & free;
            }
        }
        if newly == 0 {
            // Rounding left no set exactly tight; freeze the tightest one.
            let s = sets
                .iter()
                .filter(|&&s| s & free != 0)
                .min_by(|&&a, &&b| {
                    let sa = g[a as usize] - subset_sum(&r, a);
                    let sb = g[b as usize] - subset_sum(&r, b);
                    sa.total_cmp(&sb)
                })
                .copied()
                .expect("free users remain");
            newly = s & free;
        }
        frozen |= newly;
    }
    Ok(r)
}

/// Best grid point and its objective `sum_i ln(r_i - d_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub rates: Vec<f64>,
    pub objective: f64,
}

fn nbs_objective(r: &[f64], d: &[f64]) -> Option<f64> {
    let mut sum = 0.0;
    for (ri, di) in r.iter().zip(d) {
        if ri.is_nan() || ri <= di {
            return None;
        }
        sum += (ri - di).ln();
    }
    Some(sum)
}

fn grid_axis(lo: f64, hi: f64, resolution: usize, offset: f64) -> Vec<f64> {
    let h = (hi - lo) / (resolution - 1) as f64;
    (0..resolution).map(|j| lo + (j as f64 + offset) * h).filter(|&v| v <= hi).collect()
}

/// Visits every point of the product of `axes`.
fn for_each_point(axes: &[Vec<f64>], mut visit: impl FnMut(&[f64])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&point);
        let mut dim = 0;
        loop {
            if dim == axes.len() {
                return;
            }
            idx[dim] += 1;
            if idx[dim] < axes[dim].len() {
                point[dim] = axes[dim][idx[dim]];
                break;
            }
            idx[dim] = 0;
            point[dim] = axes[dim][0];
            dim += 1;
        }
    }
}

/// Maximizes `sum_i ln(r_i - d_i)` over a grid of the dominant face.
///
/// The first `K - 1` rates range over `[d_i, g({i})]`; the last is fixed by
/// `r(Ω) = g(Ω)` and the point is kept only if it satisfies every
/// constraint.
pub fn grid_pf_polymatroid(f: &SubsetFunction, d: &[f64], cfg: &OracleConfig) -> Result<GridOptimum, OracleError> {
    cfg.validate()?;
    let k = f.width();
    check_size(k, GRID_LIMIT)?;
    if d.len() != k {
        return Err(OracleError::LengthMismatch { expected: k, got: d.len() });
    }
    let res = cfg.resolution(k)?;
    let g = tabulate(f);
    let ground = f.ground();
    let free: Vec<usize> = members(ground);
    let Some((&last, head)) = free.split_last() else {
        return Err(OracleError::InvalidConfig("empty ground set".into()));
    };
    let axes: Vec<Vec<f64>> = head
        .iter()
        .enumerate()
        .map(|(dim, &i)| grid_axis(d[i], g[singleton(i) as usize], res, cfg.offset(dim)))
        .collect();
    let total = g[ground as usize];
    let sets: Vec<u64> = (1..1u64 << k).filter(|s| s & !ground == 0).collect();
    let mut best: Option<GridOptimum> = None;
    let mut r = vec![0.0; k];
    let mut visit = |point: &[f64]| {
        for (&i, &v) in head.iter().zip(point) {
            r[i] = v;
        }
        r[last] = total - point.iter().sum::<f64>();
        let feasible = sets.iter().all(|&s| subset_sum(&r, s) <= g[s as usize] + 1e-12 * g[s as usize].abs().max(1.0));
        if !feasible {
            return;
        }
        let active: Vec<f64> = free.iter().map(|&i| r[i]).collect();
        let floors: Vec<f64> = free.iter().map(|&i| d[i]).collect();
        if let Some(obj) = nbs_objective(&active, &floors) {
            if best.as_ref().is_none_or(|b| obj > b.objective) {
                best = Some(GridOptimum { rates: r.clone(), objective: obj });
            }
        }
    };
    if head.is_empty() {
        visit(&[]);
    } else {
        for_each_point(&axes, visit);
    }
    best.ok_or(OracleError::NoFeasiblePoint { resolution: res })
}

/// Maximizes `sum_i ln(r_i - d_i)` over nondecreasing split points on a
/// grid. `d` is in the caller's user labels; the allocation is in sorted
/// order like every [`BcAllocation`].
pub fn grid_pf_bc(ch: &BcChannel, d: &[f64], cfg: &OracleConfig) -> Result<(BcAllocation, f64), OracleError> {
    cfg.validate()?;
    let k = ch.users();
    check_size(k, GRID_LIMIT)?;
    let ds = ch.to_sorted(d)?;
    let res = cfg.resolution(k)?;
    let axes: Vec<Vec<f64>> = (0..k - 1).map(|dim| grid_axis(0.0, 1.0, res, cfg.offset(dim))).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut x = vec![1.0; k];
    let mut visit = |point: &[f64]| {
        if point.windows(2).any(|w| w[0] > w[1]) {
            return;
        }
        x[..k - 1].copy_from_slice(point);
        let r = crate::bc::boundary_rates(ch, &x).expect("grid points are valid splits");
        if let Some(obj) = nbs_objective(&r, &ds) {
            if best.as_ref().is_none_or(|b| obj > b.1) {
                best = Some((x.clone(), obj));
            }
        }
    };
    if k == 1 {
        visit(&[]);
    } else {
        for_each_point(&axes, visit);
    }
    let (x, obj) = best.ok_or(OracleError::NoFeasiblePoint { resolution: res })?;
    let criterion = if ds.iter().all(|&v| v == 0.0) { BcCriterion::ProportionalFair } else { BcCriterion::Nbs };
    Ok((allocation_from_split(ch, &x, criterion)?, obj))
}

/// Greedy vertex for `perm`: each user gets its marginal gain over the
/// users before it.
pub fn greedy_vertex(f: &SubsetFunction, perm: &[usize]) -> Vec<f64> {
    let mut r = vec![0.0; f.width()];
    let mut prefix = 0u64;
    let mut prev = 0.0;
    for &i in perm {
        prefix |= singleton(i);
        let v = f.value(prefix);
        r[i] = v - prev;
        prev = v;
    }
    r
}

/// Random points of the dominant face: Dirichlet-weighted combinations of
/// `K + 1` greedy vertices from random permutations, kept if they satisfy
/// every constraint.
pub fn sample_dominant_face(f: &SubsetFunction, count: usize, cfg: &OracleConfig) -> Result<Vec<Vec<f64>>, OracleError> {
    let k = f.width();
    check_size(k, FILL_LIMIT)?;
    let g = tabulate(f);
    let ground = f.ground();
    let users = members(ground);
    let sets: Vec<u64> = (1..1u64 << k).filter(|s| s & !ground == 0).collect();
    let mut rng = rng(cfg.seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            break;
        }
        let mut point = vec![0.0; k];
        let weights: Vec<f64> = (0..=users.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = weights.iter().sum();
        for w in &weights {
            let mut perm = users.clone();
            perm.shuffle(&mut rng);
            for (p, v) in point.iter_mut().zip(greedy_vertex(f, &perm)) {
                *p += w / total * v;
            }
        }
        let ok = sets.iter().all(|&s| subset_sum(&point, s) <= g[s as usize] + 1e-9 * g[s as usize].abs().max(1.0));
        if ok {
            out.push(point);
        }
    }
    Ok(out)
}

/// `y` with `x ⪯ y`, from `moves` transfers of random fractions of a
/// smaller entry onto a larger one.
pub fn spread<R: Rng>(rng: &mut R, x: &[f64], moves: usize) -> Vec<f64> {
    let mut y = x.to_vec();
    if y.len() < 2 {
        return y;
    }
    for _ in 0..moves {
        let a = rng.gen_range(0..y.len());
        let mut b = rng.gen_range(0..y.len() - 1);
        if b >= a {
            b += 1;
        }
        let (lo, hi) = if y[a] <= y[b] { (a, b) } else { (b, a) };
        let delta = rng.gen_range(0.0..1.0) * y[lo];
        y[lo] -= delta;
        y[hi] += delta;
    }
    y
}

/// Log-uniform sample in `[10^lo, 10^hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

/// Monotone submodular function built from concave functions of random
/// nonnegative weights.
pub fn random_submodular<R: Rng>(rng: &mut R, k: usize) -> SubsetFunction {
    let terms: Vec<(usize, f64, Vec<f64>)> = (0..3)
        .map(|_| {
            let kind = rng.gen_range(0..3);
            let scale = rng.gen_range(0.2..2.0);
            let w = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
            (kind, scale, w)
        })
        .collect();
    SubsetFunction::new(k, move |s| {
        terms
            .iter()
            .map(|(kind, scale, w)| {
                let x: f64 = members(s).iter().map(|&i| w[i]).sum();
                scale
                    * match kind {
                        0 => x.sqrt(),
                        1 => x.ln_1p(),
                        _ => x.min(2.5),
                    }
            })
            .sum()
    })
    .expect("size within limits")
}

pub fn random_scalar_mac<R: Rng>(rng: &mut R, k: usize) -> ScalarMac {
    let powers = (0..k).map(|_| log_uniform(rng, -1.0, 2.5)).collect();
    ScalarMac::new(powers, log_uniform(rng, -0.5, 0.5)).expect("positive parameters")
}

pub fn random_vector_mac<R: Rng>(rng: &mut R, k: usize, dim: usize) -> VectorMac {
    let powers = (0..k).map(|_| log_uniform(rng, -1.0, 1.5)).collect();
    let signatures = (0..k)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            v.iter().map(|a| a / n).collect()
        })
        .collect();
    VectorMac::new(powers, signatures, log_uniform(rng, -0.5, 0.5)).expect("unit signatures")
}

pub fn random_bc<R: Rng>(rng: &mut R, k: usize) -> BcChannel {
    let noise = (0..k).map(|_| log_uniform(rng, -1.0, 1.5)).collect();
    BcChannel::new(noise, log_uniform(rng, -1.0, 2.0)).expect("positive parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::tests::{example_one, example_two};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn filling_examples() {
        let cfg = OracleConfig::default();
        let r = progressive_fill_maxmin(&example_one(), &cfg).unwrap();
        assert!(close(&r, &[1.0, 1.5, 1.5], 1e-9));
        let r = progressive_fill_maxmin(&example_two(), &cfg).unwrap();
        assert!(close(&r, &[0.5493, 0.6496, 0.9596, 0.9596], 5e-5));
        let w = [0.3, 2.0, 0.0, 1.1];
        let r = progressive_fill_maxmin(&SubsetFunction::modular(&w).unwrap(), &cfg).unwrap();
        assert!(close(&r, &w, 1e-9));
    }

    #[test]
    fn filling_respects_limits() {
        let f = SubsetFunction::modular(&[1.0; 13]).unwrap();
        assert!(matches!(
            progressive_fill_maxmin(&f, &OracleConfig::default()),
            Err(OracleError::TooLarge { users: 13, limit: 12 })
        ));
        let bad = OracleConfig { fill_step: 0.0, ..Default::default() };
        assert!(progressive_fill_maxmin(&example_one(), &bad).is_err());
    }

    #[test]
    fn grid_polymatroid_examples() {
        let cfg = OracleConfig::default();
        let best = grid_pf_polymatroid(&example_one(), &[0.0; 3], &cfg).unwrap();
        assert!(close(&best.rates, &[1.0, 1.5, 1.5], 4.0 / 199.0));

        let f = example_two();
        let d = crate::maxmin::canonical_disagreement(&f);
        let cfg = OracleConfig { grid_resolution: Some(60), ..Default::default() };
        let best = grid_pf_polymatroid(&f, &d, &cfg).unwrap();
        let spacing = 3.2 / 59.0;
        assert!(close(&best.rates, &[0.5493, 0.6314, 0.8718, 1.0657], 2.0 * spacing));

        let one = SubsetFunction::modular(&[0.7]).unwrap();
        let best = grid_pf_polymatroid(&one, &[0.0], &cfg).unwrap();
        assert_eq!(best.rates, vec![0.7]);
    }

    #[test]
    fn grid_bc_examples() {
        let ch = BcChannel::new(vec![1.0, 1.0], 3.0).unwrap();
        let (a, _) = grid_pf_bc(&ch, &[0.0, 0.0], &OracleConfig::default()).unwrap();
        assert!((a.x[0] - 1.0 / 3.0).abs() <= 1.0 / 199.0);

        let far = grid_pf_bc(&ch, &[5.0, 0.0], &OracleConfig::default());
        assert!(matches!(far, Err(OracleError::NoFeasiblePoint { .. })));
    }

    #[test]
    fn offsets_shift_the_grid() {
        let axis = grid_axis(0.0, 1.0, 5, 0.5);
        assert_eq!(axis, vec![0.125, 0.375, 0.625, 0.875]);
        let bad = OracleConfig { grid_offset: vec![1.0], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn greedy_vertices_are_tight() {
        let f = example_two();
        let v = greedy_vertex(&f, &[2, 0, 3, 1]);
        assert!((v.iter().sum::<f64>() - f.total()).abs() < 1e-12);
        assert!(crate::setfn::in_polyhedron(&f, &v, 1e-9).unwrap());
    }

    #[test]
    fn samples_lie_on_the_face() {
        let w = [1.0, 2.0, 3.0];
        let f = SubsetFunction::modular(&w).unwrap();
        for s in sample_dominant_face(&f, 10, &OracleConfig::default()).unwrap() {
            assert!(close(&s, &w, 1e-12));
        }
        let f = example_one();
        let samples = sample_dominant_face(&f, 50, &OracleConfig { seed: 7, ..Default::default() }).unwrap();
        assert_eq!(samples.len(), 50);
        for s in samples {
            assert!((s.iter().sum::<f64>() - 4.0).abs() < 1e-9);
            assert!(crate::majorization::majorized_by(&[1.0, 1.5, 1.5], &s).unwrap());
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let cfg = OracleConfig { seed: 3, ..Default::default() };
        let a = sample_dominant_face(&example_two(), 5, &cfg).unwrap();
        let b = sample_dominant_face(&example_two(), 5, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spread_is_majorizing() {
        let mut r = rng(1, 2);
        for _ in 0..50 {
            let x: Vec<f64> = (0..5).map(|_| r.gen_range(0.0..4.0)).collect();
            let y = spread(&mut r, &x, 4);
            assert!(crate::majorization::majorized_by(&x, &y).unwrap());
        }
    }

    #[test]
    fn random_instances_are_rank_functions() {
        let mut r = rng(9, 0);
        for k in 1..6 {
            let f = random_submodular(&mut r, k);
            assert!(crate::setfn::is_submodular(&f, 1e-9).unwrap().holds_true());
            assert!(crate::setfn::is_monotone(&f, 1e-9).unwrap().holds_true());
        }
    }
}
