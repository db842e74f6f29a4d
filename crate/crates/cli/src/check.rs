//! Property suites behind `fairalloc check`.

use std::io::Write;

use clap::ValueEnum;
use fairalloc::bc::{
    self, bc_sum_capacity, g_gamma, g_gamma_inverse, pf_allocate, pf_residual, phi_total_power, schur_explore_pf,
    symmetric_allocate, symmetric_capacity as bc_csym, theta, BcChannel, ExploreStatus,
};
use fairalloc::mac::ScalarMac;
use fairalloc::majorization::majorized_by_tol;
use fairalloc::maxmin::{
    canonical_disagreement, maxmin_allocate, nash_bargaining, nbs_canonical_gensym, symmetric_capacity, CapacityChain,
    Mode,
};
use fairalloc::oracle::{
    grid_pf_polymatroid, progressive_fill_maxmin, random_bc, random_scalar_mac, random_submodular, rng,
    sample_dominant_face, spread, OracleConfig,
};
use fairalloc::setfn::{has_order_property, in_polyhedron, maxmin_certificate, SubsetFunction, DEFAULT_TOL};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(name = "paper-examples")]
    GoldenExamples,
    MacMajorization,
    MacOrdering,
    MacSchur,
    OracleEquivalence,
    Tradeoff,
    BcMachinery,
    BcSchur,
    BcEfficiency,
    /// Exploratory: reports without failing.
    #[value(name = "bc-conjecture")]
    BcExploratory,
}

impl Suite {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_owned()
    }

    fn exploratory(self) -> bool {
        self == Suite::BcExploratory
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyTally {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub suite: String,
    pub seed: u64,
    pub trials: u64,
    pub exploratory: bool,
    pub passed: bool,
    pub properties: Vec<PropertyTally>,
}

impl CheckReport {
    pub fn write_json(&self, out: &mut impl Write) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut *out, self).map_err(|e| CliError::Solver(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Solver(e.to_string());
        w.write_record(["property", "passed", "failed"]).map_err(csv_err)?;
        for p in &self.properties {
            w.write_record([p.name.clone(), p.passed.to_string(), p.failed.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pass/fail counts for the properties of one suite, in first-use order.
#[derive(Default)]
struct Tally {
    props: Vec<PropertyTally>,
}

impl Tally {
    fn record(&mut self, name: &str, ok: bool, context: impl FnOnce() -> String) {
        let idx = match self.props.iter().position(|p| p.name == name) {
            Some(i) => i,
            None => {
                self.props.push(PropertyTally { name: name.into(), passed: 0, failed: 0, first_failure: None });
                self.props.len() - 1
            }
        };
        let p = &mut self.props[idx];
        if ok {
            p.passed += 1;
        } else {
            p.failed += 1;
            p.first_failure.get_or_insert_with(context);
        }
    }
}

type SuiteResult = Result<(), CliError>;

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn run(suite: Suite, seed: u64, trials: u64, timestamp: Option<u64>) -> Result<CheckReport, CliError> {
    let mut t = Tally::default();
    match suite {
        Suite::GoldenExamples => golden_examples(&mut t)?,
        Suite::MacMajorization => mac_majorization(&mut t, seed, trials)?,
        Suite::MacOrdering => mac_ordering(&mut t, seed, trials)?,
        Suite::MacSchur => mac_schur(&mut t, seed, trials)?,
        Suite::OracleEquivalence => oracle_equivalence(&mut t, seed, trials)?,
        Suite::Tradeoff => tradeoff(&mut t, seed, trials)?,
        Suite::BcMachinery => bc_machinery(&mut t, seed, trials)?,
        Suite::BcSchur => bc_schur(&mut t, seed, trials)?,
        Suite::BcEfficiency => bc_efficiency(&mut t, seed, trials)?,
        Suite::BcExploratory => bc_exploratory(&mut t, seed, trials)?,
    }
    let passed = suite.exploratory() || t.props.iter().all(|p| p.failed == 0);
    Ok(CheckReport {
        version: crate::output::VERSION.into(),
        generated_at: timestamp,
        suite: suite.name(),
        seed,
        trials,
        exploratory: suite.exploratory(),
        passed,
        properties: t.props,
    })
}

fn example_one() -> SubsetFunction {
    SubsetFunction::from_table(3, vec![0.0, 1.0, 2.0, 3.0, 3.0, 4.0, 3.0, 4.0]).expect("valid table")
}

fn golden_examples(t: &mut Tally) -> SuiteResult {
    let f = example_one();
    let mm = maxmin_allocate(&f, Mode::Exhaustive).map_err(solver)?;
    t.record("example 1 max-min point", close(&mm.rates, &[1.0, 1.5, 1.5], 1e-12), || format!("{:?}", mm.rates));
    let d = canonical_disagreement(&f);
    t.record("example 1 canonical disagreement", close(&d, &[1.0, 0.0, 1.0], 1e-12), || format!("{d:?}"));

    let ch = ScalarMac::new(vec![2.0, 8.0, 200.0, 300.0], 1.0).map_err(solver)?;
    let g = ch.rank();
    let mm = maxmin_allocate(&g, Mode::Ordered).map_err(solver)?;
    t.record("example 2 max-min point", close(&mm.rates, &[0.5493, 0.6496, 0.9596, 0.9596], 5e-5), || {
        format!("{:?}", mm.rates)
    });
    let d = canonical_disagreement(&g);
    t.record("example 2 canonical disagreement", close(&d, &[0.0020, 0.0079, 0.2483, 0.4423], 5e-5), || {
        format!("{d:?}")
    });
    let nbs = nbs_canonical_gensym(&ch.generalized_symmetric()).map_err(solver)?;
    t.record("example 2 canonical nash bargaining", close(&nbs.rates, &[0.5493, 0.6314, 0.8718, 1.0657], 5e-5), || {
        format!("{:?}", nbs.rates)
    });
    let sym = symmetric_capacity(&g, Mode::Ordered).map_err(solver)?;
    t.record("example 2 symmetric capacity", (sym.c_sym - 2.1972).abs() <= 5e-5, || format!("{}", sym.c_sym));

    let two = BcChannel::new(vec![1.0, 1.0], 3.0).map_err(solver)?;
    let s = symmetric_allocate(&two);
    t.record("bc equal-noise symmetric point", (s.sinr[0] - 1.0).abs() <= 1e-9 && close(&s.powers, &[1.0, 2.0], 1e-9), || {
        format!("{:?}", s.powers)
    });
    let pf = pf_allocate(&two).map_err(solver)?;
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    t.record("bc equal-noise proportional-fair point", close(&pf.rates, &[half_ln2; 2], 1e-9), || {
        format!("{:?}", pf.rates)
    });
    Ok(())
}

fn instance_rng(seed: u64, trial: u64) -> impl Rng {
    rng(seed, trial)
}

fn mac_majorization(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=5);
        let f = random_submodular(&mut r, k);
        let mm = maxmin_allocate(&f, Mode::Exhaustive).map_err(solver)?;
        let cfg = OracleConfig { seed: seed.wrapping_add(trial), ..Default::default() };
        let samples = sample_dominant_face(&f, 50, &cfg).map_err(solver)?;
        let on_face = (mm.sum_rate - f.total()).abs() <= 1e-9 && in_polyhedron(&f, &mm.rates, 1e-9).map_err(solver)?;
        t.record("max-min point on the dominant face", on_face, || format!("trial {trial}"));
        let log = |v: &[f64]| v.iter().map(|x| x.ln()).sum::<f64>();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        for s in &samples {
            t.record("majorized by every face sample", majorized_by_tol(&mm.rates, s, 1e-9).unwrap_or(false), || {
                format!("trial {trial}: {s:?}")
            });
            t.record("maximal sum of logs", log(s) <= log(&mm.rates) + 1e-9, || format!("trial {trial}"));
            t.record("minimal euclidean norm", norm(s) >= norm(&mm.rates) - 1e-9, || format!("trial {trial}"));
        }
        let cert = maxmin_certificate(&f, &mm.rates, 1e-9).map_err(solver)?;
        t.record("bottleneck certificate", cert.holds_true(), || format!("trial {trial}: {cert:?}"));
    }
    Ok(())
}

fn mac_ordering(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=8);
        let ch = random_scalar_mac(&mut r, k);
        let g = ch.rank();
        t.record("scalar rank function has the order property", has_order_property(&g, DEFAULT_TOL).map_err(solver)?.holds_true(), || {
            format!("trial {trial}")
        });
        let a = maxmin_allocate(&g, Mode::Exhaustive).map_err(solver)?;
        let b = maxmin_allocate(&g, Mode::Ordered).map_err(solver)?;
        t.record("exhaustive and ordered modes agree", close(&a.rates, &b.rates, 1e-9), || format!("trial {trial}"));
        let p = ch.powers();
        let sorted = (0..k).all(|i| (0..k).all(|j| p[i] > p[j] || b.rates[i] <= b.rates[j] + 1e-9));
        t.record("rates follow the power order", sorted, || format!("trial {trial}"));
    }
    Ok(())
}

fn mac_schur(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    let tol = 1e-8;
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=6);
        let ch = random_scalar_mac(&mut r, k);
        let p2 = spread(&mut r, ch.powers(), 3);
        let ch2 = ScalarMac::new(p2, ch.noise()).map_err(solver)?;
        let (g, g2) = (ch.rank(), ch2.rank());
        let c1 = symmetric_capacity(&g, Mode::Ordered).map_err(solver)?.c_sym;
        let c2 = symmetric_capacity(&g2, Mode::Ordered).map_err(solver)?.c_sym;
        t.record("symmetric capacity schur-concave in powers", c1 >= c2 - tol, || format!("trial {trial}: {c1} < {c2}"));
        let r1 = maxmin_allocate(&g, Mode::Ordered).map_err(solver)?;
        let r2 = maxmin_allocate(&g2, Mode::Ordered).map_err(solver)?;
        t.record("max-min rates inherit the power majorization", majorized_by_tol(&r1.rates, &r2.rates, tol).unwrap_or(false), || {
            format!("trial {trial}")
        });
        t.record("equal sum rates", (r1.sum_rate - r2.sum_rate).abs() <= tol, || format!("trial {trial}"));
    }
    Ok(())
}

fn oracle_equivalence(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    let cfg = OracleConfig::default();
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=6);
        let ch = random_scalar_mac(&mut r, k);
        let g = ch.rank();
        let fill = progressive_fill_maxmin(&g, &cfg).map_err(solver)?;
        for mode in [Mode::Exhaustive, Mode::Ordered] {
            let mm = maxmin_allocate(&g, mode).map_err(solver)?;
            t.record("progressive filling agrees with max-min", close(&mm.rates, &fill, 1e-6), || {
                format!("trial {trial} ({mode})")
            });
        }
        let fast = nbs_canonical_gensym(&ch.generalized_symmetric()).map_err(solver)?;
        let generic = nash_bargaining(&g, &canonical_disagreement(&g), Mode::Exhaustive).map_err(solver)?;
        t.record("closed-form and generic nash bargaining agree", close(&fast.rates, &generic.rates, 1e-9), || {
            format!("trial {trial}")
        });

        let k3 = r.gen_range(1..=3);
        let f = random_submodular(&mut r, k3);
        let mm = maxmin_allocate(&f, Mode::Exhaustive).map_err(solver)?;
        let grid = grid_pf_polymatroid(&f, &vec![0.0; f.width()], &OracleConfig { grid_resolution: Some(60), ..cfg.clone() });
        let best: f64 = mm.rates.iter().map(|v| v.ln()).sum();
        match grid {
            Ok(grid) => t.record("grid search never beats the max-min point", grid.objective <= best + 1e-9, || {
                format!("trial {trial}: {} > {best}", grid.objective)
            }),
            Err(e) => t.record("grid search never beats the max-min point", false, || format!("trial {trial}: {e}")),
        }
    }
    Ok(())
}

fn mac_chain(f: &SubsetFunction) -> Result<CapacityChain, CliError> {
    let mm = maxmin_allocate(f, Mode::Exhaustive).map_err(solver)?;
    let sym = symmetric_capacity(f, Mode::Exhaustive).map_err(solver)?;
    Ok(CapacityChain { c_sym: sym.c_sym, c_pf: mm.sum_rate, c_mm: mm.sum_rate, c_sum: f.total(), pf_rates: mm.rates })
}

fn bc_chain(ch: &BcChannel) -> Result<CapacityChain, CliError> {
    let pf = pf_allocate(ch).map_err(solver)?;
    let c_sym = bc_csym(ch);
    Ok(CapacityChain { c_sym, c_pf: pf.sum_rate(), c_mm: c_sym, c_sum: bc_sum_capacity(ch), pf_rates: pf.rates })
}

fn tradeoff(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(1..=6);
        let chain = mac_chain(&random_scalar_mac(&mut r, k).rank())?;
        let v = chain.violations(1e-9);
        t.record("mac capacity chain", v.is_empty(), || format!("trial {trial}: {v:?}"));
        let chain = mac_chain(&random_submodular(&mut r, k))?;
        let v = chain.violations(1e-9);
        t.record("polymatroid capacity chain", v.is_empty(), || format!("trial {trial}: {v:?}"));
        let chain = bc_chain(&random_bc(&mut r, k))?;
        let v = chain.violations(1e-9);
        t.record("bc capacity chain", v.is_empty(), || format!("trial {trial}: {v:?}"));
    }
    Ok(())
}

#[allow(clippy::needless_range_loop)]
fn bc_machinery(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let gamma = r.gen_range(1e-3..=10.0);
        let k = r.gen_range(1..=10);
        let (a, b) = (g_gamma(gamma, k), g_gamma_inverse(gamma, k));
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let v: f64 = (0..k).map(|m| a[i][m] * b[m][j]).sum();
                let scale = (0..k).map(|m| (a[i][m] * b[m][j]).abs()).sum::<f64>().max(1.0);
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs() / scale);
            }
        }
        t.record("inverse matrix times matrix is the identity", worst <= 1e-10, || format!("trial {trial}: {worst:e}"));
        let th = theta(gamma, k);
        let cols_ok = (0..k).all(|j| {
            let col: f64 = (0..k).map(|i| b[i][j]).sum();
            (col - th[j]).abs() <= 1e-10 * col.max(1.0)
        });
        t.record("theta equals column sums", cols_ok, || format!("trial {trial}"));
        t.record("theta nonincreasing", th.windows(2).all(|w| w[0] >= w[1]), || format!("trial {trial}"));

        let kb = r.gen_range(2..=6);
        let ch = random_bc(&mut r, kb);
        let sym = symmetric_allocate(&ch);
        t.record("symmetric powers nondecreasing", sym.powers.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), || {
            format!("trial {trial}: {:?}", sym.powers)
        });
        let pf = pf_allocate(&ch).map_err(solver)?;
        t.record("pf powers increasing", pf.powers.windows(2).all(|w| w[0] < w[1]), || {
            format!("trial {trial}: {:?}", pf.powers)
        });
        let ordered = pf.rates.windows(2).all(|w| w[0] >= w[1] - 1e-9) && pf.sinr.windows(2).all(|w| w[0] >= w[1] - 1e-9);
        t.record("pf rates and sinr nonincreasing", ordered, || format!("trial {trial}"));
        let res = pf_residual(&ch, &pf);
        t.record("pf stationarity residual below 1e-8", res < 1e-8, || format!("trial {trial}: {res:e}"));
    }
    Ok(())
}

fn bc_schur(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    let tol = 1e-9;
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=6);
        let ch = random_bc(&mut r, k);
        let n2 = spread(&mut r, ch.noise(), 3);
        if n2.iter().all(|&n| n > 1e-9) {
            let ch2 = BcChannel::new(n2, ch.total_power()).map_err(solver)?;
            let (c1, c2) = (bc_csym(&ch), bc_csym(&ch2));
            t.record("symmetric capacity schur-convex in noise", c1 <= c2 + tol * c2.max(1.0), || {
                format!("trial {trial}: {c1} > {c2}")
            });
            let gamma = r.gen_range(0.01..5.0);
            let (p1, p2) = (phi_total_power(ch.noise(), gamma), phi_total_power(ch2.noise(), gamma));
            t.record("required power schur-concave in noise", p1 >= p2 - tol * p1.max(1.0), || {
                format!("trial {trial}: {p1} < {p2}")
            });
        }
        let (a, b) = (ch.total_power(), ch.total_power() * 10f64.powf(r.gen_range(0.1..2.0)));
        let c = |p: f64| ch.with_total_power(p).map(|x| bc_csym(&x)).map_err(solver);
        let (ca, cb, cm) = (c(a)?, c(b)?, c(0.5 * (a + b))?);
        t.record("symmetric capacity midpoint-concave in total power", cm >= 0.5 * (ca + cb) - tol * cm.max(1.0), || {
            format!("trial {trial}")
        });
    }
    Ok(())
}

fn bc_efficiency(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    let low = BcChannel::new(vec![1.0, 10.0, 100.0], 1e-4).map_err(solver)?;
    let eta = bc::efficiency(&pf_allocate(&low).map_err(solver)?, &low);
    let limit = (1.0 + 0.1 + 0.01) / 3.0;
    t.record("small-power efficiency limit", (eta - limit).abs() <= 0.05 * limit, || format!("{eta} vs {limit}"));
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let k = r.gen_range(2..=6);
        let ch = random_bc(&mut r, k);
        for p in [1e-4, 1e-2, 1.0, 1e2, 1e4] {
            let c = ch.with_total_power(p).map_err(solver)?;
            let pf = pf_allocate(&c).map_err(solver)?;
            let eta = bc::efficiency(&pf, &c);
            t.record("pf efficiency above 1/K", eta > 1.0 / k as f64, || format!("trial {trial}, P_T {p}: {eta}"));
            let eta_sym = symmetric_allocate(&c).sum_rate() / bc_sum_capacity(&c);
            t.record("symmetric efficiency at most 1", eta_sym <= 1.0 + 1e-12, || format!("trial {trial}: {eta_sym}"));
        }
    }
    Ok(())
}

fn bc_exploratory(t: &mut Tally, seed: u64, trials: u64) -> SuiteResult {
    let mut pairs = Vec::new();
    for trial in 0..trials {
        let mut r = instance_rng(seed, trial);
        let kb = r.gen_range(2..=5);
        let ch = random_bc(&mut r, kb);
        let n2 = spread(&mut r, ch.noise(), 3);
        if n2.iter().all(|&n| n > 1e-9) {
            pairs.push((ch.clone(), BcChannel::new(n2, ch.total_power()).map_err(solver)?));
        }
    }
    let report = schur_explore_pf(&pairs, 1e-9);
    for rec in &report.records {
        t.record("pf capacity ordered by noise majorization", rec.status == ExploreStatus::Holds, || {
            format!("N = {:?}, N' = {:?}: {:?} vs {:?}", rec.noise, rec.noise_spread, rec.c_pf, rec.c_pf_spread)
        });
    }
    Ok(())
}
