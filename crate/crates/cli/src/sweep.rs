//! Parameter sweeps behind `fairalloc sweep`.

use std::io::Write;

use clap::ValueEnum;
use fairalloc::bc::{bc_sum_capacity, pf_allocate, symmetric_capacity as bc_csym, BcChannel};
use fairalloc::mac::ScalarMac;
use fairalloc::maxmin::{symmetric_capacity, Mode};

use crate::output::round12;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

/// `points` values from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, points: usize, scale: Scale) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Input("--points must be at least 1".into()));
    }
    if !from.is_finite() || !to.is_finite() || from > to {
        return Err(CliError::Input(format!("empty range [{from}, {to}]")));
    }
    if scale == Scale::Log && from <= 0.0 {
        return Err(CliError::Input("log scale needs a positive --from".into()));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match (i, scale) {
            (0, _) => from,
            _ if i == points - 1 => to,
            (_, Scale::Linear) => from + (to - from) * step(i),
            (_, Scale::Log) => (from.ln() + (to.ln() - from.ln()) * step(i)).exp(),
        })
        .collect())
}

fn write_rows(out: &mut impl Write, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let csv_err = |e: csv::Error| CliError::Solver(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| round12(*v).to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `total_power,c_sym,c_pf,c_sum,eta_sym,eta_pf`.
pub fn bc_efficiency(noise: &[f64], powers: &[f64], out: &mut impl Write) -> Result<(), CliError> {
    let base = BcChannel::new(noise.to_vec(), 1.0).map_err(|e| CliError::Input(e.to_string()))?;
    let mut rows = Vec::with_capacity(powers.len());
    for &p in powers {
        let ch = base.with_total_power(p).map_err(|e| CliError::Input(e.to_string()))?;
        let c_sym = bc_csym(&ch);
        let c_pf = pf_allocate(&ch).map_err(|e| CliError::Solver(e.to_string()))?.sum_rate();
        let c_sum = bc_sum_capacity(&ch);
        rows.push(vec![p, c_sym, c_pf, c_sum, c_sym / c_sum, c_pf / c_sum]);
    }
    write_rows(out, &["total_power", "c_sym", "c_pf", "c_sum", "eta_sym", "eta_pf"], &rows)
}

/// Varies the power of `user` (0-based). Columns
/// `user_power,c_sym,c_sum,eta_sym`.
pub fn mac_symmetric(
    powers: &[f64],
    noise: f64,
    user: usize,
    values: &[f64],
    out: &mut impl Write,
) -> Result<(), CliError> {
    if user >= powers.len() {
        return Err(CliError::Input(format!("--user must be between 1 and {}", powers.len())));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut p = powers.to_vec();
        p[user] = v;
        let g = ScalarMac::new(p, noise).map_err(|e| CliError::Input(e.to_string()))?.rank();
        let c_sym = symmetric_capacity(&g, Mode::Ordered).map_err(|e| CliError::Solver(e.to_string()))?.c_sym;
        let c_sum = g.total();
        rows.push(vec![v, c_sym, c_sum, c_sym / c_sum]);
    }
    write_rows(out, &["user_power", "c_sym", "c_sum", "eta_sym"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = grid(1e-2, 1e2, 5, Scale::Log).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-2);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert_eq!(g[4], 1e2);
        assert_eq!(grid(0.0, 1.0, 3, Scale::Linear).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(grid(2.0, 2.0, 1, Scale::Linear).unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_ranges() {
        assert!(grid(1.0, 0.5, 3, Scale::Linear).is_err());
        assert!(grid(0.0, 1.0, 3, Scale::Log).is_err());
        assert!(grid(1.0, 2.0, 0, Scale::Linear).is_err());
    }
}
