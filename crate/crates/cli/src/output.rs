//! Result documents and their JSON / CSV encodings.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use fairalloc::bc::{bc_sum_capacity, BcAllocation, BcChannel};
use fairalloc::mac::MacSolution;
use fairalloc::setfn::{members, SubsetFunction, ORDER_PROPERTY_LIMIT};
use serde::{Deserialize, Serialize};

use crate::spec::InputEcho;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round12).collect()
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacDetails {
    /// Nested tight sets, 1-based user labels.
    pub bottleneck_chain: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcDetails {
    /// User labels ordered by increasing noise; `x` follows this order.
    pub sorted_users: Vec<usize>,
    pub x: Vec<f64>,
    pub powers: Vec<f64>,
    pub sinr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub input: InputEcho,
    pub criterion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disagreement: Option<Vec<f64>>,
    /// Nats, in input user order.
    pub rates: Vec<f64>,
    pub rates_bits: Vec<f64>,
    pub sum_rate: f64,
    pub sum_capacity: f64,
    pub efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac: Option<MacDetails>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcDetails>,
    pub diagnostics: Diagnostics,
}

fn bits(rates: &[f64]) -> Vec<f64> {
    rates.iter().map(|r| round12(r / std::f64::consts::LN_2)).collect()
}

/// Largest `r(S) - g(S)` over all subsets, if the ground set is small
/// enough to enumerate.
fn feasibility_residual(f: &SubsetFunction, r: &[f64]) -> Option<f64> {
    if f.len() > ORDER_PROPERTY_LIMIT {
        return None;
    }
    let worst = (1..=f.ground())
        .filter(|s| s & !f.ground() == 0)
        .map(|s| members(s).iter().map(|&i| r[i]).sum::<f64>() - f.value(s))
        .fold(0.0, f64::max);
    Some(worst)
}

impl ResultDocument {
    pub fn from_mac(
        input: InputEcho,
        criterion: &str,
        sol: &MacSolution,
        rank: &SubsetFunction,
        timestamp: Option<u64>,
    ) -> Self {
        let a = &sol.allocation;
        let chain = a.bottleneck_chain.iter().map(|&m| members(m).iter().map(|i| i + 1).collect()).collect();
        Self {
            version: VERSION.into(),
            generated_at: timestamp,
            input,
            criterion: criterion.into(),
            mode: Some(sol.mode.to_string()),
            disagreement: a.disagreement.as_deref().map(round_all),
            rates: round_all(&a.rates),
            rates_bits: bits(&a.rates),
            sum_rate: round12(a.sum_rate),
            sum_capacity: round12(sol.sum_capacity),
            efficiency: round12(sol.efficiency),
            mac: Some(MacDetails { bottleneck_chain: chain }),
            bc: None,
            diagnostics: Diagnostics {
                iterations: Some(a.bottleneck_chain.len() as u64),
                residual: feasibility_residual(rank, &a.rates).map(round12),
            },
        }
    }

    pub fn from_bc(
        input: InputEcho,
        criterion: &str,
        disagreement: Option<&[f64]>,
        ch: &BcChannel,
        a: &BcAllocation,
        timestamp: Option<u64>,
    ) -> Self {
        let rates = a.rates_input_order();
        let c_sum = bc_sum_capacity(ch);
        Self {
            version: VERSION.into(),
            generated_at: timestamp,
            input,
            criterion: criterion.into(),
            mode: None,
            disagreement: disagreement.map(round_all),
            rates: round_all(&rates),
            rates_bits: bits(&rates),
            sum_rate: round12(a.sum_rate()),
            sum_capacity: round12(c_sum),
            efficiency: round12(a.sum_rate() / c_sum),
            mac: None,
            bc: Some(BcDetails {
                sorted_users: a.order.iter().map(|i| i + 1).collect(),
                x: round_all(&a.x),
                powers: round_all(&a.powers_input_order()),
                sinr: round_all(&a.sinr_input_order()),
            }),
            diagnostics: Diagnostics { iterations: Some(a.iterations as u64), residual: Some(round12(a.residual)) },
        }
    }

    pub fn write_json(&self, out: &mut impl Write) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut *out, self).map_err(|e| CliError::Solver(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }

    /// One row per user: `user,rate_nats,rate_bits`, plus `power,sinr` for
    /// broadcast channels.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Solver(e.to_string());
        let mut header = vec!["user", "rate_nats", "rate_bits"];
        if self.bc.is_some() {
            header.extend(["power", "sinr"]);
        }
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.rates.len() {
            let mut row = vec![(i + 1).to_string(), self.rates[i].to_string(), self.rates_bits[i].to_string()];
            if let Some(bc) = &self.bc {
                row.push(bc.powers[i].to_string());
                row.push(bc.sinr[i].to_string());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
