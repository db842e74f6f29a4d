//! Channel descriptions from flags and JSON spec files.

use std::path::Path;

use fairalloc::bc::BcChannel;
use fairalloc::mac::{MacChannel, ScalarMac, VectorMac};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    MacScalar,
    MacVector,
    Bc,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NoiseField {
    One(f64),
    Many(Vec<f64>),
}

/// Wire format of `--spec` files. Units are linear.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: SpecKind,
    #[serde(default)]
    pub powers: Option<Vec<f64>>,
    #[serde(default)]
    pub noise: Option<NoiseField>,
    #[serde(default)]
    pub total_power: Option<f64>,
    /// One unit vector per user.
    #[serde(default)]
    pub signatures: Option<Vec<Vec<f64>>>,
}

impl ChannelSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read spec {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid spec {}: {e}", path.display())))
    }
}

/// Reads an `L x K` whitespace-separated matrix whose column `i` is user
/// `i`'s signature. Blank lines and lines starting with `#` are skipped.
pub fn read_signature_file(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read signatures {}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(n, line)| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| CliError::Input(format!("signatures row {}: bad number {tok:?}", n + 1)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let k = rows.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(CliError::Input("signature matrix is empty".into()));
    }
    if let Some(n) = rows.iter().position(|r| r.len() != k) {
        return Err(CliError::Input(format!("signatures row {} has {} columns, expected {k}", n + 1, rows[n].len())));
    }
    Ok((0..k).map(|i| rows.iter().map(|r| r[i]).collect()).collect())
}

/// Echo of the resolved channel in result documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEcho {
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    pub noise: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signatures: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub enum Channel {
    Mac(MacChannel),
    Bc(BcChannel),
}

/// Channel values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct ChannelFlags {
    pub powers: Option<Vec<f64>>,
    pub noise: Option<Vec<f64>>,
    pub total_power: Option<f64>,
    pub signatures: Option<Vec<Vec<f64>>>,
}

fn noise_list(n: NoiseField) -> Vec<f64> {
    match n {
        NoiseField::One(v) => vec![v],
        NoiseField::Many(v) => v,
    }
}

/// Merges flags over the spec file (flags win) and builds the channel.
pub fn resolve(bc: bool, flags: ChannelFlags, spec: Option<ChannelSpec>) -> Result<(Channel, InputEcho), CliError> {
    let spec_kind = spec.as_ref().map(|s| s.kind);
    match (bc, spec_kind) {
        (true, Some(SpecKind::MacScalar | SpecKind::MacVector)) => {
            return Err(CliError::Input("spec describes a MAC but `solve bc` was requested".into()))
        }
        (false, Some(SpecKind::Bc)) => {
            return Err(CliError::Input("spec describes a BC but `solve mac` was requested".into()))
        }
        _ => {}
    }
    let (s_powers, s_noise, s_total, s_sigs) = match spec {
        Some(s) => (s.powers, s.noise.map(noise_list), s.total_power, s.signatures),
        None => (None, None, None, None),
    };
    let powers = flags.powers.or(s_powers);
    let noise = flags.noise.or(s_noise).ok_or_else(|| CliError::Input("--noise is required".into()))?;
    let total_power = flags.total_power.or(s_total);
    let signatures = flags.signatures.or(s_sigs);

    if bc {
        if powers.is_some() || signatures.is_some() {
            return Err(CliError::Input("broadcast channels take --noise and --total-power only".into()));
        }
        let p = total_power.ok_or_else(|| CliError::Input("--total-power is required for bc".into()))?;
        let ch = BcChannel::new(noise.clone(), p).map_err(|e| CliError::Input(e.to_string()))?;
        let echo = InputEcho { kind: SpecKind::Bc, powers: None, noise, total_power: Some(p), signatures: None };
        return Ok((Channel::Bc(ch), echo));
    }

    if total_power.is_some() {
        return Err(CliError::Input("--total-power applies to bc only".into()));
    }
    let powers = powers.ok_or_else(|| CliError::Input("--powers is required for mac".into()))?;
    let [n] = noise[..] else {
        return Err(CliError::Input(format!("mac takes a single noise power, got {}", noise.len())));
    };
    let invalid = |e: fairalloc::mac::MacError| CliError::Input(e.to_string());
    let (ch, kind) = match &signatures {
        Some(s) => (MacChannel::Vector(VectorMac::new(powers.clone(), s.clone(), n).map_err(invalid)?), SpecKind::MacVector),
        None if spec_kind == Some(SpecKind::MacVector) => {
            return Err(CliError::Input("mac_vector spec needs signatures".into()))
        }
        None => (MacChannel::Scalar(ScalarMac::new(powers.clone(), n).map_err(invalid)?), SpecKind::MacScalar),
    };
    let echo = InputEcho { kind, powers: Some(powers), noise: vec![n], total_power: None, signatures };
    Ok((Channel::Mac(ch), echo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_spec() {
        let spec: ChannelSpec = serde_json::from_str(r#"{"kind":"mac_scalar","powers":[1,2],"noise":3}"#).unwrap();
        let flags = ChannelFlags { noise: Some(vec![1.0]), ..Default::default() };
        let (_, echo) = resolve(false, flags, Some(spec)).unwrap();
        assert_eq!(echo.noise, vec![1.0]);
        assert_eq!(echo.powers, Some(vec![1.0, 2.0]));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let spec: ChannelSpec = serde_json::from_str(r#"{"kind":"bc","noise":[1,2],"total_power":3}"#).unwrap();
        assert!(resolve(false, ChannelFlags::default(), Some(spec)).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"kind":"bc","noise":[1],"bogus":1}"#).is_err());
        assert!(serde_json::from_str::<ChannelSpec>(r#"{"kind":"tdma","noise":[1]}"#).is_err());
    }

    #[test]
    fn mac_needs_one_noise_value() {
        let flags = ChannelFlags { powers: Some(vec![1.0]), noise: Some(vec![1.0, 2.0]), ..Default::default() };
        assert!(resolve(false, flags, None).is_err());
    }
}
