//! Run parameters shared by every subcommand, and their JSON form.
//!
//! A config file holds the same keys as the long flags (`N` keeps its case).
//! Flags given on the command line win over the file.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use weyl_core::{Error, Result};

macro_rules! params {
    ($( $(#[$meta:meta])* $field:ident : $ty:ty ),* $(,)?; $( $(#[$bmeta:meta])* $flag:ident ),* $(,)?) => {
        #[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct Params {
            $( $(#[$meta])* #[serde(skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>, )*
            $( $(#[$bmeta])* #[arg(long)] #[serde(skip_serializing_if = "std::ops::Not::not")] pub $flag: bool, )*
        }

        impl Params {
            /// Fills every unset field from `base`.
            pub fn over(self, base: Params) -> Params {
                Params {
                    $( $field: self.$field.or(base.$field), )*
                    $( $flag: self.$flag || base.$flag, )*
                }
            }
        }
    };
}

params! {
    /// Dimension of the moment curve or surface.
    #[arg(long)] d: usize,
    /// Length of the sum: coefficients live on [lo, N].
    #[arg(long = "N")] #[serde(rename = "N")] n: i64,
    /// Moment exponent.
    #[arg(long)] p: f64,
    /// Dyadic level of the box [0, 2^-j]^d.
    #[arg(long)] j: u32,
    /// Number of factors in each half of an even moment.
    #[arg(long)] l: u32,
    /// Kernel decay exponent, or the l4 suite override.
    #[arg(long)] beta: f64,
    /// Sequence recipe: JSON or const, rademacher:<seed>, unimodular:<seed>, smallcap:<N>, file:<path>.
    #[arg(long)] seq: String,
    /// Box: full, dyadic:<j>, cube:<side> or a1,..,ad;s1,..,sd.
    #[arg(long = "box")] #[serde(rename = "box")] r#box: String,
    /// Quadrature: grid, grid:<c1,..,cd> or mc:<samples>.
    #[arg(long)] quad: String,
    #[arg(long)] seed: u64,
    /// Results CSV to append to (shell: points CSV; verify: JSON report).
    #[arg(long)] out: PathBuf,
    #[arg(long, env = "WEYL_THREADS")] threads: usize,
    #[arg(long)] max_tuples: u64,
    /// Wall-time budget; long runs refuse once it is spent.
    #[arg(long)] max_seconds: f64,
    /// JSON file of parameters.
    #[arg(long)] config: PathBuf,
    /// Write the effective parameters as JSON.
    #[arg(long)] save_config: PathBuf,
    /// Lowest index of the coefficient support.
    #[arg(long)] lo: i64,
    /// Evaluation point x1,..,xd.
    #[arg(long, allow_hyphen_values = true)] x: String,
    /// Surface: JSON or square, bilinear-d3, d4, d5, general:<d>, circle:<r>, flat:<d>.
    #[arg(long)] surface: String,
    /// Kernel mode: decay, paraboloid-bound or l4-sup.
    #[arg(long)] kind: String,
    /// Phase system for decay kernels: moment-curve or paraboloid.
    #[arg(long)] system: String,
    /// Comma-separated N or j values.
    #[arg(long)] ladder: String,
    /// Fit variable: n or j.
    #[arg(long)] over: String,
    /// Decoupling statement: a10, a11, a32, d32 or c7.
    #[arg(long)] statement: String,
    /// Monte Carlo samples.
    #[arg(long)] samples: usize,
    /// Sumset base set, comma-separated.
    #[arg(long)] sumset: String,
    /// Arc exponent for the lattice-point window count.
    #[arg(long)] gamma: f64,
    /// Normalization of the dyadic-box moment: l2, l6 or l9.
    #[arg(long)] normalize: String,
    /// JSON output for fits and verify reports.
    #[arg(long)] json: PathBuf;
    /// Count Vinogradov-system solutions for the constant sequence.
    vinogradov,
    /// Exclude the endpoints (±√N, 0) from shells.
    open,
    /// Report the dyadic pair count of the shell.
    pairs,
    /// Record wall time in result rows (otherwise 0, keeping files reproducible).
    timing,
}

impl Params {
    /// Drops the fields that only steer this invocation.
    pub fn without_plumbing(&self) -> Params {
        Params { config: None, save_config: None, ..self.clone() }
    }
}

/// A stored run: the subcommand plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<String>,
    pub params: Params,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Parse(format!("{} is not a JSON object", path.display())))?;
        let command = match obj.remove("command") {
            None => None,
            Some(serde_json::Value::String(c)) => Some(c),
            Some(other) => return Err(Error::Parse(format!("command must be a string, got {other}"))),
        };
        Ok(Self { command, params: serde_json::from_value(value)? })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut value = serde_json::to_value(&self.params)?;
        if let (Some(obj), Some(c)) = (value.as_object_mut(), &self.command) {
            obj.insert("command".into(), c.clone().into());
        }
        std::fs::write(path, serde_json::to_string_pretty(&value)? + "\n")?;
        Ok(())
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let flags = Params { n: Some(8), ..Default::default() };
        let base = Params { n: Some(4), d: Some(2), open: true, ..Default::default() };
        let merged = flags.over(base);
        assert_eq!((merged.n, merged.d, merged.open), (Some(8), Some(2), true));
    }

    #[test]
    fn config_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let cfg = RunConfig {
            command: Some("moment".into()),
            params: Params { d: Some(2), n: Some(3), p: Some(4.0), r#box: Some("full".into()), ..Default::default() },
        };
        cfg.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"N\": 3") && text.contains("\"box\": \"full\""), "{text}");
        assert_eq!(RunConfig::load(&path).unwrap(), cfg);
        std::fs::write(&path, r#"{"dimension": 2}"#).unwrap();
        assert!(RunConfig::load(&path).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("16, 32,64").unwrap(), vec![16, 32, 64]);
        assert!(parse_list::<u64>("16,x").is_err());
    }
}
