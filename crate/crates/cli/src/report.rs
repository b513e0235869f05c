use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dip_core::engine::{Acceptance, RunReport};

/// Exact probability as a fraction and its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub accepting: String,
    pub total: String,
    pub value: f64,
}

impl From<Acceptance> for ExactValue {
    fn from(a: Acceptance) -> Self {
        ExactValue { accepting: a.accepting.to_string(), total: a.total.to_string(), value: a.value() }
    }
}

/// One measured protocol run. Everything except `wallclock_ms` is a
/// function of the flags and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub protocol: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub n: usize,
    pub seed: u64,
    pub trials: u64,
    pub accepted: u64,
    pub accept_all_fraction: f64,
    pub three_sigma: f64,
    pub sigma_bits: usize,
    pub gamma_bits: usize,
    pub rho_bits: usize,
    pub interactions: usize,
    pub soundness_bound: Option<f64>,
    pub exact: Option<ExactValue>,
    pub wallclock_ms: f64,
}

impl Report {
    pub fn new(command: &str, protocol: &str, n: usize, params: BTreeMap<String, serde_json::Value>) -> Self {
        Report {
            command: command.into(),
            protocol: protocol.into(),
            params,
            n,
            seed: 0,
            trials: 0,
            accepted: 0,
            accept_all_fraction: 0.0,
            three_sigma: 0.0,
            sigma_bits: 0,
            gamma_bits: 0,
            rho_bits: 0,
            interactions: 0,
            soundness_bound: None,
            exact: None,
            wallclock_ms: 0.0,
        }
    }

    pub fn absorb(&mut self, r: &RunReport, interactions: usize) {
        self.seed = r.seed;
        self.trials = r.trials;
        self.accepted = r.accepted;
        self.accept_all_fraction = r.accept_all_fraction;
        self.three_sigma = r.three_sigma();
        self.sigma_bits = r.max_cert_bits;
        self.gamma_bits = r.max_msg_bits;
        self.rho_bits = r.random_bits_per_node_per_phase;
        self.interactions = interactions;
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    command: &'a str,
    protocol: &'a str,
    params: String,
    n: usize,
    seed: u64,
    trials: u64,
    accepted: u64,
    accept_all_fraction: f64,
    three_sigma: f64,
    sigma_bits: usize,
    gamma_bits: usize,
    rho_bits: usize,
    interactions: usize,
    soundness_bound: Option<f64>,
    exact_value: Option<f64>,
    wallclock_ms: f64,
}

pub fn to_json(reports: &[Report]) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(reports)?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(reports: &[Report]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(CsvRow {
            command: &r.command,
            protocol: &r.protocol,
            params: serde_json::to_string(&r.params)?,
            n: r.n,
            seed: r.seed,
            trials: r.trials,
            accepted: r.accepted,
            accept_all_fraction: r.accept_all_fraction,
            three_sigma: r.three_sigma,
            sigma_bits: r.sigma_bits,
            gamma_bits: r.gamma_bits,
            rho_bits: r.rho_bits,
            interactions: r.interactions,
            soundness_bound: r.soundness_bound,
            exact_value: r.exact.as_ref().map(|e| e.value),
            wallclock_ms: r.wallclock_ms,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut p = BTreeMap::new();
        p.insert("alpha".to_string(), serde_json::json!(2));
        let mut r = Report::new("triangle", "triangle-shared", 5, p);
        r.exact = Some(Acceptance { accepting: 2, total: 37 }.into());
        r.soundness_bound = Some(0.1);
        let text = to_json(std::slice::from_ref(&r)).unwrap();
        let back: Vec<Report> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![r.clone()]);
        assert_eq!(to_csv(&[r]).unwrap().lines().count(), 2);
    }
}
