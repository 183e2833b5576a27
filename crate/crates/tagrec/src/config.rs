//! Run configuration shared by every command, and its fingerprint.

use tagrec_core::{Blacklist, LdaConfig, ThreeLayersConfig};

use crate::error::CliError;

/// Every parameter that can influence an output file.
///
/// Paths are not part of it: inputs are identified by their content
/// fingerprints so that reruns in another directory produce the same bytes.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    /// Content fingerprint of the input dataset or split.
    pub dataset: Option<u64>,
    pub blacklist: Option<Vec<String>>,
    pub sample_users: Option<f64>,
    pub seed: Option<u64>,
    pub lda: Option<LdaConfig>,
    pub decay: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<usize>,
    pub b_min: Option<usize>,
    pub algorithms: Vec<String>,
    pub paper_mode: bool,
    pub precision: Option<&'static str>,
    pub max_lag: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            dataset: None,
            blacklist: None,
            sample_users: None,
            seed: None,
            lda: None,
            decay: None,
            beta: None,
            k: None,
            b_min: None,
            algorithms: Vec::new(),
            paper_mode: false,
            precision: None,
            max_lag: None,
        }
    }

    /// Rejects out-of-range values before any work is done.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(f) = self.sample_users {
            if !(f > 0.0 && f <= 1.0) {
                return Err(CliError::Config(format!("--sample-users must lie in (0, 1], got {f}")));
            }
        }
        if let Some(lda) = &self.lda {
            lda.validate()?;
        }
        if let Some(d) = self.decay {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Config(format!("--d must be positive, got {d}")));
            }
        }
        if let Some(beta) = self.beta {
            if !(0.0..=1.0).contains(&beta) {
                return Err(CliError::Config(format!("--beta must lie in [0, 1], got {beta}")));
            }
        }
        if self.k == Some(0) {
            return Err(CliError::Config("--k must be at least 1".into()));
        }
        if self.b_min == Some(0) {
            return Err(CliError::Config("--b-min must be at least 1".into()));
        }
        if self.max_lag == Some(0) {
            return Err(CliError::Config("--max-lag must be at least 1".into()));
        }
        for name in &self.algorithms {
            if !crate::algorithms::ALGORITHMS.contains(&name.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown algorithm '{name}', expected one of {}",
                    crate::algorithms::ALGORITHMS.join(",")
                )));
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs of every set field, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.clone())];
        if let Some(fp) = self.dataset {
            out.push(("dataset", hex(fp)));
        }
        if let Some(list) = &self.blacklist {
            out.push(("blacklist", list.join(",")));
        }
        if let Some(f) = self.sample_users {
            out.push(("sample_users", f.to_string()));
        }
        if let Some(seed) = self.seed {
            out.push(("seed", seed.to_string()));
        }
        if let Some(lda) = &self.lda {
            out.push(("topics", lda.num_topics.to_string()));
            out.push(("alpha", lda.alpha.to_string()));
            out.push(("eta", lda.eta.to_string()));
            out.push(("iterations", lda.iterations.to_string()));
            out.push(("lda_seed", lda.seed.to_string()));
            out.push(("fold_in_sweeps", lda.fold_in_sweeps.to_string()));
        }
        if let Some(d) = self.decay {
            out.push(("d", d.to_string()));
        }
        if let Some(beta) = self.beta {
            out.push(("beta", beta.to_string()));
        }
        if let Some(k) = self.k {
            out.push(("k", k.to_string()));
        }
        if let Some(b) = self.b_min {
            out.push(("b_min", b.to_string()));
        }
        if !self.algorithms.is_empty() {
            out.push(("algorithms", self.algorithms.join(",")));
        }
        out.push(("paper_mode", self.paper_mode.to_string()));
        if let Some(p) = self.precision {
            out.push(("precision", p.to_string()));
        }
        if let Some(lag) = self.max_lag {
            out.push(("max_lag", lag.to_string()));
        }
        out
    }

    pub fn fingerprint(&self) -> u64 {
        let lines: Vec<String> = self.entries().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        tagrec_core::digest(lines.iter().map(|l| l.as_bytes()))
    }

    /// Header lines embedding the configuration and its fingerprint.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut out = vec![("config".to_string(), hex(self.fingerprint()))];
        out.extend(self.entries().into_iter().map(|(k, v)| (format!("cfg.{k}"), v)));
        out
    }

    pub fn three_layers(&self) -> ThreeLayersConfig {
        ThreeLayersConfig {
            beta: self.beta.unwrap_or(0.5),
            decay: self.decay.unwrap_or(0.5),
            topic_threshold: None,
        }
    }
}

pub fn hex(value: u64) -> String {
    format!("{value:016x}")
}

pub fn parse_hex(text: &str) -> Option<u64> {
    u64::from_str_radix(text.trim(), 16).ok()
}

/// The default blacklist, or the tags listed one per line in `text`.
pub fn blacklist_from(text: Option<&str>) -> Blacklist {
    match text {
        None => Blacklist::default(),
        Some(text) => Blacklist::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_tracks_every_field() {
        let mut a = RunConfig::new("eval");
        a.beta = Some(0.5);
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.beta = Some(0.6);
        assert_ne!(a.fingerprint(), b.fingerprint());
        b.beta = Some(0.5);
        b.paper_mode = true;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new("eval");
        c.algorithms = vec!["nope".into()];
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        c.algorithms = vec!["3lt-tag".into()];
        c.beta = Some(1.5);
        assert!(c.validate().is_err());
        c.beta = Some(1.0);
        assert!(c.validate().is_ok());
    }
}
