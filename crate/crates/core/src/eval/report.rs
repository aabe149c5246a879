use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub k: usize,
    pub hr: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: String,
    /// `standard`, `degrade` or `cold-start`.
    pub protocol: String,
    /// Fraction of training positives kept (degradation protocol only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    pub seed: u64,
    /// Number of ranked test items: one per user, or one per interaction for
    /// cold-start.
    pub m_evaluated: usize,
    pub metrics: Vec<MetricRow>,
}

impl MetricsReport {
    pub fn hr(&self, k: usize) -> Option<f64> {
        self.metrics.iter().find(|r| r.k == k).map(|r| r.hr)
    }

    pub fn ndcg(&self, k: usize) -> Option<f64> {
        self.metrics.iter().find(|r| r.k == k).map(|r| r.ndcg)
    }

    /// Protocol tag as written to CSV (`degrade@0.75` for degradation rows).
    pub fn protocol_tag(&self) -> String {
        match self.fraction {
            Some(f) => format!("{}@{f}", self.protocol),
            None => self.protocol.clone(),
        }
    }
}

/// Parses `5,10,20,50`; every K must lie in `1..=100`.
pub fn parse_ks(raw: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: usize = part
            .parse()
            .map_err(|_| Error::invalid(format!("K value `{part}` is not an integer")))?;
        if !(1..=100).contains(&k) {
            return Err(Error::invalid(format!("K value {k} outside 1..=100")));
        }
        ks.push(k);
    }
    if ks.is_empty() {
        return Err(Error::invalid("no K values given"));
    }
    Ok(ks)
}

pub fn write_json(reports: &[MetricsReport], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(reports)?)?;
    Ok(())
}

/// Columns: `variant,protocol,K,HR,NDCG,m,seed`.
pub fn write_csv(reports: &[MetricsReport], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(["variant", "protocol", "K", "HR", "NDCG", "m", "seed"])
        .map_err(csv_err)?;
    for r in reports {
        for row in &r.metrics {
            w.write_record([
                r.variant.clone(),
                r.protocol_tag(),
                row.k.to_string(),
                format!("{:.6}", row.hr),
                format!("{:.6}", row.ndcg),
                r.m_evaluated.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(path, bytes)?;
    Ok(())
}
