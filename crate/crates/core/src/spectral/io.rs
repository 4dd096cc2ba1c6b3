//! Spectrum export: `[{"k", "multiplicity", "modes": [[{"edge", "A", "B"}]]}]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Spectrum, SpectrumEntry};
use crate::error::{Error, Result};
use crate::graph::MetricNetwork;
use crate::NetworkFunction;
use crate::EdgeProfile;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Coefficient {
    edge: usize,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRecord {
    k: f64,
    multiplicity: usize,
    modes: Vec<Vec<Coefficient>>,
}

impl Spectrum {
    pub fn to_json(&self) -> String {
        let records: Vec<EntryRecord> = self
            .entries
            .iter()
            .map(|e| EntryRecord {
                k: e.k,
                multiplicity: e.multiplicity(),
                modes: e
                    .modes
                    .iter()
                    .map(|m| {
                        m.edges()
                            .iter()
                            .map(|f| match f.profile {
                                EdgeProfile::Sinusoid { a, b, .. } => Coefficient { edge: f.edge_id, a, b },
                                EdgeProfile::Samples(_) => unreachable!("spectral modes are sinusoids"),
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("spectrum serializes")
    }

    /// Reads a spectrum written for `net`. Edge ids must cover the network's
    /// edges; `k_max` becomes the largest stored wavenumber.
    pub fn from_json(text: &str, net: &MetricNetwork) -> Result<Self> {
        let records: Vec<EntryRecord> = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(records.len());
        for r in records {
            if !(r.k.is_finite() && r.k >= 0.0) {
                return Err(Error::Parse(format!("bad wavenumber {}", r.k)));
            }
            if r.multiplicity != r.modes.len() || r.modes.is_empty() {
                return Err(Error::Parse(format!(
                    "entry k = {}: multiplicity {} but {} modes",
                    r.k,
                    r.multiplicity,
                    r.modes.len()
                )));
            }
            let mut modes = Vec::with_capacity(r.modes.len());
            for mode in r.modes {
                if mode.len() != net.edge_count() {
                    return Err(Error::Parse(format!(
                        "entry k = {}: mode has {} edges, network has {}",
                        r.k,
                        mode.len(),
                        net.edge_count()
                    )));
                }
                let mut coeffs = vec![None; net.edge_count()];
                for c in mode {
                    let i = net
                        .edge_position(c.edge)
                        .ok_or_else(|| Error::Parse(format!("unknown edge {}", c.edge)))?;
                    coeffs[i] = Some((c.a, c.b));
                }
                let k = r.k;
                let mut missing = false;
                let f = NetworkFunction::from_fn(net, |i, _| {
                    let (a, b) = coeffs[i].unwrap_or_else(|| {
                        missing = true;
                        (0.0, 0.0)
                    });
                    EdgeProfile::Sinusoid { a, b, k }
                });
                if missing {
                    return Err(Error::Parse(format!("entry k = {k}: duplicate edge in a mode")));
                }
                modes.push(f);
            }
            entries.push(SpectrumEntry { k: r.k, modes });
        }
        if entries.windows(2).any(|w| w[0].k >= w[1].k) {
            return Err(Error::Parse("spectrum entries must be strictly ascending in k".into()));
        }
        let includes_zero_mode = entries.first().is_some_and(|e| e.k == 0.0);
        let k_max = entries.last().map_or(0.0, |e| e.k);
        Ok(Self {
            entries,
            includes_zero_mode,
            k_max,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, net: &MetricNetwork) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, net)
    }
}
