//! Corpora: fixed collections of independently generated graphs sharing one
//! generator spec, stored as
//!
//! ```text
//! <root>/<name>/meta            JSON: spec, seeds, diameters
//! <root>/<name>/graph-<k>.edges canonical edge lists, k = 0..count
//! ```

use std::fs;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::GeneratorSpec;
use super::graph::OverlayGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberMeta {
    /// Seed requested for this member, `base_seed + index`.
    pub seed: u64,
    /// Seed that produced the accepted (connected) draw.
    pub seed_used: u64,
    pub rejected_draws: u64,
    pub edges: usize,
    pub diameter: u32,
    pub min_degree: usize,
    pub max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub spec: GeneratorSpec,
    pub base_seed: u64,
    pub count: usize,
    pub max_diameter: u32,
    /// Common degree when every node of every graph has the same degree.
    pub uniform_degree: Option<usize>,
    pub members: Vec<MemberMeta>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub meta: CorpusMeta,
    pub graphs: Vec<OverlayGraph>,
}

impl Corpus {
    pub fn graphs(&self) -> &[OverlayGraph] {
        &self.graphs
    }

    pub fn max_diameter(&self) -> u32 {
        self.meta.max_diameter
    }

    pub fn node_count(&self) -> usize {
        self.meta.spec.node_count()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// TTL of 130% of the corpus diameter, rounded up.
    pub fn default_ttl(&self) -> u32 {
        ttl_rule(self.meta.max_diameter)
    }

    /// Write the corpus under `dir`. Refuses to touch an existing directory
    /// unless `overwrite` is set.
    pub fn save(&self, dir: &Path, overwrite: bool) -> Result<()> {
        if dir.exists() {
            if !overwrite {
                return Err(Error::CorpusExists(dir.to_path_buf()));
            }
            fs::remove_dir_all(dir)?;
        }
        fs::create_dir_all(dir)?;
        for (k, g) in self.graphs.iter().enumerate() {
            fs::write(dir.join(format!("graph-{k}.edges")), g.to_edge_list())?;
        }
        let mut meta = serde_json::to_string_pretty(&self.meta)?;
        meta.push('\n');
        fs::write(dir.join("meta"), meta)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: CorpusMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta"))?)?;
        let graphs = (0..meta.count)
            .map(|k| {
                let f = fs::File::open(dir.join(format!("graph-{k}.edges")))?;
                OverlayGraph::read_edge_list(BufReader::new(f))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { meta, graphs })
    }
}

/// `ceil(1.3 * diameter)`, computed in integers.
pub fn ttl_rule(diameter: u32) -> u32 {
    (13 * diameter).div_ceil(10)
}

/// Generate `count` connected graphs with seeds `base_seed..base_seed+count`.
pub fn build_corpus(spec: GeneratorSpec, count: usize, base_seed: u64) -> Result<Corpus> {
    if count == 0 {
        return Err(Error::param("corpus needs at least one graph"));
    }
    spec.validate()?;
    let built = (0..count)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed + k as u64;
            let member = || -> Result<(OverlayGraph, MemberMeta)> {
                let (g, seed_used, rejected_draws) = spec.generate_connected(seed)?;
                let degrees = g.degrees();
                let meta = MemberMeta {
                    seed,
                    seed_used,
                    rejected_draws,
                    edges: g.edge_count(),
                    diameter: g.diameter()?,
                    min_degree: degrees.iter().copied().min().unwrap_or(0),
                    max_degree: degrees.iter().copied().max().unwrap_or(0),
                };
                Ok((g, meta))
            };
            member().map_err(|e| Error::CorpusMember {
                index: k,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (graphs, members): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    let max_diameter = members.iter().map(|m| m.diameter).max().unwrap();
    let uniform_degree = members
        .iter()
        .all(|m| m.min_degree == m.max_degree && m.min_degree == members[0].min_degree)
        .then_some(members[0].min_degree);
    log::info!(
        "corpus {spec:?}: {count} graphs, max diameter {max_diameter}, {} rejected draws",
        members.iter().map(|m| m.rejected_draws).sum::<u64>()
    );
    Ok(Corpus {
        meta: CorpusMeta {
            spec,
            base_seed,
            count,
            max_diameter,
            uniform_degree,
            members,
        },
        graphs,
    })
}
