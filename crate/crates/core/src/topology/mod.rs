//! Overlay topologies: the graph type, the four random generators, degree
//! distributions and on-disk corpora.

mod corpus;
mod degree;
mod generators;
mod graph;

pub use corpus::{build_corpus, ttl_rule, Corpus, CorpusMeta, MemberMeta};
pub use degree::{DegreeDistribution, TAIL_CUTOFF};
pub use generators::{
    generate_ba, generate_er, generate_kregular, generate_ws, GeneratorSpec,
    KREGULAR_MAX_RESTARTS, MAX_CONNECT_ATTEMPTS,
};
pub use graph::{NodeId, OverlayGraph};

/// `p_i`: fraction of nodes with degree `i`.
pub fn empirical_degree_distribution(g: &OverlayGraph) -> DegreeDistribution {
    DegreeDistribution::empirical(g)
}
