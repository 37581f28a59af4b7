//! Topic extraction: collect local topic embeddings, project them to two
//! dimensions, cluster with K-means and rank cluster members.

mod dump;
mod kmeans;
mod project;
mod rank;

pub use dump::{collect_dump, sentence_id, DumpEntry, Level, LocalEmbeddingDump, DUMP_MAGIC, DUMP_VERSION};
pub use kmeans::{kmeans, squared_distance, KMeans, DEFAULT_MAX_ITER};
pub use project::{pca_2d, projector_registry, Pca, Point2, Projector, Tsne, DEFAULT_PROJECTION};
pub use rank::{member_lines, rank_topics, ranked_lines, ClusterReport, RankedMember};
