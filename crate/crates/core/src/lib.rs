//! Similarity decomposition of if-then interaction embeddings and the
//! Mapper / community / regression analyses built on it.
//!
//! Pipeline stages, in order: [`corpus`] loading, [`simdecomp`] scoring,
//! a 2-D [`lens`], the [`mapper`] network, [`community`] detection,
//! [`layout`], [`opportunity`] queries for a focal interaction, and the
//! piecewise [`glm`] models. [`export`] and [`render`] write the results.

pub mod community;
pub mod corpus;
pub mod error;
pub mod export;
pub mod glm;
pub mod layout;
pub mod lens;
pub mod linalg;
pub mod mapper;
pub mod opportunity;
pub mod render;
pub mod simdecomp;

pub use community::{louvain, louvain_network, CommunityPartition, EdgeWeighting, Graph};
pub use corpus::{load_interactions, InputFormat, Interaction, InteractionSet, LoadOptions};
pub use error::{Error, Result};
pub use export::{AnnotatedNetwork, ExportFormat};
pub use glm::{LowThreshold, ModelId, RegressionDataset, RegressionFit};
pub use layout::{fr_layout, LayoutParams, LayoutPositions};
pub use lens::{LensCoordinates, LensProvenance};
pub use mapper::{build_cover, build_network, ClusterParams, Cover, MapperNetwork, MapperNode};
pub use opportunity::{focal_report, FocalReport};
pub use simdecomp::{all_profiles, decompose, ProfileOptions, ProfileRow, SimilarityComponents};
