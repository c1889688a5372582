//! Post and user similarity for online forums.
//!
//! Posts are compared with a thread-aware tf-idf cosine: every post has its
//! thread title appended, term importance is boosted by how often a term is
//! used inside the post's own thread, and pairs written by the same author
//! receive a constant similarity bonus `lambda`. The resulting dissimilarity
//! matrix is embedded with principal coordinates, each user is located at
//! the centroid of their posts, and the user distance matrix feeds
//! hierarchical clustering and a minimum spanning tree.
//!
//! The numeric stages are generic over a [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line tool uses; the `*F32` aliases exist for memory-constrained
//! callers.
//!
//! ```
//! use forumsim::{corpus::Corpus, textprep::{build_dictionary, PrepOptions}};
//! use forumsim::simcore::{build_dissimilarity_matrix, WeightedPosts};
//!
//! let jsonl = r#"{"type":"thread","thread_id":"t1","title":"data migration"}
//! {"type":"post","post_id":"p1","thread_id":"t1","user_id":"alice","body":"moving tables"}
//! {"type":"post","post_id":"p2","thread_id":"t1","user_id":"bob","body":"try the export tool"}
//! "#;
//! let corpus = Corpus::from_jsonl(jsonl.as_bytes()).unwrap();
//! let vocab = build_dictionary(&corpus, &PrepOptions::default());
//! let posts = WeightedPosts::<f64>::from_corpus(&corpus, &vocab).unwrap();
//! let m = build_dissimilarity_matrix(&posts, 0.05).unwrap();
//! assert_eq!(m.len(), 2);
//! ```

pub mod corpus;
pub mod embed;
mod error;
mod linalg;
pub mod eval;
pub mod io;
pub mod netstruct;
pub mod quantile;
mod scalar;
pub mod simcore;
pub mod stem;
pub mod synthgen;
pub mod textprep;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WeightVector = simcore::WeightVector<f64>;
pub type WeightedPosts = simcore::WeightedPosts<f64>;
pub type DissimilarityMatrix = simcore::DissimilarityMatrix<f64>;
pub type Embedding = embed::Embedding<f64>;
pub type UserGeometry = embed::UserGeometry<f64>;
pub type Dendrogram = netstruct::Dendrogram<f64>;
pub type SpanningTree = netstruct::SpanningTree<f64>;

pub type WeightVectorF32 = simcore::WeightVector<f32>;
pub type WeightedPostsF32 = simcore::WeightedPosts<f32>;
pub type DissimilarityMatrixF32 = simcore::DissimilarityMatrix<f32>;
pub type EmbeddingF32 = embed::Embedding<f32>;
pub type UserGeometryF32 = embed::UserGeometry<f32>;
pub type DendrogramF32 = netstruct::Dendrogram<f32>;
pub type SpanningTreeF32 = netstruct::SpanningTree<f32>;

/// Dense square matrix used for similarities and distances.
pub type Matrix<T> = nalgebra::DMatrix<T>;
