//! Rule-based extraction of relational tuples from dependency-parsed news
//! text, knowledge-base graph construction, and a graph convolutional
//! classifier over token embeddings pooled onto graph nodes.
//!
//! The stages, in pipeline order:
//!
//! * [`depmodel`]: CoNLL-U input and dependency-tree traversal
//! * [`extractor`]: subject, predicate, object, complement and adverbial chunks
//! * [`clauses`]: clause type assignment
//! * [`kb`]: per-document knowledge-base graphs
//! * [`t2g`]: embedding pooling and graph batching
//! * [`gcn`]: the classifier, its optimizer and metrics

pub mod clauses;
pub mod depmodel;
pub mod extractor;
pub mod gcn;
pub mod kb;
pub mod pipeline;
pub mod t2g;

pub use clauses::{classify, ClauseType, VerbLexicon};
pub use depmodel::{parse_conllu, DepTree, Document, ParseError, ParseOptions, TagScheme, Token};
pub use extractor::{extract_frames, Chunk, ChunkKind, ClauseFrame, MiscNer, NerRectifier};
pub use gcn::{AdamState, Checkpoint, GcnConfig, GcnError, GcnModel, Metrics, TrainingLog};
pub use kb::{aggregate, KbError, KnowledgeBase};
pub use pipeline::{build_kb, classify_document, ExtractOptions, FrameRecord, PipelineError};
pub use t2g::{
    assemble_batch, pool_nodes, ClassIndex, DummyPolicy, EmbeddingTable, GraphBatch, PooledGraph,
    T2gError,
};
