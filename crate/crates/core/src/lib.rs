//! Word sense disambiguation over a full WordNet inventory.
//!
//! Sense embeddings are bootstrapped from an annotated corpus, extended to
//! every sense through synset, hypernym and lexical-file means, optionally
//! concatenated with gloss embeddings, and used for nearest-neighbour
//! disambiguation and Word-in-Context classification.

pub mod corpus;
pub mod gloss;
pub mod inventory;
pub mod propagation;
pub mod store;
pub mod vectorspace;
pub mod wic;
pub mod wsd;
