//! Synthetic hate-speech training data for languages with little labeled
//! data.
//!
//! Three generators turn a high-resource corpus (or a handful of
//! target-language posts) into extra hateful training examples:
//!
//! * machine translation of source posts ([`backends::translate_batch`]);
//! * contextual entity substitution ([`ces`]): hate targets and hate terms
//!   are fuzzily matched against a source [`entity_table`], replaced by
//!   category masks such as `<MASK-HT>`, translated, and re-filled from the
//!   target language's table;
//! * few-shot generation with a language model ([`lm_gen`]).
//!
//! [`experiment`] lays the outputs out as incremental augmentation arms,
//! and [`classifier`] trains a hashed character n-gram logistic regression
//! on each arm, reports macro F1 and ranks the words that drive its
//! predictions.

pub mod backends;
pub mod ces;
pub mod cli;
pub mod classifier;
pub mod config;
pub mod corpus;
pub mod entity_table;
pub mod experiment;
pub mod lm_gen;
pub mod seed;
