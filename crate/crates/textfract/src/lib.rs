//! textfract: a corpus-analysis toolkit that converts text documents into
//! per-property time series, measures their variability and multifractal
//! structure (MFDFA), and statistically separates and classifies text
//! categories (canonical / non-canonical / non-literary).
//!
//! The pipeline is:
//!
//! 1. [`corpus`] — ingest raw text with category metadata, clean it.
//! 2. [`nlp`] — sentence splitting, tokenization, POS tagging.
//! 3. [`series`] — seven per-property time series per document
//!    (four POS-group frequencies, sentence length, MTLD, topic JSD).
//! 4. [`fractal`] — MFDFA: generalized Hurst exponents, singularity
//!    spectrum, and the scalar features H (Hurst), D (dimension),
//!    A (asymmetry); plus synthetic oracle signals.
//! 5. [`stats`] — variance feature, median confidence intervals, and the
//!    hypothesis tests used in the group comparisons.
//! 6. [`classify`] — feature tables, z-scaling, RBF-kernel SVM under
//!    5x2 cross-validation for the two category tasks.
//!
//! The [`demo`] module builds a small deterministic demo corpus so the whole
//! pipeline can be exercised without assembling texts first.

pub mod classify;
pub mod corpus;
pub mod demo;
pub mod error;
pub mod fractal;
pub mod nlp;
pub mod series;
pub mod stats;
pub mod topics;

pub use error::{Error, ErrorClass, Result};
