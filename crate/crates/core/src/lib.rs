//! Corpus construction and evaluation tools for low-resource speech
//! recognition: CTC likelihoods and forced alignment over emission matrices,
//! transcript normalization, audio segmentation, manifest generation,
//! quality filtering, dataset splitting and WER/CER scoring.

pub mod ctc;
pub mod textnorm;
pub mod audio;
pub mod corpus;
pub mod metrics;
pub mod tags;
pub mod config;
