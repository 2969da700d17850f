//! Masked-token image decoding, self-verification and preference-data
//! construction over a discrete micro-world with an exact oracle.
//!
//! Modules follow the pipeline: [`microworld`] defines scenes, prompts,
//! token grids and the oracle; [`generator`] decodes grids iteratively;
//! [`verifier`] scores grids (outcome, rule, chain-of-thought);
//! [`selector`] runs Best-of-N; [`preference`] builds DPO pairs, the DPO
//! loss and CoT labels; [`bench`] aggregates everything into reports.

pub mod bench;
pub mod digest;
pub mod generator;
pub mod microworld;
pub mod preference;
pub mod seed;
pub mod selector;
pub mod verifier;
