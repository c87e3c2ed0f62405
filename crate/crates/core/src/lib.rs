//! Reconstructing viewed pages from eye-movement heatmaps.
//!
//! The crate synthesizes page corpora ([`corpus`]), turns fixations into
//! heatmaps ([`gaze`]), trains conditional GANs that map heatmaps back to
//! pages ([`gan`], [`training`]) and scores the reconstructions ([`eval`]).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod gan;
pub mod gaze;
pub mod image;
pub mod io;
pub mod training;

pub use error::{Error, Result};
pub use image::Image;

/// The guide's chapters, compiled and run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/gaze.md")]
    mod gaze {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
