//! Weak supervision toolkit for finding *supportive* posts in a hashtag-driven
//! social-media corpus.
//!
//! The pipeline runs in stages, each living in its own module:
//!
//! 1. [`corpus`]: load line-delimited posts, infer a country label, clean the
//!    text and split the corpus by hashtag polarity.
//! 2. [`linear`]: TF-IDF features, seeded SGD linear models (logistic and
//!    hinge) and positive-class metrics.
//! 3. [`scorer`]: a hub of named probability scorers, either built-in linear
//!    models or external processes speaking a line-delimited JSON protocol.
//! 4. [`weaklabel`]: informed sampling from two ranked score lists, the
//!    hashtag-only baseline, evaluation samples and the Monte-Carlo pairwise
//!    discriminability rate.
//! 5. [`agreement`]: Fleiss' kappa, majority gold labels and adjudication
//!    rounds over annotation sheets.
//! 6. [`experiments`]: repeated train/evaluate runs, engagement statistics,
//!    hashtag counts and term frequencies.
//!
//! [`synth`] generates planted-signal corpora used by the test-suite and the
//! command-line fixture.
//!
//! ```
//! use supportive::corpus::clean;
//!
//! let text = clean("Prayers for India #IndiaNeedsOxygen @user https://t.co/x");
//! assert_eq!(text.text, "prayers for india");
//! assert_eq!(text.token_count, 3);
//! ```

pub mod agreement;
pub mod corpus;
mod error;
pub mod experiments;
pub mod fingerprint;
pub mod linear;
pub mod scorer;
pub mod stats;
pub mod synth;
pub mod weaklabel;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/tfidf.md")]
    mod tfidf {}
    #[doc = include_str!("../../../book/src/scorers.md")]
    mod scorers {}
    #[doc = include_str!("../../../book/src/informed-sampling.md")]
    mod informed_sampling {}
    #[doc = include_str!("../../../book/src/pairwise-rate.md")]
    mod pairwise_rate {}
    #[doc = include_str!("../../../book/src/agreement.md")]
    mod agreement {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
