//! Inference built on functor search: abstraction, completion of episodes,
//! scenario generation, story comprehension and planning.

pub mod abstraction;
pub mod comprehension;
pub mod inference;
pub mod planning;
pub mod scenario;

use thiserror::Error;

use crate::functor::SearchConfig;
use crate::id::ObjectId;
use crate::log::ModelError;

pub use abstraction::{abstract_episode, is_full, AbstractionResult};

pub use comprehension::{classify_story, comprehend, ClassScore, ComprehensionTree, SceneMatch, Segmentation, TreeNode};
pub use inference::{infer_missing, AddedAction, InferenceResult, Tense};
pub use planning::{plan, Plan};
pub use scenario::{enumerative_induction, generate_slog, GeneratedScenario};



#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReasoningError {
    #[error("no admissible functor from the e-log into the s-log")]
    NoAdmissibleFunctor,
    #[error("`{participant}` has several preimages: {preimages:?}")]
    AmbiguousInverseImage { participant: ObjectId, preimages: Vec<ObjectId> },
    #[error("selection is not causally closed; missing {0:?}")]
    NotCausallyClosed(Vec<ObjectId>),
    #[error("no plan reaches `{0}`")]
    NoPlanFound(ObjectId),
    #[error("library is empty")]
    EmptyLibrary,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Kinds of reasoning and the log operation that carries each out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceMode {
    /// Applying laws: functor search from an e-log into an s-log, or
    /// composing s-logs ([`abstract_episode`], [`infer_missing`], [`plan`]).
    Deduction,
    /// Turning one or more e-logs into an s-log ([`generate_slog`],
    /// [`enumerative_induction`]).
    EnumerativeInduction,
    /// Filling an incomplete e-log from an s-log ([`infer_missing`]).
    Abduction,
    /// Functor search that accepts low compatibility between objects.
    Analogy,
}

impl InferenceMode {
    /// Search settings for the mode derived from `base`.
    pub fn config(self, base: &SearchConfig) -> SearchConfig {
        match self {
            InferenceMode::Analogy => SearchConfig { min_compatibility: 0.0, ..base.clone() },
            InferenceMode::Abduction => {
                SearchConfig { require_surjective: false, require_injective: false, ..base.clone() }
            }
            _ => base.clone(),
        }
    }
}
