use thiserror::Error;

/// Errors surfaced by the kernel and the transformation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("connective `{connective}` not available in language {lang}")]
    LanguageViolation { connective: String, lang: String },
    #[error("unbound variable `{0}` in substitution")]
    UnboundVariable(String),
    #[error("unknown calculus `{0}`")]
    UnknownCalculus(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("negative index")]
    NegativeIndex,
    #[error("empty multiset")]
    EmptyMultiset,
    #[error("rule `{0}` is not single-conclusion")]
    MultiConclusion(String),
    #[error("rule `{0}` is not in the supported rule class")]
    NotInRuleClass(String),
    #[error("axiom/rule mismatch: {0}")]
    Mismatch(String),
    #[error("calculus is not constructive: rule `{0}` ({1})")]
    NotConstructiveCalculus(String, String),
    #[error("formula contains an angled atom where none is allowed")]
    AngledAtomPresent,
    #[error("formula is not Harrop: {0}")]
    NotHarrop(String),
    #[error("formula `{formula}` is not in class {class}")]
    WrongClass { class: String, formula: String },
    #[error("calculus is not in CK+C normal form: {0}")]
    NotNormalForm(String),
    #[error("input proof does not check: {0}")]
    ProofInvalid(String),
    #[error("formula is not implicational Horn: {0}")]
    NotHorn(String),
    #[error("formula is not a modality-free Horn formula: {0}")]
    NotModalityFreeHorn(String),
    #[error("formula is not modal Horn: {0}")]
    NotModalHorn(String),
    #[error("calculus is not T-full")]
    NotTFull,
    #[error("calculus is neither T-free nor T-full: {0}")]
    NeitherTClass(String),
    #[error("conclusion is not of the form Gamma, {{A_i -> B_i}} => C | D: {0}")]
    MalformedConclusion(String),
    #[error("internal validity failure: unit propagation found a countermodel ({0}); this indicates a pipeline bug")]
    InternalValidityFailure(String),
    #[error("calculus is not strong over its language: {0}")]
    NotStrong(String),
    #[error("reflexive variant requires the calculus to prove T_a")]
    MissingTa,
    #[error("unknown corpus generator `{0}`")]
    UnknownGenerator(String),
    #[error("proof file is dag-shaped: node {0} is shared; expand it first")]
    DagProof(usize),
    #[error("bad proof file: {0}")]
    BadProofFile(String),
    #[error("bad calculus file: {0}")]
    BadCalculusFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
