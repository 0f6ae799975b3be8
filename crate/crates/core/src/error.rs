//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mixed fields: {0} vs {1}")]
    MixedFields(crate::field::FieldSpec, crate::field::FieldSpec),
    #[error("empty or inverted degree window [{0}, {1}]")]
    BadWindow(i32, i32),
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("result window not declared but clipping would occur: {0}")]
    UndeclaredClipping(String),
    #[error("not a chain map at degree {degree}: {detail}")]
    NotChainMap { degree: i32, detail: String },
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("base ring order out of range: {0} (order of the algebra is {1})")]
    OrderOutOfRange(usize, usize),
    #[error("window or arity cap inadequate: {0}")]
    WindowInadequate(String),
    #[error("arity obstruction: {0}")]
    ArityObstruction(String),
    #[error("cocycle required: {0}")]
    NotCocycle(String),
    #[error("cochain is not idempotent-decomposed: {0}")]
    NotCornerCompatible(String),
    #[error("restriction map not invertible on HH2: {0}")]
    TransferNotInvertible(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("Morita status not verified: {0}")]
    MoritaUnverified(String),
    #[error("deformations are not comparable: {0}")]
    Incomparable(String),
    #[error("projectivity witness required: {0}")]
    MissingWitness(String),
    #[error("augmentation splitting is not compatible with the base ring: {0}")]
    BadSplitting(String),
    #[error("depth insufficient: {0}")]
    DepthInsufficient(String),
    #[error("the two n-acyclicity criteria disagree; diagnostic:\n{0}")]
    CriteriaMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
