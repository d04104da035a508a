use thiserror::Error;

use crate::torus::ExpVec;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic field mismatch: L={0} vs L={1}")]
    FieldMismatch(u32, u32),
    #[error("invalid torus spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed basis key: {0}")]
    MalformedBasisKey(String),
    #[error("exponent {0} is not in the radical subgroup R")]
    ExponentNotInR(ExpVec),
    #[error("vector is not generic: its entries are rationally dependent")]
    NotGeneric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid module data: {0}")]
    InvalidModuleData(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("module is not absolutely irreducible (commutant dimension {0})")]
    NotIrreducible(usize),
    #[error("splitting the commutant needs a field extension beyond Q(ζ_{0})")]
    SplittingNeedsFieldExtension(u32),
    #[error("weight label outside the materialized box: {0}")]
    OutOfBox(String),
    #[error("operator family is not polynomial of the declared degree: {0}")]
    DegreeBoundViolated(String),
    #[error("constant term mismatch: {0}")]
    ConstantTermMismatch(String),
    #[error("coefficients violate the bracket relations: {0}")]
    RelationViolated(String),
    #[error("cache checksum mismatch for {0}")]
    CacheChecksum(String),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
