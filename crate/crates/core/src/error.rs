use crate::system::Diagnostic;
use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shift {0} is (numerically) a generalized eigenvalue of (E, A)")]
    SingularShift(C64),
    #[error("reduced pencil is (nearly) defective; perturb the shifts")]
    DefectivePencil,
    #[error("reduced E matrix is singular; lower the reduction order")]
    SingularReducedE,
    #[error("reduced pencil sE~ - A~ is singular at s = {0}")]
    SingularReducedPencil(C64),
    #[error("orthonormalization dropped every column")]
    EmptyBasis,
    #[error("pencil sE - A is singular (not regular)")]
    SingularPencil,
    #[error("order {n} exceeds the dense limit {limit}")]
    DenseLimitExceeded { n: usize, limit: usize },
    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("A22 block is singular")]
    SingularA22,
    #[error("E11 - E12 A22^-1 A21 is singular")]
    SingularSchurComplement,
    #[error("E11 block is singular")]
    SingularE11,
    #[error("A21 E11^-1 A12 is singular")]
    SingularProjectedGram,
    #[error("saddle-point matrix is singular at shift {0}")]
    SingularSaddle(C64),
    #[error("finite part is not asymptotically stable")]
    UnstableSystem,
    #[error("method/structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error in {file} at line {line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("validation failed: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Diagnostic>),
    #[error("i omega E - A is numerically singular at omega = {0} (pole on or near the imaginary axis)")]
    ImaginaryAxisPole(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
