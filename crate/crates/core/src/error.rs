use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {0} is degenerate (zero signed area)")]
    DegenerateTriangle(usize),
    #[error("triangle {triangle} references vertex {vertex}, but only {count} vertices exist")]
    VertexOutOfRange {
        triangle: usize,
        vertex: usize,
        count: usize,
    },
    #[error("vertex {0} has non-finite coordinates")]
    NonFiniteVertex(usize),
    #[error("initial mesh is not conforming")]
    NotConforming,
    #[error("refinement-edge flags are incompatible: edge ({0}, {1}) is a refinement edge on one side only")]
    IncompatibleFlags(usize, usize),
    #[error("element {0} does not exist")]
    InvalidElement(usize),
    #[error("element {0} is not a leaf")]
    NotALeaf(usize),
    #[error("completion exceeded {0} bisections; refinement-edge flags are not compatible")]
    CompletionDiverged(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gradient is singular at the center of the term")]
    SingularGradient,
    #[error("Newton iteration did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NewtonDiverged { residual: f64, iterations: usize },
    #[error("Kellogg solution violates its admissibility constraints: {0}")]
    ConstraintViolation(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
