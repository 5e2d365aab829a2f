use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("malformed exponent: {0}")]
    MalformedExponent(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("negative homogeneous order {order} on axis {axis}: spectrum has nonzero mass on the zero-frequency hyperplane")]
    NegativeOrderOnNonzeroMeanMode { axis: usize, order: f64 },
    #[error("computation budget exceeded: {0} multiply-adds requested")]
    BudgetExceeded(u128),
    #[error("output frequency {0:?} outside the grid band")]
    OutOfBand(Vec<i64>),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("unknown symbol name: {0}")]
    UnknownSymbol(String),
    #[error("symbol parameter out of range: {0}")]
    SymbolParam(String),
    #[error("constraint check failed: {0} violated constraint(s)")]
    ConstraintFail(usize),
    #[error("scale-order violation: require k <= l - 3, got k={k}, l={l}")]
    ScaleOrder { k: i64, l: i64 },
    #[error("non-finite symbol value at {0:?}")]
    NonFiniteSymbol(Vec<f64>),
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
}
