use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tree parameter q = {0} (need q >= 2)")]
    InvalidBranching(u32),

    #[error("invalid vertex word {word:?}: {reason}")]
    InvalidWord { word: Vec<u32>, reason: String },

    #[error("boundary cylinder of depth {depth} cannot resolve a vertex at distance {needed} from the root")]
    InsufficientDepth { depth: usize, needed: usize },

    #[error("spectral parameter {z} is within {threshold:e} of a pole of the c-function")]
    PoleProximity { z: String, threshold: f64 },

    #[error("invalid torus grid size {0} (need an even number >= 4)")]
    InvalidGrid(usize),

    #[error("symbol {symbol} is not defined at z = {z}")]
    SymbolDomain { symbol: String, z: String },

    #[error("symbol {symbol} declares strip halfwidth {halfwidth}, but p = {p} requires {required}")]
    StripTooNarrow {
        symbol: String,
        halfwidth: f64,
        p: f64,
        required: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
