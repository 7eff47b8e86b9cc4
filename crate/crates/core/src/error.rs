use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("group not closed within cap of {cap} elements")]
    OrderCapExceeded { cap: usize },

    #[error("generator {index} is not invertible (|det| = {det:e})")]
    SingularGenerator { index: usize, det: f64 },

    #[error(
        "images do not define a representation: element {element} times generator {generator} \
         misses the image of their product by {residual:e}"
    )]
    InconsistentRepresentation {
        element: usize,
        generator: usize,
        residual: f64,
    },

    #[error("representations are defined over different groups")]
    GroupMismatch,

    #[error("averaged character product {value} is not within 1e-6 of an integer")]
    NonIntegralCharacter { value: f64 },

    #[error(
        "hidden layer {layer} does not carry a permutation representation; pointwise activations \
         are only certified to commute with permutation representations"
    )]
    NotPermutationRep { layer: usize },

    #[error("layer {layer} has no nonzero intertwiners; its weight would be forced to zero")]
    EmptyWeightSpace { layer: usize },

    #[error("training diverged at step {step} (mse {mse:e}); try a smaller learning rate")]
    Diverged { step: usize, mse: f64 },

    #[error("{0}")]
    Parse(String),
}
