use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {context}: expected {expected:?}, actual {actual:?}")]
    Shape {
        context: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("graph error: {0}")]
    Graph(String),
    #[error("optimizer state error: {0}")]
    State(String),
    #[error("empty reduction: {0}")]
    EmptyReduction(String),
    #[error("checkpoint format: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TensorError {
    pub fn shape(context: impl Into<String>, expected: &[usize], actual: &[usize]) -> Self {
        TensorError::Shape {
            context: context.into(),
            expected: expected.to_vec(),
            actual: actual.to_vec(),
        }
    }
}
