use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<polyseq_data::DataError> for CliError {
    fn from(e: polyseq_data::DataError) -> Self {
        match &e {
            polyseq_data::DataError::Schema(_) => CliError::config(e),
            _ => CliError::input(e),
        }
    }
}

impl From<polyseq_train::TrainError> for CliError {
    fn from(e: polyseq_train::TrainError) -> Self {
        match &e {
            polyseq_train::TrainError::Config(_) | polyseq_train::TrainError::ParamName(_) => {
                CliError::config(e)
            }
            polyseq_train::TrainError::Io(_) => CliError::input(e),
            _ => CliError::numerical(e),
        }
    }
}

impl From<polyseq_tensor::TensorError> for CliError {
    fn from(e: polyseq_tensor::TensorError) -> Self {
        match &e {
            polyseq_tensor::TensorError::Checkpoint(_) | polyseq_tensor::TensorError::Io(_) => {
                CliError::input(e)
            }
            _ => CliError::numerical(e),
        }
    }
}

impl From<polyseq_model::ModelError> for CliError {
    fn from(e: polyseq_model::ModelError) -> Self {
        match &e {
            polyseq_model::ModelError::Config(_) => CliError::config(e),
            polyseq_model::ModelError::Tensor(_) => CliError::numerical(e),
        }
    }
}
