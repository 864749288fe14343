/// Input, parse and validation failures; all exit with status 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),

    #[error("{0}: malformed JSON: {1}")]
    Parse(String, #[source] serde_json::Error),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Solver(#[from] bridgekit::Error),
}
