//! `polyseq` command-line entry points: tokenize, augment, pretrain,
//! finetune, eval, and the attention/embedding analysis exports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

pub use cli::{Cli, Command};
pub use error::{CliError, EXIT_CONFIG, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};

/// Run a parsed command, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    init_thread_pool();
    let result = match cli.command {
        Command::Tokenize(args) => commands::tokenize::run(args),
        Command::Augment(args) => commands::augment::run(args),
        Command::Pretrain(args) => commands::pretrain::run(args),
        Command::Finetune(args) => commands::finetune::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::ExportAttention(args) => commands::export::run_attention(args),
        Command::ExportEmbeddings(args) => commands::export::run_embeddings(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Cap worker parallelism with POLYSEQ_THREADS (0 or unset = default).
fn init_thread_pool() {
    if let Ok(value) = std::env::var("POLYSEQ_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                // a second init in one process is fine to ignore
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
