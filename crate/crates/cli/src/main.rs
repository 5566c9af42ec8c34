//! `negswitch`: scenario generation, strategy and classifier training,
//! pool review, negotiation runs, tournaments and reports.

mod agents;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "negswitch", version, about = "Bilateral negotiation with switching RL strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario near a target size and opposition.
    GenScenario(commands::GenScenario),
    /// Train a bidding strategy against one opponent with SAC.
    TrainStrategy(commands::TrainStrategy),
    /// Train the opponent classifier over a set of negotiators.
    TrainClassifier(commands::TrainClassifier),
    /// Review a candidate negotiator or strategy for admission to a pool.
    Review(commands::Review),
    /// Run seeded sessions between two agents and write their traces.
    Negotiate(commands::Negotiate),
    /// Run a round-robin tournament and write the benchmark tables.
    Tournament(commands::Tournament),
    /// Summarise a tournament directory.
    Report(commands::Report),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenScenario(a) => commands::gen_scenario(a),
        Command::TrainStrategy(a) => commands::train_strategy(a),
        Command::TrainClassifier(a) => commands::train_classifier_cmd(a),
        Command::Review(a) => commands::review(a),
        Command::Negotiate(a) => commands::negotiate(a),
        Command::Tournament(a) => commands::tournament(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
