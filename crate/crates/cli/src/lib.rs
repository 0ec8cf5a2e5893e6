//! Command-line front end: configuration, subcommands and the acceptance
//! suite. All numerics live in `heis_besov`.

pub mod commands;
pub mod config;
pub mod verify;

/// `pam-solve` refused to run; carries the failing inequalities.
#[derive(Debug)]
pub struct Refusal(pub Vec<String>);

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "infeasible parameters: {}", self.0.join("; "))
    }
}

impl std::error::Error for Refusal {}
