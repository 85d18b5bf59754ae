use clap::Parser;
use eb_core::cli::{exit_code, run, Cli};
use eb_core::EbError;

fn main() {
    let result = run(Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e}");
        if let EbError::AssumptionViolated { .. } = e {
            eprintln!("hint: lower [profile] amp so that a(λ) stays away from zero");
        }
    }
    std::process::exit(exit_code(&result));
}
