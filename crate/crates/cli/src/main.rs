mod args;
mod output;
mod run;

use std::process::ExitCode;

use args::PlanError;
use run::RunError;

const EXIT_CERT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let plan = match args::parse(std::env::args_os()) {
        Err(e) => {
            // help and version go to stdout with status 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
        Ok(Err(PlanError::Usage(msg))) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Ok(Err(PlanError::Io(msg))) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_IO);
        }
        Ok(Ok(plan)) => plan,
    };
    if let Some(n) = plan.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let outcome = match run::execute(&plan) {
        Ok(o) => o,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(RunError::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CERT_FAILURE);
        }
    };
    for (dest, body) in &outcome.artifacts {
        if let Err(e) = dest.write(body) {
            let target = match dest {
                output::Dest::Stdout => "stdout".to_string(),
                output::Dest::File(p) => p.display().to_string(),
            };
            eprintln!("error: cannot write {target}: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    if outcome.certification_failed {
        eprintln!("error: certification failed; see the claim report");
        return ExitCode::from(EXIT_CERT_FAILURE);
    }
    ExitCode::SUCCESS
}
