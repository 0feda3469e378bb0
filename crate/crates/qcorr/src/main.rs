use std::process::ExitCode;

fn main() -> ExitCode {
    qcorr::cli::run()
}
