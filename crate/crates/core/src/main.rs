use std::process::ExitCode;

fn main() -> ExitCode {
    primegen::cli::main()
}
