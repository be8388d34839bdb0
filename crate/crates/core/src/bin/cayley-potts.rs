use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = cayley_potts::cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
