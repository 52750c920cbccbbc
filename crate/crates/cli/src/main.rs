use std::io;
use std::process::ExitCode;

use kwm_cli::{run, Context, TOL_ENV};

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut ctx = Context {
        stdin: &mut stdin.lock(),
        stdout: &mut stdout.lock(),
        stderr: &mut stderr.lock(),
        env_tol: std::env::var(TOL_ENV).ok(),
    };
    let code = run(std::env::args_os(), &mut ctx);
    ExitCode::from(code as u8)
}
