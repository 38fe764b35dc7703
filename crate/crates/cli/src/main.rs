use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env = std::env::var_os(kaonbell_cli::PARAMS_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let code = kaonbell_cli::run_with(
        std::env::args_os(),
        env.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
