use std::io;

fn main() {
    let cwd = std::env::current_dir().unwrap_or_else(|_| ".".into());
    let code = nblint::cli::run(
        std::env::args_os(),
        &cwd,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
