use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = zxrl_cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    if let Err(e) = result {
        if let zxrl_cli::CliError::Clap(c) = &e {
            c.exit();
        }
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
