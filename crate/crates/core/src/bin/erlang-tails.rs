use clap::Parser;
use erlang_tails::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = match run(cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.category().exit_code()
        }
    };
    std::process::exit(code);
}
