use clap::Parser;

fn main() {
    let cli = bnpmi_cli::args::Cli::parse();
    if let Err(e) = bnpmi_cli::args::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
