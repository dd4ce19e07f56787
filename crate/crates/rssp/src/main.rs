use clap::Parser;

fn main() {
    let cli = rssp::cli::Cli::parse();
    if let Err(e) = rssp::cli::run(cli) {
        eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
        std::process::exit(1);
    }
}
