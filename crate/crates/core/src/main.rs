use clap::Parser;

fn main() {
    let cli = nml::cli::Cli::parse();
    match nml::cli::execute(cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("nml: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
