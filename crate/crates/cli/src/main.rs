use clap::Parser;

fn main() {
    let args = quench_cli::Args::parse();
    match quench_cli::run(&args) {
        Ok(path) => {
            println!("wrote {}", path.display());
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    }
}
