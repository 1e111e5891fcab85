use clap::Parser;

fn main() {
    let cli = lora_sweep::cli::Cli::parse();
    std::process::exit(lora_sweep::cli::run(&cli));
}
