fn main() { std::process::exit(emitter_bell::cli::run(std::env::args().collect())); }
