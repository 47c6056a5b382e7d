use std::process::exit;

fn main() {
    exit(corrmean::cli::run());
}
