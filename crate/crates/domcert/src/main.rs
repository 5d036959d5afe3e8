use domcert::cli;

fn main() {
    let result = cli::run(std::env::args());
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    std::process::exit(result.exit_code);
}
