use std::io;
use std::process;

fn main() {
    let status = evrforge_cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    process::exit(status.code());
}
