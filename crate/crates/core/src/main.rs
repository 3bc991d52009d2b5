use std::io::{stderr, stdout};

fn main() {
    let code = stbc_pic::cli::run(
        std::env::args_os(),
        std::env::vars().collect(),
        &mut stdout(),
        &mut stderr(),
    );
    std::process::exit(code);
}
