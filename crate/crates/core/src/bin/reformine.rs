use std::io::{IsTerminal, Write};

use reformine_core::cli::{color_enabled, run_with_color};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let out = run_with_color(&argv, color_enabled(std::io::stderr().is_terminal()));
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
