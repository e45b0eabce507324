// SPDX-License-Identifier: Apache-2.0

fn main() -> std::process::ExitCode {
    mhk::cli::main_with_args(std::env::args_os())
}
