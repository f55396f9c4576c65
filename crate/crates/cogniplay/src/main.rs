fn main() -> std::process::ExitCode {
    cogniplay::cli::main_with_args()
}
