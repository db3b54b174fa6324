fn main() -> std::process::ExitCode {
    qpa::cli::main()
}
