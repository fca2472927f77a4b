fn main() -> std::process::ExitCode {
    qwires::cli::main()
}
