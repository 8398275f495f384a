fn main() -> std::process::ExitCode {
    hankel_tucker::cli::main()
}
