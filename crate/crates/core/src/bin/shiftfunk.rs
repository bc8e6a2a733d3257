fn main() -> std::process::ExitCode {
    shiftfunk::cli::main()
}
