fn main() -> std::process::ExitCode {
    subset_sketch::cli::main()
}
