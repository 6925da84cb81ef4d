fn main() -> std::process::ExitCode {
    seasonal_drift::cli::main_entry()
}
