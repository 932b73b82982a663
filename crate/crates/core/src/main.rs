fn main() {
    std::process::exit(ddpm_lab::cli::run(std::env::args_os()));
}
