fn main() {
    std::process::exit(clinitime_service::cli::main());
}
