fn main() {
    std::process::exit(manet::harness_main());
}
