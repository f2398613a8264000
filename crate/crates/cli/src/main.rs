fn main() {
    eprintln!("pblocks: not yet wired");
    std::process::exit(2);
}
