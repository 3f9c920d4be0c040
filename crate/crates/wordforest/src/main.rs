fn main() {
    // CLI added after the library compiles.
}
