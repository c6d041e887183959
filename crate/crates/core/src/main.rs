fn main() {
    // CLI wired up after the numerical layers are in place.
}
