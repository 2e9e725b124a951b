//! Holds the `acceptance` test target, which prints one line per
//! acceptance criterion. Run it with `cargo test -p bmwwalk-verification`.
