//! Holds the `acceptance` test target. Run it with
//! `cargo test -p igp-validation --test acceptance --release`.
