//! Benchmarks live in `benches/` (`cargo bench -p slelab-suite`); the acceptance run is `cargo test -p slelab-suite --test acceptance`.
