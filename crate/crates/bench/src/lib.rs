//! Criterion benchmarks for `lodisc-core`; see `benches/`.
