//! Criterion benchmarks for the vortexlab solvers; see `benches/`.
