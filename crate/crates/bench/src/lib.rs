//! Criterion benchmarks for the reduction engine and the energy simulator.
//! See `benches/`.
