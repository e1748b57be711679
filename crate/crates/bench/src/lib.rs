//! Benchmarks for the matcalc engine live in `benches/`.
