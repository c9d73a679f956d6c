//! Benchmark harness for edr-core kernels; see `benches/`.
