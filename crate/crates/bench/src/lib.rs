//! Benchmark crate; see benches/workbench.rs.
