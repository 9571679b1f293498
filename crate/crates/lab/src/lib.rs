//! File formats, parallel drivers, command line and HTTP service for the
//! collider-bias laboratory. The numerical work lives in `collider-core`.

pub mod api;
pub mod audit;
pub mod cli;
pub mod grid;
pub mod io;
pub mod parallel;
