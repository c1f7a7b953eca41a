pub mod aoi;
pub mod builder;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod planners;
pub mod report;
