//! File formats, benchmark generation, reports and the reference oracle.

pub mod generate;
pub mod mph;
pub mod oracle;
pub mod report;
