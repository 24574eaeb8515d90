//! Pointwise differential geometry on coordinate charts.

pub mod chart;
pub mod expr;
pub mod fd;
pub mod fields;
pub mod jet;
pub mod structure;
pub mod verify;
