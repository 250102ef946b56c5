pub mod bound;
pub mod experiment;
pub mod fluid;
pub mod simulate;
pub mod table;
