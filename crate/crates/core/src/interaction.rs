//! placeholder
#[derive(Debug, Clone)]
pub struct PairTables;
