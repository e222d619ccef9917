//! placeholder
#[derive(Debug, Clone)]
pub struct SectorGrid;
#[derive(Debug, Clone)]
pub struct ReductionDiagnostics;
