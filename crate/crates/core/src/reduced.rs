//! placeholder
#[derive(Debug, Clone)]
pub struct ReducedModel;
#[derive(Debug, Clone)]
pub struct CriticalPoint;
#[derive(Debug, Clone)]
pub struct Curvature;
#[derive(Debug, Clone)]
pub struct ReducedEnergySurface;
