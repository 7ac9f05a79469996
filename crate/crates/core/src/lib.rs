//! Entropy bookkeeping, random edge graphs, the ball world simulator,
//! hidden-object inference and Game of Life macro-objects.

pub mod entropy;
pub mod graph;
pub mod inference;
pub mod multiscale;
pub mod world;

/// Version stamp carried by every report this crate produces.
pub const SPEC_VERSION: &str = "1.0.0";
