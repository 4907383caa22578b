//! Periodic billiard trajectories in rational triangles: exact reflection
//! groups, unfoldings into translation surfaces, orbit tiles and the fold
//! covering between an isosceles triangle and its right half.

pub mod angle;
pub mod billiard;
pub mod comb_type;
pub mod cylinder;
pub mod experiments;
pub mod fold;
pub mod geometry;
pub mod group;
pub mod io;
pub mod par;
pub mod search;
pub mod surface;
pub mod tiles;
pub mod unfold;

pub use angle::{AngleValue, RationalAngle};
pub use billiard::{detect_periodic, shoot, BoundaryPoint, PeriodicOrbit, Tolerances, Trajectory};
pub use comb_type::CombType;
pub use fold::{build_cover, CoveringMap};
pub use geometry::{embed_triangle, Polygon, TriangleShape};
pub use par::Execution;
pub use surface::{build_surface, TranslationSurface};
