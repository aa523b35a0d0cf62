//! Geodesics, Jacobi fields, circle and horocyclic curvature, distance phase
//! functions and oscillatory period integrals on explicit nonpositively
//! curved metrics on the plane.

pub mod error;
mod flow;
pub mod geodesic;
pub mod jacobi;
pub mod metric;
pub mod oscillatory;
pub mod phase;

pub use error::{Error, Result};
pub use geodesic::{
    connect, distance, geodesic_ivp, geodesic_through, shoot, transport_perp, Connection, GeodesicPath, ShootOptions,
};
pub use metric::{MetricSurface, Point2, Rect, Tangent2, UnitTangent, Vec2};
