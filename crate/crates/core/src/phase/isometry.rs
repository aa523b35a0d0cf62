//! Explicit isometries standing in for deck transformations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSurface, Point2, Vec2};

pub const ISOMETRY_TOLERANCE: f64 = 1e-10;
const CHECK_POINTS: usize = 20;
const CHECK_SEED: u64 = 0x6973_6f6d;

/// A coordinate map that is (to be checked to be) an isometry.
///
/// Every supported map is a coordinate translation, so its differential is
/// the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Isometry {
    Identity,
    /// `p ↦ p + offset`; an isometry of the flat plane.
    Translation {
        offset: [f64; 2],
    },
    /// `(x, y) ↦ (x, y + shift)`; an isometry of every warped product.
    YShift {
        shift: f64,
    },
    /// Applies `parts` in order.
    Composition {
        parts: Vec<Isometry>,
    },
}

impl Isometry {
    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::Translation { offset: [dx, dy] }
    }

    pub fn y_shift(shift: f64) -> Self {
        Self::YShift { shift }
    }

    fn offset(&self) -> Vec2 {
        match self {
            Self::Identity => Vec2::zeros(),
            Self::Translation { offset } => Vec2::from(*offset),
            Self::YShift { shift } => Vec2::new(0.0, *shift),
            Self::Composition { parts } => parts.iter().map(Self::offset).sum(),
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::from_coords(p.coords() + self.offset())
    }

    pub fn differential(&self, v: Vec2) -> Vec2 {
        v
    }

    /// Largest relative defect `|α*g − g|` over fixed pseudo-random points in
    /// `[-2, 2]²`.
    pub fn pullback_defect(&self, surface: &MetricSurface) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..CHECK_POINTS {
            let p = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let g = surface.metric_at(p)?;
            let pulled = surface.metric_at(self.apply(p))?;
            let scale = g.abs().max().max(1.0);
            worst = worst.max((pulled - g).abs().max() / scale);
        }
        Ok(worst)
    }

    pub fn validate(&self, surface: &MetricSurface) -> Result<()> {
        let defect = self.pullback_defect(surface)?;
        if defect > ISOMETRY_TOLERANCE {
            return Err(Error::NotAnIsometry { defect });
        }
        Ok(())
    }
}
