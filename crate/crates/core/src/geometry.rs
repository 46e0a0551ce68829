//! Flat-torus metric and the region predicates used by the router.
//!
//! The domain is the square `[0, L)²` with opposite edges identified, so
//! there are no boundary effects: every point sees the same neighbourhood
//! geometry up to distance `L / 2`.

use serde::{Deserialize, Serialize};

/// A position on the torus. Coordinates are kept in `[0, L)` by [`Torus::point`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Square torus of side `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Torus {
    side: f64,
}

impl Torus {
    /// # Panics
    ///
    /// Panics if `side` is not a positive finite number.
    pub fn new(side: f64) -> Self {
        assert!(
            side.is_finite() && side > 0.0,
            "torus side must be positive and finite, got {side}"
        );
        Self { side }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Largest distance attainable between two points, `L / √2`.
    pub fn max_distance(&self) -> f64 {
        self.side * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Reduces a coordinate into `[0, L)`.
    pub fn wrap(&self, v: f64) -> f64 {
        let w = v.rem_euclid(self.side);
        // rem_euclid can round up to exactly `side` for tiny negative inputs
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    pub fn point(&self, x: f64, y: f64) -> TorusPoint {
        TorusPoint::new(self.wrap(x), self.wrap(y))
    }

    /// Shortest separation along one axis.
    #[inline]
    pub fn axis_delta(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        d.min(self.side - d)
    }

    #[inline]
    pub fn distance_sq(&self, p: TorusPoint, q: TorusPoint) -> f64 {
        let dx = self.axis_delta(p.x, q.x);
        let dy = self.axis_delta(p.y, q.y);
        dx * dx + dy * dy
    }

    /// Euclidean distance on the flat torus.
    #[inline]
    pub fn distance(&self, p: TorusPoint, q: TorusPoint) -> f64 {
        self.distance_sq(p, q).sqrt()
    }

    /// Closed disc `C(centre, radius)`.
    pub fn in_disc(&self, centre: TorusPoint, radius: f64, y: TorusPoint) -> bool {
        debug_assert!(radius >= 0.0);
        self.distance(centre, y) <= radius
    }

    /// Annulus `A(t, r)`: points with `r/4 < d(t, y) <= r/2`.
    ///
    /// The outer boundary is included and the inner one excluded, so a node
    /// reached inside the annulus always satisfies the radius-halving test
    /// exactly once.
    ///
    /// # Panics
    ///
    /// Panics if `r` is not positive.
    pub fn in_annulus(&self, t: TorusPoint, r: f64, y: TorusPoint) -> bool {
        assert!(r > 0.0, "annulus radius must be positive, got {r}");
        let d = self.distance(t, y);
        d > r / 4.0 && d <= r / 2.0
    }
}
