//! Model constants and the shortcut normalisation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Torus;

/// What `dbar` counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeConvention {
    /// Expected number of undirected shortcuts incident to a node.
    #[default]
    Incident,
    /// Expected number of shortcuts a node generates; each is also received
    /// by its other endpoint, so the incident mean is `2 * dbar`.
    Generated,
}

impl DegreeConvention {
    fn incident_target(self, dbar: f64) -> f64 {
        match self {
            Self::Incident => dbar,
            Self::Generated => 2.0 * dbar,
        }
    }
}

/// All constants of one model instance plus the quantities derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    n: u64,
    c: f64,
    alpha: f64,
    dbar: f64,
    seed: u64,
    convention: DegreeConvention,
    side: f64,
    local_radius: f64,
    shortcut_range: f64,
    a_n: f64,
}

impl ModelParams {
    pub const MIN_N: u64 = 16;

    /// Builds the parameter set with the default shortcut range `√n / 2`.
    pub fn new(n: u64, c: f64, alpha: f64, dbar: f64, seed: u64) -> Result<Self, ModelError> {
        Self::with_convention(n, c, alpha, dbar, seed, DegreeConvention::Incident)
    }

    pub fn with_convention(
        n: u64,
        c: f64,
        alpha: f64,
        dbar: f64,
        seed: u64,
        convention: DegreeConvention,
    ) -> Result<Self, ModelError> {
        if n < Self::MIN_N {
            return Err(ModelError::invalid("n", format!("must be >= {}, got {n}", Self::MIN_N)));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(ModelError::invalid("c", format!("must be positive, got {c}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(ModelError::invalid("alpha", format!("must be >= 0, got {alpha}")));
        }
        if !(dbar.is_finite() && dbar > 0.0) {
            return Err(ModelError::invalid("dbar", format!("must be positive, got {dbar}")));
        }
        if c <= 1.0 / PI {
            log::warn!("c = {c} <= 1/pi: the local graph is unlikely to be connected");
        }
        let side = (n as f64).sqrt();
        let local_radius = (c * (n as f64).ln()).sqrt();
        let mut params = Self {
            n,
            c,
            alpha,
            dbar,
            seed,
            convention,
            side,
            local_radius,
            shortcut_range: side / 2.0,
            a_n: f64::NAN,
        };
        params.recalibrate()?;
        Ok(params)
    }

    /// Replaces the upper limit of the shortcut range (default `√n / 2`).
    ///
    /// Ranges beyond `L / 2` are allowed but the calibration integral then
    /// no longer matches the torus exactly.
    pub fn with_shortcut_range(mut self, range: f64) -> Result<Self, ModelError> {
        if !(range.is_finite() && range > 0.0) {
            return Err(ModelError::invalid(
                "shortcut_range",
                format!("must be positive, got {range}"),
            ));
        }
        self.shortcut_range = range;
        self.recalibrate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn recalibrate(&mut self) -> Result<(), ModelError> {
        self.a_n = compute_a_n(
            self.convention.incident_target(self.dbar),
            self.alpha,
            self.local_radius,
            self.shortcut_range,
        )?;
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn dbar(&self) -> f64 {
        self.dbar
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn convention(&self) -> DegreeConvention {
        self.convention
    }
    /// Side `L = √n` of the torus.
    pub fn side(&self) -> f64 {
        self.side
    }
    /// Local radius `r_n = √(c ln n)`.
    pub fn local_radius(&self) -> f64 {
        self.local_radius
    }
    /// Upper end `R` of the shortcut range.
    pub fn shortcut_range(&self) -> f64 {
        self.shortcut_range
    }
    pub fn a_n(&self) -> f64 {
        self.a_n
    }
    pub fn torus(&self) -> Torus {
        Torus::new(self.side)
    }

    /// Expected incident shortcut degree the calibration targets.
    pub fn target_degree(&self) -> f64 {
        self.convention.incident_target(self.dbar)
    }

    /// Probability that two nodes at distance `d` share a shortcut.
    #[inline]
    pub fn shortcut_probability(&self, d: f64) -> f64 {
        if d > self.local_radius && d <= self.shortcut_range {
            (self.a_n * d.powf(-self.alpha)).min(1.0)
        } else {
            0.0
        }
    }

    /// Upper bound of [`shortcut_probability`](Self::shortcut_probability)
    /// over all distances `>= d_min`.
    pub fn shortcut_probability_bound(&self, d_min: f64) -> f64 {
        if d_min > self.shortcut_range {
            0.0
        } else {
            (self.a_n * d_min.max(self.local_radius).powf(-self.alpha)).min(1.0)
        }
    }
}

/// Normalisation constant making the expected incident shortcut count equal
/// to `dbar`: solves `dbar = a ∫_{r_n}^{R} x^{-α} 2πx dx`.
pub fn compute_a_n(dbar: f64, alpha: f64, local_radius: f64, range: f64) -> Result<f64, ModelError> {
    if local_radius >= range {
        return Err(ModelError::ShortcutRangeEmpty {
            local_radius,
            shortcut_range: range,
        });
    }
    let integral = if (alpha - 2.0).abs() < 1e-12 {
        2.0 * PI * (range / local_radius).ln()
    } else {
        let e = 2.0 - alpha;
        2.0 * PI * (range.powf(e) - local_radius.powf(e)) / e
    };
    Ok(dbar / integral)
}
