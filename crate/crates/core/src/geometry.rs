//! Planar geometry: bearings, location-error intervals and spatial-frequency ranges.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position2D) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationPrior {
    pub reported_position: Position2D,
    pub error_bound_epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularInterval {
    pub lower: f64,
    pub upper: f64,
}

impl AngularInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyInterval {
    pub a: f64,
    pub b: f64,
}

impl FrequencyInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < -1.0 || b > 1.0 || a > b {
            return Err(Error::Domain(format!("invalid frequency interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub const FULL: FrequencyInterval = FrequencyInterval { a: -1.0, b: 1.0 };

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.a && f <= self.b
    }
}

fn bearing(from: &Position2D, to: &Position2D) -> Result<f64> {
    let d = from.distance(to);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Domain("coincident or non-finite points".into()));
    }
    Ok(((to.x - from.x) / d).clamp(-1.0, 1.0).acos())
}

/// AoD at the BS and AoA at the RIS of the BS-RIS link.
pub fn bearing_angles(b: Position2D, r: Position2D) -> Result<(f64, f64)> {
    let theta = bearing(&b, &r)?;
    Ok((theta, PI - theta))
}

/// AoD estimate at the RIS towards the reported MS position.
pub fn los_angle_estimate(r: Position2D, prior: &LocationPrior) -> Result<f64> {
    bearing(&r, &prior.reported_position)
}

/// Range of AoDs consistent with an MS anywhere in the ε-disk around its reported position.
pub fn aod_uncertainty_interval(theta_hat: f64, d_hat: f64, epsilon: f64) -> Result<AngularInterval> {
    if d_hat <= 0.0 || epsilon < 0.0 {
        return Err(Error::Domain(format!("need d_hat > 0 and epsilon >= 0, got {d_hat}, {epsilon}")));
    }
    if epsilon > d_hat {
        return Ok(AngularInterval::new(0.0, PI));
    }
    let half = (epsilon / d_hat).asin();
    Ok(AngularInterval::new(
        (theta_hat - half).clamp(0.0, PI),
        (theta_hat + half).clamp(0.0, PI),
    ))
}

pub fn aoa_interval_from_aod(interval: AngularInterval) -> AngularInterval {
    AngularInterval::new(
        (PI - interval.upper).clamp(0.0, PI),
        (PI - interval.lower).clamp(0.0, PI),
    )
}

pub fn interval_to_frequency(interval: AngularInterval) -> FrequencyInterval {
    let (sl, su) = (interval.lower.sin(), interval.upper.sin());
    let mut a = sl.min(su);
    let mut b = sl.max(su);
    if interval.lower <= FRAC_PI_2 && FRAC_PI_2 <= interval.upper {
        b = 1.0;
    }
    // sin is concave on [0, π], so the minimum sits at an endpoint
    a = a.clamp(-1.0, 1.0);
    b = b.clamp(a, 1.0);
    FrequencyInterval { a, b }
}
