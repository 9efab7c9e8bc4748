//! Stadium-shaped race track: two straights joined by two semicircles,
//! centered at the origin and traversed counter-clockwise. Arc length zero is
//! the left end of the bottom straight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackGeometry {
    pub straight_length: f64,
    pub radius: f64,
}

impl Default for TrackGeometry {
    fn default() -> Self {
        TrackGeometry {
            straight_length: 5.0,
            radius: 2.0,
        }
    }
}

/// Point on the centerline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPose {
    pub x: f64,
    pub y: f64,
    /// Tangent heading in `[0, 2 pi)`.
    pub heading: f64,
    /// Signed curvature (`1/R` on the arcs, zero on the straights).
    pub curvature: f64,
}

impl TrackGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.straight_length > 0.0 && self.radius > 0.0) {
            return Err(Error::config(
                "cost.goal.track",
                "straight_length and radius must be positive",
            ));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        2.0 * self.straight_length + 2.0 * PI * self.radius
    }

    fn half(&self) -> f64 {
        0.5 * self.straight_length
    }

    /// Centerline pose at arc length `s` (taken modulo the lap length).
    pub fn pose_at(&self, s: f64) -> TrackPose {
        let (l, r, h) = (self.straight_length, self.radius, self.half());
        let arc = PI * r;
        let s = s.rem_euclid(self.total_length());
        if s < l {
            TrackPose {
                x: -h + s,
                y: -r,
                heading: 0.0,
                curvature: 0.0,
            }
        } else if s < l + arc {
            let a = (s - l) / r - PI / 2.0;
            TrackPose {
                x: h + r * a.cos(),
                y: r * a.sin(),
                heading: (s - l) / r,
                curvature: 1.0 / r,
            }
        } else if s < 2.0 * l + arc {
            TrackPose {
                x: h - (s - l - arc),
                y: r,
                heading: PI,
                curvature: 0.0,
            }
        } else {
            let a = (s - 2.0 * l - arc) / r + PI / 2.0;
            TrackPose {
                x: -h + r * a.cos(),
                y: r * a.sin(),
                heading: PI + (s - 2.0 * l - arc) / r,
                curvature: 1.0 / r,
            }
        }
    }

    /// Arc length of the nearest centerline point to `(x, y)`, in `[0, L)`.
    pub fn project(&self, x: f64, y: f64) -> f64 {
        let (l, r, h) = (self.straight_length, self.radius, self.half());
        let arc = PI * r;
        let mut best = (f64::INFINITY, 0.0);
        let mut consider = |dist: f64, s: f64| {
            if dist < best.0 {
                best = (dist, s);
            }
        };

        let xb = (x + h).clamp(0.0, l);
        consider((x - (-h + xb)).hypot(y + r), xb);

        let xt = (h - x).clamp(0.0, l);
        consider((x - (h - xt)).hypot(y - r), l + arc + xt);

        let a = y.atan2(x - h);
        if a.abs() <= PI / 2.0 {
            consider(((x - h).hypot(y) - r).abs(), l + r * (a + PI / 2.0));
        }

        let a = y.atan2(x + h);
        if a.abs() >= PI / 2.0 {
            let a = if a < 0.0 { a + 2.0 * PI } else { a };
            consider(((x + h).hypot(y) - r).abs(), 2.0 * l + arc + r * (a - PI / 2.0));
        }

        best.1.rem_euclid(self.total_length())
    }
}

/// Reference state `[x, y, heading, v_ref, omega_ref]` at arc length `s`.
pub fn track_reference(track: &TrackGeometry, s: f64, v_ref: f64) -> [f64; 5] {
    let p = track.pose_at(s);
    [p.x, p.y, p.heading, v_ref, v_ref * p.curvature]
}

/// Unwraps centerline progress across calls so a completed lap reads `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressTracker {
    track: TrackGeometry,
    unwrapped: Option<f64>,
}

impl ProgressTracker {
    pub fn new(track: TrackGeometry) -> Self {
        ProgressTracker {
            track,
            unwrapped: None,
        }
    }

    /// Progress as a fraction of the lap length.
    pub fn update(&mut self, x: f64, y: f64) -> f64 {
        let total = self.track.total_length();
        let s = self.track.project(x, y);
        let next = match self.unwrapped {
            // The first reading is anchored to the half-lap around the start.
            None => {
                if s >= 0.5 * total {
                    s - total
                } else {
                    s
                }
            }
            Some(prev) => {
                let delta = (s - prev).rem_euclid(total);
                let delta = if delta >= 0.5 * total { delta - total } else { delta };
                prev + delta
            }
        };
        self.unwrapped = Some(next);
        next / total
    }

    pub fn current(&self) -> Option<f64> {
        self.unwrapped.map(|s| s / self.track.total_length())
    }
}

/// `track_progress` over a whole sequence of positions, one tracker per call.
pub fn track_progress<I>(track: &TrackGeometry, positions: I) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut tracker = ProgressTracker::new(*track);
    positions.into_iter().map(|(x, y)| tracker.update(x, y)).collect()
}
