use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Axis-aligned box `[lower, upper]` used as parameter support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = ParamBox { lower, upper };
        b.validate("param_bounds")?;
        Ok(b)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if self.lower.is_empty() {
            return Err(Error::config(field, "parameter box must have at least one dimension"));
        }
        if self.lower.len() != self.upper.len() {
            return Err(Error::config(
                field,
                format!(
                    "lower has {} entries but upper has {}",
                    self.lower.len(),
                    self.upper.len()
                ),
            ));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(
                    field,
                    format!("dimension {i}: need finite lower < upper, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (lo, hi))| *lo <= *t && *t <= *hi)
    }

    pub fn clamp_in_place(&self, theta: &mut [f64]) {
        for (t, (lo, hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(*lo, *hi);
        }
    }

    /// One draw from the uniform distribution over the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

/// `N` parameter hypotheses stored row-major, each kept inside `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    data: Vec<f64>,
    dim: usize,
    bounds: ParamBox,
}

impl ParticleSet {
    /// Builds a set from explicit rows, clamping each to `bounds`.
    pub fn from_rows(rows: Vec<Vec<f64>>, bounds: ParamBox) -> Result<Self> {
        let dim = bounds.dim();
        if rows.is_empty() {
            return Err(Error::config("particles", "need at least one particle"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            check_dim("particle_set", dim, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation { theta: row });
            }
            data.extend(row);
        }
        let mut set = ParticleSet { data, dim, bounds };
        set.clamp_all();
        Ok(set)
    }

    /// Draws `n` particles uniformly from `bounds`.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, bounds: ParamBox, rng: &mut R) -> Result<Self> {
        let rows = (0..n).map(|_| bounds.sample(rng)).collect();
        Self::from_rows(rows, bounds)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &ParamBox {
        &self.bounds
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Flat row-major view.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Coordinate-wise arithmetic mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for p in self.iter() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Replaces positions with `rows` (flat, row-major) and clamps to bounds.
    pub(crate) fn with_flat(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        let mut next = ParticleSet {
            data,
            dim: self.dim,
            bounds: self.bounds.clone(),
        };
        next.clamp_all();
        next
    }

    fn clamp_all(&mut self) {
        let dim = self.dim;
        for row in self.data.chunks_exact_mut(dim) {
            self.bounds.clamp_in_place(row);
        }
    }
}

/// Particle mean `(1/N) sum_i theta_i`.
pub fn particle_mean(particles: &ParticleSet) -> Vec<f64> {
    particles.mean()
}
