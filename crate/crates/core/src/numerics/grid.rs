use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform one-dimensional sample points `x_min = x_0 < … < x_{n-1} = x_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 5;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || !(x_min < x_max) {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    /// `[-8, 8]` with 1601 points (`h = 0.01`).
    pub fn default_figure() -> Self {
        Grid {
            x_min: -8.0,
            x_max: 8.0,
            n_points: 1601,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// True when the grid is mirror-symmetric about the origin.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.x_max.abs().max(1.0)
    }

    /// Index of `-x_i` on a symmetric grid.
    pub fn mirror(&self, i: usize) -> Option<usize> {
        self.is_symmetric().then(|| self.n_points - 1 - i)
    }

    /// Index of the sample at `x`, if `x` lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let t = (x - self.x_min) / h;
        let i = t.round();
        if i < 0.0 || i >= self.n_points as f64 || (t - i).abs() > 1e-6 {
            None
        } else {
            Some(i as usize)
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.x_min, self.x_max, self.n_points)
    }
}

/// Parses `x_min:x_max:n`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::InvalidGrid(format!("expected x_min:x_max:n, got {s:?}")));
        };
        let bad = |what: &str| Error::InvalidGrid(format!("bad {what} in {s:?}"));
        let a: f64 = a.trim().parse().map_err(|_| bad("x_min"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("x_max"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("point count"))?;
        Grid::new(a, b, n)
    }
}
