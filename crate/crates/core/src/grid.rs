//! Uniform axes, rectangular sample grids and the trapezoid rule on them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UdmError};

/// Uniform axis `min, min + h, …, max` with `len ≥ 2` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    min: f64,
    max: f64,
    len: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(UdmError::InvalidGrid(format!("axis needs at least 2 nodes, got {len}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(UdmError::InvalidGrid(format!("axis bounds [{min}, {max}] are not ordered")));
        }
        Ok(Self { min, max, len })
    }

    /// Axis with spacing `step` starting at `min`.
    pub fn from_step(min: f64, step: f64, len: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(UdmError::InvalidGrid(format!("spacing must be positive, got {step}")));
        }
        Self::new(min, min + step * (len.saturating_sub(1)) as f64, len)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.len - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.len {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.at(i))
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.len {
            0.5 * h
        } else {
            h
        }
    }

    /// Trapezoid rule over samples on this axis.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len);
        values.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            min: f64,
            max: f64,
            len: usize,
        }
        let raw = Raw::deserialize(d)?;
        Axis::new(raw.min, raw.max, raw.len).map_err(serde::de::Error::custom)
    }
}

/// Real samples on a rectangular grid, row-major with the first axis outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2 {
    pub outer: Axis,
    pub inner: Axis,
    pub values: Vec<f64>,
}

impl Grid2 {
    pub fn from_fn(outer: Axis, inner: Axis, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(outer.len() * inner.len());
        for a in outer.nodes() {
            for b in inner.nodes() {
                values.push(f(a, b));
            }
        }
        Self { outer, inner, values }
    }

    pub fn try_from_fn(
        outer: Axis,
        inner: Axis,
        mut f: impl FnMut(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(outer.len() * inner.len());
        for a in outer.nodes() {
            for b in inner.nodes() {
                values.push(f(a, b)?);
            }
        }
        Ok(Self { outer, inner, values })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.inner.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.inner.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// 2D trapezoid rule.
    pub fn integrate(&self) -> f64 {
        (0..self.outer.len())
            .map(|i| self.outer.weight(i) * self.inner.trapezoid(self.row(i)))
            .sum()
    }
}
