//! Nodal data for a single angular Fourier mode.

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::C64;

/// Radial profile of one angular mode `f(r) e^{i m theta}`, sampled at the
/// grid nodes.
#[derive(Debug, Clone)]
pub struct ModeField {
    pub m: u32,
    pub values: Vec<C64>,
}

impl ModeField {
    pub fn new(m: u32, values: Vec<C64>) -> Self {
        Self { m, values }
    }

    pub fn zeros(m: u32, grid: &RadialGrid) -> Self {
        Self {
            m,
            values: vec![C64::new(0.0, 0.0); grid.node_count()],
        }
    }

    pub fn from_real(m: u32, values: &[f64]) -> Self {
        Self {
            m,
            values: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    pub fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        if self.values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                self.values.len(),
                grid.node_count()
            )));
        }
        Ok(())
    }

    /// L2 norm over the full disc, `(2 pi int |f|^2 r dr)^{1/2}`.
    pub fn l2_norm(&self, grid: &RadialGrid) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&grid.weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum();
        (2.0 * std::f64::consts::PI * s).sqrt()
    }

    /// H1 seminorm over the full disc for the mode `f(r) e^{i m theta}`:
    /// `(2 pi int (|f'|^2 + m^2 |f|^2 / r^2) r dr)^{1/2}`, with midpoint
    /// differences for `f'` and the angular term skipped at `r = 0`.
    pub fn h1_seminorm(&self, grid: &RadialGrid) -> f64 {
        let n = grid.node_count() - 1;
        let m2 = (self.m as f64).powi(2);
        let mut s = 0.0;
        for i in 0..n {
            let h = grid.nodes[i + 1] - grid.nodes[i];
            let rm = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
            let d = (self.values[i + 1] - self.values[i]) / h;
            s += d.norm_sqr() * rm * h;
        }
        if m2 > 0.0 {
            for i in 1..=n {
                let r = grid.nodes[i];
                s += m2 * self.values[i].norm_sqr() / (r * r) * grid.weights[i];
            }
        }
        (2.0 * std::f64::consts::PI * s).sqrt()
    }

    /// Pointwise linear interpolation at radius `r`.
    pub fn sample(&self, grid: &RadialGrid, r: f64) -> C64 {
        let n = grid.node_count() - 1;
        if r <= grid.nodes[0] {
            return self.values[0];
        }
        if r >= grid.nodes[n] {
            return self.values[n];
        }
        let mut i = ((r / grid.outer_radius()) * n as f64).floor() as usize;
        i = i.min(n - 1);
        while grid.nodes[i] > r {
            i -= 1;
        }
        while grid.nodes[i + 1] < r {
            i += 1;
        }
        let t = (r - grid.nodes[i]) / (grid.nodes[i + 1] - grid.nodes[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// State `(u, v)` of the first-order system for one mode; `v` plays the role
/// of the velocity.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub u: ModeField,
    pub v: ModeField,
}

impl ModeState {
    pub fn new(u: ModeField, v: ModeField) -> Result<Self> {
        if u.m != v.m {
            return Err(Error::InvalidArgument(format!(
                "mode mismatch between u (m={}) and v (m={})",
                u.m, v.m
            )));
        }
        Ok(Self { u, v })
    }

    pub fn m(&self) -> u32 {
        self.u.m
    }

    /// Energy norm `(|grad u|^2 + |v|^2)^{1/2}` over the disc.
    pub fn energy_norm(&self, grid: &RadialGrid) -> f64 {
        let gu = self.u.h1_seminorm(grid);
        let v = self.v.l2_norm(grid);
        (gu * gu + v * v).sqrt()
    }
}
