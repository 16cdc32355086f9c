//! Disc-in-disc geometry and its radial discretization.
//!
//! The domain is the disc of radius `R0 > 1`; the interface `Sigma` is the
//! unit circle. Damping is `damping_value` on the annulus `1 < r < R0` and
//! zero on the unit disc. One grid node is pinned at `r = 1` exactly so the
//! conservative flux scheme sees the damping jump cleanly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The disc-in-disc geometry: outer radius, unit-circle interface, constant
/// damping on the annulus.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Radius `R0` of the outer boundary (Dirichlet).
    pub outer_radius: f64,
    /// Radius of the interface; fixed at 1.
    pub interface_radius: f64,
    /// Constant damping value on the annulus.
    pub damping_value: f64,
}

impl DomainSpec {
    pub fn new(outer_radius: f64, damping_value: f64) -> Result<Self> {
        if !(outer_radius > 1.0) {
            return Err(Error::InvalidDomain(format!(
                "outer radius must exceed the interface radius 1, got {outer_radius}"
            )));
        }
        if !(damping_value >= 0.0) {
            return Err(Error::InvalidDomain(format!(
                "damping must be nonnegative, got {damping_value}"
            )));
        }
        Ok(Self {
            outer_radius,
            interface_radius: 1.0,
            damping_value,
        })
    }

    /// Damping coefficient at radius `r` (1 on the open annulus, 0 inside).
    pub fn damping_at(&self, r: f64) -> f64 {
        if r > 1.0 {
            self.damping_value
        } else {
            0.0
        }
    }
}

impl Default for DomainSpec {
    /// `R0 = 2`, unit damping.
    fn default() -> Self {
        Self {
            outer_radius: 2.0,
            interface_radius: 1.0,
            damping_value: 1.0,
        }
    }
}

/// Uniform radial grid on `[0, R0]` with one node snapped to `r = 1`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub spec: DomainSpec,
    /// Nodes `r_0 = 0 < ... < r_N = R0`.
    pub nodes: Vec<f64>,
    /// Index of the node at the interface `r = 1`.
    pub interface_index: usize,
    /// Uniform spacing.
    pub dr: f64,
    /// Quadrature weights for the measure `r dr` (one per node).
    pub weights: Vec<f64>,
}

/// Build the uniform grid. The node nearest `r = 1` is snapped onto the
/// interface exactly; for `N` proportional to `R0` the snap is a no-op.
pub fn build_grid(spec: &DomainSpec, n: usize) -> Result<RadialGrid> {
    if n < 8 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 8 cells to separate 0 < 1 < R0, got {n}"
        )));
    }
    let r0 = spec.outer_radius;
    let dr = r0 / n as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * dr).collect();
    nodes[n] = r0;
    // snap the nearest node to the interface
    let mut k = (1.0 / dr).round() as usize;
    k = k.clamp(1, n - 1);
    nodes[k] = 1.0;
    if nodes[k - 1] >= 1.0 || nodes[k + 1] <= 1.0 {
        return Err(Error::GridTooCoarse(format!(
            "cannot pin a node at r = 1 with N = {n}, R0 = {r0}"
        )));
    }
    let mut weights = vec![0.0; n + 1];
    for i in 1..n {
        let hl = nodes[i] - nodes[i - 1];
        let hr = nodes[i + 1] - nodes[i];
        weights[i] = nodes[i] * 0.5 * (hl + hr);
    }
    // origin cell [0, h/2] of the measure r dr
    let h0 = nodes[1] - nodes[0];
    weights[0] = h0 * h0 / 8.0;
    let hn = nodes[n] - nodes[n - 1];
    weights[n] = nodes[n] * 0.5 * hn;
    Ok(RadialGrid {
        spec: *spec,
        nodes,
        interface_index: k,
        dr,
        weights,
    })
}

impl RadialGrid {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn outer_radius(&self) -> f64 {
        self.spec.outer_radius
    }

    /// Midpoint damping value on the cell `(r_i, r_{i+1})`.
    pub fn damping_mid(&self, i: usize) -> f64 {
        let rm = 0.5 * (self.nodes[i] + self.nodes[i + 1]);
        self.spec.damping_at(rm)
    }

    /// Weighted L2 quadrature `int f g_conj r dr` for nodal values.
    pub fn quad_l2(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
    }
}

/// Grid fine enough that discretization residuals at frequency `lambda` stay
/// below the physical quasi-mode residual `~1/lambda`: spacing `kappa /
/// lambda^2`, with at least 16 nodes per wavelength as a floor.
pub fn grid_for_lambda(spec: &DomainSpec, lambda: f64, kappa: f64) -> Result<RadialGrid> {
    let wave = 2.0 * std::f64::consts::PI / (16.0 * lambda);
    let dr = (kappa / (lambda * lambda)).min(wave);
    let n_half = (1.0 / dr).ceil() as usize;
    // even split keeps a node exactly on r = 1 when R0 = 2
    let n = (spec.outer_radius * n_half as f64).ceil() as usize;
    build_grid(spec, n.max(64))
}
