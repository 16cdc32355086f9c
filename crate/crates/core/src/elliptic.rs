//! Semiclassical elliptic solver on the damped annulus.
//!
//! Per mode m the problem is `(hbar^2 L_m - i) w = 0` on `1 < r < R0` with
//! Neumann data `w'(1) = F` at the interface and Dirichlet `w(R0) = 0`. The
//! weak form on the annulus subgrid reads `(hbar^2 S + i W) w = -hbar^2 F e_I`
//! with `e_I` the interface basis function, so the Neumann condition is
//! enforced with the same flux stencil the generator uses.
//!
//! The Dirichlet-to-Neumann value is defined through the implied weak flux
//! of the Dirichlet solve, which makes the Dirichlet and Neumann solves exact
//! inverses of each other at the interface.

use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::grid::RadialGrid;
use crate::linalg::{SymTridiag, TridiagLu};
use crate::C64;
use std::collections::BTreeMap;

/// Radial-measure norms of the annulus solution.
#[derive(Debug, Clone, Copy)]
pub struct EllipticNorms {
    /// `||w||_{L2(Omega1)}` (measure r dr, no angular factor).
    pub l2: f64,
    /// `||grad w||_{L2(Omega1)}` including the angular `m^2/r^2` part.
    pub h1: f64,
    /// `|w(1)|`.
    pub trace: f64,
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub hbar: f64,
    pub m: u32,
    /// Solution on the full grid; identically zero inside the disc.
    pub w: ModeField,
    /// The prescribed Neumann value `w'(1)`.
    pub neumann_data: C64,
    pub norms: EllipticNorms,
}

/// Annulus stiffness (flux plus angular part) and diagonal mass on the
/// active nodes `interface..last-1`.
fn annulus_forms(grid: &RadialGrid, m: u32) -> (SymTridiag, Vec<f64>) {
    let k_i = grid.interface_index;
    let last = grid.node_count() - 1;
    let ndof = last - k_i;
    let mut s = SymTridiag::zeros(ndof);
    let mut w = vec![0.0; ndof];
    let m2 = (m as f64) * (m as f64);
    for i in k_i..last {
        let p = i - k_i;
        let h = grid.nodes[i + 1] - grid.nodes[i];
        let rm = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
        let kc = rm / h;
        s.diag[p] += kc;
        if i + 1 < last {
            s.diag[p + 1] += kc;
            s.off[p] -= kc;
        }
        // node mass from the annulus side only (half cell at the interface)
        let r = grid.nodes[i];
        let right_half = r * 0.5 * h;
        let left_half = if i > k_i {
            r * 0.5 * (grid.nodes[i] - grid.nodes[i - 1])
        } else {
            0.0
        };
        w[p] += right_half + left_half;
    }
    for i in k_i..last {
        let p = i - k_i;
        let r = grid.nodes[i];
        s.diag[p] += m2 * w[p] / (r * r);
    }
    (s, w)
}

fn resolution_guard(grid: &RadialGrid, m: u32, hbar: f64) -> Result<()> {
    if !(hbar > 0.0 && hbar <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "hbar must lie in (0, 1], got {hbar}"
        )));
    }
    let scale = hbar.min(1.0 / m.max(1) as f64);
    if grid.dr > scale / 8.0 {
        return Err(Error::GridTooCoarse(format!(
            "boundary layer of width {scale:.3e} needs dr <= {:.3e}, grid has {:.3e}",
            scale / 8.0,
            grid.dr
        )));
    }
    Ok(())
}

fn factor_annulus(
    s: &SymTridiag,
    w: &[f64],
    hbar: f64,
) -> Result<TridiagLu> {
    let h2 = hbar * hbar;
    let n = s.n();
    let diag: Vec<C64> = (0..n)
        .map(|i| C64::new(h2 * s.diag[i], w[i]))
        .collect();
    let off: Vec<C64> = s.off.iter().map(|&o| C64::new(h2 * o, 0.0)).collect();
    TridiagLu::new(&off, &diag, &off)
}

fn norms_of(grid: &RadialGrid, m: u32, sol: &[C64], wts: &[f64]) -> EllipticNorms {
    let k_i = grid.interface_index;
    let last = grid.node_count() - 1;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for i in k_i..last {
        let p = i - k_i;
        l2 += sol[p].norm_sqr() * wts[p];
        let r = grid.nodes[i];
        let m2 = (m as f64) * (m as f64);
        h1 += m2 * sol[p].norm_sqr() / (r * r) * wts[p];
    }
    for i in k_i..last {
        let p = i - k_i;
        let h = grid.nodes[i + 1] - grid.nodes[i];
        let rm = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
        let next = if i + 1 < last {
            sol[p + 1]
        } else {
            C64::new(0.0, 0.0)
        };
        let d = (next - sol[p]) / h;
        h1 += d.norm_sqr() * rm * h;
    }
    EllipticNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
        trace: sol[0].norm(),
    }
}

/// Solve the mixed problem with Neumann data `F` at the interface.
pub fn solve_mixed_dn(grid: &RadialGrid, m: u32, hbar: f64, f: C64) -> Result<EllipticSolution> {
    resolution_guard(grid, m, hbar)?;
    let (s, wts) = annulus_forms(grid, m);
    let lu = factor_annulus(&s, &wts, hbar)?;
    let mut rhs = vec![C64::new(0.0, 0.0); s.n()];
    rhs[0] = -hbar * hbar * f;
    let sol = lu.solve(&rhs);
    let norms = norms_of(grid, m, &sol, &wts);
    let k_i = grid.interface_index;
    let mut values = vec![C64::new(0.0, 0.0); grid.node_count()];
    values[k_i..k_i + sol.len()].copy_from_slice(&sol);
    Ok(EllipticSolution {
        hbar,
        m,
        w: ModeField::new(m, values),
        neumann_data: f,
        norms,
    })
}

/// Per-mode surrogate for the `H^s` boundary norm on the circle.
pub fn sobolev_weight(m: u32, s: f64) -> f64 {
    (1.0 + (m as f64) * (m as f64)).powf(s / 2.0)
}

/// Measured a priori constant `(hbar ||grad w|| + ||w||) / (hbar |F|_{-1/2})`.
pub fn apriori_constant(sol: &EllipticSolution) -> f64 {
    let fw = sobolev_weight(sol.m, -0.5) * sol.neumann_data.norm();
    (sol.hbar * sol.norms.h1 + sol.norms.l2) / (sol.hbar * fw)
}

/// The semiclassical DN value `nu = hbar w'(1)` for Dirichlet data `w(1)=1`,
/// computed as the implied weak flux of the Dirichlet solve.
pub fn dn_map_mode(grid: &RadialGrid, m: u32, hbar: f64) -> Result<C64> {
    resolution_guard(grid, m, hbar)?;
    let (s, wts) = annulus_forms(grid, m);
    let n = s.n();
    if n < 3 {
        return Err(Error::GridTooCoarse("annulus has too few nodes".into()));
    }
    let h2 = hbar * hbar;
    // interior solve with the interface value pinned to 1
    let diag: Vec<C64> = (1..n).map(|i| C64::new(h2 * s.diag[i], wts[i])).collect();
    let off: Vec<C64> = (1..n - 1).map(|i| C64::new(h2 * s.off[i], 0.0)).collect();
    let lu = TridiagLu::new(&off, &diag, &off)?;
    let mut rhs = vec![C64::new(0.0, 0.0); n - 1];
    rhs[0] = C64::new(-h2 * s.off[0], 0.0);
    let interior = lu.solve(&rhs);
    // implied Neumann flux from the interface row of the mixed system
    let row = C64::new(h2 * s.diag[0], wts[0]) + C64::new(h2 * s.off[0], 0.0) * interior[0];
    let f_implied = -row / h2;
    Ok(hbar * f_implied)
}

/// Principal symbol of the DN map on the decaying branch: `-sqrt(hbar^2 m^2
/// + i)` with the square root of positive real part. At m = 0 this is
/// `-(1+i)/sqrt(2)`, the half-space boundary-layer exponent.
pub fn dn_symbol(m: u32, hbar: f64) -> C64 {
    let z = C64::new(hbar * hbar * (m as f64) * (m as f64), 1.0);
    -z.sqrt()
}

/// Dirichlet trace magnitudes `|w_m(1)|` for a band of Neumann-driven modes,
/// probed over `0..=probe_max`. Undriven modes are identically zero because
/// the angular modes decouple.
pub fn trace_localization_profile(
    driven: &BTreeMap<u32, C64>,
    hbar: f64,
    grid: &RadialGrid,
    probe_max: u32,
) -> Result<BTreeMap<u32, f64>> {
    let mut out = BTreeMap::new();
    for m in 0..=probe_max {
        let v = match driven.get(&m) {
            Some(&f) if f.norm() > 0.0 => solve_mixed_dn(grid, m, hbar, f)?.norms.trace,
            _ => 0.0,
        };
        out.insert(m, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    fn fine_grid(hbar: f64, m: u32) -> RadialGrid {
        let spec = DomainSpec::default();
        let scale = hbar.min(1.0 / m.max(1) as f64);
        let n = ((2.0 / (scale / 10.0)).ceil() as usize).max(64);
        let n = n + n % 2; // even keeps a node on r = 1
        build_grid(&spec, n).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = fine_grid(0.1, 0);
        let sol = solve_mixed_dn(&g, 0, 0.1, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(sol.norms.l2, 0.0);
        assert_eq!(sol.norms.trace, 0.0);
    }

    #[test]
    fn linearity_in_the_data() {
        let g = fine_grid(0.1, 3);
        let f = C64::new(0.7, -0.2);
        let s1 = solve_mixed_dn(&g, 3, 0.1, f).unwrap();
        let s2 = solve_mixed_dn(&g, 3, 0.1, 2.0 * f).unwrap();
        for (a, b) in s1.w.values.iter().zip(&s2.w.values) {
            assert!((2.0 * a - b).norm() <= 1e-13 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn interior_residual_small() {
        // (hbar^2 L_m - i) w = 0 away from the interface row
        let hbar = 0.08;
        let m = 5u32;
        let g = fine_grid(hbar, m);
        let sol = solve_mixed_dn(&g, m, hbar, C64::new(1.0, 0.0)).unwrap();
        let k_i = g.interface_index;
        let last = g.node_count() - 1;
        let h2 = hbar * hbar;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in k_i + 1..last {
            let r = g.nodes[i];
            let hl = g.nodes[i] - g.nodes[i - 1];
            let wl = sol.w.values[i - 1];
            let wc = sol.w.values[i];
            let wr = if i + 1 < g.node_count() {
                sol.w.values[i + 1]
            } else {
                C64::new(0.0, 0.0)
            };
            let lap = (wr - 2.0 * wc + wl) / (hl * hl)
                + (wr - wl) / (2.0 * hl * r)
                - (m as f64).powi(2) / (r * r) * wc;
            let res = h2 * lap - C64::new(0.0, 1.0) * wc;
            worst = worst.max(res.norm());
            scale = scale.max(wc.norm());
        }
        assert!(worst < 1e-3 * scale, "residual {worst} vs scale {scale}");
    }

    #[test]
    fn boundary_layer_decay() {
        let hbar = 0.05;
        let g = fine_grid(hbar, 0);
        let sol = solve_mixed_dn(&g, 0, hbar, C64::new(1.0, 0.0)).unwrap();
        let at = |r: f64| sol.w.sample(&g, r).norm();
        assert!(at(1.0 + 10.0 * hbar) < 1e-2 * at(1.0));
        assert!(at(1.0 + 20.0 * hbar) < 1e-4 * at(1.0));
    }

    #[test]
    fn apriori_constant_stable_under_hbar_halving() {
        // the bound saturates near m ~ 1/hbar, so the per-hbar object is the
        // max over the mode range
        let mut cs = Vec::new();
        for &hbar in &[0.1_f64, 0.05, 0.025] {
            let m_top = (1.0 / hbar).round() as u32;
            let g = fine_grid(hbar, m_top);
            let mut cmax = 0.0_f64;
            for &m in &[0u32, m_top / 2, m_top] {
                let sol = solve_mixed_dn(&g, m, hbar, C64::new(1.0, 0.0)).unwrap();
                cmax = cmax.max(apriori_constant(&sol));
            }
            cs.push(cmax);
        }
        for &c in &cs {
            assert!(c > 0.0 && c <= 10.0, "C = {c}");
        }
        let spread = cs.iter().cloned().fold(0.0, f64::max)
            / cs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.5, "constants {cs:?}");
    }

    #[test]
    fn dn_matches_half_space_symbol_at_m0() {
        // nu -> -(1+i)/sqrt(2), the decaying branch of -sqrt(i)
        let hbar = 0.02;
        let g = fine_grid(hbar, 0);
        let nu = dn_map_mode(&g, 0, hbar).unwrap();
        let sym = dn_symbol(0, hbar);
        assert!((sym + C64::new(1.0, 1.0) / 2.0_f64.sqrt()).norm() < 1e-15);
        assert!((nu - sym).norm() < 5.0 * hbar, "nu {nu} vs {sym}");
    }

    #[test]
    fn dn_symbol_error_is_order_hbar() {
        let mut gaps = Vec::new();
        for &hbar in &[0.08_f64, 0.04, 0.02] {
            let m = (1.0 / hbar).round() as u32; // hbar m = 1
            let g = fine_grid(hbar, m);
            let nu = dn_map_mode(&g, m, hbar).unwrap();
            gaps.push((nu - dn_symbol(m, hbar)).norm() / hbar);
        }
        // gap/hbar stays bounded as hbar shrinks
        for &gph in &gaps {
            assert!(gph < 5.0, "gaps {gaps:?}");
        }
    }

    #[test]
    fn dirichlet_neumann_solves_are_exact_inverses() {
        let hbar = 0.05;
        for &m in &[0u32, 4, 17] {
            let g = fine_grid(hbar, m);
            let nu = dn_map_mode(&g, m, hbar).unwrap();
            let sol = solve_mixed_dn(&g, m, hbar, C64::new(1.0, 0.0)).unwrap();
            let prod = sol.norms.trace * nu.norm();
            assert!(
                (prod - hbar).abs() < 1e-8 * hbar,
                "m={m}: |w(1)| |nu| = {prod} vs hbar {hbar}"
            );
        }
    }

    #[test]
    fn dn_grows_linearly_for_large_hbar_m() {
        let hbar = 0.05;
        let g = fine_grid(hbar, 80);
        let nu1 = dn_map_mode(&g, 40, hbar).unwrap(); // hbar m = 2
        let nu2 = dn_map_mode(&g, 80, hbar).unwrap(); // hbar m = 4
        let slope = (nu2.norm() / nu1.norm()).ln() / 2.0_f64.ln();
        assert!((slope - 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn trace_localization_band() {
        let hbar = 0.1;
        let g = fine_grid(hbar, 60);
        let mut driven = BTreeMap::new();
        for m in 40..=60u32 {
            driven.insert(m, C64::new(1.0, 0.0));
        }
        let prof = trace_localization_profile(&driven, hbar, &g, 100).unwrap();
        assert_eq!(prof[&100], 0.0);
        assert_eq!(prof[&10], 0.0);
        // within the band the trace follows hbar/|nu|
        for &m in &[40u32, 50, 60] {
            let nu = dn_map_mode(&g, m, hbar).unwrap();
            let want = hbar / nu.norm();
            assert!(
                (prof[&m] - want).abs() < 1e-8 * want,
                "m={m}: {} vs {want}",
                prof[&m]
            );
        }
        // ratios decrease as hbar m grows across the band
        assert!(prof[&60] < prof[&40]);
    }

    #[test]
    fn coarse_grid_rejected() {
        let spec = DomainSpec::default();
        let g = build_grid(&spec, 64).unwrap();
        assert!(solve_mixed_dn(&g, 0, 0.02, C64::new(1.0, 0.0)).is_err());
    }
}
