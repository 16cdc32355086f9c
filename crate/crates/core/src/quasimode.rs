//! Whispering-gallery quasi-mode construction.
//!
//! For m = alpha n and lambda = lambda_{m,n} (so h = 1/lambda, hbar =
//! h^{1/2}) the bundle starts from the normalized disc eigenfunction on the
//! undamped side, lifts its Neumann trace through the damped annulus with
//! the semiclassical elliptic solver, and then restores exact interface
//! continuity with a cylindrical-wave correction `(a J_m + b Y_m)(lambda r)`
//! times a smooth cutoff supported above the caustic radius m/lambda. The
//! Cauchy data of the correction is solved exactly at r = 1, so both
//! transmission conditions hold to roundoff, and the only surviving
//! residual is the commutator of the cutoff with the Helmholtz operator
//! plus the damped-side source, both of size 1/lambda in energy.

use crate::bessel::{
    bessel_j, bessel_j_prime, bessel_y, bessel_y_prime, bessel_zero, disc_eigenfunction,
    hyperbolicity_ratio,
};
use crate::elliptic::{sobolev_weight, solve_mixed_dn};
use crate::error::{Error, Result};
use crate::field::{ModeField, ModeState};
use crate::grid::RadialGrid;
use crate::operators::ModeOperators;
use crate::C64;

const PI: f64 = std::f64::consts::PI;

/// Norms and interface mismatches of an assembled bundle.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuasiModeReport {
    /// `|(u2 - u1)(1)|`.
    pub dirichlet_mismatch: f64,
    /// `|d_nu u2 - (d_nu u1 + a d_nu v1)|` at the interface.
    pub neumann_mismatch: f64,
    /// `|(v2 - v1)(1)|`.
    pub v_mismatch: f64,
    /// Disc energy norm of the assembled state.
    pub energy_norm: f64,
    /// Annulus-side norms (radial measure).
    pub u1_l2: f64,
    pub u1_h1: f64,
    pub v1_l2: f64,
    pub v1_h1: f64,
    /// Interface trace norms in the H^{1/2} surrogate.
    pub u1_trace_h12: f64,
    pub v_trace_h12: f64,
    /// Correction size `||chi e||_{H1}` over the disc and cutoff source
    /// `||g2||_{L2}`.
    pub correction_h1: f64,
    pub g2_l2: f64,
    /// Cutoff width actually used.
    pub cutoff_width: f64,
}

#[derive(Debug, Clone)]
pub struct QuasiMode {
    pub alpha: u32,
    pub n: u32,
    pub m: u32,
    pub lambda: f64,
    pub h: f64,
    pub hbar: f64,
    /// Annulus displacement (zero inside the disc).
    pub u1: ModeField,
    pub v1: ModeField,
    /// Disc displacement (zero outside the disc).
    pub u2: ModeField,
    pub v2: ModeField,
    /// Residual sources on each side.
    pub g1: ModeField,
    pub g2: ModeField,
    pub corrected: bool,
    pub report: QuasiModeReport,
}

fn smoothstep(t: f64) -> f64 {
    let bump = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Cutoff: 0 below `1 - eps0`, 1 above `1 - eps0/2`, smooth in between.
fn chi(r: f64, eps0: f64) -> f64 {
    smoothstep((r - (1.0 - eps0)) / (eps0 / 2.0))
}

fn chi_derivs(r: f64, eps0: f64) -> (f64, f64) {
    let d = 1e-5 * eps0;
    let p = chi(r + d, eps0);
    let c = chi(r, eps0);
    let q = chi(r - d, eps0);
    ((p - q) / (2.0 * d), (p - 2.0 * c + q) / (d * d))
}

/// Step 0: eigenfunction, elliptic lift, no interface correction yet.
pub fn build_step0(alpha: u32, n: u32, grid: &RadialGrid) -> Result<QuasiMode> {
    let eig = disc_eigenfunction(alpha, n, grid)?;
    let ratio = hyperbolicity_ratio(&eig);
    if ratio > 0.95 {
        return Err(Error::InvalidArgument(format!(
            "mode is not hyperbolically localized: m/lambda = {ratio:.4}"
        )));
    }
    let m = eig.m;
    let lambda = eig.lambda;
    let h = 1.0 / lambda;
    let hbar = h.sqrt();
    // normalized eigenfunction and its Neumann trace at the interface
    let u2 = eig.normalized();
    let f0 = bessel_j_prime(m, lambda)? / eig.l2_norm;
    let lift = solve_mixed_dn(grid, m, hbar, C64::new(f0, 0.0))?;
    // u1 = w0/(1 + i/h); the damped flux then matches the disc flux exactly
    let c1 = C64::new(1.0, 0.0) / C64::new(1.0, 1.0 / h);
    let u1 = ModeField::new(m, lift.w.values.iter().map(|w| w * c1).collect());
    let il = C64::new(0.0, lambda);
    let v1 = ModeField::new(m, u1.values.iter().map(|u| u * il).collect());
    let v2 = ModeField::new(m, u2.values.iter().map(|u| u * il).collect());
    let g1 = v1.clone();
    let g2 = ModeField::zeros(m, grid);
    let k_i = grid.interface_index;
    let c1n = c1.norm();
    let report = QuasiModeReport {
        dirichlet_mismatch: (u2.values[k_i] - u1.values[k_i]).norm(),
        // both sides carry the same prescribed flux f0
        neumann_mismatch: 0.0,
        v_mismatch: lambda * (u2.values[k_i] - u1.values[k_i]).norm(),
        energy_norm: 0.0,
        u1_l2: c1n * lift.norms.l2,
        u1_h1: c1n * lift.norms.h1,
        v1_l2: lambda * c1n * lift.norms.l2,
        v1_h1: lambda * c1n * lift.norms.h1,
        u1_trace_h12: sobolev_weight(m, 0.5) * u1.values[k_i].norm(),
        v_trace_h12: sobolev_weight(m, 0.5) * lambda * u1.values[k_i].norm(),
        correction_h1: 0.0,
        g2_l2: 0.0,
        cutoff_width: 0.0,
        ..Default::default()
    };
    Ok(QuasiMode {
        alpha,
        n,
        m,
        lambda,
        h,
        hbar,
        u1,
        v1,
        u2,
        v2,
        g1,
        g2,
        corrected: false,
        report,
    })
}

/// Steps 1-2: add the exact cylindrical correction so both transmission
/// conditions hold to roundoff.
pub fn build_corrected(alpha: u32, n: u32, grid: &RadialGrid, cutoff_width: f64) -> Result<QuasiMode> {
    if !(cutoff_width > 0.0 && cutoff_width <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "cutoff width must lie in (0, 0.5], got {cutoff_width}"
        )));
    }
    let mut q = build_step0(alpha, n, grid)?;
    let m = q.m;
    let lambda = q.lambda;
    // keep the cutoff support above the caustic radius m/lambda
    let ratio = m as f64 / lambda;
    let eps0 = cutoff_width.min(0.8 * (1.0 - ratio));
    let k_i = grid.interface_index;
    // Cauchy data at r = 1: e(1) closes the Dirichlet gap, e'(1) = 0
    let delta = q.u1.values[k_i] - q.u2.values[k_i];
    let jv = bessel_j(m, lambda)?;
    let yv = bessel_y(m, lambda)?;
    let jp = bessel_j_prime(m, lambda)?;
    let yp = bessel_y_prime(m, lambda)?;
    let wr = jv * yp - jp * yv;
    let wr_exact = 2.0 / (PI * lambda);
    // forward recurrence for Y_m amplifies roundoff with the order (a few
    // 1e-9 relative near m ~ 500), so this is a loose sanity band; the 2x2
    // solve uses the computed pair consistently either way
    if (wr - wr_exact).abs() > 1e-6 * wr_exact {
        return Err(Error::SingularSystem(format!(
            "fundamental pair defect: wronskian {wr} vs {wr_exact}"
        )));
    }
    let a = delta * yp / wr;
    let b = -delta * jp / wr;
    // add chi * e on the disc side and recompute v2
    let il = C64::new(0.0, lambda);
    let mut corr = ModeField::zeros(m, grid);
    let mut g2 = ModeField::zeros(m, grid);
    for (i, &r) in grid.nodes.iter().enumerate() {
        if r > 1.0 {
            break;
        }
        if r < 1.0 - eps0 {
            continue;
        }
        let z = lambda * r;
        let e = a * bessel_j(m, z)? + b * bessel_y(m, z)?;
        let ep = lambda * (a * bessel_j_prime(m, z)? + b * bessel_y_prime(m, z)?);
        let ch = chi(r, eps0);
        let (chp, chpp) = chi_derivs(r, eps0);
        corr.values[i] = ch * e;
        if chp.abs() > 0.0 || chpp.abs() > 0.0 {
            // (h^2 L_m + 1)(chi e) = h^2 (chi'' e + 2 chi' e' + chi' e / r)
            g2.values[i] = q.h * (chpp * e + 2.0 * chp * ep + chp * e / r);
        }
    }
    for i in 0..grid.node_count() {
        q.u2.values[i] += corr.values[i];
        q.v2.values[i] = q.u2.values[i] * il;
    }
    q.g2 = g2;
    q.corrected = true;
    // mismatches from the assembled fields
    let scale = q.u1.values[k_i].norm().max(q.u2.values[k_i].norm());
    q.report.dirichlet_mismatch = (q.u2.values[k_i] - q.u1.values[k_i]).norm() / scale.max(1e-300);
    q.report.v_mismatch =
        (q.v2.values[k_i] - q.v1.values[k_i]).norm() / (lambda * scale).max(1e-300);
    // flux gap: the correction leaves e'(1) = 0 up to the 2x2 solve roundoff
    let ep1 = lambda * (a * jp + b * yp);
    q.report.neumann_mismatch = ep1.norm() / (lambda * scale).max(1e-300);
    q.report.correction_h1 = {
        let h1 = corr.h1_seminorm(grid);
        let l2 = corr.l2_norm(grid);
        (h1 * h1 + l2 * l2).sqrt()
    };
    q.report.g2_l2 = q.g2.l2_norm(grid);
    q.report.cutoff_width = eps0;
    q.report.energy_norm = q.state().energy_norm(grid);
    Ok(q)
}

impl QuasiMode {
    /// Combined state: disc values inside, annulus values outside, disc
    /// value at the interface node.
    pub fn state(&self) -> ModeState {
        let n = self.u2.values.len();
        let mut u = self.u2.values.clone();
        let mut v = self.v2.values.clone();
        for i in 0..n {
            if self.u1.values[i].norm() > 0.0 && u[i].norm() == 0.0 {
                u[i] = self.u1.values[i];
                v[i] = self.v1.values[i];
            }
        }
        ModeState::new(ModeField::new(self.m, u), ModeField::new(self.m, v)).unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualNorms {
    pub norm_u: f64,
    pub norm_f: f64,
    /// `lambda * norm_f / norm_u`, the saturation constant.
    pub ratio: f64,
}

/// Energy norm of `F = (i lambda - A) U` for the assembled bundle.
pub fn residual_norms(q: &QuasiMode, ops: &ModeOperators) -> Result<ResidualNorms> {
    let grid = &ops.grid;
    if grid.dr > 2.0 * PI / (10.0 * q.lambda) {
        return Err(Error::GridTooCoarse(format!(
            "need 10 nodes per wavelength at lambda = {}, grid spacing {}",
            q.lambda, grid.dr
        )));
    }
    let state = q.state();
    let u = ops.restrict(&state.u)?;
    let v = ops.restrict(&state.v)?;
    let il = C64::new(0.0, q.lambda);
    let (au, av) = ops.generator_apply(&u, &v);
    let fu: Vec<C64> = u
        .iter()
        .zip(&au)
        .map(|(ui, aui)| il * ui - aui)
        .collect();
    let fv: Vec<C64> = v
        .iter()
        .zip(&av)
        .map(|(vi, avi)| il * vi - avi)
        .collect();
    let norm_u = ops.energy_form(&u, &v).sqrt();
    let norm_f = ops.energy_form(&fu, &fv).sqrt();
    Ok(ResidualNorms {
        norm_u,
        norm_f,
        ratio: q.lambda * norm_f / norm_u,
    })
}

/// One row of the annulus a priori scaling table.
#[derive(Debug, Clone, Copy)]
pub struct AprioriSample {
    pub h: f64,
    pub grad_v1: f64,
    pub v1: f64,
    pub grad_u1: f64,
    pub u1: f64,
    pub u1_trace: f64,
    pub v_trace: f64,
}

pub fn apriori_check(q: &QuasiMode) -> AprioriSample {
    AprioriSample {
        h: q.h,
        grad_v1: q.report.v1_h1,
        v1: q.report.v1_l2,
        grad_u1: q.report.u1_h1,
        u1: q.report.u1_l2,
        u1_trace: q.report.u1_trace_h12,
        v_trace: q.report.v_trace_h12,
    }
}

/// Measured log-log exponents of the scaling table over a family of
/// samples, ordered as (grad v1, v1, grad u1, u1, u1 trace, v trace).
pub fn apriori_exponents(samples: &[AprioriSample]) -> Result<[f64; 6]> {
    let h: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let pick = |f: fn(&AprioriSample) -> f64| -> Result<f64> {
        let y: Vec<f64> = samples.iter().map(f).collect();
        Ok(crate::fit::loglog_slope(&h, &y)?.slope)
    };
    Ok([
        pick(|s| s.grad_v1)?,
        pick(|s| s.v1)?,
        pick(|s| s.grad_u1)?,
        pick(|s| s.u1)?,
        pick(|s| s.u1_trace)?,
        pick(|s| s.v_trace)?,
    ])
}

/// Grid refinement parameter for quasi-mode measurements at this frequency:
/// spacing ~ kappa/lambda^2 keeps the discretization residual below the
/// 1/lambda construction residual.
pub fn default_grid(alpha: u32, n: u32, kappa: f64) -> Result<RadialGrid> {
    let lambda = bessel_zero(alpha * n, n)?.value;
    crate::grid::grid_for_lambda(&crate::grid::DomainSpec::default(), lambda, kappa)
}
