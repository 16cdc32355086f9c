//! Per-mode discrete operators in conservative flux form.
//!
//! For angular mode m the scalar operator is `L_m = d_rr + r^{-1} d_r -
//! m^2/r^2` with Dirichlet at `r = R0`, regularity at the origin (value
//! pinned to 0 for m != 0, a finite-volume flux cell for m = 0). The weak
//! form uses the measure `r dr`, so the stiffness form `S` satisfies
//! `u^H S u = int (|u'|^2 + m^2 |u|^2/r^2) r dr` and `L_m = -W^{-1} S` with
//! `W` the diagonal mass. The damped stiffness `S_a` carries the cell
//! damping values, which makes the generator exactly dissipative:
//! `Re <A U, U>_G = -v^H S_a v` in floating point up to roundoff.

use crate::error::{Error, Result};
use crate::field::{ModeField, ModeState};
use crate::grid::{DomainSpec, RadialGrid};
use crate::linalg::SymTridiag;
use crate::C64;

#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub m: u32,
    pub grid: RadialGrid,
    /// Stiffness of `-L_m` on active nodes.
    pub stiffness: SymTridiag,
    /// Stiffness of `-div(a grad .)` on active nodes.
    pub damped_stiffness: SymTridiag,
    /// Diagonal mass (r-weighted quadrature weights on active nodes).
    pub mass: Vec<f64>,
    /// Index of the first active node (0 for m = 0, 1 otherwise).
    pub first_dof: usize,
}

/// Assemble stiffness, damped stiffness and mass for one angular mode.
pub fn assemble_mode_operators(
    grid: &RadialGrid,
    spec: &DomainSpec,
    m: u32,
) -> Result<ModeOperators> {
    if (grid.spec.outer_radius - spec.outer_radius).abs() > 1e-14
        || (grid.spec.damping_value - spec.damping_value).abs() > 1e-14
    {
        return Err(Error::GridMismatch(
            "grid was built from a different domain".into(),
        ));
    }
    let nn = grid.node_count();
    let last = nn - 1; // Dirichlet node, eliminated
    let first_dof = if m == 0 { 0 } else { 1 };
    let ndof = last - first_dof;
    let mut s = SymTridiag::zeros(ndof);
    let mut sa = SymTridiag::zeros(ndof);
    let dof = |node: usize| -> Option<usize> {
        if node >= first_dof && node < last {
            Some(node - first_dof)
        } else {
            None
        }
    };
    // flux terms, one per cell
    for i in 0..nn - 1 {
        let h = grid.nodes[i + 1] - grid.nodes[i];
        let rm = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
        let kc = rm / h;
        let ka = spec.damping_at(rm) * kc;
        let dl = dof(i);
        let dr = dof(i + 1);
        if let Some(p) = dl {
            s.diag[p] += kc;
            sa.diag[p] += ka;
        }
        if let Some(q) = dr {
            s.diag[q] += kc;
            sa.diag[q] += ka;
        }
        if let (Some(p), Some(q)) = (dl, dr) {
            debug_assert_eq!(q, p + 1);
            s.off[p] -= kc;
            sa.off[p] -= ka;
        }
    }
    // angular terms, cell-averaged damping at the nodes
    let m2 = (m as f64) * (m as f64);
    if m > 0 {
        for i in first_dof..last {
            let p = i - first_dof;
            let r = grid.nodes[i];
            let hl = grid.nodes[i] - grid.nodes[i - 1];
            let hr = grid.nodes[i + 1] - grid.nodes[i];
            let al = spec.damping_at(0.5 * (grid.nodes[i - 1] + grid.nodes[i]));
            let ar = spec.damping_at(0.5 * (grid.nodes[i] + grid.nodes[i + 1]));
            s.diag[p] += m2 * grid.weights[i] / (r * r);
            sa.diag[p] += m2 * r * 0.5 * (al * hl + ar * hr) / (r * r);
        }
    }
    let mass = grid.weights[first_dof..last].to_vec();
    Ok(ModeOperators {
        m,
        grid: grid.clone(),
        stiffness: s,
        damped_stiffness: sa,
        mass,
        first_dof,
    })
}

impl ModeOperators {
    pub fn ndof(&self) -> usize {
        self.mass.len()
    }

    /// Restrict a nodal field to the active degrees of freedom.
    pub fn restrict(&self, f: &ModeField) -> Result<Vec<C64>> {
        f.check_grid(&self.grid)?;
        if f.m != self.m {
            return Err(Error::InvalidArgument(format!(
                "field mode {} does not match operator mode {}",
                f.m, self.m
            )));
        }
        let last = self.grid.node_count() - 1;
        Ok(f.values[self.first_dof..last].to_vec())
    }

    /// Embed active-node values back into a full nodal field (eliminated
    /// nodes are zero).
    pub fn embed(&self, x: &[C64]) -> ModeField {
        let mut values = vec![C64::new(0.0, 0.0); self.grid.node_count()];
        values[self.first_dof..self.first_dof + x.len()].copy_from_slice(x);
        ModeField::new(self.m, values)
    }

    /// `L_m u = -W^{-1} S u` on active nodes.
    pub fn laplacian_apply(&self, u: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); u.len()];
        self.stiffness.apply(u, &mut y);
        for (yi, w) in y.iter_mut().zip(&self.mass) {
            *yi = -*yi / *w;
        }
        y
    }

    /// `K_m(u, v) = -W^{-1}(S u + S_a v)`, the damped divergence-form block.
    pub fn coupled_flux(&self, u: &[C64], v: &[C64]) -> Vec<C64> {
        let n = u.len();
        let mut y = vec![C64::new(0.0, 0.0); n];
        let mut t = vec![C64::new(0.0, 0.0); n];
        self.stiffness.apply(u, &mut y);
        self.damped_stiffness.apply(v, &mut t);
        for i in 0..n {
            y[i] = -(y[i] + t[i]) / self.mass[i];
        }
        y
    }

    /// Generator block `A_m(u, v) = (v, K_m(u, v))`.
    pub fn generator_apply(&self, u: &[C64], v: &[C64]) -> (Vec<C64>, Vec<C64>) {
        (v.to_vec(), self.coupled_flux(u, v))
    }

    /// Energy form `<(u,v), (u,v)>_G = u^H S u + v^H W v` (radial measure,
    /// no angular factor).
    pub fn energy_form(&self, u: &[C64], v: &[C64]) -> f64 {
        let su = self.stiffness.form(u);
        let wv: f64 = v
            .iter()
            .zip(&self.mass)
            .map(|(z, w)| z.norm_sqr() * w)
            .sum();
        su + wv
    }

    pub fn energy_norm(&self, state: &ModeState) -> Result<f64> {
        let u = self.restrict(&state.u)?;
        let v = self.restrict(&state.v)?;
        Ok(self.energy_form(&u, &v).sqrt())
    }

    /// Graph norm `||U||_H + ||A U||_H`.
    pub fn graph_norm(&self, state: &ModeState) -> Result<f64> {
        let u = self.restrict(&state.u)?;
        let v = self.restrict(&state.v)?;
        let (au, av) = self.generator_apply(&u, &v);
        Ok(self.energy_form(&u, &v).sqrt() + self.energy_form(&au, &av).sqrt())
    }

    /// Dissipation form `v^H S_a v = int a |grad v|^2 r dr` discretely.
    pub fn dissipation_form(&self, v: &[C64]) -> f64 {
        self.damped_stiffness.form(v)
    }

    /// `Re <A U, U>_G`; equals `-dissipation_form(v)` up to roundoff.
    pub fn generator_energy_product(&self, u: &[C64], v: &[C64]) -> f64 {
        let (au, av) = self.generator_apply(u, v);
        // Re(<S au, u> + <W av, v>) with the G pairing
        let n = u.len();
        let mut su = vec![C64::new(0.0, 0.0); n];
        self.stiffness.apply(&au, &mut su);
        let mut s = 0.0;
        for i in 0..n {
            s += (su[i].conj() * u[i]).re;
            s += self.mass[i] * (av[i].conj() * v[i]).re;
        }
        s
    }
}
