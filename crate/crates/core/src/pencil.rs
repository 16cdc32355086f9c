//! Resolvent norms and spectra of the damped generator, one angular mode at
//! a time.
//!
//! The shifted generator `i lambda - A_m` reduces to the quadratic pencil
//! `P(lambda) = S + i lambda S_a - lambda^2 W` acting on the displacement
//! block: eliminating v from `(i lambda - A_m)(u, v) = (f, g)` gives
//! `P(lambda) u = W g + i lambda W f + S_a f` and `v = i lambda u - f`.
//! Operator norms are measured in the energy inner product
//! `<(u,v),(u,v)>_G = u^H S u + v^H W v`.

use crate::error::{Error, Result};
use crate::grid::{build_grid, grid_for_lambda, DomainSpec};
use crate::linalg::{dense_solve, hessenberg_eigenvalues, TridiagLu};
use crate::operators::{assemble_mode_operators, ModeOperators};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Factored pencil `P(lambda)` for one mode and one real frequency, with
/// forward and energy-adjoint solves.
pub struct PencilSolver<'a> {
    pub ops: &'a ModeOperators,
    pub lambda: f64,
    lu: TridiagLu,
}

impl<'a> PencilSolver<'a> {
    pub fn new(ops: &'a ModeOperators, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::InvalidArgument(
                "pencil frequency must be finite and nonzero".into(),
            ));
        }
        let n = ops.ndof();
        let s = &ops.stiffness;
        let sa = &ops.damped_stiffness;
        let mut d = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            d.push(c(s.diag[i] - lambda * lambda * ops.mass[i], lambda * sa.diag[i]));
        }
        for i in 0..n.saturating_sub(1) {
            off.push(c(s.off[i], lambda * sa.off[i]));
        }
        let lu = TridiagLu::new(&off, &d, &off)?;
        Ok(Self { ops, lambda, lu })
    }

    /// Solve `(i lambda - A_m)(u, v) = (f, g)`.
    pub fn solve(&self, f: &[C64], g: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.ops.ndof();
        let il = c(0.0, self.lambda);
        let mut rhs = vec![c(0.0, 0.0); n];
        self.ops.damped_stiffness.apply(f, &mut rhs);
        for i in 0..n {
            rhs[i] += self.ops.mass[i] * (g[i] + il * f[i]);
        }
        let u = self.lu.solve(&rhs);
        let v: Vec<C64> = u.iter().zip(f).map(|(&ui, &fi)| il * ui - fi).collect();
        (u, v)
    }

    /// Solve `(-i lambda - A_m^*)(u, v) = (f, g)` where `A_m^*` is the
    /// adjoint in the energy inner product. The system matrix is the
    /// elementwise conjugate of `P(lambda)`, so the same factorization
    /// serves.
    pub fn solve_adjoint(&self, f: &[C64], g: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.ops.ndof();
        let il = c(0.0, self.lambda);
        let mut rhs = vec![c(0.0, 0.0); n];
        self.ops.damped_stiffness.apply(f, &mut rhs);
        for i in 0..n {
            rhs[i] = rhs[i] - self.ops.mass[i] * (g[i] + il * f[i]);
        }
        let u = self.lu.solve_conj(&rhs);
        let v: Vec<C64> = u.iter().zip(f).map(|(&ui, &fi)| fi + il * ui).collect();
        (u, v)
    }
}

/// Sesquilinear energy pairing `<a, b>_G = b_u^H S a_u + b_v^H W a_v`.
fn g_inner(ops: &ModeOperators, au: &[C64], av: &[C64], bu: &[C64], bv: &[C64]) -> C64 {
    let n = ops.ndof();
    let mut sau = vec![c(0.0, 0.0); n];
    ops.stiffness.apply(au, &mut sau);
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        acc += bu[i].conj() * sau[i];
        acc += ops.mass[i] * bv[i].conj() * av[i];
    }
    acc
}

fn check_resolution(ops: &ModeOperators, lambda: f64) -> Result<()> {
    let dr = ops.grid.dr;
    let need = 2.0 * std::f64::consts::PI / (10.0 * lambda.abs().max(1.0));
    if dr > need {
        return Err(Error::GridTooCoarse(format!(
            "dr = {dr:.3e} exceeds wavelength resolution {need:.3e} at frequency {lambda}"
        )));
    }
    Ok(())
}

/// Energy-operator norm of `(i lambda - A_m)^{-1}` by power iteration on the
/// G-self-adjoint product `(M^*)^{-1} M^{-1}` with `M = i lambda - A_m`.
/// The iterate converges to the largest squared singular value of the
/// resolvent measured in the energy norm; the start vector is seeded so runs
/// are reproducible.
pub fn resolvent_norm(ops: &ModeOperators, lambda: f64) -> Result<f64> {
    check_resolution(ops, lambda)?;
    let pencil = PencilSolver::new(ops, lambda)?;
    let n = ops.ndof();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0042);
    let mut wu: Vec<C64> = (0..n)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut wv: Vec<C64> = (0..n)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mut rho_prev = 0.0_f64;
    let mut rho = 0.0_f64;
    for iter in 0..500 {
        let nrm = g_inner(ops, &wu, &wv, &wu, &wv).re.sqrt();
        if nrm == 0.0 {
            return Err(Error::NoConvergence("power iterate vanished".into()));
        }
        for z in wu.iter_mut().chain(wv.iter_mut()) {
            *z /= nrm;
        }
        let (yu, yv) = pencil.solve(&wu, &wv);
        let (xu, xv) = pencil.solve_adjoint(&yu, &yv);
        rho = g_inner(ops, &xu, &xv, &wu, &wv).re;
        if rho <= 0.0 {
            return Err(Error::NoConvergence(
                "resolvent power iteration lost positivity".into(),
            ));
        }
        let done = iter >= 8 && (rho - rho_prev).abs() <= 1e-10 * rho;
        rho_prev = rho;
        wu = xu;
        wv = xv;
        if done {
            break;
        }
    }
    if (rho - rho_prev).abs() > 1e-4 * rho {
        return Err(Error::NoConvergence(
            "resolvent power iteration did not settle".into(),
        ));
    }
    Ok(rho.sqrt())
}

/// Resolvent norms over a frequency range and a set of angular modes, with
/// the per-frequency maximum across modes.
#[derive(Debug, Clone)]
pub struct ResolventScan {
    pub lambdas: Vec<f64>,
    pub modes: Vec<u32>,
    /// `per_mode[i][j]` is the norm at `lambdas[i]` for `modes[j]`.
    pub per_mode: Vec<Vec<f64>>,
    /// Max over modes at each frequency.
    pub envelope: Vec<f64>,
}

/// Scan the resolvent norm on a fresh frequency-adapted grid per lambda.
/// `kappa` controls the pollution budget `dr ~ kappa / lambda^2`.
pub fn resolvent_scan(
    spec: &DomainSpec,
    lambdas: &[f64],
    modes: &[u32],
    kappa: f64,
) -> Result<ResolventScan> {
    if lambdas.is_empty() || modes.is_empty() {
        return Err(Error::InvalidArgument(
            "scan needs at least one frequency and one mode".into(),
        ));
    }
    let mut per_mode = Vec::with_capacity(lambdas.len());
    let mut envelope = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let grid = grid_for_lambda(spec, lam, kappa)?;
        let mut row = Vec::with_capacity(modes.len());
        for &m in modes {
            let ops = assemble_mode_operators(&grid, spec, m)?;
            row.push(resolvent_norm(&ops, lam)?);
        }
        envelope.push(row.iter().cloned().fold(0.0, f64::max));
        per_mode.push(row);
    }
    Ok(ResolventScan {
        lambdas: lambdas.to_vec(),
        modes: modes.to_vec(),
        per_mode,
        envelope,
    })
}

/// One Ritz eigenpair of the damped generator.
#[derive(Debug, Clone, Copy)]
pub struct ModeEigenvalue {
    pub value: C64,
    /// Energy-norm residual `||(A_m - mu) V|| / ||V||`.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub m: u32,
    pub shift: C64,
    /// Sorted by distance to the shift.
    pub eigenvalues: Vec<ModeEigenvalue>,
}

/// Eigenvalues of `A_m` near a complex shift by shift-invert Arnoldi.
///
/// The inverse `(A_m - sigma)^{-1}` again reduces to a tridiagonal solve,
/// this time with `Q(sigma) = S + sigma S_a + sigma^2 W`. Ritz values
/// `theta` of the inverse map back through `mu = sigma + 1/theta`; each pair
/// is certified by an explicit residual of the generator itself.
pub fn spectrum_mode(ops: &ModeOperators, shift: C64, count: usize) -> Result<SpectrumResult> {
    let n = ops.ndof();
    if count == 0 || count > 25 {
        return Err(Error::InvalidArgument(
            "eigenvalue count must lie in 1..=25".into(),
        ));
    }
    // factor Q(sigma)
    let s = &ops.stiffness;
    let sa = &ops.damped_stiffness;
    let s2 = shift * shift;
    let d: Vec<C64> = (0..n)
        .map(|i| s.diag[i] + shift * sa.diag[i] + s2 * ops.mass[i])
        .collect();
    let off: Vec<C64> = (0..n.saturating_sub(1))
        .map(|i| s.off[i] + shift * sa.off[i])
        .collect();
    let lu = TridiagLu::new(&off, &d, &off)?;
    // solve (A_m - sigma)(u, v) = (f, g): v = f + sigma u,
    // Q(sigma) u = -(W g + sigma W f + S_a f)
    let apply_inverse = |f: &[C64], g: &[C64]| -> (Vec<C64>, Vec<C64>) {
        let mut rhs = vec![c(0.0, 0.0); n];
        ops.damped_stiffness.apply(f, &mut rhs);
        for i in 0..n {
            rhs[i] = -(rhs[i] + ops.mass[i] * (g[i] + shift * f[i]));
        }
        let u = lu.solve(&rhs);
        let v: Vec<C64> = u.iter().zip(f).map(|(&ui, &fi)| fi + shift * ui).collect();
        (u, v)
    };

    let dim = 2 * n;
    let k = (2 * count + 16).min(dim).max(count + 2);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k + 1);
    let mut h = vec![vec![c(0.0, 0.0); k]; k + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a51_1072);
    let mut q0: Vec<C64> = (0..dim)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nq = q0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in q0.iter_mut() {
        *z /= nq;
    }
    basis.push(q0);
    let mut steps = 0usize;
    for j in 0..k {
        let (f, g) = basis[j].split_at(n);
        let (u, v) = apply_inverse(f, g);
        let mut w: Vec<C64> = u.into_iter().chain(v).collect();
        // modified Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let proj: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * *b).sum();
                for (wz, qz) in w.iter_mut().zip(q) {
                    *wz -= proj * *qz;
                }
                h[i][j] += proj;
            }
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        steps = j + 1;
        if beta < 1e-13 {
            break;
        }
        h[j + 1][j] = c(beta, 0.0);
        for z in w.iter_mut() {
            *z /= beta;
        }
        basis.push(w);
    }
    let hk: Vec<Vec<C64>> = (0..steps).map(|i| h[i][..steps].to_vec()).collect();
    let mut thetas = hessenberg_eigenvalues(hk.clone())?;
    // largest |theta| means closest to the shift
    thetas.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    thetas.truncate(count.min(steps));

    let mut eigenvalues = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        if theta.norm() < 1e-14 {
            continue;
        }
        let mu = shift + 1.0 / theta;
        // Ritz vector by inverse iteration on the small Hessenberg block
        let mut x: Vec<C64> = (0..steps).map(|i| c(1.0 / (1.0 + i as f64), 0.0)).collect();
        for _ in 0..3 {
            let mut a = hk.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] -= theta * (1.0 + 1e-13);
            }
            match dense_solve(a, x.clone()) {
                Ok(y) => x = y,
                Err(_) => break,
            }
            let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in x.iter_mut() {
                *z /= nx;
            }
        }
        let mut z = vec![c(0.0, 0.0); dim];
        for (j, &xj) in x.iter().enumerate() {
            for (zi, qi) in z.iter_mut().zip(&basis[j]) {
                *zi += xj * *qi;
            }
        }
        let (zu, zv) = z.split_at(n);
        let (au, av) = ops.generator_apply(zu, zv);
        let ru: Vec<C64> = au.iter().zip(zu).map(|(&a, &b)| a - mu * b).collect();
        let rv: Vec<C64> = av.iter().zip(zv).map(|(&a, &b)| a - mu * b).collect();
        let znorm = ops.energy_form(zu, zv).sqrt();
        let rnorm = ops.energy_form(&ru, &rv).sqrt();
        let residual = if znorm > 0.0 { rnorm / znorm } else { f64::INFINITY };
        eigenvalues.push(ModeEigenvalue {
            value: mu,
            residual,
            converged: residual <= 1e-8,
        });
    }
    eigenvalues.sort_by(|a, b| {
        (a.value - shift)
            .norm()
            .partial_cmp(&(b.value - shift).norm())
            .unwrap()
    });
    Ok(SpectrumResult {
        m: ops.m,
        shift,
        eigenvalues,
    })
}

/// Assemble operators for one mode on a uniform grid of `n` cells.
pub fn mode_operators_on(spec: &DomainSpec, n: usize, m: u32) -> Result<ModeOperators> {
    let grid = build_grid(spec, n)?;
    assemble_mode_operators(&grid, spec, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_zero;

    #[test]
    fn pencil_solve_inverts_shifted_generator() {
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 1024, 4).unwrap();
        let lambda = 9.3;
        let pencil = PencilSolver::new(&ops, lambda).unwrap();
        let n = ops.ndof();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<C64> = (0..n)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let g: Vec<C64> = (0..n)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let (u, v) = pencil.solve(&f, &g);
        let (au, av) = ops.generator_apply(&u, &v);
        let il = c(0.0, lambda);
        let mut err = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            err = err.max((il * u[i] - au[i] - f[i]).norm());
            err = err.max((il * v[i] - av[i] - g[i]).norm());
            scale = scale.max(u[i].norm()).max(v[i].norm());
        }
        assert!(err < 1e-8 * scale.max(1.0), "err {err} scale {scale}");
    }

    #[test]
    fn adjoint_solve_is_true_energy_adjoint() {
        // <M^{-1} a, b>_G must equal <a, (M^*)^{-1} b>_G
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 512, 2).unwrap();
        let lambda = 6.1;
        let pencil = PencilSolver::new(&ops, lambda).unwrap();
        let n = ops.ndof();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut vecs = Vec::new();
        for _ in 0..4 {
            let z: Vec<C64> = (0..n)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            vecs.push(z);
        }
        let (au, av) = (&vecs[0], &vecs[1]);
        let (bu, bv) = (&vecs[2], &vecs[3]);
        let (ma_u, ma_v) = pencil.solve(au, av);
        let (sb_u, sb_v) = pencil.solve_adjoint(bu, bv);
        let lhs = g_inner(&ops, &ma_u, &ma_v, bu, bv);
        let rhs = g_inner(&ops, au, av, &sb_u, &sb_v);
        assert!(
            (lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn norm_dominates_any_witness() {
        // definitional lower bound ||R|| >= ||U|| / ||(i lambda - A) U||
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 2048, 16).unwrap();
        let lambda = bessel_zero(16, 2).unwrap().value;
        let norm = resolvent_norm(&ops, lambda).unwrap();
        let pencil = PencilSolver::new(&ops, lambda).unwrap();
        let n = ops.ndof();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            let f: Vec<C64> = (0..n)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let g: Vec<C64> = (0..n)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let (u, v) = pencil.solve(&f, &g);
            let witness =
                ops.energy_form(&u, &v).sqrt() / ops.energy_form(&f, &g).sqrt();
            assert!(norm >= 0.999 * witness, "norm {norm} witness {witness}");
        }
    }

    #[test]
    fn norm_symmetric_in_frequency_sign() {
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 1024, 5).unwrap();
        let a = resolvent_norm(&ops, 20.4).unwrap();
        let b = resolvent_norm(&ops, -20.4).unwrap();
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn norm_moderate_between_resonances() {
        // midway between consecutive radial resonances of a heavily damped
        // mode the resolvent stays O(1)
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 2048, 0).unwrap();
        let z3 = bessel_zero(0, 3).unwrap().value;
        let z4 = bessel_zero(0, 4).unwrap().value;
        let lam = 0.5 * (z3 + z4);
        let norm = resolvent_norm(&ops, lam).unwrap();
        assert!(norm > 0.05 && norm < 50.0, "{norm}");
    }

    #[test]
    fn norm_converges_under_refinement() {
        let spec = DomainSpec::default();
        let lambda = 20.4;
        let mut vals = Vec::new();
        for &n in &[768usize, 1536, 3072] {
            let ops = mode_operators_on(&spec, n, 5).unwrap();
            vals.push(resolvent_norm(&ops, lambda).unwrap());
        }
        let e1 = (vals[0] - vals[1]).abs();
        let e2 = (vals[1] - vals[2]).abs();
        // refinement order at least 1.5 means error ratio at least 2^1.5
        assert!(e1 / e2 > 2.5, "{vals:?}");
    }

    #[test]
    fn rejects_coarse_grid_and_zero_frequency() {
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 64, 0).unwrap();
        assert!(resolvent_norm(&ops, 500.0).is_err());
        assert!(PencilSolver::new(&ops, 0.0).is_err());
    }

    #[test]
    fn scan_envelope_is_mode_maximum() {
        let spec = DomainSpec::default();
        let scan = resolvent_scan(&spec, &[8.0, 9.0], &[0, 3, 6], 2.0).unwrap();
        for (row, &env) in scan.per_mode.iter().zip(&scan.envelope) {
            let mx = row.iter().cloned().fold(0.0, f64::max);
            assert_eq!(mx, env);
            assert!(row.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn undamped_spectrum_matches_scalar_zeros() {
        // a = 0 on the full disc of radius 2 with Dirichlet at the rim:
        // eigenvalues are +- i j_{m,n} / 2 for zeros of J_m
        let spec = DomainSpec::new(2.0, 0.0).unwrap();
        let ops = mode_operators_on(&spec, 4096, 3).unwrap();
        let target = bessel_zero(3, 1).unwrap().value / 2.0;
        let res = spectrum_mode(&ops, c(0.0, target * 1.01), 4).unwrap();
        let best = res
            .eigenvalues
            .iter()
            .min_by(|a, b| {
                (a.value - c(0.0, target))
                    .norm()
                    .partial_cmp(&(b.value - c(0.0, target)).norm())
                    .unwrap()
            })
            .unwrap();
        assert!(best.converged, "residual {}", best.residual);
        assert!(best.value.re.abs() < 1e-9, "{}", best.value);
        assert!(
            (best.value.im - target).abs() < 1e-4,
            "{} vs {target}",
            best.value.im
        );
    }

    #[test]
    fn damped_spectrum_sits_in_open_left_half_plane() {
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 4096, 8).unwrap();
        let guess = bessel_zero(8, 1).unwrap().value;
        let res = spectrum_mode(&ops, c(0.0, guess), 6).unwrap();
        let mut seen = 0;
        for e in &res.eigenvalues {
            if !e.converged {
                continue;
            }
            seen += 1;
            assert!(e.value.re < 0.0, "eigenvalue {} not damped", e.value);
        }
        assert!(seen >= 3, "only {seen} converged pairs");
    }

    #[test]
    fn whispering_eigenvalue_approaches_axis() {
        // the mode trapped along the interface is barely damped; its real
        // part is tiny compared to a low-order radial mode of the same m
        let spec = DomainSpec::default();
        let ops = mode_operators_on(&spec, 6144, 24).unwrap();
        let whisper = bessel_zero(24, 1).unwrap().value;
        let res = spectrum_mode(&ops, c(0.0, whisper), 4).unwrap();
        let e = res
            .eigenvalues
            .iter()
            .find(|e| e.converged)
            .expect("no converged eigenvalue near whispering shift");
        assert!(e.value.re < 0.0 && e.value.re > -0.5, "{}", e.value);
    }
}
