//! Small linear-algebra kernels: real and complex tridiagonal
//! factorizations and a dense complex Hessenberg eigenvalue solver.
//!
//! Everything here is sized for per-mode radial systems (tridiagonal, up to
//! a few million unknowns) and for Arnoldi Hessenberg blocks (tens of rows),
//! so no external LAPACK is needed.

use crate::error::{Error, Result};
use crate::C64;

/// Real symmetric tridiagonal matrix stored by diagonal and subdiagonal.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Hermitian quadratic form `x^H T x` (real for real symmetric T).
    pub fn form(&self, x: &[C64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * x[i].norm_sqr();
            if i + 1 < n {
                s += 2.0 * self.off[i] * (x[i].conj() * x[i + 1]).re;
            }
        }
        s
    }
}

/// LDL^T factorization of a positive-definite real tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagCholesky {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagCholesky {
    pub fn new(t: &SymTridiag) -> Result<Self> {
        let n = t.n();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut prev = 0.0;
        for i in 0..n {
            let mut di = t.diag[i];
            if i > 0 {
                di -= prev * prev * d[i - 1];
            }
            if di <= 0.0 {
                return Err(Error::SingularSystem(format!(
                    "loss of positive definiteness at row {i} (pivot {di})"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = t.off[i] / di;
                prev = l[i];
            }
        }
        Ok(Self { d, l })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 1..n {
            let t = self.l[i - 1] * x[i - 1];
            x[i] -= t;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            let t = self.l[i] * x[i + 1];
            x[i] -= t;
        }
        x
    }
}

/// LU factorization with partial pivoting of a general complex tridiagonal
/// matrix (one fill-in superdiagonal).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    /// Factor the matrix with subdiagonal `dl`, diagonal `d`, superdiagonal
    /// `du` (lengths n-1, n, n-1).
    pub fn new(dl: &[C64], d: &[C64], du: &[C64]) -> Result<Self> {
        let n = d.len();
        let mut dl = dl.to_vec();
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() == 0.0 {
                    return Err(Error::SingularSystem(format!("zero pivot at row {i}")));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                let t = fact * du[i];
                d[i + 1] -= t;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d[n - 1].norm() == 0.0 {
            return Err(Error::SingularSystem(format!("zero pivot at row {}", n - 1)));
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swap,
        })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                x.swap(i, i + 1);
            }
            let t = self.dl[i] * x[i];
            x[i + 1] -= t;
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }

    /// Solve the elementwise-conjugated system `conj(M) x = b` with the same
    /// factorization.
    pub fn solve_conj(&self, b: &[C64]) -> Vec<C64> {
        let bc: Vec<C64> = b.iter().map(|z| z.conj()).collect();
        self.solve(&bc).into_iter().map(|z| z.conj()).collect()
    }
}

fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    } else {
        (a / r, b / r)
    }
}

/// Eigenvalues of a small upper Hessenberg complex matrix by shifted QR with
/// Givens rotations. Intended for Arnoldi blocks of a few dozen rows.
pub fn hessenberg_eigenvalues(mut h: Vec<Vec<C64>>) -> Result<Vec<C64>> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    let mut end = n;
    let mut iters = 0usize;
    let eps = 1e-15;
    while end > 0 {
        if end == 1 {
            eigs.push(h[0][0]);
            end = 0;
            continue;
        }
        // deflate converged subdiagonals
        let mut deflated = false;
        for k in (1..end).rev() {
            let small = eps * (h[k - 1][k - 1].norm() + h[k][k].norm() + 1e-300);
            if h[k][k - 1].norm() <= small {
                if k == end - 1 {
                    eigs.push(h[k][k]);
                    end -= 1;
                    iters = 0;
                    deflated = true;
                }
                break;
            }
        }
        if deflated {
            continue;
        }
        // active block [lo, end)
        let mut lo = end - 1;
        while lo > 0 {
            let small = eps * (h[lo - 1][lo - 1].norm() + h[lo][lo].norm() + 1e-300);
            if h[lo][lo - 1].norm() <= small {
                break;
            }
            lo -= 1;
        }
        iters += 1;
        if iters > 30 * n + 100 {
            return Err(Error::NoConvergence(
                "Hessenberg QR iteration stalled".into(),
            ));
        }
        // Wilkinson shift from the trailing 2x2, exceptional shift rarely
        let a = h[end - 2][end - 2];
        let b = h[end - 2][end - 1];
        let c = h[end - 1][end - 2];
        let d = h[end - 1][end - 1];
        let mu = if iters % 16 == 0 {
            d + C64::new(c.norm(), 0.0)
        } else {
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let r1 = 0.5 * (tr + disc);
            let r2 = 0.5 * (tr - disc);
            if (r1 - d).norm() < (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };
        // implicit single-shift QR sweep on the active block
        let mut x = h[lo][lo] - mu;
        let mut y = h[lo + 1][lo];
        for k in lo..end - 1 {
            let (cg, sg) = givens(x, y);
            let jlo = if k > lo { k - 1 } else { lo };
            for j in jlo..end {
                let t1 = h[k][j];
                let t2 = h[k + 1][j];
                h[k][j] = cg.conj() * t1 + sg.conj() * t2;
                h[k + 1][j] = -sg * t1 + cg * t2;
            }
            let ihi = (k + 3).min(end);
            for row in h.iter_mut().take(ihi).skip(lo) {
                let t1 = row[k];
                let t2 = row[k + 1];
                row[k] = t1 * cg + t2 * sg;
                row[k + 1] = -t1 * sg.conj() + t2 * cg.conj();
            }
            if k + 2 < end {
                x = h[k + 1][k];
                y = h[k + 2][k];
            }
        }
    }
    Ok(eigs)
}

/// Dense complex solve by Gaussian elimination with partial pivoting, for
/// small Ritz systems.
pub fn dense_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Result<Vec<C64>> {
    let n = a.len();
    for k in 0..n {
        let (piv, _) = (k..n)
            .map(|i| (i, a[i][k].norm()))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        if a[piv][k].norm() == 0.0 {
            return Err(Error::SingularSystem(format!("dense pivot zero at {k}")));
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = f * a[k][j];
                a[i][j] -= t;
            }
            let t = f * b[k];
            b[i] -= t;
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * b[j];
        }
        b[i] = s / a[i][i];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cholesky_solves_spd_tridiag() {
        let n = 50;
        let mut t = SymTridiag::zeros(n);
        for i in 0..n {
            t.diag[i] = 4.0 + i as f64 * 0.01;
        }
        for i in 0..n - 1 {
            t.off[i] = -1.0;
        }
        let f = TridiagCholesky::new(&t).unwrap();
        let b: Vec<C64> = (0..n).map(|i| c(i as f64, (i as f64).sin())).collect();
        let x = f.solve(&b);
        let mut y = vec![c(0.0, 0.0); n];
        t.apply(&x, &mut y);
        for i in 0..n {
            assert!((y[i] - b[i]).norm() < 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut t = SymTridiag::zeros(10);
        for i in 0..10 {
            t.diag[i] = -1.0;
        }
        assert!(TridiagCholesky::new(&t).is_err());
    }

    #[test]
    fn lu_solves_random_complex_tridiag() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 40;
            let rnd = |rng: &mut ChaCha8Rng| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let dl: Vec<C64> = (0..n - 1).map(|_| rnd(&mut rng)).collect();
            let d: Vec<C64> = (0..n).map(|_| rnd(&mut rng) * 3.0).collect();
            let du: Vec<C64> = (0..n - 1).map(|_| rnd(&mut rng)).collect();
            let b: Vec<C64> = (0..n).map(|_| rnd(&mut rng)).collect();
            let f = TridiagLu::new(&dl, &d, &du).unwrap();
            let x = f.solve(&b);
            // residual against the original matrix
            for i in 0..n {
                let mut acc = d[i] * x[i];
                if i > 0 {
                    acc += dl[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += du[i] * x[i + 1];
                }
                assert!((acc - b[i]).norm() < 1e-10, "row {i}");
            }
            // conjugated solve
            let xc = f.solve_conj(&b);
            for i in 0..n {
                let mut acc = d[i].conj() * xc[i];
                if i > 0 {
                    acc += dl[i - 1].conj() * xc[i - 1];
                }
                if i + 1 < n {
                    acc += du[i].conj() * xc[i + 1];
                }
                assert!((acc - b[i]).norm() < 1e-10, "conj row {i}");
            }
        }
    }

    #[test]
    fn lu_needs_pivoting_case() {
        // zero leading diagonal forces a row swap
        let dl = vec![c(1.0, 0.0)];
        let d = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let du = vec![c(1.0, 0.0)];
        let f = TridiagLu::new(&dl, &d, &du).unwrap();
        let x = f.solve(&[c(1.0, 0.0), c(2.0, 0.0)]);
        // system: x1 = 1 ; x0 + x1 = 2
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hessenberg_eigs_companion_matrix() {
        // companion matrix of (z-1)(z-2)(z-3i) = z^3 - (3+3i)z^2 + (2+9i)z - 6i
        let n = 3;
        let a2 = c(3.0, 3.0);
        let a1 = c(-2.0, -9.0);
        let a0 = c(0.0, 6.0);
        let mut h = vec![vec![c(0.0, 0.0); n]; n];
        h[0][0] = a2;
        h[0][1] = a1;
        h[0][2] = a0;
        h[1][0] = c(1.0, 0.0);
        h[2][1] = c(1.0, 0.0);
        let mut eigs = hessenberg_eigenvalues(h).unwrap();
        eigs.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        let mut want = [c(0.0, 3.0), c(1.0, 0.0), c(2.0, 0.0)];
        want.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        for (e, w) in eigs.iter().zip(&want) {
            assert!((e - w).norm() < 1e-10, "{e} vs {w}");
        }
    }

    #[test]
    fn hessenberg_eigs_random_trace_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 25;
        let mut h = vec![vec![c(0.0, 0.0); n]; n];
        let mut tr = c(0.0, 0.0);
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                h[i][j] = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
            tr += h[i][i];
        }
        let eigs = hessenberg_eigenvalues(h).unwrap();
        assert_eq!(eigs.len(), n);
        let sum: C64 = eigs.iter().sum();
        assert!((sum - tr).norm() < 1e-9, "trace {tr} vs eig sum {sum}");
    }
}
