//! Bessel machinery: J_m, Y_m, derivatives, zeros, and the normalized
//! whispering-gallery eigenfunctions of the unit disc.
//!
//! J is evaluated by backward (Miller) recurrence normalized with the sum
//! rule `J_0 + 2 sum J_{2k} = 1`. Y_0 and Y_1 come from the log power series
//! for small argument and from Steed's continued fractions otherwise; higher
//! orders follow by forward recurrence, which is stable because Y is the
//! dominant solution.

use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::grid::RadialGrid;
use crate::C64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const PI: f64 = std::f64::consts::PI;

/// Log-scale size of `1/J_k(z)` for `k` beyond the turning point; 0 in the
/// oscillatory region.
fn decay_exponent(k: f64, z: f64) -> f64 {
    if k <= z.max(1.0) {
        return 0.0;
    }
    let t = 2.0 * k / (std::f64::consts::E * z.max(1e-300));
    k * t.ln() + 0.5 * (2.0 * PI * k).ln()
}

/// Miller backward recurrence. Returns `J_k(z)` for each requested index
/// (indices must be sorted ascending). Requires `z > 0`.
fn miller_j(indices: &[usize], z: f64) -> Vec<f64> {
    let m_max = *indices.last().unwrap();
    let kref = (m_max as f64).max(z.ceil());
    // start high enough that the contaminating dominant solution has decayed
    // by e^{-40} relative to the smallest requested order
    let base = decay_exponent(kref, z);
    let mut start = kref as usize + 16;
    while decay_exponent(start as f64, z) - base < 40.0 {
        start += (start / 32).max(4);
    }
    let mut fkp1 = 0.0_f64;
    let mut fk = 1e-250_f64;
    let mut norm = 0.0_f64;
    let mut captured = vec![0.0_f64; indices.len()];
    if start % 2 == 0 {
        norm += 2.0 * fk;
    }
    for k in (1..=start).rev() {
        let fkm1 = (2.0 * k as f64 / z) * fk - fkp1;
        fkp1 = fk;
        fk = fkm1;
        let km1 = k - 1;
        if km1 % 2 == 0 && km1 > 0 {
            norm += 2.0 * fk;
        }
        if let Ok(pos) = indices.binary_search(&km1) {
            captured[pos] = fk;
        }
        if fk.abs() > 1e250 {
            let s = 1e-250;
            fk *= s;
            fkp1 *= s;
            norm *= s;
            for c in captured.iter_mut() {
                *c *= s;
            }
        }
    }
    norm += fk; // J_0 term
    captured.iter().map(|c| c / norm).collect()
}

/// `J_m(z)` together with an underflow flag (true when the value is below
/// the subnormal range and was flushed to 0).
pub fn bessel_j_checked(m: u32, z: f64) -> Result<(f64, bool)> {
    if !(z >= 0.0) {
        return Err(Error::BesselDomain(format!("J_m needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok((if m == 0 { 1.0 } else { 0.0 }, false));
    }
    let mf = m as f64;
    if z < 1e-8 {
        // two-term series in log space, safe for any order
        let mut lt = mf * (z / 2.0).ln();
        for k in 1..=m as u64 {
            lt -= (k as f64).ln();
        }
        if lt < -745.0 {
            return Ok((0.0, true));
        }
        let t0 = lt.exp();
        return Ok((t0 * (1.0 - z * z / (4.0 * (mf + 1.0))), false));
    }
    if decay_exponent(mf, z) > 745.0 {
        return Ok((0.0, true));
    }
    let v = miller_j(&[m as usize], z)[0];
    Ok((v, v == 0.0 && m > 0))
}

pub fn bessel_j(m: u32, z: f64) -> Result<f64> {
    bessel_j_checked(m, z).map(|(v, _)| v)
}

/// `J_m'(z)` via the recurrence `2 J_m' = J_{m-1} - J_{m+1}`.
pub fn bessel_j_prime(m: u32, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::BesselDomain(format!("J_m' needs z >= 0, got {z}")));
    }
    if m == 0 {
        return Ok(-bessel_j(1, z)?);
    }
    if z == 0.0 {
        return Ok(if m == 1 { 0.5 } else { 0.0 });
    }
    if z < 1e-8 || decay_exponent(m as f64 - 1.0, z) > 745.0 {
        let lo = bessel_j(m - 1, z)?;
        let hi = bessel_j(m + 1, z)?;
        return Ok(0.5 * (lo - hi));
    }
    let vals = miller_j(&[(m - 1) as usize, (m + 1) as usize], z);
    Ok(0.5 * (vals[0] - vals[1]))
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Series for (J0, J1, Y0, Y1), accurate for z < 2.
fn y_series(z: f64) -> (f64, f64, f64, f64) {
    let q = z * z / 4.0;
    let (mut j0, mut t) = (1.0, 1.0);
    let mut s0 = 0.0; // sum for Y0
    for k in 1..40 {
        let kf = k as f64;
        t *= -q / (kf * kf);
        j0 += t;
        s0 += -t * harmonic(k); // (-1)^{k+1} H_k q^k/(k!)^2
        if t.abs() < 1e-18 {
            break;
        }
    }
    let (mut j1s, mut u) = (1.0, 1.0); // J1 = (z/2) * j1s
    let mut s1 = harmonic(1); // sum (-1)^k (H_k+H_{k+1}) q^k/(k! (k+1)!)
    for k in 1..40 {
        let kf = k as f64;
        u *= -q / (kf * (kf + 1.0));
        j1s += u;
        s1 += u * (harmonic(k) + harmonic(k + 1));
        if u.abs() < 1e-18 {
            break;
        }
    }
    let j1 = 0.5 * z * j1s;
    let lg = (z / 2.0).ln() + EULER_GAMMA;
    let y0 = (2.0 / PI) * (lg * j0 + s0);
    let y1 = (2.0 / PI) * lg * j1 - 2.0 / (PI * z) - (z / (2.0 * PI)) * s1;
    (j0, j1, y0, y1)
}

/// Steed's continued fractions at order 0, valid for z >= 2. Returns
/// (J0, Y0, Y1) at machine precision.
fn steed0(z: f64) -> Result<(f64, f64, f64)> {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 2e-16;
    const MAXIT: usize = 20_000;
    let xi = 1.0 / z;
    let xi2 = 2.0 * xi;
    // CF1 for f = J0'/J0, with sign tracking for J0 itself
    let mut isign = 1.0_f64;
    let mut h = FPMIN;
    let mut b = 0.0;
    let mut d = 0.0;
    let mut c = h;
    let mut ok = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::NoConvergence(format!("CF1 for J0'/J0 at z = {z}")));
    }
    let f = h;
    // CF2 for p + iq = (J0' + iY0')/(J0 + iY0)
    let mut a = 0.25_f64;
    let mut p = -0.5 * xi;
    let mut q = 1.0_f64;
    let br = 2.0 * z;
    let mut bi = 2.0_f64;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let dlr = cr * dr - ci * di;
    let dli = cr * di + ci * dr;
    let tmp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = tmp;
    ok = false;
    for i in 2..MAXIT {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di = -di / den;
        let dlr = cr * dr - ci * di;
        let dli = cr * di + ci * dr;
        let tmp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = tmp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::NoConvergence(format!("CF2 for Y0 at z = {z}")));
    }
    let w = xi2 / PI;
    let gam = (p - f) / q;
    let j0 = isign.signum() * (w / ((p - f) * gam + q)).sqrt();
    let y0 = j0 * gam;
    let y0p = y0 * (p + q / gam);
    Ok((j0, y0, -y0p))
}

fn y0_y1(z: f64) -> Result<(f64, f64)> {
    if !(z > 0.0) {
        return Err(Error::BesselDomain(format!("Y_m needs z > 0, got {z}")));
    }
    if z < 2.0 {
        let (_, _, y0, y1) = y_series(z);
        Ok((y0, y1))
    } else {
        let (_, y0, y1) = steed0(z)?;
        Ok((y0, y1))
    }
}

/// `Y_k(z)` for k = 0..=m by forward recurrence.
fn y_seq(m: u32, z: f64) -> Result<Vec<f64>> {
    let (y0, y1) = y0_y1(z)?;
    let mut out = Vec::with_capacity(m as usize + 1);
    out.push(y0);
    if m >= 1 {
        out.push(y1);
    }
    for k in 1..m as usize {
        let next = (2.0 * k as f64 / z) * out[k] - out[k - 1];
        out.push(next);
    }
    Ok(out)
}

pub fn bessel_y(m: u32, z: f64) -> Result<f64> {
    Ok(*y_seq(m, z)?.last().unwrap())
}

/// `Y_m'(z)` via `2 Y_m' = Y_{m-1} - Y_{m+1}`.
pub fn bessel_y_prime(m: u32, z: f64) -> Result<f64> {
    let seq = y_seq(m + 1, z)?;
    if m == 0 {
        Ok(-seq[1])
    } else {
        Ok(0.5 * (seq[m as usize - 1] - seq[m as usize + 1]))
    }
}

/// A zero of `J_m` with its defect `|J_m(value)|`.
#[derive(Debug, Clone, Copy)]
pub struct BesselZero {
    pub m: u32,
    pub n: u32,
    pub value: f64,
    pub residual: f64,
}

fn zero_cache() -> &'static Mutex<HashMap<u32, Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn first_zero_guess(m: u32) -> f64 {
    if m == 0 {
        return 2.404_825_557_695_773;
    }
    let mf = m as f64;
    let c = mf.cbrt();
    mf + 1.855_757_1 * c + 1.033_150 / c
}

/// Refine a sign-changing bracket by bisection plus safeguarded Newton.
fn refine_zero(m: u32, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = bessel_j(m, lo)?;
    let fhi = bessel_j(m, hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::ZeroBracket { m, n: 0, lo, hi });
    }
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        let fm = bessel_j(m, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        let fx = bessel_j(m, x)?;
        let dfx = bessel_j_prime(m, x)?;
        let step = if dfx != 0.0 { fx / dfx } else { 0.0 };
        let mut xn = x - step;
        if !(xn > lo && xn < hi) || step == 0.0 {
            // fall back to bisection when Newton leaves the bracket
            let fm = bessel_j(m, 0.5 * (lo + hi))?;
            if flo * fm < 0.0 {
                hi = 0.5 * (lo + hi);
            } else {
                lo = 0.5 * (lo + hi);
                flo = fm;
            }
            xn = 0.5 * (lo + hi);
        } else if flo * fx < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let done = (xn - x).abs() <= 1e-15 * x.max(1.0);
        x = xn;
        if done {
            break;
        }
    }
    Ok(x)
}

fn extend_zero_row(m: u32, row: &mut Vec<f64>, n: u32) -> Result<()> {
    while (row.len() as u32) < n {
        let (scan_from, gap_est) = if let Some(&prev) = row.last() {
            let ratio = (m as f64 / prev).min(0.999_999);
            let gap = (PI / (1.0 - ratio * ratio).sqrt()).clamp(PI, 3.0 * PI);
            (prev + 1.0, gap)
        } else {
            let g = first_zero_guess(m);
            (g - 1.2, 2.4)
        };
        let step = (gap_est / 16.0).min(0.5);
        let mut a = scan_from;
        let mut fa = bessel_j(m, a)?;
        // skip a possible flush-to-zero stretch deep under the turning point
        while fa == 0.0 && a < scan_from + 4.0 * gap_est {
            a += step;
            fa = bessel_j(m, a)?;
        }
        let mut found = None;
        let mut b = a;
        while b < scan_from + 6.0 * gap_est {
            b += step;
            let fb = bessel_j(m, b)?;
            if fa * fb <= 0.0 && fb != fa {
                found = Some((b - step, b));
                break;
            }
            fa = fb;
        }
        let (lo, hi) = found.ok_or(Error::ZeroBracket {
            m,
            n: row.len() as u32 + 1,
            lo: scan_from,
            hi: scan_from + 6.0 * gap_est,
        })?;
        row.push(refine_zero(m, lo, hi)?);
    }
    Ok(())
}

/// n-th positive zero of `J_m`, n >= 1. Deterministic; memoized per order.
pub fn bessel_zero(m: u32, n: u32) -> Result<BesselZero> {
    if n == 0 {
        return Err(Error::InvalidArgument("zero index n starts at 1".into()));
    }
    let value = {
        let mut cache = zero_cache().lock().unwrap();
        let row = cache.entry(m).or_default();
        extend_zero_row(m, row, n)?;
        row[n as usize - 1]
    };
    let residual = bessel_j(m, value)?.abs();
    Ok(BesselZero {
        m,
        n,
        value,
        residual,
    })
}

/// The sequence `lambda_{alpha n, n}/n` and its extrapolated limit.
#[derive(Debug, Clone)]
pub struct IotaEstimate {
    pub alpha: u32,
    /// `sequence[k] = lambda_{alpha (k+1), k+1} / (k+1)`.
    pub sequence: Vec<f64>,
    /// Extrapolated limit of the sequence.
    pub iota: f64,
    /// Bracket statistic `(iota/alpha - 1) alpha^{2/3}`.
    pub s: f64,
    pub monotone_increasing: bool,
}

/// Estimate `iota(alpha) = lim lambda_{alpha n, n}/n` by fitting the
/// `n^{-2/3}` correction over the tail of the sequence.
pub fn iota_estimate(alpha: u32, n_max: u32) -> Result<IotaEstimate> {
    if alpha < 1 || n_max < 4 {
        return Err(Error::InvalidArgument(
            "need alpha >= 1 and n_max >= 4".into(),
        ));
    }
    let mut sequence = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let z = bessel_zero(alpha * n, n)?;
        sequence.push(z.value / n as f64);
    }
    let monotone_increasing = sequence.windows(2).all(|w| w[1] > w[0]);
    // least squares x_n = iota - c n^{-2/3} over the upper half
    let lo = (n_max / 2).max(2) as usize;
    let (mut s1, mut sb, mut sbb, mut sx, mut sbx) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (idx, &x) in sequence.iter().enumerate().skip(lo - 1) {
        let n = (idx + 1) as f64;
        let b = n.powf(-2.0 / 3.0);
        s1 += 1.0;
        sb += b;
        sbb += b * b;
        sx += x;
        sbx += b * x;
    }
    let det = s1 * sbb - sb * sb;
    let iota = (sx * sbb - sb * sbx) / det;
    let s = (iota / alpha as f64 - 1.0) * (alpha as f64).powf(2.0 / 3.0);
    Ok(IotaEstimate {
        alpha,
        sequence,
        iota,
        s,
        monotone_increasing,
    })
}

/// Dirichlet eigenfunction `J_m(lambda r) e^{i m theta}` of the unit disc,
/// sampled on the grid (zero outside the disc).
#[derive(Debug, Clone)]
pub struct DiscEigenfunction {
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
    /// Closed-form L2 norm over the disc, `sqrt(pi) |J_{m+1}(lambda)|`.
    pub l2_norm: f64,
    pub field: ModeField,
}

pub fn disc_eigenfunction(alpha: u32, n: u32, grid: &RadialGrid) -> Result<DiscEigenfunction> {
    let m = alpha
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidArgument("alpha * n overflows".into()))?;
    let lambda = bessel_zero(m, n)?.value;
    let l2_norm = PI.sqrt() * bessel_j(m + 1, lambda)?.abs();
    let mut values = vec![C64::new(0.0, 0.0); grid.node_count()];
    for (i, &r) in grid.nodes.iter().enumerate() {
        if r > 1.0 {
            break;
        }
        values[i] = C64::new(bessel_j(m, lambda * r)?, 0.0);
    }
    Ok(DiscEigenfunction {
        m,
        n,
        lambda,
        l2_norm,
        field: ModeField::new(m, values),
    })
}

impl DiscEigenfunction {
    /// The normalized profile `w = J_m(lambda r)/(lambda ||phi||)`, whose
    /// gradient has unit L2 norm over the disc.
    pub fn normalized(&self) -> ModeField {
        let scale = 1.0 / (self.lambda * self.l2_norm);
        ModeField::new(
            self.field.m,
            self.field.values.iter().map(|v| v * scale).collect(),
        )
    }
}

/// L2 norm over the unit circle of the normal derivative of the normalized
/// eigenfunction; equals sqrt(2) in closed form, computed here numerically.
pub fn neumann_trace(e: &DiscEigenfunction) -> Result<f64> {
    let jp = bessel_j_prime(e.m, e.lambda)?;
    Ok((2.0 * PI).sqrt() * jp.abs() / e.l2_norm)
}

/// `m / lambda_{m,n}`, the tangential momentum of the concentration chords;
/// always in (0, 1).
pub fn hyperbolicity_ratio(e: &DiscEigenfunction) -> f64 {
    e.m as f64 / e.lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    /// Direct power series for J_m, the independent oracle. Only valid for
    /// moderate z where the alternating series is benign.
    fn j_series_oracle(m: u32, z: f64) -> f64 {
        let mut term = (z / 2.0).powi(m as i32);
        for k in 1..=m as u64 {
            term /= k as f64;
        }
        let mut sum = term;
        for k in 1..60 {
            let kf = k as f64;
            term *= -(z * z / 4.0) / (kf * (kf + m as f64));
            sum += term;
        }
        sum
    }

    #[test]
    fn j_at_zero_argument() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j_matches_series_oracle() {
        for &(m, z) in &[(0u32, 1.0), (1, 1.0), (0, 10.0), (5, 10.0), (12, 7.5)] {
            let got = bessel_j(m, z).unwrap();
            let want = j_series_oracle(m, z);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "J_{m}({z}): {got} vs {want}"
            );
        }
    }

    #[test]
    fn j_known_values() {
        assert!((bessel_j(0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(0, 10.0).unwrap() - (-0.245_935_764_451_348_3)).abs() < 1e-13);
    }

    #[test]
    fn y_known_values() {
        assert!((bessel_y(0, 1.0).unwrap() - 0.088_256_964_215_676_96).abs() < 1e-14);
        assert!((bessel_y(1, 1.0).unwrap() - (-0.781_212_821_300_288_7)).abs() < 1e-14);
    }

    #[test]
    fn y_rejects_nonpositive() {
        assert!(bessel_y(0, 0.0).is_err());
        assert!(bessel_y(3, -1.0).is_err());
    }

    #[test]
    fn y_series_steed_seam() {
        // the two evaluation branches must agree where both are valid
        for &z in &[1.9_f64, 1.99] {
            let (_, _, y0s, y1s) = y_series(z);
            let (_, y0c, y1c) = steed0(z).unwrap();
            assert!((y0s - y0c).abs() < 1e-13, "Y0 seam at {z}");
            assert!((y1s - y1c).abs() < 1e-13, "Y1 seam at {z}");
        }
    }

    #[test]
    fn wronskian_at_5_10() {
        let z = 10.0;
        let m = 5;
        let w = bessel_j(m, z).unwrap() * bessel_y_prime(m, z).unwrap()
            - bessel_j_prime(m, z).unwrap() * bessel_y(m, z).unwrap();
        let want = 2.0 / (PI * z);
        assert!((w - want).abs() < 1e-12 * want, "wronskian {w} vs {want}");
    }

    #[test]
    fn wronskian_lattice() {
        for &m in &[0u32, 1, 3, 8, 40, 200] {
            for &z in &[0.5_f64, 2.5, 9.0, 13.0, 50.0, 400.0] {
                if (m as f64) > 1.2 * z + 30.0 {
                    continue; // Y overflow region, never used
                }
                let w = bessel_j(m, z).unwrap() * bessel_y_prime(m, z).unwrap()
                    - bessel_j_prime(m, z).unwrap() * bessel_y(m, z).unwrap();
                let want = 2.0 / (PI * z);
                assert!(
                    (w - want).abs() < 1e-12 * want.max(1.0),
                    "wronskian at m={m} z={z}: {w} vs {want}"
                );
            }
        }
    }

    #[test]
    fn recurrence_residual_lattice() {
        for &m in &[1u32, 2, 5, 10, 50, 200] {
            for &z in &[0.5_f64, 1.0, 5.0, 10.0, 80.0, 500.0] {
                let jm1 = bessel_j(m - 1, z).unwrap();
                let j = bessel_j(m, z).unwrap();
                let jp1 = bessel_j(m + 1, z).unwrap();
                let scale = jm1.abs().max(j.abs()).max(jp1.abs());
                if scale == 0.0 {
                    continue; // all flushed in the deep evanescent regime
                }
                let res = (jp1 + jm1 - (2.0 * m as f64 / z) * j).abs();
                assert!(
                    res < 1e-10 * scale,
                    "recurrence at m={m} z={z}: {res} vs scale {scale}"
                );
            }
        }
    }

    #[test]
    fn underflow_flushes_to_zero() {
        let (v, flag) = bessel_j_checked(1500, 1.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(flag);
    }

    #[test]
    fn first_zeros_against_bisection_oracle() {
        // oracle: bisection on the direct series evaluation
        let mut lo = 2.0;
        let mut hi = 3.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if j_series_oracle(0, lo) * j_series_oracle(0, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let z = bessel_zero(0, 1).unwrap();
        assert!((z.value - oracle).abs() < 1e-12);
        assert!((z.value - 2.404_825_557_695_773).abs() < 1e-12);
        let z11 = bessel_zero(1, 1).unwrap();
        assert!((z11.value - 3.831_705_970_207_512).abs() < 1e-12);
    }

    #[test]
    fn zero_residuals_and_interlacing() {
        for m in 0..6u32 {
            for n in 1..6u32 {
                let z = bessel_zero(m, n).unwrap();
                assert!(z.residual <= 1e-12 * z.value.max(1.0));
                let right = bessel_zero(m + 1, n).unwrap().value;
                let up = bessel_zero(m, n + 1).unwrap().value;
                assert!(z.value < right && right < up, "interlacing at ({m},{n})");
            }
        }
    }

    #[test]
    fn high_order_zero_consistent() {
        // J_m(lambda_{m,n}) = 0 and lambda exceeds the order
        let z = bessel_zero(320, 10).unwrap();
        assert!(z.value > 320.0);
        assert!(z.residual <= 1e-12 * z.value);
    }

    #[test]
    fn iota_bracket_at_alpha_8() {
        let est = iota_estimate(8, 16).unwrap();
        assert!(est.monotone_increasing);
        assert!(est.s > 0.5 && est.s < 3.0, "s(8) = {}", est.s);
        // the sequence approaches its limit from below
        for &x in &est.sequence {
            assert!(x < est.iota);
        }
    }

    #[test]
    fn disc_eigenfunction_dirichlet_and_norm() {
        let spec = DomainSpec::default();
        let grid = build_grid(&spec, 2048).unwrap();
        let e = disc_eigenfunction(8, 3, &grid).unwrap();
        assert!(e.field.values[grid.interface_index].norm() <= 1e-10);
        // quadrature vs closed form, high-order oracle: composite Simpson
        let msteps = 1 << 15;
        let dh = 1.0 / msteps as f64;
        let mut quad = 0.0;
        for i in 0..msteps {
            let r0 = i as f64 * dh;
            let r1 = r0 + dh;
            let rm = r0 + 0.5 * dh;
            let f = |r: f64| {
                let j = bessel_j(e.m, e.lambda * r).unwrap();
                j * j * r
            };
            quad += dh / 6.0 * (f(r0) + 4.0 * f(rm) + f(r1));
        }
        let quad_norm = (2.0 * PI * quad).sqrt();
        assert!(
            (quad_norm - e.l2_norm).abs() < 1e-8 * e.l2_norm,
            "{} vs {}",
            quad_norm,
            e.l2_norm
        );
    }

    #[test]
    fn neumann_trace_is_order_one() {
        let spec = DomainSpec::default();
        let grid = build_grid(&spec, 512).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for n in 1..=8 {
            let e = disc_eigenfunction(8, n, &grid).unwrap();
            let t = neumann_trace(&e).unwrap();
            lo = lo.min(t);
            hi = hi.max(t);
            let ratio = hyperbolicity_ratio(&e);
            assert!(ratio > 0.0 && ratio < 1.0);
        }
        assert!(hi / lo <= 3.0, "trace band [{lo}, {hi}]");
        // closed form: the trace is exactly sqrt(2)
        assert!((hi - 2.0_f64.sqrt()).abs() < 1e-10);
    }
}
