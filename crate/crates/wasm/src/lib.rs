//! Browser bindings for the interactive demo page.
//!
//! Three operations are exposed, each cheap enough to run on every slider
//! move and returning a JSON string the page renders directly:
//! whispering-zero tables, the Dirichlet-to-Neumann comparison, and billiard
//! traces with hit classification. Errors come back as `{"error": ...}` so
//! the page never has to catch a panic.

use wasm_bindgen::prelude::*;

use kvwave::bessel::bessel_zero;
use kvwave::elliptic::{dn_map_mode, dn_symbol};
use kvwave::grid::{build_grid, DomainSpec};
use kvwave::rays::{trace_billiard, HitClass, RayState};

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

/// Zeros lambda_{m,n} along the family m = alpha n, with the concentration
/// ratio m / lambda that drives whispering localization.
#[wasm_bindgen]
pub fn zero_table(alpha: u32, n_max: u32) -> String {
    if alpha == 0 || n_max == 0 || n_max > 200 {
        return err_json("need alpha >= 1 and 1 <= n_max <= 200");
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let m = alpha * n;
        match bessel_zero(m, n) {
            Ok(z) => rows.push(serde_json::json!({
                "m": m,
                "n": n,
                "lambda": z.value,
                "ratio": m as f64 / z.value,
            })),
            Err(e) => return err_json(e),
        }
    }
    serde_json::json!({ "alpha": alpha, "rows": rows }).to_string()
}

/// Dirichlet-to-Neumann value per angular mode next to its principal symbol.
#[wasm_bindgen]
pub fn dn_comparison(hbar: f64, m_max: u32) -> String {
    if !(hbar > 0.005 && hbar <= 1.0) || m_max > 400 {
        return err_json("need 0.005 < hbar <= 1 and m_max <= 400");
    }
    let spec = DomainSpec::default();
    let scale = (1.0 / hbar).max(m_max as f64);
    let grid = match build_grid(&spec, ((17.0 * scale).ceil() as usize).max(128)) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let mut rows = Vec::new();
    for m in 0..=m_max {
        let nu = match dn_map_mode(&grid, m, hbar) {
            Ok(v) => v,
            Err(e) => return err_json(e),
        };
        let sym = dn_symbol(m, hbar);
        rows.push(serde_json::json!({
            "m": m,
            "nu_re": nu.re,
            "nu_im": nu.im,
            "symbol_re": sym.re,
            "symbol_im": sym.im,
        }));
    }
    serde_json::json!({ "hbar": hbar, "rows": rows }).to_string()
}

/// Billiard orbit in the unit disc from an interior point, with each hit on
/// the interface classified by its tangential momentum.
#[wasm_bindgen]
pub fn billiard(x: f64, y: f64, angle: f64, bounces: u32) -> String {
    if bounces == 0 || bounces > 512 {
        return err_json("need 1 <= bounces <= 512");
    }
    let start = match RayState::new([x, y], [angle.cos(), angle.sin()]) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let hits = match trace_billiard(&start, bounces as usize) {
        Ok(h) => h,
        Err(e) => return err_json(e),
    };
    let rows: Vec<_> = hits
        .iter()
        .map(|h| {
            serde_json::json!({
                "x": h.point[0],
                "y": h.point[1],
                "eta": h.tangential_momentum,
                "r0": h.r0,
                "class": match h.classification {
                    HitClass::Hyperbolic => "hyperbolic",
                    HitClass::Glancing => "glancing",
                    HitClass::Elliptic => "elliptic",
                },
            })
        })
        .collect();
    serde_json::json!({ "start": [x, y], "hits": rows }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        let v: serde_json::Value = serde_json::from_str(s).unwrap();
        assert!(v.get("error").is_none(), "unexpected error: {s}");
        v
    }

    #[test]
    fn zero_table_rows_carry_increasing_frequencies() {
        let v = parse(&zero_table(8, 6));
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(w[1]["lambda"].as_f64().unwrap() > w[0]["lambda"].as_f64().unwrap());
        }
    }

    #[test]
    fn dn_comparison_gap_small_at_moderate_scale() {
        let v = parse(&dn_comparison(0.1, 10));
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 11);
        let r = &rows[0];
        let gap = (r["nu_re"].as_f64().unwrap() - r["symbol_re"].as_f64().unwrap()).abs();
        assert!(gap < 0.1, "gap {gap}");
    }

    #[test]
    fn billiard_conserves_tangential_momentum() {
        let v = parse(&billiard(0.3, 0.0, 1.1, 16));
        let hits = v["hits"].as_array().unwrap();
        assert_eq!(hits.len(), 16);
        let eta0 = hits[0]["eta"].as_f64().unwrap().abs();
        for h in hits {
            assert!((h["eta"].as_f64().unwrap().abs() - eta0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_input_reports_json_error() {
        let v: serde_json::Value = serde_json::from_str(&billiard(2.0, 0.0, 0.0, 4)).unwrap();
        assert!(v["error"].is_string());
        let v: serde_json::Value = serde_json::from_str(&zero_table(0, 5)).unwrap();
        assert!(v["error"].is_string());
    }
}
