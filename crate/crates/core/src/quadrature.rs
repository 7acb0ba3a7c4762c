//! Composite Gauss–Legendre rules and extrapolation to zero.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{domain, Result};

pub const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [−1, 1] used by every composite rule here.
pub fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(PANEL_ORDER)
            .expect("order >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

pub fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let rule = panel_rule();
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let s: f64 = rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * s;
    }
    total
}

pub fn composite_complex(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let rule = panel_rule();
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let s: Complex64 = rule.iter().map(|(x, w)| *w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * s;
    }
    total
}

/// ∫_a^b f dx for integrands with square-root behaviour at either end.
/// The map x = a + (b − a)(1 − cos θ)/2 turns √(x − a) and √(b − x) into
/// smooth functions of θ.
pub fn sqrt_endpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    composite(
        |theta| {
            let x = a + half * (1.0 - theta.cos());
            f(x) * half * theta.sin()
        },
        0.0,
        std::f64::consts::PI,
        panels,
    )
}

/// Polynomial extrapolation of samples y(h_i) to h = 0 (Neville's scheme).
pub fn extrapolate_to_zero(hs: &[f64], ys: &[Complex64]) -> Result<Complex64> {
    if hs.is_empty() || hs.len() != ys.len() {
        return domain("extrapolation needs matching, non-empty samples");
    }
    let mut p = ys.to_vec();
    let n = hs.len();
    for k in 1..n {
        for i in 0..n - k {
            let denom = hs[i] - hs[i + k];
            if denom == 0.0 {
                return domain("extrapolation abscissae must be distinct");
            }
            p[i] = (hs[i] * p[i + 1] - hs[i + k] * p[i]) / denom;
        }
    }
    Ok(p[0])
}
