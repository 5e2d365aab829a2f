//! Gauss–Legendre quadrature.
//!
//! Nodes and weights computed by Newton iteration on the Legendre
//! polynomial, good to machine precision for the modest node counts used
//! here (≤ 64).

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and its derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// ∫_a^b f by a single n-node Gauss–Legendre rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Composite panel rule on `[a, b]`: `panels` equal panels per side,
/// split at 0 when 0 lies strictly inside (integrands with a kink at the
/// origin stay smooth on each panel).
pub fn panel_points(a: f64, b: f64, panels: usize, nodes_per_panel: usize) -> Vec<(f64, f64)> {
    let mut edges = Vec::new();
    if a < 0.0 && b > 0.0 {
        let per_side = panels.div_ceil(2).max(1);
        for i in 0..=per_side {
            edges.push(a * (1.0 - i as f64 / per_side as f64));
        }
        for i in 1..=per_side {
            edges.push(b * i as f64 / per_side as f64);
        }
    } else {
        for i in 0..=panels {
            edges.push(a + (b - a) * i as f64 / panels as f64);
        }
    }
    let (x, w) = gauss_legendre(nodes_per_panel);
    let mut pts = Vec::new();
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        for (&xi, &wi) in x.iter().zip(&w) {
            pts.push((mid + half * xi, wi * half));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_exactness() {
        // 64-node rule integrates polynomials up to degree 127 exactly
        let v = integrate(|x| x.powi(6), -1.0, 1.0, 64);
        assert!((v - 2.0 / 7.0).abs() < 1e-14);
        let v = integrate(|x| x.exp(), 0.0, 1.0, 16);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn panel_rule_kink() {
        // ∫_{-1}^{1} |x|^{1/2} dx = 4/3, kink at 0 handled by the split
        let pts = panel_points(-1.0, 1.0, 8, 16);
        let v: f64 = pts.iter().map(|(x, w)| w * x.abs().sqrt()).sum();
        assert!((v - 4.0 / 3.0).abs() < 1e-5, "got {v}");
    }

    #[test]
    fn weights_sum_to_length() {
        let pts = panel_points(-8.0, 8.0, 8, 16);
        let s: f64 = pts.iter().map(|(_, w)| w).sum();
        assert!((s - 16.0).abs() < 1e-12);
    }
}
