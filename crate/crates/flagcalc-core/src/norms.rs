//! Mixed Lebesgue (quasi)norms and Besov norms on periodic grids.
//!
//! Mixed norms nest right-to-left: the innermost (last) axis is reduced
//! first.  Lebesgue axes use the rectangle rule with cell measure `1/M`;
//! `p = ∞` takes the max.  Quasi-norm exponents `p < 1` are allowed.

use crate::error::Error;
use crate::spectral::{GridFunction, LpMode};
use crate::Result;

/// Mixed Lebesgue norm with one exponent per axis (`f64::INFINITY` for max).
pub fn mixed_norm(f: &GridFunction, exps: &[f64]) -> Result<f64> {
    if exps.len() != f.spec().n_axes() {
        return Err(Error::GridMismatch(format!(
            "{} exponents for {} axes",
            exps.len(),
            f.spec().n_axes()
        )));
    }
    let mut data: Vec<f64> = f.samples().iter().map(|c| c.norm()).collect();
    // reduce the innermost axis first
    for axis in (0..exps.len()).rev() {
        let m = f.spec().sizes()[axis];
        let p = exps[axis];
        let mut out = Vec::with_capacity(data.len() / m);
        for chunk in data.chunks(m) {
            out.push(reduce_axis(chunk, p));
        }
        data = out;
    }
    debug_assert_eq!(data.len(), 1);
    Ok(data[0])
}

fn reduce_axis(vals: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        vals.iter().cloned().fold(0.0, f64::max)
    } else {
        let m = vals.len() as f64;
        (vals.iter().map(|v| v.powf(p)).sum::<f64>() / m).powf(1.0 / p)
    }
}

/// One-parameter homogeneous Besov norm `sup_k 2^{ks} ‖Δ_k^{(j)} f‖` where
/// the inner norm is the mixed Lebesgue norm with exponents `companions`
/// (entry `j` applies to axis `j` itself).
pub fn besov_norm(f: &GridFunction, j: usize, s: f64, companions: &[f64]) -> Result<f64> {
    multi_besov_norm(f, &[(j, s)], companions)
}

/// Multi-parameter Besov norm: `sup` over dyadic scale tuples of
/// `∏ 2^{k_i s_i} ‖Δ_{k_1}^{(j_1)} … Δ_{k_m}^{(j_m)} f‖_{p⃗}`.
pub fn multi_besov_norm(
    f: &GridFunction,
    besov_axes: &[(usize, f64)],
    companions: &[f64],
) -> Result<f64> {
    if companions.len() != f.spec().n_axes() {
        return Err(Error::GridMismatch("companion exponent count".into()));
    }
    for &(j, _) in besov_axes {
        if j >= f.spec().n_axes() {
            return Err(Error::GridMismatch(format!("besov axis {j} out of range")));
        }
    }
    let mut best = 0.0f64;
    let mut scales = vec![0i64; besov_axes.len()];
    sup_over_scales(f, besov_axes, companions, 0, &mut scales, &mut best)?;
    Ok(best)
}

fn sup_over_scales(
    f: &GridFunction,
    besov_axes: &[(usize, f64)],
    companions: &[f64],
    depth: usize,
    scales: &mut Vec<i64>,
    best: &mut f64,
) -> Result<()> {
    if depth == besov_axes.len() {
        let mut g = f.clone();
        let mut weight = 1.0;
        for (i, &(j, s)) in besov_axes.iter().enumerate() {
            g = g.lp_project(j, scales[i], LpMode::Delta);
            weight *= (2f64).powi(scales[i] as i32).powf(s);
        }
        let v = weight * mixed_norm(&g, companions)?;
        if v > *best {
            *best = v;
        }
        return Ok(());
    }
    let (j, _) = besov_axes[depth];
    let (k_min, k_max) = f.spec().scale_range(j);
    for k in k_min..=k_max {
        scales[depth] = k;
        sup_over_scales(f, besov_axes, companions, depth + 1, scales, best)?;
    }
    Ok(())
}

/// Besov interpolation ratio
/// `‖f‖_{Ḃ^s} / (‖f‖_{Ḃ^{s₀}}^θ ‖f‖_{Ḃ^{s₁}}^{1-θ})` with
/// `s = θ s₀ + (1-θ) s₁`.  The inequality holds with constant exactly 1,
/// so the returned ratio is ≤ 1 up to rounding; 0 for the zero function.
pub fn interpolation_check(
    f: &GridFunction,
    j: usize,
    s0: f64,
    s1: f64,
    theta: f64,
    companions: &[f64],
) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::DomainViolation(format!("theta {theta} outside [0,1]")));
    }
    let s = theta * s0 + (1.0 - theta) * s1;
    let mid = besov_norm(f, j, s, companions)?;
    let lo = besov_norm(f, j, s0, companions)?;
    let hi = besov_norm(f, j, s1, companions)?;
    let denom = lo.powf(theta) * hi.powf(1.0 - theta);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(mid / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_band_limited, Complex, GridSpec};

    #[test]
    fn constant_and_tensor() {
        let spec = GridSpec::new(vec![8, 16]).unwrap();
        let c = GridFunction::single_mode(spec.clone(), &[0, 0], Complex::new(-2.0, 0.0));
        let c = c.unwrap();
        for p in [&[1.0, 3.0][..], &[0.5, f64::INFINITY]] {
            assert!((mixed_norm(&c, p).unwrap() - 2.0).abs() < 1e-12);
        }
        // tensor product factorizes
        let g = random_band_limited(&GridSpec::new(vec![8]).unwrap(), 1, 2.0, false);
        let h = random_band_limited(&GridSpec::new(vec![16]).unwrap(), 2, 2.0, false);
        let mut samples = Vec::with_capacity(8 * 16);
        for a in g.samples() {
            for b in h.samples() {
                samples.push(a * b);
            }
        }
        let fg = GridFunction::from_samples(spec, samples).unwrap();
        let lhs = mixed_norm(&fg, &[3.0, 1.5]).unwrap();
        let rhs = mixed_norm(&g, &[3.0]).unwrap() * mixed_norm(&h, &[1.5]).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn l1_below_l2() {
        let spec = GridSpec::new(vec![32]).unwrap();
        for seed in 0..20 {
            let f = random_band_limited(&spec, seed, 4.0, false);
            assert!(mixed_norm(&f, &[1.0]).unwrap() <= mixed_norm(&f, &[2.0]).unwrap() + 1e-14);
        }
    }

    #[test]
    fn homogeneity_and_subadditivity() {
        let spec = GridSpec::new(vec![16, 8]).unwrap();
        let f = random_band_limited(&spec, 3, 3.0, false);
        let g = random_band_limited(&spec, 4, 3.0, false);
        let p = [2.0, 1.5];
        let nf = mixed_norm(&f, &p).unwrap();
        let scaled = mixed_norm(&f.scale(Complex::new(-3.5, 1.0)), &p).unwrap();
        let c = Complex::new(-3.5, 1.0).norm();
        assert!((scaled - c * nf).abs() < 1e-12 * scaled);
        let sum = mixed_norm(&f.add(&g).unwrap(), &p).unwrap();
        assert!(sum <= nf + mixed_norm(&g, &p).unwrap() + 1e-12);
        // quasi-norm τ-subadditivity with τ = min(1, p_min)
        let q = [0.7, 0.5];
        let tau: f64 = 0.5;
        let a = mixed_norm(&f.add(&g).unwrap(), &q).unwrap().powf(tau);
        let b = mixed_norm(&f, &q).unwrap().powf(tau) + mixed_norm(&g, &q).unwrap().powf(tau);
        assert!(a <= b + 1e-12);
    }

    #[test]
    fn axis_order_gap() {
        // f concentrated on the diagonal of an 8x8 grid: L¹_x L^∞_y and
        // L^∞_x L¹_y differ (8 vs 1 after normalization).
        let spec = GridSpec::new(vec![8, 8]).unwrap();
        let mut samples = vec![Complex::default(); 64];
        for i in 0..8 {
            samples[i * 8 + i] = Complex::new(8.0, 0.0);
        }
        let f = GridFunction::from_samples(spec, samples).unwrap();
        let a = mixed_norm(&f, &[1.0, f64::INFINITY]).unwrap();
        let b = mixed_norm(&f, &[f64::INFINITY, 1.0]).unwrap();
        assert!((a - 8.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn besov_single_block() {
        let spec = GridSpec::new(vec![64]).unwrap();
        // mode 4 sits in the ψ_2 plateau (ψ_2(4) = φ(1) − φ(2) = 1)
        let f = GridFunction::single_mode(spec.clone(), &[4], Complex::new(3.0, 0.0)).unwrap();
        let b = besov_norm(&f, 0, 1.0, &[2.0]).unwrap();
        assert!((b - 4.0 * 3.0).abs() < 1e-12, "got {b}");
    }

    #[test]
    fn interpolation_examples() {
        let spec = GridSpec::new(vec![64]).unwrap();
        let f = GridFunction::single_mode(spec.clone(), &[4], Complex::new(1.0, 0.0)).unwrap();
        let r = interpolation_check(&f, 0, 0.0, 1.0, 0.5, &[2.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        for seed in 0..10 {
            let g = random_band_limited(&spec, seed, 6.0, false).remove_global_mean();
            let r = interpolation_check(&g, 0, 0.0, 0.5, 0.5, &[2.0]).unwrap();
            assert!(r <= 1.0 + 1e-12);
            let r0 = interpolation_check(&g, 0, 0.0, 0.5, 1.0, &[2.0]).unwrap();
            assert!((r0 - 1.0).abs() < 1e-12);
        }
    }
}
