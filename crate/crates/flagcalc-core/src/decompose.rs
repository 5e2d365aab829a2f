//! Constructive decomposition machinery: paraproduct split, commutator
//! symbols, Fourier-series expansion of localized symbols, and the cone
//! decomposition of multilinear flag operators.

use crate::error::Error;
use crate::flagop::eval_flag_recursive;
use crate::flagtree::{DerivKind, FlagTree};
use crate::norms::mixed_norm;
use crate::quad::{gauss_legendre, panel_points};
use crate::spectral::{lp_window, phi, Complex, GridFunction, LpMode};
use crate::Result;

/// Paraproduct split of `f·g` along one axis into low-high (I), high-low
/// (II) and diagonal (III) pieces; `I + II + III = f·g` exactly because the
/// underlying window families tile every scale pair once.
pub fn paraproduct_split(
    f: &GridFunction,
    g: &GridFunction,
    axis: usize,
) -> Result<[GridFunction; 3]> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch("paraproduct inputs".into()));
    }
    let (k_min, k_max) = f.spec().scale_range(axis);
    let spec = f.spec().clone();
    let mut i_piece = GridFunction::zero(spec.clone());
    let mut ii_piece = GridFunction::zero(spec.clone());
    let mut iii_piece = GridFunction::zero(spec);
    for k in k_min..=k_max {
        let df = f.lp_project(axis, k, LpMode::Delta);
        let dg = g.lp_project(axis, k, LpMode::Delta);
        i_piece = i_piece.add(&f.lp_project(axis, k, LpMode::Low).pointwise_mul(&dg)?)?;
        ii_piece = ii_piece.add(&df.pointwise_mul(&g.lp_project(axis, k, LpMode::Low))?)?;
        for l in (k - 2).max(k_min)..=(k + 2).min(k_max) {
            iii_piece = iii_piece.add(&df.pointwise_mul(&g.lp_project(axis, l, LpMode::Delta))?)?;
        }
    }
    // both means land in the diagonal piece
    let mf = mean_project(f, axis);
    let mg = mean_project(g, axis);
    iii_piece = iii_piece.add(&mf.pointwise_mul(&mg)?)?;
    Ok([i_piece, ii_piece, iii_piece])
}

fn mean_project(f: &GridFunction, axis: usize) -> GridFunction {
    f.project_axis(axis, |xi| {
        if xi == 0 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::default()
        }
    })
}

/// Both forms of the commutator symbol
/// `m(ξ_hi, ξ_lo) = (|ξ_lo+ξ_hi|^α − |ξ_hi|^α)/ξ_lo`.
#[derive(Clone, Copy, Debug)]
pub struct CommutatorValue {
    /// Difference-quotient form.
    pub quotient: f64,
    /// 64-node Gauss–Legendre value of
    /// `α ∫₀¹ |ξ_hi + t ξ_lo|^{α-2} (ξ_hi + t ξ_lo) dt`.
    pub quadrature: f64,
}

/// Requires `ξ_hi ≠ 0`, `ξ_lo ≠ 0` and `|ξ_lo| ≤ |ξ_hi|/2`, so the
/// integration path stays away from the origin.
pub fn commutator_symbol(alpha: f64, xi_hi: f64, xi_lo: f64) -> Result<CommutatorValue> {
    if xi_lo == 0.0 || xi_hi == 0.0 {
        return Err(Error::DomainViolation("commutator symbol needs nonzero frequencies".into()));
    }
    if xi_lo.abs() > xi_hi.abs() / 2.0 {
        return Err(Error::DomainViolation(format!(
            "|xi_lo| = {} exceeds |xi_hi|/2 = {}",
            xi_lo.abs(),
            xi_hi.abs() / 2.0
        )));
    }
    let quotient = ((xi_lo + xi_hi).abs().powf(alpha) - xi_hi.abs().powf(alpha)) / xi_lo;
    let quadrature = commutator_integral(alpha, xi_hi, xi_lo);
    Ok(CommutatorValue {
        quotient,
        quadrature,
    })
}

fn commutator_integral(alpha: f64, xi_hi: f64, xi_lo: f64) -> f64 {
    let (x, w) = gauss_legendre(64);
    let mut acc = 0.0;
    for (&xi, &wi) in x.iter().zip(&w) {
        let t = 0.5 * (xi + 1.0);
        let u = xi_hi + t * xi_lo;
        acc += wi * u.abs().powf(alpha - 2.0) * u;
    }
    alpha * 0.5 * acc
}

/// Commutator field `[D^α, Δ_k f] Δ_ℓ g` and its measured constant against
/// the localized bound `2^{(α-1)ℓ} 2^k ‖Δ_k f‖_{p₁} ‖Δ_ℓ g‖_{p₂}` (the
/// field norm is taken in `p` with `1/p = 1/p₁ + 1/p₂`).
pub struct CommutatorField {
    pub field: GridFunction,
    pub ratio: f64,
}

pub fn commutator_apply(
    alpha: f64,
    f: &GridFunction,
    g: &GridFunction,
    k: i64,
    l: i64,
    p1: f64,
    p2: f64,
) -> Result<CommutatorField> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch("commutator inputs".into()));
    }
    if f.spec().n_axes() != 1 {
        return Err(Error::GridMismatch("commutator analysis is one-parameter".into()));
    }
    if k > l - 3 {
        return Err(Error::ScaleOrder { k, l });
    }
    let df = f.lp_project(0, k, LpMode::Delta);
    let dg = g.lp_project(0, l, LpMode::Delta);
    let prod = df.pointwise_mul(&dg)?;
    let a = prod.fractional_derivative(&[alpha], DerivKind::Homogeneous)?;
    let b = df.pointwise_mul(&dg.fractional_derivative(&[alpha], DerivKind::Homogeneous)?)?;
    let field = a.sub(&b)?;
    let p = 1.0 / (1.0 / p1 + 1.0 / p2);
    let bound = (2f64).powi(l as i32).powf(alpha - 1.0)
        * (2f64).powi(k as i32)
        * mixed_norm(&df, &[p1])?
        * mixed_norm(&dg, &[p2])?;
    let num = mixed_norm(&field, &[p])?;
    let ratio = if bound == 0.0 { 0.0 } else { num / bound };
    Ok(CommutatorField { field, ratio })
}

/// Fourier-series expansion of a localized symbol on a 1- or 2-d box.
#[derive(Clone, Debug)]
pub struct SymbolExpansion {
    pub boxes: Vec<(f64, f64)>,
    pub truncation: usize,
    /// Renormalized coefficients, row-major over `(2T+1)^dims` lattice
    /// indices `L ∈ [-T, T]`.
    pub coeffs: Vec<Complex>,
    /// Extracted scale factor: raw coefficient = prefactor × renormalized.
    pub prefactor: f64,
    /// Sup-norm reconstruction error on the box (raw scale).
    pub residual: f64,
    /// Log–log least-squares decay exponent over `3 ≤ |L| ≤ T` (1-d only).
    pub decay_exponent: Option<f64>,
}

impl SymbolExpansion {
    pub fn dims(&self) -> usize {
        self.boxes.len()
    }

    pub fn coeff(&self, l: &[i64]) -> Complex {
        let t = self.truncation as i64;
        let side = 2 * t + 1;
        let mut off = 0i64;
        for &li in l {
            assert!(li.abs() <= t);
            off = off * side + (li + t);
        }
        self.coeffs[off as usize]
    }

    /// RFC-4180 CSV: one row per lattice index with real part, imaginary
    /// part and modulus.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        let t = self.truncation as i64;
        match self.dims() {
            1 => {
                writeln!(w, "L,re,im,modulus")?;
                for l in -t..=t {
                    let c = self.coeff(&[l]);
                    writeln!(w, "{l},{:.17e},{:.17e},{:.17e}", c.re, c.im, c.norm())?;
                }
            }
            _ => {
                writeln!(w, "L1,L2,re,im,modulus")?;
                for l1 in -t..=t {
                    for l2 in -t..=t {
                        let c = self.coeff(&[l1, l2]);
                        writeln!(w, "{l1},{l2},{:.17e},{:.17e},{:.17e}", c.re, c.im, c.norm())?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Expand `symbol` on the closed box (1-d or 2-d) into its Fourier series
/// with `2·truncation+1` modes per axis.  Coefficients come from composite
/// Gauss–Legendre quadrature (8 panels × 16 nodes per axis, panels split
/// at 0 so an origin kink never crosses a panel).
pub fn symbol_fourier_expand(
    symbol: &dyn Fn(&[f64]) -> f64,
    boxes: &[(f64, f64)],
    truncation: usize,
) -> Result<SymbolExpansion> {
    let dims = boxes.len();
    if dims == 0 || dims > 2 {
        return Err(Error::DomainViolation("expansion supports 1-d and 2-d boxes".into()));
    }
    let t = truncation as i64;
    let side = (2 * t + 1) as usize;
    // quadrature abscissas/weights per axis
    // enough panels that the highest retained mode sees ~5 nodes per
    // oscillation period; otherwise the tail coefficients are quadrature
    // noise and the decay fit is meaningless
    let panels = 8.max(truncation.div_ceil(3));
    let pts: Vec<Vec<(f64, f64)>> = boxes
        .iter()
        .map(|&(a, b)| panel_points(a, b, panels, 16))
        .collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    // E[axis][L][q] = w_q exp(-2πi L (x_q - a)/len) / len
    let e_mats: Vec<Vec<Vec<Complex>>> = boxes
        .iter()
        .zip(&pts)
        .map(|(&(a, b), p)| {
            let len = b - a;
            (-t..=t)
                .map(|l| {
                    p.iter()
                        .map(|&(x, w)| {
                            Complex::from_polar(w / len, -two_pi * l as f64 * (x - a) / len)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut coeffs = vec![Complex::default(); side.pow(dims as u32)];
    let mut residual = 0.0f64;
    match dims {
        1 => {
            let vals: Vec<f64> = pts[0]
                .iter()
                .map(|&(x, _)| symbol(&[x]))
                .collect();
            if let Some(bad) = vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSymbol(vec![pts[0][bad].0]));
            }
            for (li, row) in e_mats[0].iter().enumerate() {
                coeffs[li] = row.iter().zip(&vals).map(|(e, &v)| e * v).sum();
            }
            // reconstruction on the abscissas
            let len = boxes[0].1 - boxes[0].0;
            for (q, &(x, _)) in pts[0].iter().enumerate() {
                let mut rec = Complex::default();
                for l in -t..=t {
                    let c = coeffs[(l + t) as usize];
                    rec += c * Complex::from_polar(1.0, two_pi * l as f64 * (x - boxes[0].0) / len);
                }
                residual = residual.max((rec.re - vals[q]).abs().max(rec.im.abs()));
            }
        }
        _ => {
            let (q1, q2) = (pts[0].len(), pts[1].len());
            let mut vals = vec![0.0f64; q1 * q2];
            for (i, &(x, _)) in pts[0].iter().enumerate() {
                for (j, &(y, _)) in pts[1].iter().enumerate() {
                    let v = symbol(&[x, y]);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSymbol(vec![x, y]));
                    }
                    vals[i * q2 + j] = v;
                }
            }
            // tmp[L1][q2] = Σ_{q1} E1[L1][q1] vals[q1][q2]
            let mut tmp = vec![Complex::default(); side * q2];
            for (l1, row) in e_mats[0].iter().enumerate() {
                for q in 0..q1 {
                    let e = row[q];
                    let base = q * q2;
                    for j in 0..q2 {
                        tmp[l1 * q2 + j] += e * vals[base + j];
                    }
                }
            }
            for l1 in 0..side {
                for (l2, row) in e_mats[1].iter().enumerate() {
                    coeffs[l1 * side + l2] =
                        row.iter().zip(&tmp[l1 * q2..(l1 + 1) * q2]).map(|(e, v)| e * v).sum();
                }
            }
            // reconstruction via the separable phase matrices
            let len1 = boxes[0].1 - boxes[0].0;
            let len2 = boxes[1].1 - boxes[1].0;
            let ph1: Vec<Vec<Complex>> = pts[0]
                .iter()
                .map(|&(x, _)| {
                    (-t..=t)
                        .map(|l| {
                            Complex::from_polar(1.0, two_pi * l as f64 * (x - boxes[0].0) / len1)
                        })
                        .collect()
                })
                .collect();
            let ph2: Vec<Vec<Complex>> = pts[1]
                .iter()
                .map(|&(y, _)| {
                    (-t..=t)
                        .map(|l| {
                            Complex::from_polar(1.0, two_pi * l as f64 * (y - boxes[1].0) / len2)
                        })
                        .collect()
                })
                .collect();
            // rec(q1,q2) = ph1[q1] · C · ph2[q2]
            for (i, p1) in ph1.iter().enumerate() {
                // row = p1 · C
                let mut row = vec![Complex::default(); side];
                for (l1, &a) in p1.iter().enumerate() {
                    for l2 in 0..side {
                        row[l2] += a * coeffs[l1 * side + l2];
                    }
                }
                for (j, p2) in ph2.iter().enumerate() {
                    let rec: Complex = row.iter().zip(p2.iter()).map(|(r, p)| r * p).sum();
                    let v = vals[i * q2 + j];
                    residual = residual.max((rec.re - v).abs().max(rec.im.abs()));
                }
            }
        }
    }
    let decay_exponent = if dims == 1 {
        fit_decay(&coeffs, truncation)
    } else {
        None
    };
    Ok(SymbolExpansion {
        boxes: boxes.to_vec(),
        truncation,
        coeffs,
        prefactor: 1.0,
        residual,
        decay_exponent,
    })
}

/// Least-squares slope of `ln |C_L|` against `ln |L|`, averaged over ±L,
/// on the window `3 ≤ |L| ≤ T` (small indices are pre-asymptotic).
fn fit_decay(coeffs: &[Complex], truncation: usize) -> Option<f64> {
    let t = truncation as i64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in 3..=t {
        let c = 0.5 * (coeffs[(l + t) as usize].norm() + coeffs[(-l + t) as usize].norm());
        if c > 1e-300 {
            xs.push((l as f64).ln());
            ys.push(c.ln());
        }
    }
    if xs.len() < 4 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(-sxy / sxx)
}

/// Diagonal symbol `|ζ|^α φ(2^{-ℓ}ζ)` (cutoff ≡ 1 on `|ζ| ≤ 2^{ℓ+2}`,
/// supported in `|ζ| ≤ 2^{ℓ+3}`) expanded on its box, with the scale
/// factor `2^{ℓα}` extracted.
pub fn diagonal_expansion(alpha: f64, ell: i64, truncation: usize) -> Result<SymbolExpansion> {
    let scale = (2f64).powi(ell as i32);
    let half = 8.0 * scale;
    let sym = move |z: &[f64]| {
        let zeta = z[0];
        if zeta == 0.0 {
            0.0
        } else {
            zeta.abs().powf(alpha) * phi(zeta / (4.0 * scale))
        }
    };
    let mut exp = symbol_fourier_expand(&sym, &[(-half, half)], truncation)?;
    let pre = scale.powf(alpha);
    for c in &mut exp.coeffs {
        *c /= pre;
    }
    exp.prefactor = pre;
    Ok(exp)
}

/// Frequency-localized commutator symbol on its Whitney box:
/// `m_{C_α}(ξ_hi, ξ_lo)` times smooth cutoffs placing `ξ_hi` in the
/// (signed) annulus `|ξ_hi| ∈ [2^{ℓ-2}, 2^{ℓ+2}]` and `|ξ_lo| ≤ 2^{ℓ-3}`.
/// Scale factor `2^{ℓ(α-1)}` extracted.  `positive` picks the ± branch.
pub fn commutator_expansion(
    alpha: f64,
    ell: i64,
    positive: bool,
    truncation: usize,
) -> Result<SymbolExpansion> {
    let s = (2f64).powi(ell as i32);
    let (hi_lo, hi_hi) = if positive {
        (s / 4.0, 4.0 * s)
    } else {
        (-4.0 * s, -s / 4.0)
    };
    let lo_half = s / 8.0;
    let sym = move |z: &[f64]| {
        let (hi, lo) = (z[0], z[1]);
        // cutoffs: 1 on the inner half of each range, vanishing at the edges
        let hi_cut = phi(hi / (2.0 * s)) * (1.0 - phi(2.0 * hi / s));
        let lo_cut = phi(2.0 * lo / lo_half);
        if hi_cut == 0.0 || lo_cut == 0.0 {
            return 0.0;
        }
        commutator_integral(alpha, hi, lo) * hi_cut * lo_cut
    };
    let mut exp = symbol_fourier_expand(&sym, &[(hi_lo, hi_hi), (-lo_half, lo_half)], truncation)?;
    let pre = s.powf(alpha - 1.0);
    for c in &mut exp.coeffs {
        *c /= pre;
    }
    exp.prefactor = pre;
    Ok(exp)
}

/// Cone-decomposition region: one dominant leaf, or a diagonal pair.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConeRegion {
    Single(usize),
    Pair(usize, usize),
}

/// All `n + n(n-1)/2` regions.
pub fn cone_regions(n: usize) -> Vec<ConeRegion> {
    let mut out: Vec<ConeRegion> = (0..n).map(ConeRegion::Single).collect();
    for a in 0..n {
        for b in a + 1..n {
            out.push(ConeRegion::Pair(a, b));
        }
    }
    out
}

/// Projection assignment for a region: 𝔐 leaves take `Δ`, 𝔪 leaves `S`.
#[derive(Clone, Debug)]
pub struct ConePiece {
    pub region: ConeRegion,
    pub major: Vec<usize>,
    pub minor: Vec<usize>,
    n_leaves: usize,
}

pub fn cone_localize(tree: &FlagTree, region: ConeRegion) -> Result<ConePiece> {
    let n = tree.n_leaves();
    let major: Vec<usize> = match region {
        ConeRegion::Single(l) => vec![l],
        ConeRegion::Pair(a, b) => vec![a, b],
    };
    for &l in &major {
        if l >= n {
            return Err(Error::DomainViolation(format!(
                "region leaf {l} outside 0..{n}"
            )));
        }
    }
    if let ConeRegion::Pair(a, b) = region {
        if a >= b {
            return Err(Error::DomainViolation("pair region needs a < b".into()));
        }
    }
    let minor = (0..n).filter(|l| !major.contains(l)).collect();
    Ok(ConePiece {
        region,
        major,
        minor,
        n_leaves: n,
    })
}

impl ConePiece {
    /// Evaluate the region's share of `T_G(f⃗)`, summed over its scales.
    ///
    /// Scale tuples are ranked lexicographically by (scale, leaf index), so
    /// every tuple belongs to exactly one region: `Single(l)` when `l`
    /// leads by three scales or more, otherwise the pair of the two
    /// top-ranked leaves.  Minor leaves receive the low-pass window cut at
    /// the smaller of the two leading ranks.  The all-mean remainder rides
    /// with `Pair(0,1)`.
    pub fn eval(&self, tree: &FlagTree, fns: &[&GridFunction]) -> Result<GridFunction> {
        if fns.len() != self.n_leaves {
            return Err(Error::GridMismatch("function count".into()));
        }
        let spec = fns[0].spec().clone();
        if spec.n_axes() != 1 || tree.n_params() != 1 {
            return Err(Error::GridMismatch("cone decomposition is one-parameter".into()));
        }
        let m = spec.sizes()[0];
        let (k_min, k_max) = spec.scale_range(0);
        let mut acc = GridFunction::zero(spec.clone());
        match self.region {
            ConeRegion::Single(l0) => {
                for k in k_min..=k_max {
                    let projected: Vec<GridFunction> = (0..self.n_leaves)
                        .map(|l| {
                            if l == l0 {
                                fns[l].lp_project(0, k, LpMode::Delta)
                            } else {
                                fns[l].lp_project(0, k, LpMode::Low)
                            }
                        })
                        .collect();
                    let refs: Vec<&GridFunction> = projected.iter().collect();
                    acc = acc.add(&eval_flag_recursive(tree, &refs)?)?;
                }
            }
            ConeRegion::Pair(a, b) => {
                for ka in k_min..=k_max {
                    for kb in (ka - 2).max(k_min)..=(ka + 2).min(k_max) {
                        // threshold rank: lexicographic min of (ka, a), (kb, b)
                        let (tk, tl) = if (ka, a) <= (kb, b) { (ka, a) } else { (kb, b) };
                        let projected: Vec<GridFunction> = (0..self.n_leaves)
                            .map(|l| {
                                if l == a {
                                    fns[l].lp_project(0, ka, LpMode::Delta)
                                } else if l == b {
                                    fns[l].lp_project(0, kb, LpMode::Delta)
                                } else {
                                    let cut = if l < tl { tk } else { tk - 1 };
                                    fns[l].project_axis(0, |xi| {
                                        Complex::new(low_window_upto(cut, xi, m), 0.0)
                                    })
                                }
                            })
                            .collect();
                        let refs: Vec<&GridFunction> = projected.iter().collect();
                        acc = acc.add(&eval_flag_recursive(tree, &refs)?)?;
                    }
                }
                if (a, b) == (0, 1) {
                    // all-mean remainder
                    let projected: Vec<GridFunction> =
                        fns.iter().map(|f| mean_project(f, 0)).collect();
                    let refs: Vec<&GridFunction> = projected.iter().collect();
                    acc = acc.add(&eval_flag_recursive(tree, &refs)?)?;
                }
            }
        }
        Ok(acc)
    }
}

/// Mean plus all annuli `ψ_{k'}` with `0 ≤ k' ≤ cut` (empty for `cut < 0`).
fn low_window_upto(cut: i64, xi: i64, m: usize) -> f64 {
    if xi == 0 {
        1.0
    } else if cut < 0 {
        0.0
    } else {
        // telescoped partial sum; equals S_{cut+3}'s nonzero-frequency part
        lp_window(LpMode::Low, cut + 3, xi, m)
    }
}

/// Full reassembly: sum of every region piece (equals `T_G(f⃗)` up to
/// rounding).
pub fn cone_reassemble(tree: &FlagTree, fns: &[&GridFunction]) -> Result<GridFunction> {
    let mut acc = GridFunction::zero(fns[0].spec().clone());
    for region in cone_regions(tree.n_leaves()) {
        let piece = cone_localize(tree, region)?;
        acc = acc.add(&piece.eval(tree, fns)?)?;
    }
    Ok(acc)
}
