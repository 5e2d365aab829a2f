//! Numerical inequality harnesses: LHS/RHS ratio sweeps for the flag
//! Leibniz rules, dilation-invariance probes, the smoothing estimate, and
//! the fixed-scale paraproduct bounds.
//!
//! Empirical constants are reported, never asserted against theoretical
//! values — the estimates carry no explicit constants.

use sha2::{Digest, Sha256};

use crate::decompose::commutator_apply;
use crate::error::Error;
use crate::flagop::{
    builtin_symbol, eval_asymmetric, eval_flag_recursive, sparse_modes, Builtin,
};
use crate::flagtree::{DerivKind, ExponentTuple, FlagForest, FlagTree, Term};
use crate::norms::mixed_norm;
use crate::spectral::{random_band_limited, GridFunction, GridSpec, LpMode};
use crate::Result;

/// The operator under test: a single multi-parameter tree (evaluated
/// recursively) or a tensor product of one-parameter trees (evaluated by
/// the direct lattice sum, so inputs must be band-limited).
#[derive(Clone, Debug)]
pub enum Operator {
    Tree(FlagTree),
    Forest(FlagForest),
}

impl Operator {
    pub fn n_leaves(&self) -> usize {
        match self {
            Operator::Tree(t) => t.n_leaves(),
            Operator::Forest(f) => f.n_leaves(),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Operator::Tree(t) => t.n_params(),
            Operator::Forest(f) => f.n_params(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            Operator::Tree(t) => t.is_homogeneous(),
            Operator::Forest(f) => f.is_homogeneous(),
        }
    }

    pub fn check_exponents(&self, exps: &ExponentTuple) -> Result<crate::flagtree::Verdict> {
        match self {
            Operator::Tree(t) => t.check_exponents(exps),
            Operator::Forest(f) => f.check_exponents(exps),
        }
    }

    pub fn rhs_terms(&self, exps: &ExponentTuple) -> Result<Vec<Term>> {
        match self {
            Operator::Tree(t) => t.rhs_terms(exps),
            Operator::Forest(f) => f.rhs_terms(exps),
        }
    }

    fn eval(&self, fns: &[&GridFunction], spec: &GridSpec) -> Result<GridFunction> {
        match self {
            Operator::Tree(t) => eval_flag_recursive(t, fns),
            Operator::Forest(f) => {
                let sparse: Vec<_> = fns.iter().map(|g| sparse_modes(g, 0.0)).collect();
                eval_asymmetric(f, &sparse, spec)
            }
        }
    }
}

/// One ratio experiment: operator, exponents, trial plan, input profile.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub operator: Operator,
    pub exponents: ExponentTuple,
    pub trials: usize,
    pub seed: u64,
    pub grid: GridSpec,
    /// Gaussian spectral width of random inputs.
    pub sigma: f64,
    /// Optional hard band limit (kept fixed across grid sizes so the
    /// operator itself is grid-independent).
    pub band: Option<i64>,
}

impl Experiment {
    fn make_input(&self, trial: usize, leaf: usize) -> GridFunction {
        let f = random_band_limited(
            &self.grid,
            mix(self.seed, trial as u64, leaf as u64),
            self.sigma,
            true,
        );
        match self.band {
            Some(b) => f.truncate_band(b),
            None => f,
        }
    }

    /// Stable hash of the full configuration; identical configs rerun to
    /// byte-identical reports.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "{:?}|{:?}|{}|{}|{:?}|{}|{:?}",
            self.operator,
            self.exponents,
            self.trials,
            self.seed,
            self.grid.sizes(),
            self.sigma,
            self.band
        ));
        let digest = h.finalize();
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct RatioReport {
    pub rows: Vec<TrialRow>,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
    pub config_hash: String,
}

impl RatioReport {
    fn from_rows(rows: Vec<TrialRow>, config_hash: String) -> RatioReport {
        let mut sorted: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        sorted.sort_by(f64::total_cmp);
        let pick = |q: f64| {
            if sorted.is_empty() {
                0.0
            } else {
                sorted[((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)]
            }
        };
        RatioReport {
            max: sorted.last().copied().unwrap_or(0.0),
            p50: pick(0.5),
            p95: pick(0.95),
            rows,
            config_hash,
        }
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "trial,seed,lhs,rhs,ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.17e},{:.17e},{:.17e}",
                r.trial, r.seed, r.lhs, r.rhs, r.ratio
            )?;
        }
        Ok(())
    }

    pub fn json_summary(&self) -> String {
        serde_json::json!({
            "trials": self.rows.len(),
            "max": self.max,
            "p50": self.p50,
            "p95": self.p95,
            "config_hash": self.config_hash,
        })
        .to_string()
    }
}

/// splitmix64-style mixer for per-(trial, leaf) RNG streams.
fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn exps_f64(row: &[crate::flagtree::Exponent]) -> Vec<f64> {
    row.iter().map(|p| p.as_f64()).collect()
}

/// Target mixed-norm exponents `r⃗` from the Hölder identity, one per axis.
fn target_exponents(exps: &ExponentTuple) -> Vec<f64> {
    (0..exps.n_params()).map(|j| exps.r(j).as_f64()).collect()
}

fn ratio_for(
    op: &Operator,
    exps: &ExponentTuple,
    terms: &[Term],
    fns: &[&GridFunction],
    spec: &GridSpec,
    kind: DerivKind,
) -> Result<(f64, f64)> {
    let lhs = mixed_norm(&op.eval(fns, spec)?, &target_exponents(exps))?;
    let mut rhs = 0.0;
    for term in terms {
        let mut prod = 1.0;
        for (l, f) in fns.iter().enumerate() {
            let orders: Vec<f64> = term.orders[l].iter().map(|o| o.as_f64()).collect();
            let df = if orders.iter().all(|&o| o == 0.0) {
                (*f).clone()
            } else {
                f.fractional_derivative(&orders, kind)?
            };
            prod *= mixed_norm(&df, &exps_f64(&term.exponents[l]))?;
        }
        rhs += prod;
    }
    Ok((lhs, rhs))
}

/// LHS/RHS ratio sweep for the flag Leibniz inequality: per trial,
/// `‖T(f⃗)‖_{r⃗} / Σ_δ ∏_l ‖D^{δ⁻¹(l)} f_l‖_{p⃗_l}` on random band-limited
/// inputs.  Exponents must pass `check_exponents` first.
pub fn leibniz_ratio(exp: &Experiment) -> Result<RatioReport> {
    let verdict = exp.operator.check_exponents(&exp.exponents)?;
    if !verdict.pass {
        return Err(Error::ConstraintFail(verdict.violations().len()));
    }
    if exp.grid.n_axes() != exp.operator.n_params() {
        return Err(Error::GridMismatch("grid axes != operator parameters".into()));
    }
    let terms = exp.operator.rhs_terms(&exp.exponents)?;
    let kind = if exp.operator.is_homogeneous() {
        DerivKind::Homogeneous
    } else {
        DerivKind::Inhomogeneous
    };
    let n = exp.operator.n_leaves();
    let mut rows = Vec::with_capacity(exp.trials);
    for trial in 0..exp.trials {
        let fns: Vec<GridFunction> = (0..n).map(|l| exp.make_input(trial, l)).collect();
        let refs: Vec<&GridFunction> = fns.iter().collect();
        let (lhs, rhs) = ratio_for(&exp.operator, &exp.exponents, &terms, &refs, &exp.grid, kind)?;
        if rhs == 0.0 {
            if lhs > 0.0 {
                return Err(Error::DomainViolation(
                    "nonzero operator output with vanishing right-hand side".into(),
                ));
            }
            continue; // all-zero inputs carry no information
        }
        rows.push(TrialRow {
            trial,
            seed: mix(exp.seed, trial as u64, u64::MAX),
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    Ok(RatioReport::from_rows(rows, exp.config_hash()))
}

/// Homogeneity probe: the ratio statistic is invariant under spectral
/// dilation `f̂(ξ) → f̂(2^{-m} ξ)` (grid doubled `m` times) because both
/// sides pick up the same `2^{m β}` factors.  Returns the base and
/// dilated ratios; homogeneous operators only.
pub struct ScalingReport {
    pub base: (f64, f64),
    pub dilated: (f64, f64),
    pub base_ratio: f64,
    pub dilated_ratio: f64,
}

pub fn scaling_probe(
    op: &Operator,
    exps: &ExponentTuple,
    inputs: &[GridFunction],
    m_shift: u32,
) -> Result<ScalingReport> {
    if !op.is_homogeneous() {
        return Err(Error::DomainViolation(
            "scaling probe requires a homogeneous operator".into(),
        ));
    }
    let verdict = op.check_exponents(exps)?;
    if !verdict.pass {
        return Err(Error::ConstraintFail(verdict.violations().len()));
    }
    let terms = op.rhs_terms(exps)?;
    let spec = inputs[0].spec().clone();
    let refs: Vec<&GridFunction> = inputs.iter().collect();
    let base = ratio_for(op, exps, &terms, &refs, &spec, DerivKind::Homogeneous)?;
    let dilated_inputs: Vec<GridFunction> = inputs
        .iter()
        .map(|f| dilate_spectrum(f, m_shift))
        .collect::<Result<_>>()?;
    let dspec = dilated_inputs[0].spec().clone();
    let drefs: Vec<&GridFunction> = dilated_inputs.iter().collect();
    let dilated = ratio_for(op, exps, &terms, &drefs, &dspec, DerivKind::Homogeneous)?;
    let ratio = |(l, r): (f64, f64)| if r == 0.0 { 0.0 } else { l / r };
    Ok(ScalingReport {
        base_ratio: ratio(base),
        dilated_ratio: ratio(dilated),
        base,
        dilated,
    })
}

/// Place each spectral mode `k` at `2^m k` on a grid enlarged by `2^m`.
fn dilate_spectrum(f: &GridFunction, m_shift: u32) -> Result<GridFunction> {
    let factor = 1usize << m_shift;
    let new_spec = GridSpec::new(f.spec().sizes().iter().map(|&m| m * factor).collect())?;
    let mut spectrum = vec![crate::spectral::Complex::default(); new_spec.total()];
    for (off, &c) in f.spectrum().iter().enumerate() {
        if c == crate::spectral::Complex::default() {
            continue;
        }
        let k = f.spec().freq_at_offset(off);
        let scaled: Vec<i64> = k.iter().map(|&x| x << m_shift).collect();
        let new_off = new_spec
            .offset_of_freq(&scaled)
            .ok_or(Error::OutOfBand(scaled.clone()))?;
        spectrum[new_off] = c;
    }
    GridFunction::from_spectrum(new_spec, spectrum)
}

/// Smoothing-estimate probe for the bilinear fractional-integral symbol
/// `(ξ₁² + ξ₂²)^{-ν/2}`:
/// `‖D^s T_m(f₁,f₂)‖₂ / (‖D^{s-ν} f₁‖₂‖f₂‖₂ + ‖f₁‖₂‖D^{s-ν} f₂‖₂)`
/// on zero-mean band-limited inputs (zero mean keeps the negative-order
/// derivative on the right well defined when `s < ν`).
pub fn smoothing_ratio(
    nu: f64,
    s: f64,
    grid: &GridSpec,
    seed: u64,
    trials: usize,
    band: i64,
) -> Result<RatioReport> {
    if grid.n_axes() != 1 {
        return Err(Error::GridMismatch("smoothing probe is one-parameter".into()));
    }
    let m = grid.sizes()[0] as i64;
    if 2 * band > m / 2 - 1 {
        return Err(Error::InvalidGrid(format!(
            "band {band} too wide: pair sums must stay inside the grid band"
        )));
    }
    let symbol = builtin_symbol(Builtin::FractionalIntegral(vec![nu]), 2, 1)?;
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let make = |leaf: u64| {
            random_band_limited(grid, mix(seed, trial as u64, leaf), band as f64, true)
                .truncate_band(band)
                .remove_global_mean()
        };
        let f1 = make(0);
        let f2 = make(1);
        let sparse = [sparse_modes(&f1, 0.0), sparse_modes(&f2, 0.0)];
        let t = crate::flagop::eval_direct_oracle(&symbol, &sparse, grid)?;
        let lhs = mixed_norm(&t.fractional_derivative(&[s], DerivKind::Homogeneous)?, &[2.0])?;
        let smooth = |f: &GridFunction| {
            f.fractional_derivative(&[s - nu], DerivKind::Homogeneous)
                .and_then(|g| mixed_norm(&g, &[2.0]))
        };
        let n1 = mixed_norm(&f1, &[2.0])?;
        let n2 = mixed_norm(&f2, &[2.0])?;
        let rhs = smooth(&f1)? * n2 + n1 * smooth(&f2)?;
        if rhs == 0.0 {
            continue;
        }
        rows.push(TrialRow {
            trial,
            seed: mix(seed, trial as u64, u64::MAX),
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    let hash = {
        let mut h = Sha256::new();
        h.update(format!("smoothing|{nu}|{s}|{:?}|{seed}|{trials}|{band}", grid.sizes()));
        h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    };
    Ok(RatioReport::from_rows(rows, hash))
}

/// Empirical constants for the four fixed-scale paraproduct estimates.
#[derive(Clone, Copy, Debug, Default)]
pub struct LemmaReport {
    /// `‖Δ_k f · D^α Δ_ℓ g‖_p ≲ 2^{ℓα} ‖Δ_k f‖_{p₁}‖Δ_ℓ g‖_{p₂}`.
    pub product: f64,
    /// `‖[D^α, Δ_k f] Δ_ℓ g‖_p ≲ 2^{(α-1)ℓ} 2^k ‖Δ_k f‖_{p₁}‖Δ_ℓ g‖_{p₂}`,
    /// over well-separated scales `k ≤ ℓ - 3`.
    pub commutator: f64,
    /// `‖D^α(S_ℓ f · Δ_ℓ g)‖_p ≲ 2^{ℓα} ‖S_ℓ f‖_{p₁}‖Δ_ℓ g‖_{p₂}`.
    pub whitney: f64,
    /// `‖D^α(Δ_ℓ f · Δ_ℓ g)‖_p ≲ 2^{ℓα} ‖Δ_ℓ f‖_{p₁}‖Δ_ℓ g‖_{p₂}`,
    /// needing `1/(α+1) < p`.
    pub diag: f64,
}

impl LemmaReport {
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        writeln!(w, "estimate,constant")?;
        writeln!(w, "product,{:.17e}", self.product)?;
        writeln!(w, "commutator,{:.17e}", self.commutator)?;
        writeln!(w, "whitney,{:.17e}", self.whitney)?;
        writeln!(w, "diag,{:.17e}", self.diag)?;
        Ok(())
    }
}

/// Sweep the four fixed-scale estimates over random inputs and all scale
/// pairs on the grid, recording each empirical constant's sup.
pub fn lemma_bounds_sweep(
    alpha: f64,
    p1: f64,
    p2: f64,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if grid.n_axes() != 1 {
        return Err(Error::GridMismatch("lemma sweep is one-parameter".into()));
    }
    if !(1.0..=f64::INFINITY).contains(&p1) || !(1.0..=f64::INFINITY).contains(&p2) {
        return Err(Error::DomainViolation("need 1 ≤ p₁, p₂ ≤ ∞".into()));
    }
    let p = 1.0 / (1.0 / p1 + 1.0 / p2);
    if p <= 1.0 / (alpha + 1.0) {
        return Err(Error::DomainViolation(format!(
            "diagonal estimate needs p > 1/(α+1); got p = {p}"
        )));
    }
    let (k_min, k_max) = grid.scale_range(0);
    let sigma = grid.sizes()[0] as f64 / 4.0;
    let mut report = LemmaReport::default();
    for trial in 0..trials {
        let f = random_band_limited(grid, mix(seed, trial as u64, 0), sigma, true);
        let g = random_band_limited(grid, mix(seed, trial as u64, 1), sigma, true);
        lemma_update(&mut report, alpha, p, p1, p2, &f, &g, k_min, k_max)?;
    }
    Ok(report)
}

/// One (f, g) pair's contribution to the four sups.
#[allow(clippy::too_many_arguments)]
pub fn lemma_update(
    report: &mut LemmaReport,
    alpha: f64,
    p: f64,
    p1: f64,
    p2: f64,
    f: &GridFunction,
    g: &GridFunction,
    k_min: i64,
    k_max: i64,
) -> Result<()> {
    let pow = |l: i64, e: f64| (2f64).powi(l as i32).powf(e);
    for l in k_min..=k_max {
        let dg = g.lp_project(0, l, LpMode::Delta);
        let ng = mixed_norm(&dg, &[p2])?;
        if ng == 0.0 {
            continue;
        }
        let dag = dg.fractional_derivative(&[alpha], DerivKind::Homogeneous)?;
        for k in k_min..=k_max {
            let df = f.lp_project(0, k, LpMode::Delta);
            let nf = mixed_norm(&df, &[p1])?;
            if nf == 0.0 {
                continue;
            }
            let num = mixed_norm(&df.pointwise_mul(&dag)?, &[p])?;
            report.product = report.product.max(num / (pow(l, alpha) * nf * ng));
            if k <= l - 3 && alpha > 0.0 {
                let c = commutator_apply(alpha, f, g, k, l, p1, p2)?;
                report.commutator = report.commutator.max(c.ratio);
            }
        }
        // single-scale estimates
        let sf = f.lp_project(0, l, LpMode::Low);
        let nsf = mixed_norm(&sf, &[p1])?;
        if nsf > 0.0 {
            let num = mixed_norm(
                &sf.pointwise_mul(&dg)?
                    .fractional_derivative(&[alpha], DerivKind::Homogeneous)?,
                &[p],
            )?;
            report.whitney = report.whitney.max(num / (pow(l, alpha) * nsf * ng));
        }
        let dfl = f.lp_project(0, l, LpMode::Delta);
        let nfl = mixed_norm(&dfl, &[p1])?;
        if nfl > 0.0 {
            let num = mixed_norm(
                &dfl.pointwise_mul(&dg)?
                    .fractional_derivative(&[alpha], DerivKind::Homogeneous)?,
                &[p],
            )?;
            report.diag = report.diag.max(num / (pow(l, alpha) * nfl * ng));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flagtree::Exponent;
    use crate::spectral::Complex;

    fn spec1(m: usize) -> GridSpec {
        GridSpec::new(vec![m]).unwrap()
    }

    fn depth_one_exp(beta: f64, p: i64, n: usize) -> (FlagTree, ExponentTuple) {
        let tree = FlagTree::depth_one(1, n, &[beta]).unwrap();
        let exps = ExponentTuple::uniform(n, 1, Exponent::from_int(p)).unwrap();
        (tree, exps)
    }

    fn single_mode(spec: &GridSpec, k: i64, c: f64) -> GridFunction {
        GridFunction::single_mode(spec.clone(), &[k], Complex::new(c, 0.0)).unwrap()
    }

    #[test]
    fn same_sign_single_modes_ratio_one() {
        let spec = spec1(32);
        let (tree, exps) = depth_one_exp(1.0, 2, 2);
        let terms = tree.rhs_terms(&exps).unwrap();
        let f = single_mode(&spec, 3, 1.0);
        let g = single_mode(&spec, 1, 1.0);
        let op = Operator::Tree(tree);
        let (lhs, rhs) =
            ratio_for(&op, &exps, &terms, &[&f, &g], &spec, DerivKind::Homogeneous).unwrap();
        assert!((lhs - 4.0).abs() < 1e-12);
        assert!((rhs - 4.0).abs() < 1e-12);
        // opposite modes cancel: |3 + (-3)|^1 = 0
        let h = single_mode(&spec, -3, 1.0);
        let (lhs, _) =
            ratio_for(&op, &exps, &terms, &[&f, &h], &spec, DerivKind::Homogeneous).unwrap();
        assert!(lhs < 1e-13);
    }

    #[test]
    fn bilinear_single_mode_ratio_bounds() {
        // same-sign single modes: ratio ≤ 1 for β ≤ 1, ≤ 2^{β-1} for β > 1
        let spec = spec1(64);
        for &beta in &[0.3, 0.7, 1.0, 1.6, 2.5] {
            let (tree, exps) = depth_one_exp(beta, 2, 2);
            let terms = tree.rhs_terms(&exps).unwrap();
            let op = Operator::Tree(tree);
            for (a, b) in [(1i64, 2i64), (3, 5), (7, 11), (2, 2)] {
                let f = single_mode(&spec, a, 1.3);
                let g = single_mode(&spec, b, -0.7);
                let (lhs, rhs) =
                    ratio_for(&op, &exps, &terms, &[&f, &g], &spec, DerivKind::Homogeneous)
                        .unwrap();
                let ratio = lhs / rhs;
                let cap = if beta <= 1.0 { 1.0 } else { (2f64).powf(beta - 1.0) };
                assert!(ratio <= cap + 1e-12, "β={beta} a={a} b={b} ratio={ratio}");
            }
        }
    }

    #[test]
    fn leibniz_report_finite_and_deterministic() {
        let (tree, exps) = depth_one_exp(0.5, 4, 2);
        let exp = Experiment {
            operator: Operator::Tree(tree),
            exponents: exps,
            trials: 12,
            seed: 9,
            grid: spec1(32),
            sigma: 5.0,
            band: None,
        };
        let r1 = leibniz_ratio(&exp).unwrap();
        let r2 = leibniz_ratio(&exp).unwrap();
        assert_eq!(r1.rows.len(), r2.rows.len());
        for (a, b) in r1.rows.iter().zip(&r2.rows) {
            assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
        }
        assert!(r1.max.is_finite() && r1.max > 0.0);
        assert!(r1.p50 <= r1.p95 && r1.p95 <= r1.max);
        assert_eq!(r1.config_hash, r2.config_hash);
        let mut csv1 = Vec::new();
        let mut csv2 = Vec::new();
        r1.write_csv(&mut csv1).unwrap();
        r2.write_csv(&mut csv2).unwrap();
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn failing_exponents_rejected() {
        let (tree, exps) = depth_one_exp(0.5, 1, 2);
        let exp = Experiment {
            operator: Operator::Tree(tree),
            exponents: exps,
            trials: 1,
            seed: 0,
            grid: spec1(16),
            sigma: 2.0,
            band: None,
        };
        match leibniz_ratio(&exp) {
            Err(Error::ConstraintFail(n)) => assert!(n >= 1),
            other => panic!("expected constraint failure, got {other:?}"),
        }
    }

    #[test]
    fn redundant_term_never_raises_ratio() {
        // appending extra admissible terms grows the RHS, shrinking ratios
        let (tree, exps) = depth_one_exp(0.8, 2, 3);
        let terms = tree.rhs_terms(&exps).unwrap();
        let mut padded = terms.clone();
        padded.push(terms[0].clone());
        let spec = spec1(16);
        let op = Operator::Tree(tree);
        for seed in 0..5 {
            let fs: Vec<GridFunction> =
                (0..3).map(|l| random_band_limited(&spec, mix(seed, 0, l), 3.0, true)).collect();
            let refs: Vec<&GridFunction> = fs.iter().collect();
            let (l1, r1) =
                ratio_for(&op, &exps, &terms, &refs, &spec, DerivKind::Homogeneous).unwrap();
            let (l2, r2) =
                ratio_for(&op, &exps, &padded, &refs, &spec, DerivKind::Homogeneous).unwrap();
            assert_eq!(l1, l2);
            assert!(r2 >= r1);
            assert!(l2 / r2 <= l1 / r1 + 1e-15);
        }
    }

    #[test]
    fn scaling_single_mode_exact() {
        let (tree, exps) = depth_one_exp(0.5, 2, 2);
        let spec = spec1(16);
        let inputs = vec![single_mode(&spec, 3, 1.0), single_mode(&spec, 2, 1.0)];
        let rep = scaling_probe(&Operator::Tree(tree), &exps, &inputs, 1).unwrap();
        // LHS scales by 2^β exactly
        assert!((rep.dilated.0 / rep.base.0 - (2f64).powf(0.5)).abs() < 1e-12);
        assert!((rep.base_ratio - rep.dilated_ratio).abs() < 1e-12);
    }

    #[test]
    fn scaling_single_block_invariant() {
        let (tree, exps) = depth_one_exp(0.7, 2, 2);
        let spec = spec1(64);
        // single dyadic blocks: modes in one ψ plateau each
        let mut a = GridFunction::zero(spec.clone());
        let mut b = GridFunction::zero(spec.clone());
        for (m, c) in [(4i64, 1.0), (5, -0.3)] {
            a = a.add(&single_mode(&spec, m, c)).unwrap();
        }
        for (m, c) in [(8i64, 0.6), (9, 0.2)] {
            b = b.add(&single_mode(&spec, m, c)).unwrap();
        }
        let rep = scaling_probe(&Operator::Tree(tree), &exps, &[a, b], 1).unwrap();
        assert!(
            (rep.base_ratio - rep.dilated_ratio).abs() < 1e-9 * rep.base_ratio.max(1.0),
            "{} vs {}",
            rep.base_ratio,
            rep.dilated_ratio
        );
    }

    #[test]
    fn zero_order_tree_trivial_scaling() {
        // β = 0 still demands p_v > 1 strictly, so leaf exponents of 4
        let (tree, exps) = depth_one_exp(0.0, 4, 2);
        let spec = spec1(16);
        let inputs = vec![single_mode(&spec, 1, 1.0), single_mode(&spec, 2, 1.0)];
        let rep = scaling_probe(&Operator::Tree(tree), &exps, &inputs, 1).unwrap();
        assert!((rep.dilated.0 - rep.base.0).abs() < 1e-12);
    }

    #[test]
    fn inhomogeneous_scaling_rejected() {
        let tree = FlagTree::from_node(
            1,
            crate::flagtree::TreeNode::j(
                &[0.5],
                vec![crate::flagtree::TreeNode::Leaf(0), crate::flagtree::TreeNode::Leaf(1)],
            ),
        )
        .unwrap();
        let exps = ExponentTuple::uniform(2, 1, Exponent::from_int(2)).unwrap();
        let spec = spec1(16);
        let inputs = vec![single_mode(&spec, 1, 1.0), single_mode(&spec, 2, 1.0)];
        assert!(scaling_probe(&Operator::Tree(tree), &exps, &inputs, 1).is_err());
    }

    #[test]
    fn smoothing_probe_runs() {
        let grid = spec1(32);
        for &s in &[0.25, 0.5, 0.75] {
            let rep = smoothing_ratio(0.5, s, &grid, 11, 10, 6).unwrap();
            assert!(!rep.rows.is_empty());
            assert!(rep.max.is_finite() && rep.max > 0.0);
        }
    }

    #[test]
    fn lemma_product_equality_case() {
        // f in the ψ_0 plateau, g's mode exactly at 2^ℓ where ψ_ℓ = 1 and
        // |ξ|^α = 2^{ℓα}: the product estimate is attained with constant 1
        let spec = spec1(64);
        let f = single_mode(&spec, 1, 2.0);
        let g = single_mode(&spec, 16, -0.5);
        let mut rep = LemmaReport::default();
        lemma_update(&mut rep, 0.5, 1.0, 2.0, 2.0, &f, &g, 0, 5).unwrap();
        assert!((rep.product - 1.0).abs() < 1e-9, "got {}", rep.product);
    }

    #[test]
    fn lemma_alpha_zero_commutator_vanishes() {
        let grid = spec1(32);
        let rep = lemma_bounds_sweep(0.0, 4.0, 4.0, &grid, 3, 5).unwrap();
        assert_eq!(rep.commutator, 0.0);
        assert!(rep.product.is_finite() && rep.product > 0.0);
    }

    #[test]
    fn lemma_window_violation() {
        // α = 0.5 needs p > 2/3; p1 = p2 = 1 gives p = 1/2
        let grid = spec1(32);
        assert!(lemma_bounds_sweep(0.5, 1.0, 1.0, &grid, 1, 0).is_err());
    }
}
