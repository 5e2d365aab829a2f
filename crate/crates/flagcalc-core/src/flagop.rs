//! Evaluation of multilinear multiplier operators: the fast recursive flag
//! evaluator, a brute-force frequency-sum oracle, asymmetric (per-parameter
//! forest) operators, and built-in symbols.

use crate::error::Error;
use crate::flagtree::{Child, DerivKind, FlagForest, FlagTree};
use crate::spectral::{Complex, GridFunction, GridSpec};
use crate::Result;

/// Multiply-add budget for the direct oracle.
pub const ORACLE_BUDGET: u128 = 100_000_000;

/// Sparse spectrum: list of (frequency vector, coefficient).
pub type SparseSpectrum = Vec<(Vec<i64>, Complex)>;

/// Active modes of a grid function (coefficients above `threshold`).
pub fn sparse_modes(f: &GridFunction, threshold: f64) -> SparseSpectrum {
    f.spectrum()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > threshold)
        .map(|(off, &c)| (f.spec().freq_at_offset(off), c))
        .collect()
}

/// Where a symbol blows up (documentation for callers; evaluation itself
/// uses the continuous-extension conventions).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SingularSet {
    None,
    /// Joint origin `ξ_1 = … = ξ_n = 0` per parameter.
    Origin,
}

/// A multilinear symbol `m(ξ_1, …, ξ_n)` on the joint frequency lattice;
/// each `ξ_l` has one component per parameter.
pub struct SymbolFn {
    pub n_inputs: usize,
    pub n_params: usize,
    /// Total declared order per parameter.
    pub orders: Vec<f64>,
    pub singular: SingularSet,
    eval: Box<dyn Fn(&[&[i64]]) -> Complex + Send + Sync>,
}

impl SymbolFn {
    pub fn new(
        n_inputs: usize,
        n_params: usize,
        orders: Vec<f64>,
        singular: SingularSet,
        eval: impl Fn(&[&[i64]]) -> Complex + Send + Sync + 'static,
    ) -> Self {
        SymbolFn {
            n_inputs,
            n_params,
            orders,
            singular,
            eval: Box::new(eval),
        }
    }

    pub fn eval(&self, freqs: &[&[i64]]) -> Complex {
        (self.eval)(freqs)
    }
}

/// Vertex multiplier factor: `|s|^β` (homogeneous, `0^0 := 1`, `0^β := 0`
/// for `β > 0`) or `(1+s²)^{β/2}`.
fn vertex_factor(s: f64, beta: f64, kind: DerivKind) -> f64 {
    match kind {
        DerivKind::Homogeneous => {
            if s == 0.0 {
                if beta == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                s.abs().powf(beta)
            }
        }
        DerivKind::Inhomogeneous => (1.0 + s * s).powf(beta / 2.0),
    }
}

/// The flag symbol of a tree:
/// `∏_v ∏_j |Σ_{i ∈ L(v)} ξ_i^j|^{β_j^v}` (with `J` factors where the
/// vertex is inhomogeneous).
pub fn flag_symbol(tree: &FlagTree) -> SymbolFn {
    let n = tree.n_leaves();
    let n_params = tree.n_params();
    let verts: Vec<(Vec<usize>, Vec<(f64, DerivKind)>)> = (0..tree.n_vertices())
        .map(|v| {
            let leaves = tree.leaves_under(Child::Vertex(v)).expect("valid vertex");
            let info = (0..n_params)
                .map(|j| (tree.order(v, j).as_f64(), tree.vertex(v).unwrap().kind))
                .collect();
            (leaves, info)
        })
        .collect();
    let orders = (0..n_params)
        .map(|j| (0..tree.n_vertices()).map(|v| tree.order(v, j).as_f64()).sum())
        .collect();
    SymbolFn::new(n, n_params, orders, SingularSet::None, move |freqs| {
        let mut m = 1.0;
        for (leaves, info) in &verts {
            for (j, &(beta, kind)) in info.iter().enumerate() {
                let s: i64 = leaves.iter().map(|&l| freqs[l][j]).sum();
                m *= vertex_factor(s as f64, beta, kind);
            }
        }
        Complex::new(m, 0.0)
    })
}

/// Tensorized symbol of a forest: tree `j` acts on the `j`-th frequency
/// components only.
pub fn forest_symbol(forest: &FlagForest) -> SymbolFn {
    let n = forest.n_leaves();
    let n_params = forest.n_params();
    let per_tree: Vec<Vec<(Vec<usize>, f64, DerivKind)>> = forest
        .trees()
        .iter()
        .map(|t| {
            (0..t.n_vertices())
                .map(|v| {
                    (
                        t.leaves_under(Child::Vertex(v)).expect("valid vertex"),
                        t.order(v, 0).as_f64(),
                        t.vertex(v).unwrap().kind,
                    )
                })
                .collect()
        })
        .collect();
    let orders = forest
        .trees()
        .iter()
        .map(|t| (0..t.n_vertices()).map(|v| t.order(v, 0).as_f64()).sum())
        .collect();
    SymbolFn::new(n, n_params, orders, SingularSet::None, move |freqs| {
        let mut m = 1.0;
        for (j, verts) in per_tree.iter().enumerate() {
            for (leaves, beta, kind) in verts {
                let s: i64 = leaves.iter().map(|&l| freqs[l][j]).sum();
                m *= vertex_factor(s as f64, *beta, *kind);
            }
        }
        Complex::new(m, 0.0)
    })
}

/// Built-in symbol families.
pub enum Builtin {
    /// `∏_j (Σ_l |ξ_l^j|²)^{-ν_j/2}` with `0 ≤ ν_j < n`.
    FractionalIntegral(Vec<f64>),
    /// A concrete smooth symbol of order `β⃗`:
    /// `∏_j (1 + Σ_l |ξ_l^j|²)^{β_j/2}` times a bounded smooth phase.
    MikhlinTest(Vec<f64>),
}

pub fn builtin_symbol(b: Builtin, n_inputs: usize, n_params: usize) -> Result<SymbolFn> {
    match b {
        Builtin::FractionalIntegral(nu) => {
            if nu.len() != n_params {
                return Err(Error::SymbolParam("nu length != parameter count".into()));
            }
            for &v in &nu {
                if !(0.0..(n_inputs as f64)).contains(&v) {
                    return Err(Error::SymbolParam(format!(
                        "nu = {v} outside [0, n·d) = [0, {n_inputs})"
                    )));
                }
            }
            let orders: Vec<f64> = nu.iter().map(|v| -v).collect();
            Ok(SymbolFn::new(
                n_inputs,
                n_params,
                orders,
                SingularSet::Origin,
                move |freqs| {
                    let mut m = 1.0;
                    for (j, &v) in nu.iter().enumerate() {
                        let s2: f64 = freqs.iter().map(|xi| (xi[j] * xi[j]) as f64).sum();
                        if s2 == 0.0 {
                            if v > 0.0 {
                                // singular point: continuous extension by 0
                                return Complex::default();
                            }
                        } else {
                            m *= s2.powf(-v / 2.0);
                        }
                    }
                    Complex::new(m, 0.0)
                },
            ))
        }
        Builtin::MikhlinTest(beta) => {
            if beta.len() != n_params {
                return Err(Error::SymbolParam("beta length != parameter count".into()));
            }
            let orders = beta.clone();
            Ok(SymbolFn::new(
                n_inputs,
                n_params,
                orders,
                SingularSet::None,
                move |freqs| {
                    let mut m = 1.0;
                    let mut total2 = 0.0;
                    for (j, &b) in beta.iter().enumerate() {
                        let s2: f64 = freqs.iter().map(|xi| (xi[j] * xi[j]) as f64).sum();
                        total2 += s2;
                        m *= (1.0 + s2).powf(b / 2.0);
                    }
                    // smooth bounded phase keeps the symbol genuinely complex
                    Complex::from_polar(m, 0.25 * (1.0 + total2).ln())
                },
            ))
        }
    }
}

/// Brute-force evaluation: exact lattice sum
/// `Σ m(ξ₁,…,ξ_n) ∏ f̂_l(ξ_l)` placed at output frequency `Σ ξ_l`.
///
/// Never approximates: refuses oversized sums (`BudgetExceeded`) and
/// refuses output frequencies outside the grid band (`OutOfBand`).
pub fn eval_direct_oracle(
    symbol: &SymbolFn,
    inputs: &[SparseSpectrum],
    spec: &GridSpec,
) -> Result<GridFunction> {
    if inputs.len() != symbol.n_inputs {
        return Err(Error::GridMismatch("input count != symbol arity".into()));
    }
    if spec.n_axes() != symbol.n_params {
        return Err(Error::GridMismatch("grid axes != symbol parameters".into()));
    }
    let combos: u128 = inputs.iter().map(|s| s.len() as u128).product();
    if combos > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded(combos));
    }
    let mut spectrum = vec![Complex::default(); spec.total()];
    let mut chosen: Vec<usize> = vec![0; inputs.len()];
    let mut done = inputs.iter().any(|s| s.is_empty());
    while !done {
        let freqs: Vec<&[i64]> = chosen
            .iter()
            .zip(inputs)
            .map(|(&i, s)| s[i].0.as_slice())
            .collect();
        let mut coef = symbol.eval(&freqs);
        for (&i, s) in chosen.iter().zip(inputs) {
            coef *= s[i].1;
        }
        if coef != Complex::default() {
            let mut out = vec![0i64; spec.n_axes()];
            for f in &freqs {
                for (o, &k) in out.iter_mut().zip(f.iter()) {
                    *o += k;
                }
            }
            let off = spec.offset_of_freq(&out).ok_or(Error::OutOfBand(out.clone()))?;
            spectrum[off] += coef;
        }
        // odometer increment
        done = true;
        for (pos, s) in chosen.iter_mut().zip(inputs) {
            *pos += 1;
            if *pos < s.len() {
                done = false;
                break;
            }
            *pos = 0;
        }
    }
    GridFunction::from_spectrum(spec.clone(), spectrum)
}

/// Fast flag evaluation by post-order recursion: products in sample space,
/// fractional derivatives in frequency space.
pub fn eval_flag_recursive(tree: &FlagTree, fns: &[&GridFunction]) -> Result<GridFunction> {
    if fns.len() != tree.n_leaves() {
        return Err(Error::GridMismatch("function count != leaf count".into()));
    }
    let spec = fns[0].spec();
    for f in fns {
        if f.spec() != spec {
            return Err(Error::GridMismatch("inputs on different grids".into()));
        }
    }
    if spec.n_axes() != tree.n_params() {
        return Err(Error::GridMismatch("grid axes != tree parameters".into()));
    }
    eval_node(tree, Child::Vertex(0), fns)
}

fn eval_node(tree: &FlagTree, node: Child, fns: &[&GridFunction]) -> Result<GridFunction> {
    match node {
        Child::Leaf(l) => Ok(fns[l].clone()),
        Child::Vertex(v) => {
            let vertex = tree.vertex(v)?;
            let mut product: Option<GridFunction> = None;
            for c in &vertex.children {
                let child = eval_node(tree, *c, fns)?;
                product = Some(match product {
                    None => child,
                    Some(p) => p.pointwise_mul(&child)?,
                });
            }
            let product = product.expect("vertices have children");
            let orders: Vec<f64> = vertex.orders.iter().map(|o| o.as_f64()).collect();
            product.fractional_derivative(&orders, vertex.kind)
        }
    }
}

/// Direct evaluation of the asymmetric operator `T_{G₁⊗…⊗G_N}` with the
/// tensorized forest symbol.
pub fn eval_asymmetric(
    forest: &FlagForest,
    inputs: &[SparseSpectrum],
    spec: &GridSpec,
) -> Result<GridFunction> {
    let symbol = forest_symbol(forest);
    eval_direct_oracle(&symbol, inputs, spec)
}

/// Max ratio of finite-difference derivatives of `m` against the Mikhlin
/// size bound `(Σ_l Σ_j |ξ_l^j|)^{β - |γ|}` over the given sample points;
/// derivative multi-indices up to total order `max_order` (unit steps).
pub fn mikhlin_probe(
    symbol: &SymbolFn,
    beta_total: f64,
    points: &[Vec<Vec<i64>>],
    max_order: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for pt in points {
        let total: f64 = pt.iter().flat_map(|xi| xi.iter()).map(|&k| k.abs() as f64).sum();
        if total == 0.0 {
            continue;
        }
        // order-0 bound
        let freqs: Vec<&[i64]> = pt.iter().map(|v| v.as_slice()).collect();
        let v = symbol.eval(&freqs).norm();
        worst = worst.max(v / total.powf(beta_total));
        if max_order >= 1 {
            // first-order central differences in every coordinate
            for l in 0..pt.len() {
                for j in 0..pt[l].len() {
                    let mut hi = pt.clone();
                    hi[l][j] += 1;
                    let mut lo = pt.clone();
                    lo[l][j] -= 1;
                    let fh: Vec<&[i64]> = hi.iter().map(|v| v.as_slice()).collect();
                    let fl: Vec<&[i64]> = lo.iter().map(|v| v.as_slice()).collect();
                    let d = (symbol.eval(&fh) - symbol.eval(&fl)).norm() / 2.0;
                    worst = worst.max(d / total.powf(beta_total - 1.0));
                }
            }
        }
    }
    worst
}
