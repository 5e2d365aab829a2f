//! Rooted flag trees, derivative-distribution enumeration and exponent
//! constraint checking.
//!
//! A flag tree encodes a nested fractional Leibniz rule: leaves are the
//! input functions `f_1..f_n`, internal vertices carry per-parameter
//! derivative orders.  The admissible distributions of derivatives onto
//! leaves ("delta maps") generate the right-hand side of the Leibniz
//! inequality.

use crate::error::Error;
use crate::Result;
use num_rational::Ratio;
use num_traits::Zero;
use std::fmt;

/// Fixed-point decimal derivative order (4 fractional digits).
///
/// Exact storage makes the even-integer test (`β ∈ {2,4,6,…}`) reliable;
/// floats would make "is this exactly 2" fuzzy.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Order {
    units: i64, // value = units / SCALE
}

pub const ORDER_SCALE: i64 = 10_000;

impl Order {
    pub const ZERO: Order = Order { units: 0 };

    pub fn from_units(units: i64) -> Result<Self> {
        if units < 0 {
            return Err(Error::InvalidTree(format!(
                "negative derivative order {}",
                units as f64 / ORDER_SCALE as f64
            )));
        }
        Ok(Order { units })
    }

    /// Parse a nonnegative decimal with at most four fractional digits.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: &str| Error::InvalidTree(format!("bad order {s:?}: {m}"));
        let (int_part, frac_part) = match s.split_once('.') {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("empty"));
        }
        if frac_part.len() > 4 {
            return Err(bad("more than 4 fractional digits"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad("not a nonnegative decimal"));
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad("integer overflow"))?
        };
        let mut frac: i64 = 0;
        let mut scale = ORDER_SCALE;
        for c in frac_part.chars() {
            scale /= 10;
            frac += (c as i64 - '0' as i64) * scale;
        }
        int.checked_mul(ORDER_SCALE)
            .and_then(|u| u.checked_add(frac))
            .map(|units| Order { units })
            .ok_or_else(|| bad("overflow"))
    }

    /// Nearest representable order; errors when `x` is negative or not a
    /// 4-digit decimal to within 1e-9.
    pub fn from_f64(x: f64) -> Result<Self> {
        let scaled = x * ORDER_SCALE as f64;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-9 * ORDER_SCALE as f64 {
            return Err(Error::InvalidTree(format!(
                "order {x} is not an exact 4-digit decimal"
            )));
        }
        Order::from_units(rounded as i64)
    }

    pub fn units(self) -> i64 {
        self.units
    }

    pub fn as_f64(self) -> f64 {
        self.units as f64 / ORDER_SCALE as f64
    }

    pub fn is_zero(self) -> bool {
        self.units == 0
    }

    /// True when the order is a positive even integer (2, 4, 6, …).
    pub fn is_positive_even_integer(self) -> bool {
        self.units > 0 && self.units % (2 * ORDER_SCALE) == 0
    }

    pub fn checked_add(self, other: Order) -> Order {
        Order {
            units: self.units + other.units,
        }
    }

    /// `1/(1+β)` as an exact rational — the cascade lower bound for d=1.
    pub fn cascade_bound(self) -> Ratio<i64> {
        Ratio::new(ORDER_SCALE, ORDER_SCALE + self.units)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.units / ORDER_SCALE;
        let frac = self.units % ORDER_SCALE;
        if frac == 0 {
            write!(f, "{int}")
        } else {
            let s = format!("{frac:04}");
            write!(f, "{}.{}", int, s.trim_end_matches('0'))
        }
    }
}

/// Lebesgue exponent: a positive rational or ∞.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Exponent {
    Finite(Ratio<i64>),
    Infinity,
}

impl Exponent {
    pub fn from_int(p: i64) -> Self {
        Exponent::Finite(Ratio::from_integer(p))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" || s.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        let bad = || Error::MalformedExponent(format!("cannot parse exponent {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| bad())?;
            let den: i64 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Exponent::Finite(Ratio::new(num, den)));
        }
        if let Some((a, b)) = s.split_once('.') {
            // decimal literal, e.g. "2.5"
            let digits = b.len() as u32;
            if digits > 9 || b.is_empty() {
                return Err(bad());
            }
            let num: i64 = format!("{a}{b}").parse().map_err(|_| bad())?;
            return Ok(Exponent::Finite(Ratio::new(num, 10i64.pow(digits))));
        }
        let p: i64 = s.parse().map_err(|_| bad())?;
        Ok(Exponent::from_int(p))
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> Ratio<i64> {
        match self {
            Exponent::Finite(q) => q.recip(),
            Exponent::Infinity => Ratio::zero(),
        }
    }

    /// Exponent with reciprocal `h` (`h = 0` gives ∞).
    pub fn from_reciprocal(h: Ratio<i64>) -> Self {
        if h.is_zero() {
            Exponent::Infinity
        } else {
            Exponent::Finite(h.recip())
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => *q.numer() as f64 / *q.denom() as f64,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Strictly greater than the rational `bound`.
    pub fn exceeds(self, bound: Ratio<i64>) -> bool {
        match self {
            Exponent::Finite(q) => q > bound,
            Exponent::Infinity => true,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(q) => {
                if q.denom() == &1 {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

/// Lebesgue exponents `p_l^j` for every leaf and parameter; the target
/// exponents `r^j` are derived from the Hölder identity
/// `1/r^j = Σ_l 1/p_l^j` and therefore satisfy it exactly.
#[derive(Clone, Debug)]
pub struct ExponentTuple {
    /// `p[l][j]`, leaf-major.
    p: Vec<Vec<Exponent>>,
    n_params: usize,
}

impl ExponentTuple {
    pub fn new(p: Vec<Vec<Exponent>>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::MalformedExponent("no leaves".into()));
        }
        let n_params = p[0].len();
        if n_params == 0 {
            return Err(Error::MalformedExponent("no parameters".into()));
        }
        for row in &p {
            if row.len() != n_params {
                return Err(Error::MalformedExponent(
                    "ragged exponent table".into(),
                ));
            }
            for e in row {
                if let Exponent::Finite(q) = e {
                    if *q < Ratio::from_integer(1) {
                        return Err(Error::MalformedExponent(format!(
                            "exponent {e} outside [1, inf]"
                        )));
                    }
                }
            }
        }
        Ok(ExponentTuple { p, n_params })
    }

    /// Same exponent everywhere.
    pub fn uniform(n_leaves: usize, n_params: usize, p: Exponent) -> Result<Self> {
        Self::new(vec![vec![p; n_params]; n_leaves])
    }

    pub fn n_leaves(&self) -> usize {
        self.p.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn leaf(&self, l: usize) -> &[Exponent] {
        &self.p[l]
    }

    pub fn get(&self, l: usize, j: usize) -> Exponent {
        self.p[l][j]
    }

    /// Target exponent `r^j` (Hölder-derived; may lie below 1).
    pub fn r(&self, j: usize) -> Exponent {
        let sum: Ratio<i64> = self.p.iter().map(|row| row[j].reciprocal()).sum();
        Exponent::from_reciprocal(sum)
    }

    /// Harmonic-sum exponent over a subset of leaves.
    pub fn harmonic_over(&self, leaves: &[usize], j: usize) -> Exponent {
        let sum: Ratio<i64> = leaves.iter().map(|&l| self.p[l][j].reciprocal()).sum();
        Exponent::from_reciprocal(sum)
    }
}

/// Homogeneous `D^β` or inhomogeneous `J^β = (1+|ξ|²)^{β/2}` at a vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum DerivKind {
    Homogeneous,
    Inhomogeneous,
}

/// Child slot of an internal vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Child {
    Vertex(usize),
    Leaf(usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vertex {
    pub orders: Vec<Order>,
    pub kind: DerivKind,
    pub children: Vec<Child>,
}

/// Builder shape for a flag tree; flattened to pre-order vertex ids.
#[derive(Clone, Debug)]
pub enum TreeNode {
    Leaf(usize),
    Vertex {
        orders: Vec<Order>,
        kind: DerivKind,
        children: Vec<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(l: usize) -> Self {
        TreeNode::Leaf(l)
    }

    pub fn d(orders: &[f64], children: Vec<TreeNode>) -> Self {
        TreeNode::Vertex {
            orders: orders.iter().map(|&o| Order::from_f64(o).unwrap()).collect(),
            kind: DerivKind::Homogeneous,
            children,
        }
    }

    pub fn j(orders: &[f64], children: Vec<TreeNode>) -> Self {
        TreeNode::Vertex {
            orders: orders.iter().map(|&o| Order::from_f64(o).unwrap()).collect(),
            kind: DerivKind::Inhomogeneous,
            children,
        }
    }
}

/// Rooted flag tree.  Vertex 0 is the root; ids follow pre-order
/// (parent before children, children left to right).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FlagTree {
    n_params: usize,
    n_leaves: usize,
    vertices: Vec<Vertex>,
}

impl FlagTree {
    pub fn from_node(n_params: usize, root: TreeNode) -> Result<Self> {
        if n_params == 0 {
            return Err(Error::InvalidTree("need at least one parameter".into()));
        }
        let mut vertices = Vec::new();
        let root_id = flatten(&root, n_params, &mut vertices)?;
        match root_id {
            Child::Vertex(0) => {}
            Child::Vertex(_) => unreachable!(),
            Child::Leaf(_) => {
                return Err(Error::InvalidTree("root must be an internal vertex".into()))
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &vertices {
            for c in &v.children {
                if let Child::Leaf(l) = c {
                    if !seen.insert(*l) {
                        return Err(Error::InvalidTree(format!("duplicate leaf f{}", l + 1)));
                    }
                }
            }
        }
        let n_leaves = seen.len();
        if seen.iter().next_back() != Some(&(n_leaves - 1)) || !seen.contains(&0) {
            return Err(Error::InvalidTree(format!(
                "leaf indices must cover f1..f{n_leaves} without gaps"
            )));
        }
        Ok(FlagTree {
            n_params,
            n_leaves,
            vertices,
        })
    }

    /// Depth-1 tree: one vertex, `n` leaves.
    pub fn depth_one(n_params: usize, n_leaves: usize, orders: &[f64]) -> Result<Self> {
        let children = (0..n_leaves).map(TreeNode::Leaf).collect();
        FlagTree::from_node(n_params, TreeNode::d(orders, children))
    }

    /// The canonical 5-linear flag
    /// `D^β( D^α(f1 f2) · f3 · D^γ(f4 f5) )` with per-parameter orders
    /// `β`, `α`, `γ` (each of length `n_params`).
    pub fn five_linear(n_params: usize, beta: &[f64], alpha: &[f64], gamma: &[f64]) -> Result<Self> {
        FlagTree::from_node(
            n_params,
            TreeNode::d(
                beta,
                vec![
                    TreeNode::d(alpha, vec![TreeNode::Leaf(0), TreeNode::Leaf(1)]),
                    TreeNode::Leaf(2),
                    TreeNode::d(gamma, vec![TreeNode::Leaf(3), TreeNode::Leaf(4)]),
                ],
            ),
        )
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> Result<&Vertex> {
        self.vertices.get(v).ok_or(Error::UnknownVertex(v))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn order(&self, v: usize, j: usize) -> Order {
        self.vertices[v].orders[j]
    }

    pub fn is_homogeneous(&self) -> bool {
        self.vertices.iter().all(|v| v.kind == DerivKind::Homogeneous)
    }

    /// Leaf set under a vertex or leaf, ascending.
    pub fn leaves_under(&self, node: Child) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.collect_leaves(node, &mut out)?;
        out.sort_unstable();
        Ok(out)
    }

    fn collect_leaves(&self, node: Child, out: &mut Vec<usize>) -> Result<()> {
        match node {
            Child::Leaf(l) => {
                out.push(l);
                Ok(())
            }
            Child::Vertex(v) => {
                for c in &self.vertex(v)?.children {
                    self.collect_leaves(*c, out)?;
                }
                Ok(())
            }
        }
    }

    /// Non-leaf direct descendants of `v`.
    pub fn nonleaf_children(&self, v: usize) -> Vec<usize> {
        self.vertices[v]
            .children
            .iter()
            .filter_map(|c| match c {
                Child::Vertex(w) => Some(*w),
                Child::Leaf(_) => None,
            })
            .collect()
    }

    /// Direct leaf children of `v`.
    pub fn leaf_children(&self, v: usize) -> Vec<usize> {
        self.vertices[v]
            .children
            .iter()
            .filter_map(|c| match c {
                Child::Leaf(l) => Some(*l),
                Child::Vertex(_) => None,
            })
            .collect()
    }

    /// Maximum leaf depth.
    pub fn complexity(&self) -> usize {
        fn depth(t: &FlagTree, node: Child) -> usize {
            match node {
                Child::Leaf(_) => 0,
                Child::Vertex(v) => {
                    1 + t.vertices[v]
                        .children
                        .iter()
                        .map(|c| depth(t, *c))
                        .max()
                        .unwrap_or(0)
                }
            }
        }
        depth(self, Child::Vertex(0))
    }

    /// Internal vertices on the downward path from `v` to leaf `l`,
    /// inclusive of `v`.
    pub fn path_vertices(&self, v: usize, l: usize) -> Result<Vec<usize>> {
        let mut path = Vec::new();
        let mut cur = v;
        loop {
            let leaves = self.leaves_under(Child::Vertex(cur))?;
            if !leaves.contains(&l) {
                return Err(Error::DomainViolation(format!(
                    "leaf f{} is not below vertex {}",
                    l + 1,
                    v
                )));
            }
            path.push(cur);
            let mut next = None;
            for c in &self.vertices[cur].children {
                match c {
                    Child::Leaf(cl) if *cl == l => return Ok(path),
                    Child::Vertex(w) => {
                        if self.leaves_under(Child::Vertex(*w))?.contains(&l) {
                            next = Some(*w);
                        }
                    }
                    _ => {}
                }
            }
            cur = next.expect("leaf must sit under exactly one child");
        }
    }

    /// Branch weight `β_j(v,l)`: total order in parameter `j` carried by the
    /// internal vertices from `v` down to leaf `l`.  Zero when `v` is absent
    /// (leaf case handled by the caller passing an empty path).
    pub fn branch_weight(&self, v: usize, l: usize, j: usize) -> Result<Order> {
        let path = self.path_vertices(v, l)?;
        Ok(path
            .iter()
            .fold(Order::ZERO, |acc, &w| acc.checked_add(self.order(w, j))))
    }

    /// All admissible single-parameter assignments `δ: V → leaves`,
    /// sorted lexicographically by (pre-order vertex id, assigned leaf).
    ///
    /// Admissibility: `δ(v)` is either a direct leaf child of `v`, or agrees
    /// with `δ(w)` for a non-leaf child `w` — so derivatives travel along a
    /// consistent path down to their leaf.
    pub fn enumerate_single_param(&self) -> Vec<Vec<usize>> {
        let order = self.post_order();
        let mut partial = vec![usize::MAX; self.vertices.len()];
        let mut out = Vec::new();
        self.assign_next(&order, 0, &mut partial, &mut out);
        // Assignments were produced child-first; sort by the pre-order
        // vertex-id tuples for the documented deterministic ordering.
        out.sort_unstable();
        out
    }

    /// Vertex ids with children listed before their parent.
    fn post_order(&self) -> Vec<usize> {
        fn walk(t: &FlagTree, v: usize, out: &mut Vec<usize>) {
            for w in t.nonleaf_children(v) {
                walk(t, w, out);
            }
            out.push(v);
        }
        let mut out = Vec::with_capacity(self.vertices.len());
        walk(self, 0, &mut out);
        out
    }

    fn assign_next(
        &self,
        order: &[usize],
        i: usize,
        partial: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == order.len() {
            out.push(partial.clone());
            return;
        }
        let v = order[i];
        let mut choices = self.leaf_children(v);
        for w in self.nonleaf_children(v) {
            choices.push(partial[w]);
        }
        for leaf in choices {
            partial[v] = leaf;
            self.assign_next(order, i + 1, partial, out);
        }
        partial[v] = usize::MAX;
    }

    /// All admissible `δ_1 ⊗ … ⊗ δ_N`, lexicographic over parameters then
    /// per-parameter assignments.
    pub fn enumerate_delta_maps(&self) -> Vec<DeltaMap> {
        let single = self.enumerate_single_param();
        cartesian_maps(&vec![single; self.n_params])
    }

    /// Total derivative order attributed to leaf `l` in parameter `j` by a map.
    pub fn delta_inverse(&self, map: &DeltaMap, l: usize, j: usize) -> Order {
        map.per_param[j]
            .iter()
            .enumerate()
            .filter(|(_, &leaf)| leaf == l)
            .fold(Order::ZERO, |acc, (v, _)| acc.checked_add(self.order(v, j)))
    }

    /// Per-parameter harmonic exponents `p_v^j` at a vertex or leaf.
    pub fn vertex_exponent(&self, node: Child, exps: &ExponentTuple) -> Result<Vec<Exponent>> {
        let leaves = self.leaves_under(node)?;
        Ok((0..self.n_params)
            .map(|j| exps.harmonic_over(&leaves, j))
            .collect())
    }

    /// Exponent constraint check for the homogeneous Leibniz inequality.
    ///
    /// For every vertex `v` (root included) and parameter `j` the cascade
    /// bound `max_{j ≤ j' ≤ N} 1/(1+β_{j'}^v) < p_v^j` must hold, where
    /// terms with `β_{j'}^v` a positive even integer are exempt.
    pub fn check_exponents(&self, exps: &ExponentTuple) -> Result<Verdict> {
        if exps.n_leaves() != self.n_leaves || exps.n_params() != self.n_params {
            return Err(Error::MalformedExponent(format!(
                "exponent table is {}x{}, tree needs {}x{}",
                exps.n_leaves(),
                exps.n_params(),
                self.n_leaves,
                self.n_params
            )));
        }
        let mut constraints = Vec::new();
        for v in 0..self.vertices.len() {
            let pv = self.vertex_exponent(Child::Vertex(v), exps)?;
            for j in 0..self.n_params {
                let bound = (j..self.n_params)
                    .filter(|&jp| !self.order(v, jp).is_positive_even_integer())
                    .map(|jp| self.order(v, jp).cascade_bound())
                    .max();
                if let Some(bound) = bound {
                    constraints.push(Constraint {
                        vertex: v,
                        param: j,
                        bound,
                        exponent: pv[j],
                        satisfied: pv[j].exceeds(bound),
                    });
                }
            }
        }
        let pass = constraints.iter().all(|c| c.satisfied);
        Ok(Verdict { pass, constraints })
    }

    /// One RHS term descriptor per delta map.
    pub fn rhs_terms(&self, exps: &ExponentTuple) -> Result<Vec<Term>> {
        if exps.n_leaves() != self.n_leaves || exps.n_params() != self.n_params {
            return Err(Error::MalformedExponent("exponent/tree shape mismatch".into()));
        }
        Ok(self
            .enumerate_delta_maps()
            .into_iter()
            .map(|map| {
                let orders = (0..self.n_leaves)
                    .map(|l| {
                        (0..self.n_params)
                            .map(|j| self.delta_inverse(&map, l, j))
                            .collect()
                    })
                    .collect();
                Term {
                    map,
                    orders,
                    exponents: (0..self.n_leaves).map(|l| exps.leaf(l).to_vec()).collect(),
                }
            })
            .collect())
    }
}

fn flatten(node: &TreeNode, n_params: usize, out: &mut Vec<Vertex>) -> Result<Child> {
    match node {
        TreeNode::Leaf(l) => Ok(Child::Leaf(*l)),
        TreeNode::Vertex {
            orders,
            kind,
            children,
        } => {
            if orders.len() != n_params {
                return Err(Error::InvalidTree(format!(
                    "vertex carries {} orders, expected {}",
                    orders.len(),
                    n_params
                )));
            }
            if children.len() < 2 {
                return Err(Error::InvalidTree(
                    "every internal vertex needs at least 2 children".into(),
                ));
            }
            let id = out.len();
            out.push(Vertex {
                orders: orders.clone(),
                kind: *kind,
                children: Vec::new(),
            });
            let mut kids = Vec::with_capacity(children.len());
            for c in children {
                kids.push(flatten(c, n_params, out)?);
            }
            out[id].children = kids;
            Ok(Child::Vertex(id))
        }
    }
}

/// An admissible derivative distribution `δ_1 ⊗ … ⊗ δ_N`.
/// `per_param[j][v]` is the (0-based) leaf receiving vertex `v`'s
/// parameter-`j` derivatives.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DeltaMap {
    pub per_param: Vec<Vec<usize>>,
}

fn cartesian_maps(lists: &[Vec<Vec<usize>>]) -> Vec<DeltaMap> {
    let mut maps = vec![DeltaMap {
        per_param: Vec::new(),
    }];
    for list in lists {
        let mut next = Vec::with_capacity(maps.len() * list.len());
        for m in &maps {
            for choice in list {
                let mut per_param = m.per_param.clone();
                per_param.push(choice.clone());
                next.push(DeltaMap { per_param });
            }
        }
        maps = next;
    }
    maps
}

/// Exponent-constraint report.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub pass: bool,
    pub constraints: Vec<Constraint>,
}

impl Verdict {
    pub fn violations(&self) -> Vec<&Constraint> {
        self.constraints.iter().filter(|c| !c.satisfied).collect()
    }
}

/// One cascade bound family: `p_v^j > bound`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub vertex: usize,
    pub param: usize,
    pub bound: Ratio<i64>,
    pub exponent: Exponent,
    pub satisfied: bool,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vertex {} param {}: require p_v > {}/{} (p_v = {}) [{}]",
            self.vertex,
            self.param + 1,
            self.bound.numer(),
            self.bound.denom(),
            self.exponent,
            if self.satisfied { "ok" } else { "VIOLATED" }
        )
    }
}

/// One right-hand-side product `∏_l ‖D^{δ⁻¹(l)} f_l‖_{p_l}`.
#[derive(Clone, Debug)]
pub struct Term {
    pub map: DeltaMap,
    /// `orders[l][j] = δ_j^{-1}(l)`.
    pub orders: Vec<Vec<Order>>,
    pub exponents: Vec<Vec<Exponent>>,
}

impl Term {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (l, (orders, exps)) in self.orders.iter().zip(&self.exponents).enumerate() {
            if l > 0 {
                s.push(' ');
            }
            let all_zero = orders.iter().all(|o| o.is_zero());
            let ords: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
            let ps: Vec<String> = exps.iter().map(|e| e.to_string()).collect();
            if all_zero {
                s.push_str(&format!("|f{}|_({})", l + 1, ps.join(",")));
            } else {
                s.push_str(&format!("|D^({}) f{}|_({})", ords.join(","), l + 1, ps.join(",")));
            }
        }
        s
    }

    pub fn latex(&self) -> String {
        let mut s = String::new();
        let n_params = self.orders[0].len();
        for (l, (orders, exps)) in self.orders.iter().zip(&self.exponents).enumerate() {
            s.push_str("\\|");
            for (j, o) in orders.iter().enumerate() {
                if o.is_zero() {
                    continue;
                }
                if n_params == 1 {
                    s.push_str(&format!("D^{{{o}}}"));
                } else {
                    s.push_str(&format!("D_{{({})}}^{{{o}}}", j + 1));
                }
            }
            s.push_str(&format!("f_{{{}}}\\|_{{", l + 1));
            for (j, e) in exps.iter().enumerate() {
                let e = if *e == Exponent::Infinity {
                    "\\infty".to_string()
                } else {
                    e.to_string()
                };
                if n_params == 1 {
                    s.push_str(&format!("L^{{{e}}}"));
                } else {
                    s.push_str(&format!("L_{{x_{}}}^{{{e}}}", j + 1));
                }
            }
            s.push_str("}}");
        }
        s
    }
}

/// A forest `G_1 ⊗ … ⊗ G_N`: one single-parameter tree per parameter,
/// all over the same leaf set.
#[derive(Clone, Debug)]
pub struct FlagForest {
    trees: Vec<FlagTree>,
}

impl FlagForest {
    pub fn new(trees: Vec<FlagTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidTree("empty forest".into()));
        }
        let n = trees[0].n_leaves();
        for t in &trees {
            if t.n_leaves() != n {
                return Err(Error::InvalidTree(
                    "forest trees must share the leaf set".into(),
                ));
            }
            if t.n_params() != 1 {
                return Err(Error::InvalidTree(
                    "forest trees carry a single parameter each".into(),
                ));
            }
        }
        Ok(FlagForest { trees })
    }

    pub fn trees(&self) -> &[FlagTree] {
        &self.trees
    }

    pub fn n_params(&self) -> usize {
        self.trees.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.trees[0].n_leaves()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.trees.iter().all(|t| t.is_homogeneous())
    }

    pub fn enumerate_delta_maps(&self) -> Vec<DeltaMap> {
        let lists: Vec<Vec<Vec<usize>>> = self
            .trees
            .iter()
            .map(|t| t.enumerate_single_param())
            .collect();
        cartesian_maps(&lists)
    }

    pub fn delta_inverse(&self, map: &DeltaMap, l: usize, j: usize) -> Order {
        map.per_param[j]
            .iter()
            .enumerate()
            .filter(|(_, &leaf)| leaf == l)
            .fold(Order::ZERO, |acc, (v, _)| {
                acc.checked_add(self.trees[j].order(v, 0))
            })
    }

    pub fn check_exponents(&self, exps: &ExponentTuple) -> Result<Verdict> {
        if exps.n_leaves() != self.n_leaves() || exps.n_params() != self.n_params() {
            return Err(Error::MalformedExponent("exponent/forest shape mismatch".into()));
        }
        // Per-parameter trees are checked against their own parameter column.
        let mut constraints = Vec::new();
        let mut pass = true;
        for (j, t) in self.trees.iter().enumerate() {
            let col = ExponentTuple::new(
                (0..exps.n_leaves())
                    .map(|l| vec![exps.get(l, j)])
                    .collect(),
            )?;
            let v = t.check_exponents(&col)?;
            pass &= v.pass;
            constraints.extend(v.constraints.into_iter().map(|mut c| {
                c.param = j;
                c
            }));
        }
        Ok(Verdict { pass, constraints })
    }

    pub fn rhs_terms(&self, exps: &ExponentTuple) -> Result<Vec<Term>> {
        if exps.n_leaves() != self.n_leaves() || exps.n_params() != self.n_params() {
            return Err(Error::MalformedExponent("exponent/forest shape mismatch".into()));
        }
        Ok(self
            .enumerate_delta_maps()
            .into_iter()
            .map(|map| {
                let orders = (0..self.n_leaves())
                    .map(|l| {
                        (0..self.n_params())
                            .map(|j| self.delta_inverse(&map, l, j))
                            .collect()
                    })
                    .collect();
                Term {
                    map,
                    orders,
                    exponents: (0..self.n_leaves()).map(|l| exps.leaf(l).to_vec()).collect(),
                }
            })
            .collect())
    }
}
