//! Shared helpers for integration tests: an independent brute-force
//! enumeration of admissible derivative-distribution assignments, and a
//! seeded random tree generator.

use flagcalc_core::flagtree::{Child, DerivKind, Order, TreeNode};
use flagcalc_core::FlagTree;

/// Leaves below a node, recomputed from the raw vertex table (independent
/// of `FlagTree::leaves_under`).
pub fn leaves_below(tree: &FlagTree, c: Child, out: &mut Vec<usize>) {
    match c {
        Child::Leaf(l) => out.push(l),
        Child::Vertex(v) => {
            for &child in &tree.vertex(v).unwrap().children {
                leaves_below(tree, child, out);
            }
        }
    }
}

/// Path-consistency: walking down from `v` toward the leaf `assign[v]`,
/// every intermediate vertex must send its derivatives to that same leaf.
fn path_consistent(tree: &FlagTree, assign: &[usize], v: usize) -> bool {
    let target = assign[v];
    let mut u = v;
    loop {
        let vert = tree.vertex(u).unwrap();
        if vert
            .children
            .iter()
            .any(|c| matches!(c, Child::Leaf(l) if *l == target))
        {
            return true;
        }
        let mut next = None;
        for c in &vert.children {
            if let Child::Vertex(w) = c {
                let mut ls = Vec::new();
                leaves_below(tree, *c, &mut ls);
                if ls.contains(&target) {
                    next = Some(*w);
                    break;
                }
            }
        }
        match next {
            None => return false,
            Some(w) => {
                if assign[w] != target {
                    return false;
                }
                u = w;
            }
        }
    }
}

/// All admissible single-parameter assignments, by exhaustive search over
/// per-vertex leaf candidates followed by the path filter.
pub fn brute_force_assignments(tree: &FlagTree) -> Vec<Vec<usize>> {
    let cands: Vec<Vec<usize>> = (0..tree.n_vertices())
        .map(|v| {
            let mut ls = Vec::new();
            leaves_below(tree, Child::Vertex(v), &mut ls);
            ls.sort_unstable();
            ls
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; cands.len()];
    loop {
        let assign: Vec<usize> = idx.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
        if (0..assign.len()).all(|v| path_consistent(tree, &assign, v)) {
            out.push(assign);
        }
        // odometer
        let mut done = true;
        for (pos, c) in idx.iter_mut().zip(&cands) {
            *pos += 1;
            if *pos < c.len() {
                done = false;
                break;
            }
            *pos = 0;
        }
        if done {
            break;
        }
    }
    out.sort();
    out
}

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn random_node(
    rng: &mut Lcg,
    next_leaf: &mut usize,
    vertex_budget: &mut usize,
    depth: usize,
    n_params: usize,
) -> TreeNode {
    if depth == 0 || *vertex_budget == 0 || rng.below(3) == 0 {
        let l = *next_leaf;
        *next_leaf += 1;
        return TreeNode::Leaf(l);
    }
    *vertex_budget -= 1;
    let n_children = 2 + rng.below(2) as usize;
    let children = (0..n_children)
        .map(|_| random_node(rng, next_leaf, vertex_budget, depth - 1, n_params))
        .collect();
    TreeNode::Vertex {
        orders: (0..n_params)
            .map(|_| Order::from_units(rng.below(30_001) as i64).unwrap())
            .collect(),
        kind: if rng.below(5) == 0 {
            DerivKind::Inhomogeneous
        } else {
            DerivKind::Homogeneous
        },
        children,
    }
}

/// Random tree with at most 8 internal vertices.
pub fn random_tree(seed: u64, n_params: usize) -> FlagTree {
    random_tree_sized(seed, n_params, 8, 4)
}

/// Random tree with a small vertex budget (for tests whose cost is
/// exponential in the enumeration size).
#[allow(dead_code)]
pub fn random_small_tree(seed: u64, n_params: usize) -> FlagTree {
    random_tree_sized(seed, n_params, 3, 3)
}

pub fn random_tree_sized(
    seed: u64,
    n_params: usize,
    max_vertices: usize,
    max_depth: usize,
) -> FlagTree {
    let mut rng = Lcg(seed ^ 0xA076_1D64_78BD_642F);
    loop {
        let mut next_leaf = 0;
        let mut budget = max_vertices;
        let node = random_node(&mut rng, &mut next_leaf, &mut budget, max_depth, n_params);
        if let TreeNode::Vertex { ref children, .. } = node {
            if children.iter().all(|c| matches!(c, TreeNode::Leaf(_))) && next_leaf < 2 {
                continue;
            }
            return FlagTree::from_node(n_params, node).unwrap();
        }
    }
}
