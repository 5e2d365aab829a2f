//! Expression syntax for flag trees.
//!
//! ```text
//! expr := term ("*" term)*
//! term := leaf | "D[" num ("," num)* "](" expr ")" | "J[" … "](" expr ")"
//! leaf := "f" int           (1-based)
//! ```
//!
//! Whitespace-insensitive; each `D`/`J` carries one order per parameter.

use flagcalc_core::flagtree::{Child, DerivKind, Order, TreeNode};
use flagcalc_core::{Error, FlagTree, Result};

pub fn parse_tree(text: &str, n_params: usize) -> Result<FlagTree> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n_params,
    };
    p.ws();
    let root = p.term()?;
    p.ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input (top level must be a single D/J term)"));
    }
    FlagTree::from_node(n_params, root)
}

/// Canonical form: minimal decimals, no whitespace, children joined by `*`.
pub fn print_tree(tree: &FlagTree) -> String {
    print_child(tree, Child::Vertex(0))
}

fn print_child(tree: &FlagTree, c: Child) -> String {
    match c {
        Child::Leaf(l) => format!("f{}", l + 1),
        Child::Vertex(v) => {
            let vert = tree.vertex(v).expect("valid vertex id");
            let op = match vert.kind {
                DerivKind::Homogeneous => "D",
                DerivKind::Inhomogeneous => "J",
            };
            let orders: Vec<String> = vert.orders.iter().map(|o| o.to_string()).collect();
            let children: Vec<String> =
                vert.children.iter().map(|&c| print_child(tree, c)).collect();
            format!("{}[{}]({})", op, orders.join(","), children.join("*"))
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n_params: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Vec<TreeNode>> {
        let mut factors = vec![self.term()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.term()?);
        }
        Ok(factors)
    }

    fn term(&mut self) -> Result<TreeNode> {
        match self.peek() {
            Some(b'f') => {
                self.pos += 1;
                let idx = self.integer()?;
                if idx == 0 {
                    return Err(self.err("leaf indices start at f1"));
                }
                Ok(TreeNode::Leaf(idx - 1))
            }
            Some(op @ (b'D' | b'J')) => {
                self.pos += 1;
                self.eat(b'[')?;
                let orders = self.orders()?;
                self.eat(b']')?;
                self.eat(b'(')?;
                let children = self.expr()?;
                self.eat(b')')?;
                let kind = if op == b'D' {
                    DerivKind::Homogeneous
                } else {
                    DerivKind::Inhomogeneous
                };
                Ok(TreeNode::Vertex {
                    orders,
                    kind,
                    children,
                })
            }
            _ => Err(self.err("expected a leaf 'f<k>' or an operator 'D[' / 'J['")),
        }
    }

    fn orders(&mut self) -> Result<Vec<Order>> {
        let mut out = vec![self.number()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            out.push(self.number()?);
        }
        if out.len() != self.n_params {
            return Err(self.err(&format!(
                "expected {} order(s), found {}",
                self.n_params,
                out.len()
            )));
        }
        Ok(out)
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Order> {
        self.ws();
        let start = self.pos;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected a nonnegative decimal"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Order::parse(text).map_err(|e| Error::Parse {
            offset: start,
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_forms() {
        let t = parse_tree("D[1](f1*f2)", 1).unwrap();
        assert_eq!(t.n_leaves(), 2);
        assert_eq!(print_tree(&t), "D[1](f1*f2)");

        let t = parse_tree(" D[ 0.5 , 1.0 ] ( D[0.3,0.2](f1 * f2) * f3 ) ", 2).unwrap();
        assert_eq!(print_tree(&t), "D[0.5,1](D[0.3,0.2](f1*f2)*f3)");

        let t = parse_tree("J[2](f2*D[0.25](f1*f3))", 1).unwrap();
        assert_eq!(print_tree(&t), "J[2](f2*D[0.25](f1*f3))");
    }

    #[test]
    fn five_linear_two_param() {
        let t = parse_tree("D[0.5,1.0](D[0.3,0.2](f1*f2)*f3*D[0.7,0.1](f4*f5))", 2).unwrap();
        assert_eq!(t.n_leaves(), 5);
        assert_eq!(t.n_vertices(), 3);
        assert_eq!(t.enumerate_delta_maps().len(), 144);
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_tree("D[0.5](f1*f1)", 1) {
            Err(Error::InvalidTree(m)) => assert!(m.contains("duplicate leaf f1"), "{m}"),
            other => panic!("{other:?}"),
        }
        match parse_tree("D[0.5](f1*f3)", 1) {
            Err(Error::InvalidTree(m)) => assert!(m.contains("gaps"), "{m}"),
            other => panic!("{other:?}"),
        }
        match parse_tree("D[0.5,0.2](f1*f2)", 1) {
            Err(Error::Parse { offset, msg }) => {
                assert!(offset > 0 && msg.contains("order"), "{offset} {msg}")
            }
            other => panic!("{other:?}"),
        }
        match parse_tree("f1*f2", 1) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse_tree("D[1](f1*g2)", 1) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
    }

    // deterministic LCG so the corpus is reproducible without extra deps
    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0 >> 33
        }
        fn below(&mut self, n: u64) -> u64 {
            self.next() % n
        }
    }

    fn random_node(
        rng: &mut Lcg,
        next_leaf: &mut usize,
        depth: usize,
        n_params: usize,
    ) -> TreeNode {
        if depth == 0 || rng.below(3) == 0 {
            let l = *next_leaf;
            *next_leaf += 1;
            return TreeNode::Leaf(l);
        }
        let n_children = 2 + rng.below(2) as usize;
        let children = (0..n_children)
            .map(|_| random_node(rng, next_leaf, depth - 1, n_params))
            .collect();
        let orders: Vec<Order> = (0..n_params)
            .map(|_| Order::from_units(rng.below(30_001) as i64).unwrap())
            .collect();
        TreeNode::Vertex {
            orders,
            kind: if rng.below(4) == 0 {
                DerivKind::Inhomogeneous
            } else {
                DerivKind::Homogeneous
            },
            children,
        }
    }

    #[test]
    fn round_trip_corpus() {
        let mut rng = Lcg(0xFEED_5EED);
        let mut produced = 0;
        while produced < 200 {
            let n_params = 1 + (produced % 3);
            let mut next_leaf = 0;
            let node = random_node(&mut rng, &mut next_leaf, 4, n_params);
            let TreeNode::Vertex { .. } = node else { continue };
            let tree = FlagTree::from_node(n_params, node).unwrap();
            let text = print_tree(&tree);
            let reparsed = parse_tree(&text, n_params).unwrap();
            assert_eq!(tree, reparsed, "round-trip failed for {text}");
            assert_eq!(print_tree(&reparsed), text);
            produced += 1;
        }
    }
}
