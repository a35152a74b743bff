//! The free post-Lie algebra on one generator and its enveloping algebra.
//!
//! Trees act on trees by left grafting. The action is lifted to ordered forests
//! by two rules: a tree acts on a word as a derivation (Leibniz), and a word
//! `x A` acts by `x ▷ (A ▷ B) - (x ▷ A) ▷ B`. The Grossman–Larson product is
//! `A ∗ B = Σ A₁ (A₂ ▷ B)` over the deshuffle coproduct of `A`.
//!
//! Everything is generic over the tree-level product ([`TreeAction`]) so the
//! identity checks can be run against a deliberately broken product.

use serde::Serialize;

use crate::error::Result;
use crate::freealg::{concat, deshuffle_forest, min_trunc, Coeff, Series};
use crate::ptrees::{trees_up_to, DegreeCap, Forest, Tree};
use num_traits::One;

/// Product of two trees, extended bilinearly and to forests by [`PostLie`].
pub trait TreeAction {
    fn act(&self, left: &Tree, right: &Tree) -> Series;

    /// Closed-form action of a whole word on a tree, if one is known.
    ///
    /// The axiom check compares it against the recursive extension; without
    /// it, the flatness relation holds by construction.
    fn act_word(&self, _word: &Forest, _tree: &Tree) -> Option<Series> {
        None
    }
}

/// Attach the root of the left tree as the new leftmost branch of each vertex
/// of the right tree.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeftGrafting;

impl TreeAction for LeftGrafting {
    fn act(&self, left: &Tree, right: &Tree) -> Series {
        let mut out = Series::zero();
        for t in graft_trees(left, right) {
            out.add_term(Forest::single(t), Coeff::one());
        }
        out
    }

    fn act_word(&self, word: &Forest, tree: &Tree) -> Option<Series> {
        let mut out = Series::zero();
        for t in graft_word(word, tree) {
            out.add_term(Forest::single(t), Coeff::one());
        }
        Some(out)
    }
}

/// Attach every tree of `word` to some vertex of `onto`, over all
/// `degree(onto)^len(word)` assignments. Trees landing on the same vertex
/// become its leftmost branches, in word order.
pub fn graft_word(word: &Forest, onto: &Tree) -> Vec<Tree> {
    fn rebuild(node: &Tree, next: &mut usize, assign: &[usize], word: &[Tree]) -> Tree {
        let id = *next;
        *next += 1;
        let mut children: Vec<Tree> = word
            .iter()
            .zip(assign)
            .filter(|(_, &v)| v == id)
            .map(|(t, _)| t.clone())
            .collect();
        for child in node.children() {
            children.push(rebuild(child, next, assign, word));
        }
        Tree::from_children(children)
    }

    let n = onto.degree();
    let k = word.len();
    let mut assign = vec![0usize; k];
    let mut out = Vec::new();
    loop {
        let mut next = 0;
        out.push(rebuild(onto, &mut next, &assign, word.trees()));
        // odometer over assignments
        let mut i = 0;
        while i < k {
            assign[i] += 1;
            if assign[i] < n {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
        if i == k {
            return out;
        }
    }
}

/// The grafted trees, one per vertex of `onto` (root first, then depth-first
/// left to right).
pub fn graft_trees(branch: &Tree, onto: &Tree) -> Vec<Tree> {
    let mut out = Vec::with_capacity(onto.degree());
    let mut at_root = Vec::with_capacity(onto.root_arity() + 1);
    at_root.push(branch.clone());
    at_root.extend_from_slice(onto.children());
    out.push(Tree::from_children(at_root));
    for (i, child) in onto.children().iter().enumerate() {
        for grafted in graft_trees(branch, child) {
            let mut children = onto.children().to_vec();
            children[i] = grafted;
            out.push(Tree::from_children(children));
        }
    }
    out
}

/// Left grafting `t1 ▷ t2` as a series.
pub fn graft(t1: &Tree, t2: &Tree) -> Series {
    LeftGrafting.act(t1, t2)
}

/// Operations of the enveloping algebra built on a tree-level action.
#[derive(Debug, Clone, Default)]
pub struct PostLie<A = LeftGrafting> {
    action: A,
}

impl<A: TreeAction> PostLie<A> {
    pub fn new(action: A) -> Self {
        PostLie { action }
    }

    /// `a ▷ b` on basis forests, as a finite (untruncated) element.
    pub fn forest_action(&self, a: &Forest, b: &Forest) -> Series {
        if a.is_empty() {
            return Series::from_forest(b.clone());
        }
        if b.is_empty() {
            return Series::zero();
        }
        if let Some(x) = a.as_tree() {
            return self.tree_on_forest(x, b);
        }
        let (x, rest) = a.split_first().expect("non-empty forest");
        let inner = self.forest_action(&rest, b);
        let mut out = Series::zero();
        for (f, c) in inner.iter() {
            out.add_scaled(&self.tree_on_forest(x, f), c);
        }
        let moved = self.tree_on_forest(x, &rest);
        for (f, c) in moved.iter() {
            out.add_scaled(&self.forest_action(f, b), &-c);
        }
        out
    }

    /// A tree acts on a word as a derivation.
    fn tree_on_forest(&self, x: &Tree, b: &Forest) -> Series {
        if let Some(t) = b.as_tree() {
            return self.action.act(x, t);
        }
        let trees = b.trees();
        let mut out = Series::zero();
        for (i, t) in trees.iter().enumerate() {
            let head = Forest::from_trees(trees[..i].to_vec());
            let tail = Forest::from_trees(trees[i + 1..].to_vec());
            for (g, c) in self.action.act(x, t).iter() {
                out.add_term(head.concat(g).concat(&tail), c.clone());
            }
        }
        out
    }

    /// Bilinear `A ▷ B`, truncated at the smaller operand truncation.
    pub fn triangleright(&self, a: &Series, b: &Series) -> Series {
        let trunc = min_trunc(a.trunc(), b.trunc());
        let mut out = Series::zero_truncated(trunc);
        for (fa, ca) in a.iter() {
            for (fb, cb) in b.iter() {
                if trunc.is_some_and(|t| fa.degree() + fb.degree() > t) {
                    continue;
                }
                out.add_scaled(&self.forest_action(fa, fb), &(ca * cb));
            }
        }
        out
    }

    /// Grossman–Larson product.
    pub fn gl_product(&self, a: &Series, b: &Series) -> Series {
        let trunc = min_trunc(a.trunc(), b.trunc());
        let mut out = Series::zero_truncated(trunc);
        for (fa, ca) in a.iter() {
            for (fb, cb) in b.iter() {
                if trunc.is_some_and(|t| fa.degree() + fb.degree() > t) {
                    continue;
                }
                let c = ca * cb;
                for (left, right) in deshuffle_forest(fa) {
                    for (g, d) in self.forest_action(&right, fb).iter() {
                        out.add_term(left.concat(g), &c * d);
                    }
                }
            }
        }
        out
    }

    /// `x ▷ y - y ▷ x + [x, y]`.
    pub fn dbracket(&self, a: &Series, b: &Series) -> Series {
        let mut out = self.triangleright(a, b);
        out -= &self.triangleright(b, a);
        out += &bracket(a, b);
        out
    }

    /// `x ▷ (y ▷ z) - (x ▷ y) ▷ z`.
    pub fn associator(&self, x: &Series, y: &Series, z: &Series) -> Series {
        let mut out = self.triangleright(x, &self.triangleright(y, z));
        out -= &self.triangleright(&self.triangleright(x, y), z);
        out
    }

    /// Exhaustive check of the post-Lie relations and the Jacobi identity of
    /// the second bracket over all tree triples of total degree at most `n`.
    pub fn check_axioms(&self, n: usize, cap: DegreeCap) -> Result<AxiomReport> {
        cap.check(n)?;
        let trees = if n >= 3 { trees_up_to(n - 2, cap)? } else { Vec::new() };
        let mut report = AxiomReport {
            degree: n,
            triples: 0,
            pass: true,
            failure: None,
        };
        for x in &trees {
            for y in &trees {
                for z in &trees {
                    if x.degree() + y.degree() + z.degree() > n {
                        continue;
                    }
                    report.triples += 1;
                    let (sx, sy, sz) = (
                        Series::from_tree(x.clone()),
                        Series::from_tree(y.clone()),
                        Series::from_tree(z.clone()),
                    );
                    for (name, residual) in self.axiom_residuals(&sx, &sy, &sz) {
                        if !residual.is_zero() {
                            report.pass = false;
                            report.failure = Some(AxiomFailure {
                                identity: name.to_string(),
                                x: x.to_string(),
                                y: y.to_string(),
                                z: z.to_string(),
                                residual: residual.to_string(),
                            });
                            return Ok(report);
                        }
                    }
                }
            }
        }
        Ok(report)
    }

    fn word_on_trees(&self, a: &Series, b: &Series) -> Option<Series> {
        let mut out = Series::zero_truncated(min_trunc(a.trunc(), b.trunc()));
        for (fa, ca) in a.iter() {
            for (fb, cb) in b.iter() {
                let tree = fb.as_tree()?;
                out.add_scaled(&self.action.act_word(fa, tree)?, &(ca * cb));
            }
        }
        Some(out)
    }

    fn axiom_residuals(
        &self,
        x: &Series,
        y: &Series,
        z: &Series,
    ) -> [(&'static str, Series); 3] {
        let tr = |a: &Series, b: &Series| self.triangleright(a, b);

        let mut eq1 = tr(x, &bracket(y, z));
        eq1 -= &bracket(&tr(x, y), z);
        eq1 -= &bracket(y, &tr(x, z));

        let xy = bracket(x, y);
        let mut eq2 = match self.word_on_trees(&xy, z) {
            Some(direct) => direct,
            None => tr(&xy, z),
        };
        eq2 -= &self.associator(x, y, z);
        eq2 += &self.associator(y, x, z);

        let mut jacobi = self.dbracket(x, &self.dbracket(y, z));
        jacobi += &self.dbracket(y, &self.dbracket(z, x));
        jacobi += &self.dbracket(z, &self.dbracket(x, y));

        [
            ("derivation: x▷[y,z] = [x▷y,z] + [y,x▷z]", eq1),
            ("flatness: [x,y]▷z = a(x,y,z) - a(y,x,z)", eq2),
            ("jacobi of x▷y - y▷x + [x,y]", jacobi),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomFailure {
    pub identity: String,
    pub x: String,
    pub y: String,
    pub z: String,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub degree: usize,
    pub triples: usize,
    pub pass: bool,
    pub failure: Option<AxiomFailure>,
}

/// Lie bracket of the enveloping algebra: the concatenation commutator.
pub fn bracket(a: &Series, b: &Series) -> Series {
    concat(a, b) - concat(b, a)
}

pub fn triangleright(a: &Series, b: &Series) -> Series {
    PostLie::<LeftGrafting>::default().triangleright(a, b)
}

pub fn dbracket(a: &Series, b: &Series) -> Series {
    PostLie::<LeftGrafting>::default().dbracket(a, b)
}

pub fn gl_product(a: &Series, b: &Series) -> Series {
    PostLie::<LeftGrafting>::default().gl_product(a, b)
}

pub fn check_postlie_axioms(n: usize, cap: DegreeCap) -> Result<AxiomReport> {
    PostLie::<LeftGrafting>::default().check_axioms(n, cap)
}

/// Replaces every tree by its representative up to branch reordering.
pub fn quotient_nonplanar(a: &Series) -> Series {
    Series::from_terms(
        a.iter().map(|(f, c)| {
            (
                Forest::from_trees(f.trees().iter().map(Tree::nonplanar_canonical).collect()),
                c.clone(),
            )
        }),
        a.trunc(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerationReport {
    pub degree: usize,
    pub triples: usize,
    /// Triples whose associator difference is nonzero before the quotient.
    pub planar_nonzero: usize,
    pub pass: bool,
    pub witness: Option<[String; 3]>,
}

/// Checks that `a(x,y,z) - a(y,x,z)` vanishes once planarity is forgotten,
/// i.e. grafting becomes a left pre-Lie product.
pub fn check_prelie_degeneration(n: usize, cap: DegreeCap) -> Result<DegenerationReport> {
    cap.check(n)?;
    let ops = PostLie::<LeftGrafting>::default();
    let trees = if n >= 3 { trees_up_to(n - 2, cap)? } else { Vec::new() };
    let mut report = DegenerationReport {
        degree: n,
        triples: 0,
        planar_nonzero: 0,
        pass: true,
        witness: None,
    };
    for x in &trees {
        for y in &trees {
            for z in &trees {
                if x.degree() + y.degree() + z.degree() > n {
                    continue;
                }
                report.triples += 1;
                let (sx, sy, sz) = (
                    Series::from_tree(x.clone()),
                    Series::from_tree(y.clone()),
                    Series::from_tree(z.clone()),
                );
                let diff = ops.associator(&sx, &sy, &sz) - ops.associator(&sy, &sx, &sz);
                if !diff.is_zero() {
                    report.planar_nonzero += 1;
                }
                if report.pass && !quotient_nonplanar(&diff).is_zero() {
                    report.pass = false;
                    report.witness = Some([x.to_string(), y.to_string(), z.to_string()]);
                }
            }
        }
    }
    Ok(report)
}
