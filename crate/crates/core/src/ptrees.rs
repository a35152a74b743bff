//! Planar rooted trees and ordered forests.
//!
//! Trees carry no vertex labels: the bracket word `[` children `]` is the whole
//! structure. The canonical text form writes siblings separated by a single
//! space, e.g. `[[[]] [] []]`, and the empty forest as `1`.
//!
//! Ordering is graded: degree first, then lexicographic on the canonical string
//! with `[` < `]` < ` `. The comparison is done structurally, without rendering.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest degree accepted by the combinatorial operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegreeCap(pub usize);

impl DegreeCap {
    pub const DEFAULT: DegreeCap = DegreeCap(8);

    pub fn check(self, degree: usize) -> Result<()> {
        if degree > self.0 {
            Err(Error::DegreeCap {
                requested: degree,
                max: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for DegreeCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A planar rooted tree; the order of the children is significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    children: Vec<Tree>,
    degree: usize,
}

impl Tree {
    /// The single-vertex tree `[]`.
    pub fn leaf() -> Self {
        Tree {
            children: Vec::new(),
            degree: 1,
        }
    }

    pub fn from_children(children: Vec<Tree>) -> Self {
        let degree = 1 + children.iter().map(Tree::degree).sum::<usize>();
        Tree { children, degree }
    }

    /// Adds a root below the trees of `forest`, which become its branches.
    pub fn from_forest(forest: Forest) -> Self {
        Tree::from_children(forest.trees)
    }

    /// Number of vertices.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    /// Number of branches at the root.
    pub fn root_arity(&self) -> usize {
        self.children.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// The forest of branches obtained by removing the root.
    pub fn branches(&self) -> Forest {
        Forest::from_trees(self.children.clone())
    }

    /// Representative of the tree up to reordering of branches: children are
    /// sorted recursively in canonical order.
    pub fn nonplanar_canonical(&self) -> Tree {
        let mut children: Vec<Tree> = self
            .children
            .iter()
            .map(Tree::nonplanar_canonical)
            .collect();
        children.sort();
        Tree {
            children,
            degree: self.degree,
        }
    }

    fn write_canonical(&self, out: &mut String) {
        out.push('[');
        for (i, child) in self.children.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            child.write_canonical(out);
        }
        out.push(']');
    }
}

/// Lexicographic comparison of the canonical strings of two trees under
/// `[` < `]` < ` `. Tree words are prefix-free, so the first differing child
/// decides; when one child list runs out, its next token is `]`, which is
/// larger than the opening `[` of a first child and smaller than the space
/// before any later child.
fn tree_lex(a: &Tree, b: &Tree) -> Ordering {
    let mut i = 0;
    loop {
        match (a.children.get(i), b.children.get(i)) {
            (None, None) => return Ordering::Equal,
            (Some(x), Some(y)) => match tree_lex(x, y) {
                Ordering::Equal => {}
                other => return other,
            },
            (None, Some(_)) => {
                return if i == 0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Some(_), None) => {
                return if i == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
        i += 1;
    }
}

fn forest_lex(a: &[Tree], b: &[Tree]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match tree_lex(x, y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| tree_lex(self, other))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_canonical(&mut s);
        f.write_str(&s)
    }
}

impl FromStr for Tree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser::new(s);
        parser.skip_ws();
        let tree = parser.tree()?;
        parser.skip_ws();
        parser.expect_end()?;
        Ok(tree)
    }
}

/// An ordered word of planar rooted trees. The empty forest is the unit `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Forest {
    trees: Vec<Tree>,
    degree: usize,
}

impl Forest {
    pub fn empty() -> Self {
        Forest::default()
    }

    pub fn single(tree: Tree) -> Self {
        let degree = tree.degree;
        Forest {
            trees: vec![tree],
            degree,
        }
    }

    pub fn from_trees(trees: Vec<Tree>) -> Self {
        let degree = trees.iter().map(Tree::degree).sum();
        Forest { trees, degree }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn into_trees(self) -> Vec<Tree> {
        self.trees
    }

    /// Total number of vertices.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of trees in the word.
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// The tree, if this forest consists of exactly one.
    pub fn as_tree(&self) -> Option<&Tree> {
        match self.trees.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    /// Juxtaposition `self other`.
    pub fn concat(&self, other: &Forest) -> Forest {
        let mut trees = Vec::with_capacity(self.trees.len() + other.trees.len());
        trees.extend_from_slice(&self.trees);
        trees.extend_from_slice(&other.trees);
        Forest {
            trees,
            degree: self.degree + other.degree,
        }
    }

    /// Splits off the leftmost tree.
    pub fn split_first(&self) -> Option<(&Tree, Forest)> {
        self.trees
            .split_first()
            .map(|(head, rest)| (head, Forest::from_trees(rest.to_vec())))
    }
}

impl From<Tree> for Forest {
    fn from(tree: Tree) -> Self {
        Forest::single(tree)
    }
}

impl Ord for Forest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| forest_lex(&self.trees, &other.trees))
    }
}

impl PartialOrd for Forest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_forest(self))
    }
}

impl FromStr for Forest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_forest(s)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(b']') => Err(self.error("unbalanced ']'")),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn tree(&mut self) -> Result<Tree> {
        match self.peek() {
            Some(b'[') => self.pos += 1,
            None => return Err(self.error("expected '[' but input ended")),
            Some(_) => return Err(self.error("expected '['")),
        }
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b']') => {
                    self.pos += 1;
                    return Ok(Tree::from_children(children));
                }
                Some(b'[') => children.push(self.tree()?),
                None => return Err(self.error("unbalanced '[': input ended")),
                Some(_) => return Err(self.error("unexpected character")),
            }
        }
    }
}

/// Parses the bracket grammar `Forest := "1" | Tree+`, `Tree := "[" Tree* "]"`.
pub fn parse_forest(text: &str) -> Result<Forest> {
    let mut parser = Parser::new(text);
    parser.skip_ws();
    if parser.peek() == Some(b'1') {
        parser.pos += 1;
        parser.skip_ws();
        parser.expect_end()?;
        return Ok(Forest::empty());
    }
    let mut trees = vec![parser.tree()?];
    loop {
        parser.skip_ws();
        if parser.peek() == Some(b'[') {
            trees.push(parser.tree()?);
        } else {
            parser.expect_end()?;
            return Ok(Forest::from_trees(trees));
        }
    }
}

/// Canonical text: `1` for the empty forest, otherwise the trees separated by
/// single spaces.
pub fn render_forest(forest: &Forest) -> String {
    if forest.is_empty() {
        return "1".to_string();
    }
    let mut out = String::new();
    for (i, tree) in forest.trees.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        tree.write_canonical(&mut out);
    }
    out
}

fn all_forests(n: usize) -> Vec<Forest> {
    if n == 0 {
        return vec![Forest::empty()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        let heads = all_trees(first);
        let tails = all_forests(n - first);
        for head in &heads {
            for tail in &tails {
                out.push(Forest::single(head.clone()).concat(tail));
            }
        }
    }
    out
}

fn all_trees(n: usize) -> Vec<Tree> {
    debug_assert!(n >= 1);
    all_forests(n - 1)
        .into_iter()
        .map(Tree::from_forest)
        .collect()
}

/// All planar rooted trees with `n` vertices, in canonical order.
pub fn enumerate_trees(n: usize, cap: DegreeCap) -> Result<Vec<Tree>> {
    if n == 0 {
        return Err(Error::ZeroDegree);
    }
    cap.check(n)?;
    let mut trees = all_trees(n);
    trees.sort();
    Ok(trees)
}

/// All ordered forests of total degree `n`, in canonical order.
pub fn enumerate_forests(n: usize, cap: DegreeCap) -> Result<Vec<Forest>> {
    cap.check(n)?;
    let mut forests = all_forests(n);
    forests.sort();
    Ok(forests)
}

/// All ordered forests of degree at most `n`, in canonical order.
pub fn forests_up_to(n: usize, cap: DegreeCap) -> Result<Vec<Forest>> {
    let mut out = Vec::new();
    for d in 0..=n {
        out.extend(enumerate_forests(d, cap)?);
    }
    Ok(out)
}

/// All planar rooted trees of degree `1..=n`, in canonical order.
pub fn trees_up_to(n: usize, cap: DegreeCap) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    for d in 1..=n {
        out.extend(enumerate_trees(d, cap)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Forest {
        parse_forest(s).unwrap()
    }

    fn t(s: &str) -> Tree {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        assert!(f("1").is_empty());
        let cherry = f("[[][]]");
        assert_eq!(cherry.len(), 1);
        assert_eq!(cherry.trees()[0].root_arity(), 2);
        assert_eq!(cherry.degree(), 3);
        let fo = f("[[]] []");
        assert_eq!(fo.trees(), &[t("[[]]"), Tree::leaf()]);
        assert_eq!(f("  [ [ ] ]\n[]  "), fo);
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_forest(&Forest::empty()), "1");
        assert_eq!(render_forest(&Forest::single(Tree::leaf())), "[]");
        assert_eq!(render_forest(&f("[[]][]")), "[[]] []");
        assert_eq!(render_forest(&f("[[][]]")), "[[] []]");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let cases = [
            ("", 0),
            ("[[]", 3),
            ("[]]", 2),
            ("[x]", 1),
            ("[] 1", 3),
            ("1 []", 2),
            ("]", 0),
        ];
        for (text, offset) in cases {
            match parse_forest(text) {
                Err(Error::Parse { offset: o, .. }) => assert_eq!(o, offset, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn small_enumerations() {
        let cap = DegreeCap::default();
        assert_eq!(enumerate_trees(1, cap).unwrap(), vec![Tree::leaf()]);
        assert_eq!(
            enumerate_trees(3, cap).unwrap(),
            vec![t("[[[]]]"), t("[[] []]")]
        );
        assert_eq!(enumerate_forests(0, cap).unwrap(), vec![Forest::empty()]);
        let two: Vec<String> = enumerate_forests(2, cap)
            .unwrap()
            .iter()
            .map(render_forest)
            .collect();
        assert_eq!(two, vec!["[[]]", "[] []"]);
        assert_eq!(enumerate_forests(3, cap).unwrap().len(), 5);
        assert_eq!(enumerate_trees(5, cap).unwrap().len(), 14);
    }

    #[test]
    fn zero_degree_and_cap() {
        assert_eq!(enumerate_trees(0, DegreeCap::default()), Err(Error::ZeroDegree));
        assert!(matches!(
            enumerate_trees(9, DegreeCap::default()),
            Err(Error::DegreeCap { requested: 9, max: 8 })
        ));
        assert!(enumerate_forests(3, DegreeCap(2)).is_err());
    }

    #[test]
    fn nonplanar_canonical_identifies_reorderings() {
        assert_eq!(
            t("[[] [[]]]").nonplanar_canonical(),
            t("[[[]] []]").nonplanar_canonical()
        );
        assert_ne!(t("[[] [[]]]"), t("[[[]] []]"));
    }

    // Order as defined on strings: map "[" "]" " " to increasing ranks.
    fn string_key(fo: &Forest) -> (usize, Vec<u8>) {
        let key = render_forest(fo)
            .bytes()
            .map(|b| match b {
                b'[' => 0,
                b']' => 1,
                b' ' => 2,
                _ => 3,
            })
            .collect();
        (fo.degree(), key)
    }

    #[test]
    fn structural_order_matches_string_order() {
        let all = forests_up_to(6, DegreeCap::default()).unwrap();
        for a in &all {
            for b in &all {
                assert_eq!(a.cmp(b), string_key(a).cmp(&string_key(b)), "{a} vs {b}");
            }
        }
        let trees = trees_up_to(6, DegreeCap::default()).unwrap();
        for a in &trees {
            for b in &trees {
                assert_eq!(
                    a.cmp(b),
                    Forest::single(a.clone()).cmp(&Forest::single(b.clone()))
                );
            }
        }
    }
}
