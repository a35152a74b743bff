//! Sparse graded linear combinations of ordered forests over the rationals.
//!
//! A [`Series`] carries its truncation degree as data. Binary operations take
//! the smaller truncation of their operands and drop every term above it, so a
//! coefficient that was never computed can not be mistaken for zero.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ptrees::{parse_forest, render_forest, Forest, Tree};

pub type Coeff = BigRational;

pub fn rational(numer: i64, denom: i64) -> Coeff {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

/// `p/q` with `q > 0`, always including the denominator.
pub fn format_coeff(c: &Coeff) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

pub fn parse_coeff(s: &str) -> Result<Coeff> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| Error::Json(format!("bad coefficient {s:?}: {e}")))
}

/// Smaller of two truncations, `None` meaning unbounded.
pub fn min_trunc(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn within(trunc: Option<usize>, degree: usize) -> bool {
    trunc.is_none_or(|t| degree <= t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    terms: BTreeMap<Forest, Coeff>,
    trunc: Option<usize>,
}

impl Default for Series {
    fn default() -> Self {
        Series::zero()
    }
}

impl Series {
    /// The zero element with unbounded truncation.
    pub fn zero() -> Self {
        Series {
            terms: BTreeMap::new(),
            trunc: None,
        }
    }

    pub fn zero_truncated(trunc: Option<usize>) -> Self {
        Series {
            terms: BTreeMap::new(),
            trunc,
        }
    }

    /// The empty forest `1`.
    pub fn unit() -> Self {
        Series::from_forest(Forest::empty())
    }

    pub fn from_forest(forest: Forest) -> Self {
        Series::term(Coeff::one(), forest)
    }

    pub fn from_tree(tree: Tree) -> Self {
        Series::from_forest(Forest::single(tree))
    }

    /// The single-vertex tree `[]`, standing for the generator.
    pub fn leaf() -> Self {
        Series::from_tree(Tree::leaf())
    }

    pub fn term(coeff: Coeff, forest: Forest) -> Self {
        let mut s = Series::zero();
        s.add_term(forest, coeff);
        s
    }

    /// Parses a single forest in the bracket grammar.
    pub fn parse_forest(text: &str) -> Result<Self> {
        parse_forest(text).map(Series::from_forest)
    }

    pub fn from_terms<I>(terms: I, trunc: Option<usize>) -> Self
    where
        I: IntoIterator<Item = (Forest, Coeff)>,
    {
        let mut s = Series::zero_truncated(trunc);
        for (forest, coeff) in terms {
            s.add_term(forest, coeff);
        }
        s
    }

    pub fn trunc(&self) -> Option<usize> {
        self.trunc
    }

    /// Accumulates `coeff * forest`, ignoring forests above the truncation.
    pub fn add_term(&mut self, forest: Forest, coeff: Coeff) {
        if coeff.is_zero() || !within(self.trunc, forest.degree()) {
            return;
        }
        match self.terms.entry(forest) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `scale * other` in place. The truncation becomes the smaller one.
    pub fn add_scaled(&mut self, other: &Series, scale: &Coeff) {
        self.restrict(other.trunc);
        if scale.is_zero() {
            return;
        }
        for (forest, coeff) in &other.terms {
            self.add_term(forest.clone(), coeff * scale);
        }
    }

    fn restrict(&mut self, trunc: Option<usize>) {
        let t = min_trunc(self.trunc, trunc);
        if t != self.trunc {
            self.trunc = t;
            if let Some(limit) = t {
                self.terms.retain(|f, _| f.degree() <= limit);
            }
        }
    }

    /// Coefficient of `forest`, zero when absent. Does not check truncation;
    /// see [`Series::pairing`].
    pub fn coeff(&self, forest: &Forest) -> Coeff {
        self.terms.get(forest).cloned().unwrap_or_else(Coeff::zero)
    }

    /// The pairing `<self, forest>` for which ordered forests are orthonormal.
    pub fn pairing(&self, forest: &Forest) -> Result<Coeff> {
        match self.trunc {
            Some(t) if forest.degree() > t => Err(Error::Truncation {
                needed: forest.degree(),
                trunc: t,
            }),
            _ => Ok(self.coeff(forest)),
        }
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Forest::empty())
    }

    /// Degree-`k` homogeneous part; keeps the truncation.
    pub fn component(&self, k: usize) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.degree() == k)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
            trunc: self.trunc,
        }
    }

    /// Same terms with unbounded truncation; meaningful for finite elements.
    pub fn untruncated(mut self) -> Series {
        self.trunc = None;
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, &Coeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(Forest::degree).max()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().next().map(Forest::degree)
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        let mut out = Series::zero_truncated(self.trunc);
        if !c.is_zero() {
            for (f, x) in &self.terms {
                out.terms.insert(f.clone(), x * c);
            }
        }
        out
    }

    /// Multiplies the degree-`k` component by `h^k`.
    pub fn scale_by_degree(&self, h: &Coeff) -> Series {
        Series::from_terms(
            self.terms
                .iter()
                .map(|(f, c)| (f.clone(), c * num_traits::pow(h.clone(), f.degree()))),
            self.trunc,
        )
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(f, c)| TermJson {
                    forest: render_forest(f),
                    coeff: format_coeff(c),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<Series> {
        let mut s = Series::zero_truncated(json.trunc);
        for term in &json.terms {
            let forest = parse_forest(&term.forest)?;
            if let Some(t) = json.trunc {
                if forest.degree() > t {
                    return Err(Error::Json(format!(
                        "term {} exceeds truncation {t}",
                        term.forest
                    )));
                }
            }
            s.add_term(forest, parse_coeff(&term.coeff)?);
        }
        Ok(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("series JSON is always serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Series> {
        let json: SeriesJson =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Series::from_json(&json)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub forest: String,
    pub coeff: String,
}

/// Wire form of a [`Series`]: terms in canonical forest order, coefficients as
/// reduced `p/q` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub trunc: Option<usize>,
    pub terms: Vec<TermJson>,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (forest, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (i, sign) {
                (0, "+") => {}
                (0, _) => f.write_str("-")?,
                _ => write!(f, " {sign} ")?,
            }
            let mag = c.abs();
            let body = if forest.len() > 1 {
                format!("({forest})")
            } else {
                forest.to_string()
            };
            if mag.is_one() {
                f.write_str(&body)?;
            } else {
                write!(f, "{mag}*{body}")?;
            }
        }
        if let Some(t) = self.trunc {
            write!(f, " + O({})", t + 1)?;
        }
        Ok(())
    }
}

impl AddAssign<&Series> for Series {
    fn add_assign(&mut self, rhs: &Series) {
        self.add_scaled(rhs, &Coeff::one());
    }
}

impl SubAssign<&Series> for Series {
    fn sub_assign(&mut self, rhs: &Series) {
        self.add_scaled(rhs, &-Coeff::one());
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Series {
    type Output = Series;
    fn add(mut self, rhs: Series) -> Series {
        self += &rhs;
        self
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(mut self, rhs: Series) -> Series {
        self -= &rhs;
        self
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(&-Coeff::one())
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

impl Mul<&Coeff> for &Series {
    type Output = Series;
    fn mul(self, rhs: &Coeff) -> Series {
        self.scale(rhs)
    }
}

/// Bilinear extension of a forest-level product with additive degrees.
fn bilinear<F>(a: &Series, b: &Series, mut product: F) -> Series
where
    F: FnMut(&Forest, &Forest, &Coeff, &mut Series),
{
    let trunc = min_trunc(a.trunc, b.trunc);
    let mut out = Series::zero_truncated(trunc);
    for (fa, ca) in &a.terms {
        for (fb, cb) in &b.terms {
            if !within(trunc, fa.degree() + fb.degree()) {
                continue;
            }
            product(fa, fb, &(ca * cb), &mut out);
        }
    }
    out
}

/// Concatenation product: juxtaposition of forests.
pub fn concat(a: &Series, b: &Series) -> Series {
    bilinear(a, b, |fa, fb, c, out| out.add_term(fa.concat(fb), c.clone()))
}

/// All order-preserving interleavings of two words, with multiplicity.
pub fn shuffle_forests(a: &Forest, b: &Forest) -> Vec<Forest> {
    fn go(a: &[Tree], b: &[Tree], prefix: &mut Vec<Tree>, out: &mut Vec<Forest>) {
        match (a.split_first(), b.split_first()) {
            (None, _) | (_, None) => {
                let mut word = prefix.clone();
                word.extend_from_slice(a);
                word.extend_from_slice(b);
                out.push(Forest::from_trees(word));
            }
            (Some((x, a_rest)), Some((y, b_rest))) => {
                prefix.push(x.clone());
                go(a_rest, b, prefix, out);
                prefix.pop();
                prefix.push(y.clone());
                go(a, b_rest, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(a.trees(), b.trees(), &mut Vec::new(), &mut out);
    out
}

/// Shuffle product, each tree acting as a letter.
pub fn shuffle(a: &Series, b: &Series) -> Series {
    bilinear(a, b, |fa, fb, c, out| {
        for w in shuffle_forests(fa, fb) {
            out.add_term(w, c.clone());
        }
    })
}

/// Every splitting of a word into a subword and its complementary subword,
/// one entry per subset of positions.
pub fn deshuffle_forest(forest: &Forest) -> Vec<(Forest, Forest)> {
    let trees = forest.trees();
    let k = trees.len();
    assert!(k < usize::BITS as usize, "forest too long to deshuffle");
    (0..1usize << k)
        .map(|mask| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (i, t) in trees.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    left.push(t.clone());
                } else {
                    right.push(t.clone());
                }
            }
            (Forest::from_trees(left), Forest::from_trees(right))
        })
        .collect()
}

/// Linear extension of [`deshuffle_forest`], with equal pairs merged.
pub fn deshuffle(a: &Series) -> Vec<(Forest, Forest, Coeff)> {
    let mut acc: BTreeMap<(Forest, Forest), Coeff> = BTreeMap::new();
    for (forest, c) in &a.terms {
        for pair in deshuffle_forest(forest) {
            *acc.entry(pair).or_insert_with(Coeff::zero) += c;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((l, r), c)| (l, r, c))
        .collect()
}

/// Drops all terms above degree `n` and records `n` as the truncation.
pub fn truncate(a: &Series, n: usize) -> Series {
    let mut out = a.clone();
    out.restrict(Some(n));
    out
}
