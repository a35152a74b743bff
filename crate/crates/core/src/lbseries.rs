//! Truncated Lie–Butcher series: characters, the concatenation and
//! Grossman–Larson exponentials, the post-Lie Magnus expansion, and the
//! characters of the Lie–Euler and Lie midpoint methods.
//!
//! The step size is not a separate symbol. With a single generator the
//! degree of a forest equals its power of `h`, so `h·[]` is written `[]`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freealg::{concat, deshuffle, format_coeff, integer, rational, truncate, Coeff, Series};
use crate::postlie::{bracket, gl_product, triangleright};
use crate::ptrees::{enumerate_trees, DegreeCap, Forest};

/// A pair `(ω, ω′)` where the character property fails:
/// `<a, ω ⧢ ω′>` is `lhs` but should be `rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleDefect {
    pub left: Forest,
    pub right: Forest,
    pub lhs: Coeff,
    pub rhs: Coeff,
}

/// `<a, ω ⧢ ω′>` for every pair with a nonzero value, read off the deshuffle
/// coproduct of `a`.
fn shuffle_pairings(a: &Series) -> BTreeMap<(Forest, Forest), Coeff> {
    deshuffle(a)
        .into_iter()
        .map(|(l, r, c)| ((l, r), c))
        .collect()
}

/// First pair of non-empty forests on which `a` fails to vanish, or a
/// nonzero constant term.
pub fn inf_character_defect(a: &Series) -> Option<ShuffleDefect> {
    let unit = a.constant_term();
    if !unit.is_zero() {
        return Some(ShuffleDefect {
            left: Forest::empty(),
            right: Forest::empty(),
            lhs: unit,
            rhs: Coeff::zero(),
        });
    }
    shuffle_pairings(a)
        .into_iter()
        .find(|((l, r), _)| !l.is_empty() && !r.is_empty())
        .map(|((left, right), lhs)| ShuffleDefect {
            left,
            right,
            lhs,
            rhs: Coeff::zero(),
        })
}

/// Vanishes on the unit and on every shuffle of non-empty forests.
pub fn is_inf_character(a: &Series) -> bool {
    inf_character_defect(a).is_none()
}

/// First pair on which multiplicativity `<a, ω ⧢ ω′> = <a,ω><a,ω′>` fails.
pub fn character_defect(a: &Series) -> Option<ShuffleDefect> {
    let pairings = shuffle_pairings(a);
    for ((l, r), lhs) in &pairings {
        let rhs = a.coeff(l) * a.coeff(r);
        if *lhs != rhs {
            return Some(ShuffleDefect {
                left: l.clone(),
                right: r.clone(),
                lhs: lhs.clone(),
                rhs,
            });
        }
    }
    // Pairs with a vanishing shuffle pairing but nonzero product.
    let trunc = a.trunc();
    for (l, cl) in a.iter() {
        for (r, cr) in a.iter() {
            if trunc.is_some_and(|t| l.degree() + r.degree() > t) {
                continue;
            }
            if !pairings.contains_key(&(l.clone(), r.clone())) {
                return Some(ShuffleDefect {
                    left: l.clone(),
                    right: r.clone(),
                    lhs: Coeff::zero(),
                    rhs: cl * cr,
                });
            }
        }
    }
    None
}

/// Multiplicative on shuffles for all pairs within the truncation.
pub fn is_character(a: &Series) -> bool {
    character_defect(a).is_none()
}

fn describe(d: &ShuffleDefect) -> String {
    format!(
        "<a, {} ⧢ {}> = {} but expected {}",
        d.left,
        d.right,
        format_coeff(&d.lhs),
        format_coeff(&d.rhs)
    )
}

/// An infinitesimal character: a truncated series representing a vector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSeries(Series);

impl FieldSeries {
    pub fn new(series: Series) -> Result<Self> {
        match inf_character_defect(&series) {
            None => Ok(FieldSeries(series)),
            Some(d) => Err(Error::NotInfCharacter(describe(&d))),
        }
    }

    /// Skips the shuffle check; the caller vouches for the property.
    pub fn new_unchecked(series: Series) -> Self {
        FieldSeries(series)
    }

    pub fn series(&self) -> &Series {
        &self.0
    }

    pub fn into_series(self) -> Series {
        self.0
    }

    pub fn trunc(&self) -> Option<usize> {
        self.0.trunc()
    }
}

/// A character: a truncated series representing a flow or a numerical method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodCharacter(Series);

impl MethodCharacter {
    pub fn new(series: Series) -> Result<Self> {
        let unit = series.constant_term();
        if !unit.is_one() {
            return Err(Error::ConstantTerm {
                expected: "1/1".into(),
                found: format_coeff(&unit),
            });
        }
        match character_defect(&series) {
            None => Ok(MethodCharacter(series)),
            Some(d) => Err(Error::NotCharacter(describe(&d))),
        }
    }

    /// Skips the shuffle check; the caller vouches for the property.
    pub fn new_unchecked(series: Series) -> Self {
        MethodCharacter(series)
    }

    pub fn series(&self) -> &Series {
        &self.0
    }

    pub fn into_series(self) -> Series {
        self.0
    }

    pub fn trunc(&self) -> Option<usize> {
        self.0.trunc()
    }
}

impl AsRef<Series> for FieldSeries {
    fn as_ref(&self) -> &Series {
        &self.0
    }
}

impl AsRef<Series> for MethodCharacter {
    fn as_ref(&self) -> &Series {
        &self.0
    }
}

impl AsRef<Series> for Series {
    fn as_ref(&self) -> &Series {
        self
    }
}

fn require_constant(a: &Series, expected: i64) -> Result<()> {
    let c = a.constant_term();
    if c != integer(expected) {
        return Err(Error::ConstantTerm {
            expected: format_coeff(&integer(expected)),
            found: format_coeff(&c),
        });
    }
    Ok(())
}

fn exp_with<P>(a: &Series, n: usize, product: P) -> Result<Series>
where
    P: Fn(&Series, &Series) -> Series,
{
    require_constant(a, 0)?;
    let a = truncate(a, n);
    let mut term = truncate(&Series::unit(), n);
    let mut sum = term.clone();
    for k in 1..=n {
        term = product(&term, &a).scale(&rational(1, k as i64));
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    Ok(sum)
}

/// `Σ_{k≤n} a^{·k}/k!`, truncated at `n`.
pub fn exp_concat(a: &Series, n: usize) -> Result<Series> {
    exp_with(a, n, concat)
}

/// `Σ_{k≤n} a^{∗k}/k!`, truncated at `n`.
pub fn exp_gl(a: &Series, n: usize) -> Result<Series> {
    exp_with(a, n, gl_product)
}

/// `Σ_{k≥1} (-1)^{k+1} (c - 1)^{∗k}/k`, inverse of [`exp_gl`] up to the
/// truncation of `c`.
pub fn log_gl(c: &Series) -> Result<Series> {
    require_constant(c, 1)?;
    let n = c.trunc().ok_or(Error::Unbounded("log_gl"))?;
    let x = c - &Series::unit();
    let mut power = x.clone();
    let mut sum = Series::zero_truncated(Some(n));
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        sum.add_scaled(&power, &rational(sign, k as i64));
        power = gl_product(&power, &x);
        if power.is_zero() {
            break;
        }
    }
    Ok(sum)
}

/// Post-Lie Magnus expansion: the field `χ(a)` with `exp^·(a) = exp^∗(χ(a))`.
pub fn magnus_chi(a: &Series, n: usize) -> Result<Series> {
    log_gl(&exp_concat(a, n)?)
}

fn generator(n: usize) -> Series {
    truncate(&Series::leaf(), n)
}

/// The exact flow of the generator field, `exp^∗(h·[])`.
pub fn exact_flow_character(n: usize) -> MethodCharacter {
    MethodCharacter::new_unchecked(exp_gl(&generator(n), n).expect("generator has no constant term"))
}

/// Lie–Euler: `exp^·(h·[])`.
pub fn lie_euler_character(n: usize) -> MethodCharacter {
    MethodCharacter::new_unchecked(
        exp_concat(&generator(n), n).expect("generator has no constant term"),
    )
}

/// The stage `K = exp^·(K/2) ▷ (h·[])` of the Lie midpoint rule, by graded
/// fixed-point iteration from zero. Iteration `m` fixes degrees up to `m`.
pub fn lie_midpoint_stage(n: usize) -> Series {
    let h = generator(n);
    let half = rational(1, 2);
    let mut k = Series::zero_truncated(Some(n));
    for _ in 0..n {
        let e = exp_concat(&k.scale(&half), n).expect("stage has no constant term");
        k = triangleright(&e, &h);
    }
    k
}

/// Lie midpoint: `Φ = exp^·(K)`.
pub fn lie_midpoint_character(n: usize) -> MethodCharacter {
    MethodCharacter::new_unchecked(
        exp_concat(&lie_midpoint_stage(n), n).expect("stage has no constant term"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LieEuler,
    LieMidpoint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LieEuler => "lie-euler",
            Method::LieMidpoint => "lie-midpoint",
        }
    }

    pub fn character(self, n: usize) -> MethodCharacter {
        match self {
            Method::LieEuler => lie_euler_character(n),
            Method::LieMidpoint => lie_midpoint_character(n),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lie-euler" => Ok(Method::LieEuler),
            "lie-midpoint" => Ok(Method::LieMidpoint),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub forest: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub method: String,
    pub order: usize,
    pub first_defect: Option<Defect>,
}

fn agreement(a: &Series, b: &Series) -> Result<(usize, Option<Defect>)> {
    if a.trunc() != b.trunc() {
        return Err(Error::TruncMismatch {
            left: a.trunc(),
            right: b.trunc(),
        });
    }
    let trunc = a.trunc().ok_or(Error::Unbounded("order_of_agreement"))?;
    let diff = a - b;
    // Terms are stored in canonical order, so the first one is of least degree.
    let first = diff.iter().next();
    Ok(match first {
        None => (trunc, None),
        Some((forest, _)) => (
            forest.degree().saturating_sub(1),
            Some(Defect {
                forest: forest.to_string(),
                lhs: format_coeff(&a.coeff(forest)),
                rhs: format_coeff(&b.coeff(forest)),
            }),
        ),
    })
}

/// Largest `p` such that `a` and `b` agree on every forest of degree `≤ p`.
pub fn order_of_agreement(a: &impl AsRef<Series>, b: &impl AsRef<Series>) -> Result<usize> {
    agreement(a.as_ref(), b.as_ref()).map(|(p, _)| p)
}

/// Order of a method's character against the exact flow `exp^∗(h·[])`.
pub fn order_report(method: Method, n: usize) -> Result<OrderReport> {
    let (order, first_defect) = agreement(
        method.character(n).series(),
        exact_flow_character(n).series(),
    )?;
    Ok(OrderReport {
        method: method.name().to_string(),
        order,
        first_defect,
    })
}

/// A random Lie element of degree `1..=n`, truncated at `n`: small rational
/// multiples of trees, brackets of two trees and nested brackets of three.
pub fn random_lie_element<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Series {
    let cap = DegreeCap(n.max(1));
    let coeff = |rng: &mut R| {
        let p: i64 = rng.gen_range(-4..=4);
        let q: i64 = rng.gen_range(1..=3);
        rational(p, q)
    };
    let random_tree = |rng: &mut R, d: usize| {
        let trees = enumerate_trees(d, cap).expect("degree within cap");
        Series::from_tree(trees[rng.gen_range(0..trees.len())].clone())
    };
    let mut out = Series::zero_truncated(Some(n));
    for d in 1..=n {
        out.add_scaled(&random_tree(rng, d), &coeff(rng));
        if d >= 2 {
            let i = rng.gen_range(1..d);
            let b = bracket(&random_tree(rng, i), &random_tree(rng, d - i));
            out.add_scaled(&b, &coeff(rng));
        }
        if d >= 3 {
            let i = rng.gen_range(1..d - 1);
            let j = rng.gen_range(1..d - i);
            let inner = bracket(&random_tree(rng, j), &random_tree(rng, d - i - j));
            let b = bracket(&random_tree(rng, i), &inner);
            out.add_scaled(&b, &coeff(rng));
        }
    }
    out
}
