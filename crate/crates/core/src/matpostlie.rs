//! Post-Lie structure on square matrices from a splitting `gl_n = g₋ ⊕ g₊`
//! into two subalgebras: `M ▷ N = -[π₋ M, N]` with the matrix commutator as
//! bracket.
//!
//! * `Lu`: `π₋` keeps the strictly lower-triangular part.
//! * `Qr`: `π₋ M = L - Lᵀ` with `L` the strictly lower part, i.e. the projection
//!   onto skew-symmetric matrices along upper-triangular ones.
//!
//! Also hosts the elementary differential map from the free post-Lie algebra,
//! which sends `[]` to a chosen matrix.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freealg::Series;
use crate::lbseries::inf_character_defect;
use crate::postlie::graft_trees;
use crate::ptrees::Tree;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// A square real matrix of size at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElement(DMatrix<f64>);

impl MatrixElement {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::Dimension(format!(
                "expected a square matrix of size >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(MatrixElement(m))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        MatrixElement::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Result<Self> {
        MatrixElement::new(DMatrix::identity(n, n))
    }

    /// Entries uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        MatrixElement(DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProjectionKind {
    #[serde(rename = "LU")]
    Lu,
    #[serde(rename = "QR")]
    Qr,
}

impl ProjectionKind {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionKind::Lu => "LU",
            ProjectionKind::Qr => "QR",
        }
    }
}

impl std::str::FromStr for ProjectionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lu" => Ok(ProjectionKind::Lu),
            "qr" => Ok(ProjectionKind::Qr),
            other => Err(format!("unknown projection kind {other:?}")),
        }
    }
}

fn strictly_lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i > j { m[(i, j)] } else { 0.0 })
}

fn minus_raw(kind: ProjectionKind, m: &DMatrix<f64>) -> DMatrix<f64> {
    let lower = strictly_lower(m);
    match kind {
        ProjectionKind::Lu => lower,
        ProjectionKind::Qr => {
            let t = lower.transpose();
            lower - t
        }
    }
}

pub fn project_minus(kind: ProjectionKind, m: &MatrixElement) -> MatrixElement {
    MatrixElement(minus_raw(kind, &m.0))
}

/// `π₊ = id - π₋`.
pub fn project_plus(kind: ProjectionKind, m: &MatrixElement) -> MatrixElement {
    MatrixElement(&m.0 - minus_raw(kind, &m.0))
}

fn comm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

fn same_dim(a: &MatrixElement, b: &MatrixElement) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

pub fn commutator(a: &MatrixElement, b: &MatrixElement) -> Result<MatrixElement> {
    same_dim(a, b)?;
    Ok(MatrixElement(comm(&a.0, &b.0)))
}

/// `M ▷ N = -[π₋ M, N]`.
pub fn mat_triangleright(
    kind: ProjectionKind,
    m: &MatrixElement,
    n: &MatrixElement,
) -> Result<MatrixElement> {
    same_dim(m, n)?;
    Ok(MatrixElement(-comm(&minus_raw(kind, &m.0), &n.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub n: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            n: 4,
            samples: 100,
            tol: 1e-10,
            seed: DEFAULT_SEED,
        }
    }
}

impl CheckConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("matrix size must be >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// `max_residual` is the largest entry of a residual divided by
/// `1 + max |input entry|` of its sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixReport {
    pub check: String,
    pub kind: ProjectionKind,
    pub n: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub pass: bool,
    pub seed: u64,
}

fn scaled(residual: &DMatrix<f64>, inputs: &[&DMatrix<f64>]) -> f64 {
    let scale = inputs.iter().map(|m| m.amax()).fold(0.0, f64::max);
    residual.amax() / (1.0 + scale)
}

fn report(check: &str, kind: ProjectionKind, cfg: &CheckConfig, max_residual: f64) -> MatrixReport {
    MatrixReport {
        check: check.to_string(),
        kind,
        n: cfg.n,
        samples: cfg.samples,
        max_residual,
        pass: max_residual <= cfg.tol,
        seed: cfg.seed,
    }
}

fn random_raw(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    MatrixElement::random(rng, n).0
}

/// `[πM, πN] + π[M, N] - π([πM, N] + [M, πN])` for an arbitrary linear map.
pub fn projection_identity_residual<P>(proj: P, m: &DMatrix<f64>, n: &DMatrix<f64>) -> DMatrix<f64>
where
    P: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let (pm, pn) = (proj(m), proj(n));
    comm(&pm, &pn) + proj(&comm(m, n)) - proj(&(comm(&pm, n) + comm(m, &pn)))
}

/// Checks the projection identity for both `π₊` and `π₋` on random pairs.
pub fn check_projection_identity(kind: ProjectionKind, cfg: &CheckConfig) -> Result<MatrixReport> {
    check_projection_identity_with(kind, cfg, |m| minus_raw(kind, m))
}

/// As [`check_projection_identity`] with a caller-supplied `π₋`.
pub fn check_projection_identity_with<P>(
    kind: ProjectionKind,
    cfg: &CheckConfig,
    minus: P,
) -> Result<MatrixReport>
where
    P: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples {
        let m = random_raw(&mut rng, cfg.n);
        let n = random_raw(&mut rng, cfg.n);
        let r_minus = projection_identity_residual(&minus, &m, &n);
        let r_plus = projection_identity_residual(|x: &DMatrix<f64>| x - minus(x), &m, &n);
        worst = worst
            .max(scaled(&r_minus, &[&m, &n]))
            .max(scaled(&r_plus, &[&m, &n]));
    }
    Ok(report("projection-identity", kind, cfg, worst))
}

/// Residuals of the two post-Lie relations and of the Jacobi identity for
/// `⟦x,y⟧ = x▷y - y▷x + [x,y]`, one report each.
pub fn check_matrix_postlie_axioms(kind: ProjectionKind, cfg: &CheckConfig) -> Result<Vec<MatrixReport>> {
    check_matrix_postlie_axioms_with(kind, cfg, |a, b| -comm(&minus_raw(kind, a), b))
}

/// As [`check_matrix_postlie_axioms`] with a caller-supplied product.
pub fn check_matrix_postlie_axioms_with<T>(
    kind: ProjectionKind,
    cfg: &CheckConfig,
    tri: T,
) -> Result<Vec<MatrixReport>>
where
    T: Fn(&DMatrix<f64>, &DMatrix<f64>) -> DMatrix<f64>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let assoc = |x: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>| {
        tri(x, &tri(y, z)) - tri(&tri(x, y), z)
    };
    let dbr = |x: &DMatrix<f64>, y: &DMatrix<f64>| tri(x, y) - tri(y, x) + comm(x, y);
    let mut worst = [0.0f64; 3];
    for _ in 0..cfg.samples {
        let x = random_raw(&mut rng, cfg.n);
        let y = random_raw(&mut rng, cfg.n);
        let z = random_raw(&mut rng, cfg.n);
        let inputs = [&x, &y, &z];

        let eq1 = tri(&x, &comm(&y, &z)) - comm(&tri(&x, &y), &z) - comm(&y, &tri(&x, &z));
        let eq2 = tri(&comm(&x, &y), &z) - assoc(&x, &y, &z) + assoc(&y, &x, &z);
        let jacobi = dbr(&x, &dbr(&y, &z)) + dbr(&y, &dbr(&z, &x)) + dbr(&z, &dbr(&x, &y));

        for (w, r) in worst.iter_mut().zip([eq1, eq2, jacobi]) {
            *w = w.max(scaled(&r, &inputs));
        }
    }
    Ok(vec![
        report("postlie-derivation", kind, cfg, worst[0]),
        report("postlie-flatness", kind, cfg, worst[1]),
        report("jacobi-dbracket", kind, cfg, worst[2]),
    ])
}

/// Elementary differential map: the post-Lie morphism from the free algebra
/// with `[] ↦ m0`, evaluated on a Lie element.
///
/// Trees are evaluated by peeling the leftmost branch `c` of `τ = [c c₂ … c_k]`:
/// `F(τ) = F(c) ▷ F([c₂ … c_k]) - Σ F(τ′)` over the other trees of
/// `c ▷ [c₂ … c_k]`, all of root arity `k - 1`. A forest maps to the matrix
/// product of its trees, which on Lie elements reproduces the commutators.
pub struct ElementaryDifferential {
    kind: ProjectionKind,
    m0: DMatrix<f64>,
    memo: HashMap<Tree, DMatrix<f64>>,
}

impl ElementaryDifferential {
    pub fn new(kind: ProjectionKind, m0: &MatrixElement) -> Self {
        ElementaryDifferential {
            kind,
            m0: m0.0.clone(),
            memo: HashMap::new(),
        }
    }

    pub fn tree(&mut self, tree: &Tree) -> DMatrix<f64> {
        if let Some(m) = self.memo.get(tree) {
            return m.clone();
        }
        let value = match tree.children().split_first() {
            None => self.m0.clone(),
            Some((first, rest)) => {
                let rest = Tree::from_children(rest.to_vec());
                let lhs = self.tree(first);
                let rhs = self.tree(&rest);
                let mut v = -comm(&minus_raw(self.kind, &lhs), &rhs);
                for other in graft_trees(first, &rest) {
                    if &other != tree {
                        v -= self.tree(&other);
                    }
                }
                v
            }
        };
        self.memo.insert(tree.clone(), value.clone());
        value
    }

    pub fn eval(&mut self, a: &Series) -> Result<MatrixElement> {
        if let Some(d) = inf_character_defect(a) {
            return Err(Error::NotLieElement(format!(
                "<a, {} ⧢ {}> = {} is nonzero",
                d.left, d.right, d.lhs
            )));
        }
        let n = self.m0.nrows();
        let mut out = DMatrix::zeros(n, n);
        for (forest, c) in a.iter() {
            let mut prod = DMatrix::identity(n, n);
            for t in forest.trees() {
                prod *= self.tree(t);
            }
            let c = c.to_f64().expect("rational coefficient converts to f64");
            out += prod * c;
        }
        Ok(MatrixElement(out))
    }
}

pub fn eval_f(kind: ProjectionKind, m0: &MatrixElement, a: &Series) -> Result<MatrixElement> {
    ElementaryDifferential::new(kind, m0).eval(a)
}

/// `max |a - b| / max(1, max |b|)`.
pub fn relative_difference(a: &MatrixElement, b: &MatrixElement) -> f64 {
    (&a.0 - &b.0).amax() / b.0.amax().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postlie::{bracket, triangleright};
    use crate::ptrees::{trees_up_to, DegreeCap};

    fn s(text: &str) -> Series {
        Series::parse_forest(text).unwrap()
    }

    #[test]
    fn rejects_non_square_and_tiny() {
        assert!(MatrixElement::new(DMatrix::zeros(2, 3)).is_err());
        assert!(MatrixElement::new(DMatrix::zeros(1, 1)).is_err());
        assert!(MatrixElement::from_row_slice(2, &[1.0; 3]).is_err());
    }

    #[test]
    fn projection_examples() {
        let id = MatrixElement::identity(3).unwrap();
        assert_eq!(project_minus(ProjectionKind::Lu, &id).max_abs(), 0.0);

        let skew = MatrixElement::from_row_slice(3, &[0.0, 1.0, -2.0, -1.0, 0.0, 3.0, 2.0, -3.0, 0.0]).unwrap();
        assert_eq!(project_minus(ProjectionKind::Qr, &skew), skew);

        let ones = MatrixElement::from_row_slice(3, &[1.0; 9]).unwrap();
        let expect = MatrixElement::from_row_slice(3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(project_minus(ProjectionKind::Lu, &ones), expect);
    }

    #[test]
    fn projections_are_idempotent_and_complementary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [ProjectionKind::Lu, ProjectionKind::Qr] {
            for n in 2..=6 {
                let m = MatrixElement::random(&mut rng, n);
                let minus = project_minus(kind, &m);
                let plus = project_plus(kind, &m);
                assert_eq!(project_minus(kind, &minus), minus);
                assert_eq!(project_plus(kind, &plus), plus);
                let sum = &minus.0 + &plus.0;
                match kind {
                    ProjectionKind::Lu => assert_eq!(sum, m.0),
                    // (a + b) - b rounds; equal to the last bit only
                    ProjectionKind::Qr => assert!((sum - &m.0).amax() <= 4.0 * f64::EPSILON),
                }
            }
        }
    }

    #[test]
    fn triangleright_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let upper = MatrixElement::new(MatrixElement::random(&mut rng, 4).0.upper_triangle()).unwrap();
        let n = MatrixElement::random(&mut rng, 4);
        assert_eq!(mat_triangleright(ProjectionKind::Lu, &upper, &n).unwrap().max_abs(), 0.0);

        let m = MatrixElement::random(&mut rng, 4);
        assert!(mat_triangleright(ProjectionKind::Lu, &m, &m).unwrap().max_abs() > 0.0);

        // elementwise oracle for -[π₋M, N]
        for kind in [ProjectionKind::Lu, ProjectionKind::Qr] {
            let got = mat_triangleright(kind, &m, &n).unwrap();
            let p = project_minus(kind, &m).0;
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = 0.0;
                    for k in 0..4 {
                        v -= p[(i, k)] * n.0[(k, j)] - n.0[(i, k)] * p[(k, j)];
                    }
                    assert!((got.0[(i, j)] - v).abs() < 1e-14);
                }
            }
        }
        assert!(mat_triangleright(ProjectionKind::Lu, &m, &MatrixElement::identity(3).unwrap()).is_err());
    }

    #[test]
    fn identity_checks_pass_and_controls_fail() {
        for kind in [ProjectionKind::Lu, ProjectionKind::Qr] {
            let cfg = CheckConfig { n: 5, ..CheckConfig::default() };
            assert!(check_projection_identity(kind, &cfg).unwrap().pass);
            for r in check_matrix_postlie_axioms(kind, &cfg).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
        let cfg = CheckConfig::default();
        let sym = check_projection_identity_with(ProjectionKind::Lu, &cfg, |m| (m + m.transpose()) * 0.5).unwrap();
        assert!(!sym.pass);
        let wrong_sign = check_matrix_postlie_axioms_with(ProjectionKind::Lu, &cfg, |a, b| {
            comm(&minus_raw(ProjectionKind::Lu, a), b)
        })
        .unwrap();
        assert!(wrong_sign[0].pass);
        assert!(!wrong_sign[1].pass);
        assert!(check_projection_identity(ProjectionKind::Lu, &CheckConfig { tol: 0.0, ..cfg }).is_err());
    }

    #[test]
    fn eval_f_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m0 = MatrixElement::random(&mut rng, 4);
        for kind in [ProjectionKind::Lu, ProjectionKind::Qr] {
            assert_eq!(eval_f(kind, &m0, &s("[]")).unwrap(), m0);
            let ff = mat_triangleright(kind, &m0, &m0).unwrap();
            assert!(relative_difference(&eval_f(kind, &m0, &s("[[]]")).unwrap(), &ff) < 1e-14);
            let br = bracket(&s("[[]]"), &s("[]"));
            let want = commutator(&ff, &m0).unwrap();
            assert!(relative_difference(&eval_f(kind, &m0, &br).unwrap(), &want) < 1e-14);
            assert!(matches!(eval_f(kind, &m0, &s("[] []")), Err(Error::NotLieElement(_))));
            assert!(eval_f(kind, &m0, &Series::unit()).is_err());
        }
    }

    #[test]
    fn morphism_on_small_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m0 = MatrixElement::random(&mut rng, 4);
        let trees = trees_up_to(3, DegreeCap::default()).unwrap();
        for kind in [ProjectionKind::Lu, ProjectionKind::Qr] {
            let mut f = ElementaryDifferential::new(kind, &m0);
            for a in &trees {
                for b in &trees {
                    if a.degree() + b.degree() > 4 {
                        continue;
                    }
                    let (sa, sb) = (Series::from_tree(a.clone()), Series::from_tree(b.clone()));
                    let fa = f.eval(&sa).unwrap();
                    let fb = f.eval(&sb).unwrap();
                    let lhs = f.eval(&triangleright(&sa, &sb)).unwrap();
                    let rhs = mat_triangleright(kind, &fa, &fb).unwrap();
                    assert!(relative_difference(&lhs, &rhs) < 1e-9, "{a} ▷ {b}");
                }
            }
        }
    }
}
