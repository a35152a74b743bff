use postlie::freealg::{concat, deshuffle, rational, shuffle, truncate, Series};
use postlie::lbseries::{exp_gl, log_gl, random_lie_element};
use postlie::postlie::{gl_product, triangleright};
use postlie::ptrees::{enumerate_forests, enumerate_trees, parse_forest, render_forest, DegreeCap, Forest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forest(max: usize) -> impl Strategy<Value = Forest> {
    (0..=max).prop_flat_map(|d| {
        let all = enumerate_forests(d, DegreeCap::default()).unwrap();
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

fn series(max: usize) -> impl Strategy<Value = Series> {
    prop::collection::vec((forest(max), -3i64..=3), 0..4).prop_map(|terms| {
        let mut s = Series::zero();
        for (f, c) in terms {
            s.add_term(f, rational(c, 1));
        }
        s
    })
}

/// `⟨a ⧢ b, w⟩` computed as `Σ ⟨a, w₁⟩⟨b, w₂⟩` over the deshuffle of `w`.
fn shuffle_by_duality(a: &Series, b: &Series, w: &Forest) -> num_rational::BigRational {
    deshuffle(&Series::from_forest(w.clone()))
        .into_iter()
        .map(|(l, r, c)| c * a.coeff(&l) * b.coeff(&r))
        .sum()
}

proptest! {
    #[test]
    fn render_parse_roundtrip(f in forest(6)) {
        let text = render_forest(&f);
        prop_assert_eq!(parse_forest(&text).unwrap(), f);
        let loose = text.replace(' ', "  ");
        prop_assert_eq!(render_forest(&parse_forest(&loose).unwrap()), text);
    }

    #[test]
    fn concat_is_associative(a in series(2), b in series(2), c in series(2)) {
        prop_assert_eq!(concat(&concat(&a, &b), &c), concat(&a, &concat(&b, &c)));
    }

    #[test]
    fn shuffle_is_associative_and_commutative(a in series(2), b in series(2), c in series(2)) {
        prop_assert_eq!(shuffle(&shuffle(&a, &b), &c), shuffle(&a, &shuffle(&b, &c)));
        prop_assert_eq!(shuffle(&a, &b), shuffle(&b, &a));
    }

    #[test]
    fn shuffle_is_dual_to_deshuffle(a in series(3), b in series(3)) {
        let ab = shuffle(&a, &b);
        for (w, c) in ab.iter() {
            prop_assert_eq!(c.clone(), shuffle_by_duality(&a, &b, w));
        }
    }

    #[test]
    fn deshuffle_is_coassociative_and_cocommutative(w in forest(5)) {
        let pairs = deshuffle(&Series::from_forest(w.clone()));
        let flipped: std::collections::BTreeMap<_, _> =
            pairs.iter().map(|(l, r, c)| ((r.clone(), l.clone()), c.clone())).collect();
        let straight: std::collections::BTreeMap<_, _> =
            pairs.iter().map(|(l, r, c)| ((l.clone(), r.clone()), c.clone())).collect();
        prop_assert_eq!(straight, flipped);

        let mut left = std::collections::BTreeMap::new();
        let mut right = std::collections::BTreeMap::new();
        for (l, r, c) in &pairs {
            for (ll, lr, c2) in deshuffle(&Series::from_forest(l.clone())) {
                *left.entry((ll, lr, r.clone())).or_insert_with(|| rational(0, 1)) += c * &c2;
            }
            for (rl, rr, c2) in deshuffle(&Series::from_forest(r.clone())) {
                *right.entry((l.clone(), rl, rr)).or_insert_with(|| rational(0, 1)) += c * &c2;
            }
        }
        prop_assert_eq!(left, right);
    }

    #[test]
    fn gl_product_is_associative(a in series(2), b in series(2), c in series(2)) {
        prop_assert_eq!(gl_product(&gl_product(&a, &b), &c), gl_product(&a, &gl_product(&b, &c)));
    }

    #[test]
    fn gl_acts_by_composition(a in series(2), b in series(2), z in forest(2)) {
        let z = Series::from_forest(z);
        prop_assert_eq!(triangleright(&gl_product(&a, &b), &z), triangleright(&a, &triangleright(&b, &z)));
    }

    #[test]
    fn log_inverts_exp_gl(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_lie_element(&mut rng, 4);
        let e = exp_gl(&a, 4).unwrap();
        prop_assert_eq!(log_gl(&e).unwrap(), truncate(&a, 4));
    }
}

fn catalan(n: usize) -> usize {
    (0..n).fold(1, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

/// Trees of degree `n` built directly: a root over every ordered forest of degree `n - 1`.
fn brute_trees(n: usize) -> Vec<String> {
    fn forests(n: usize) -> Vec<String> {
        if n == 0 {
            return vec![String::new()];
        }
        let mut out = Vec::new();
        for first in 1..=n {
            for t in brute_trees(first) {
                for rest in forests(n - first) {
                    out.push(if rest.is_empty() { t.clone() } else { format!("{t} {rest}") });
                }
            }
        }
        out
    }
    forests(n - 1).into_iter().map(|f| format!("[{f}]")).collect()
}

#[test]
fn tree_counts_are_catalan() {
    for n in 1..=7 {
        let trees = enumerate_trees(n, DegreeCap::default()).unwrap();
        assert_eq!(trees.len(), catalan(n - 1), "degree {n}");
        let mut listed: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
        let mut brute = brute_trees(n);
        listed.sort();
        brute.sort();
        assert_eq!(listed, brute, "degree {n}");
    }
}

#[test]
fn forest_count_matches_tree_count_one_up() {
    for n in 0..=6 {
        let forests = enumerate_forests(n, DegreeCap::default()).unwrap();
        let trees = enumerate_trees(n + 1, DegreeCap::default()).unwrap();
        assert_eq!(forests.len(), trees.len(), "degree {n}");
    }
}

#[test]
fn enumeration_is_sorted_and_distinct() {
    for n in 1..=6 {
        let trees = enumerate_trees(n, DegreeCap::default()).unwrap();
        assert!(trees.windows(2).all(|w| w[0] < w[1]), "degree {n}");
    }
}
