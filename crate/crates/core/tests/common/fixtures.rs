//! Seeded random inputs for property and acceptance tests.

use nalgebra::DMatrix;
use qrerank_core::features::FeatureVector;
use qrerank_core::{Example, Gram, SyntaxTree, TreePair};
use rand::Rng;

const INNER: [&str; 4] = ["S", "NP", "VP", "REL-NP"];
const LEAVES: [&str; 4] = ["a", "b", "NP", "c"];

fn grow<R: Rng>(rng: &mut R, budget: &mut usize, depth: usize) -> SyntaxTree {
    *budget -= 1;
    if *budget == 0 || depth >= 4 || rng.random_bool(0.35) {
        return SyntaxTree::leaf(LEAVES[rng.random_range(0..LEAVES.len())]).unwrap();
    }
    let width = rng.random_range(1..=3);
    let mut children = Vec::new();
    while children.len() < width && *budget > 0 {
        children.push(grow(rng, budget, depth + 1));
    }
    SyntaxTree::node(INNER[rng.random_range(0..INNER.len())], children).unwrap()
}

/// Random tree with at most `max_nodes` nodes over a small label alphabet,
/// so independent draws share many fragments.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize) -> SyntaxTree {
    let mut budget = rng.random_range(1..=max_nodes);
    grow(rng, &mut budget, 0)
}

fn vector<R: Rng>(rng: &mut R, prefix: &str, dim: usize) -> FeatureVector {
    FeatureVector::new((0..dim).map(|i| (format!("{prefix}{i}"), rng.random::<f64>()))).unwrap()
}

/// Example with every block filled: 20 similarities in [0, 1], an inverse
/// rank, two random trees under a ROOT and a 4-dimensional dense block.
pub fn random_example<R: Rng>(rng: &mut R) -> Example {
    let rooted = |rng: &mut R| SyntaxTree::node("ROOT", vec![random_tree(rng, 12)]).unwrap();
    Example {
        sim: Some(vector(rng, "s", 20)),
        rank: Some(1.0 / rng.random_range(1..=10) as f64),
        trees: Some(TreePair { forward: rooted(rng), backward: rooted(rng) }),
        dense: Some(vector(rng, "d", 4)),
        label: Some(if rng.random_bool(0.5) { 1 } else { -1 }),
    }
}

pub fn to_matrix(g: &Gram) -> DMatrix<f64> {
    DMatrix::from_fn(g.len(), g.len(), |i, j| g.get(i, j))
}

/// Smallest eigenvalue of the symmetric part of `g`.
pub fn min_eigenvalue(g: &Gram) -> f64 {
    let m = to_matrix(g);
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.min()
}

/// Points in the plane labelled by the sign of `x + y - 0.5`, kept at least
/// `margin` away from that line.
pub fn separable_points<R: Rng>(rng: &mut R, n: usize, margin: f64) -> (Vec<[f64; 2]>, Vec<i8>) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    while xs.len() < n {
        let p: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let s = p[0] + p[1] - 0.5;
        if s.abs() >= margin {
            xs.push(p);
            ys.push(if s > 0.0 { 1 } else { -1 });
        }
    }
    (xs, ys)
}

/// Two overlapping Gaussian-like clouds.
pub fn overlapping_points<R: Rng>(rng: &mut R, n: usize) -> (Vec<[f64; 2]>, Vec<i8>) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..n {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        let c = 0.5 * f64::from(y);
        let noise = |rng: &mut R| (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.5;
        xs.push([c + noise(rng), c + noise(rng)]);
        ys.push(y);
    }
    (xs, ys)
}

pub fn linear_gram(xs: &[[f64; 2]]) -> Gram {
    Gram::symmetric_from_fn(xs.len(), "linear", |i, j| xs[i][0] * xs[j][0] + xs[i][1] * xs[j][1])
}

pub fn rbf_gram(xs: &[[f64; 2]], gamma: f64) -> Gram {
    Gram::symmetric_from_fn(xs.len(), "rbf", |i, j| {
        let d = (xs[i][0] - xs[j][0]).powi(2) + (xs[i][1] - xs[j][1]).powi(2);
        (-gamma * d).exp()
    })
}
