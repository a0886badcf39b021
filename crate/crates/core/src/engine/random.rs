use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::Expr;

/// A reference-free program with `depth() <= max_depth` and
/// `future_nesting() <= max_future_nesting`, fixed by `seed`.
pub fn gen_random_program(seed: u64, max_depth: usize, max_future_nesting: usize) -> Expr {
    assert!(max_depth >= 1, "programs have depth at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(&mut rng, max_depth, max_future_nesting)
}

fn grow(rng: &mut ChaCha8Rng, depth: usize, futures: usize) -> Expr {
    if depth <= 1 {
        return Expr::Int(rng.random_range(-9..=20));
    }
    match rng.random_range(0..10) {
        0..=2 => Expr::Int(rng.random_range(-9..=20)),
        3..=6 => Expr::add(grow(rng, depth - 1, futures), grow(rng, depth - 1, futures)),
        _ if futures > 0 => Expr::future(grow(rng, depth - 1, futures - 1)),
        _ => Expr::add(grow(rng, depth - 1, futures), grow(rng, depth - 1, futures)),
    }
}
