//! Random sufficient test instances: M(θ) = B₀ᵀB₀ + I + θ·B₁ᵀB₁ is positive
//! definite (hence sufficient) for every θ ≥ 0, which also makes the LCP
//! solvable for every right-hand side, so q(θ) can be drawn as arbitrary
//! affine entries without breaking feasibility anywhere on Θ = [0, 1].

use crate::parmat::{AffineScalar, ParamMatrix};
use crate::poly::Rational;
use crate::solver::UpLcpInstance;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_factor(rng: &mut ChaCha8Rng, h: usize, density: f64) -> Vec<Vec<i64>> {
    (0..h)
        .map(|_| {
            (0..h)
                .map(|_| {
                    if rng.gen_bool(density) {
                        loop {
                            let v = rng.gen_range(-3..=3i64);
                            if v != 0 {
                                break v;
                            }
                        }
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

fn gram(b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let h = b.len();
    let mut g = vec![vec![0i64; h]; h];
    for i in 0..h {
        for j in 0..h {
            g[i][j] = (0..h).map(|k| b[k][i] * b[k][j]).sum();
        }
    }
    g
}

/// Deterministic random sufficient instance on Θ = [0, 1].
///
/// `density` in (0, 1] controls how many entries of the factor matrices are
/// nonzero. The unit matrix added to the constant Gram block keeps M(θ)
/// positive definite for every θ ∈ [0, 1], so the instance is feasible at
/// every parameter value no matter how q is drawn.
pub fn generate_sufficient_instance(h: usize, density: f64, seed: u64) -> UpLcpInstance {
    assert!(h >= 1, "h must be at least 1");
    assert!(density > 0.0 && density <= 1.0, "density must be in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = gram(&random_factor(&mut rng, h, density));
    let g1 = gram(&random_factor(&mut rng, h, density));

    let m = ParamMatrix::from_fn(h, h, |r, c| {
        let constant = g0[r][c] + if r == c { 1 } else { 0 };
        AffineScalar::new(
            Rational::from_integer(BigInt::from(constant)),
            Rational::from_integer(BigInt::from(g1[r][c])),
        )
    });

    let q = ParamMatrix::from_fn(h, 1, |_, _| {
        AffineScalar::new(
            Rational::from_integer(BigInt::from(rng.gen_range(-5..=5i64))),
            Rational::from_integer(BigInt::from(rng.gen_range(-5..=5i64))),
        )
    });

    UpLcpInstance::new(m, q, Rational::zero(), Rational::from_integer(BigInt::from(1)))
        .expect("generated dimensions are consistent")
}
