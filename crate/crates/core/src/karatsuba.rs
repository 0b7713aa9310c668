//! Recursive Karatsuba multiplication on power-of-two sizes; the base case
//! of the Toom-4 recursion and a standalone strategy.
//!
//! The split is into even low/high halves with three recursive products
//! f0*g0, f1*g1, (f0+f1)(g0+g1) recombined by overlap-add. On size d this
//! uses exactly 3^(log2 d) multiplications and 6*3^(log2 d) - 8d + 2
//! additions/subtractions (the level recurrence is A(d) = 3 A(d/2) + 4d - 4).

use crate::field::Field;
use crate::poly::Poly;
use crate::Error;

/// Exact product of two equal-length power-of-two polynomials, length
/// `2d - 1`. Inputs must be padded beforehand; size 1 falls through to a
/// single field multiplication.
pub fn mul<F: Field>(field: &F, f: &Poly, g: &Poly) -> Result<Poly, Error> {
    if f.ctx() != g.ctx() {
        return Err(Error::ModulusMismatch(f.q(), g.q()));
    }
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    if !f.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(f.len()));
    }
    Ok(Poly::from_raw(
        f.ctx(),
        mul_raw(field, f.coeffs(), g.coeffs()),
    ))
}

/// Exact multiplication count for size d: 3^(log2 d) = d^(log2 3).
pub fn mul_count(d: usize) -> u128 {
    assert!(d.is_power_of_two());
    3u128.pow(d.trailing_zeros())
}

/// Exact addition count of this implementation for size d.
pub fn add_count(d: usize) -> u128 {
    assert!(d.is_power_of_two());
    6 * 3u128.pow(d.trailing_zeros()) + 2 - 8 * d as u128
}

pub(crate) fn mul_raw<F: Field>(field: &F, a: &[u64], b: &[u64]) -> Vec<u64> {
    let d = a.len();
    debug_assert_eq!(d, b.len());
    debug_assert!(d.is_power_of_two());
    if d == 1 {
        return vec![field.mul(a[0], b[0])];
    }
    let h = d / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);

    let p0 = mul_raw(field, a0, b0);
    let p1 = mul_raw(field, a1, b1);
    let asum: Vec<u64> = a0.iter().zip(a1).map(|(&x, &y)| field.add(x, y)).collect();
    let bsum: Vec<u64> = b0.iter().zip(b1).map(|(&x, &y)| field.add(x, y)).collect();
    let mut mid = mul_raw(field, &asum, &bsum);
    for (m, &x) in mid.iter_mut().zip(&p0) {
        *m = field.sub(*m, x);
    }
    for (m, &x) in mid.iter_mut().zip(&p1) {
        *m = field.sub(*m, x);
    }

    // out = p0 + mid*x^h + p1*x^d; only adjacent blocks overlap.
    let mut out = vec![0u64; 2 * d - 1];
    out[..d - 1].copy_from_slice(&p0);
    for (j, &x) in mid.iter().enumerate() {
        let pos = h + j;
        if pos < d - 1 {
            out[pos] = field.add(out[pos], x);
        } else {
            out[pos] = x;
        }
    }
    for (j, &x) in p1.iter().enumerate() {
        let pos = d + j;
        if pos + 1 < d + h {
            out[pos] = field.add(out[pos], x);
        } else {
            out[pos] = x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::poly;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(q: u64) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    #[test]
    fn base_case_single_mul() {
        let c = ctx(3329);
        let p = mul(
            &c,
            &Poly::new(c, vec![7]).unwrap(),
            &Poly::new(c, vec![9]).unwrap(),
        )
        .unwrap();
        assert_eq!(p.coeffs(), &[63]);
    }

    #[test]
    fn size_two_example() {
        let c = ctx(5);
        let f = Poly::new(c, vec![1, 2]).unwrap();
        let g = Poly::new(c, vec![3, 4]).unwrap();
        // (1 + 2x)(3 + 4x) = 3 + 10x + 8x^2 = [3, 0, 3] mod 5.
        assert_eq!(mul(&c, &f, &g).unwrap().coeffs(), &[3, 0, 3]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = ctx(5);
        let f = Poly::new(c, vec![1, 2, 3]).unwrap();
        assert!(matches!(mul(&c, &f, &f), Err(Error::NotPowerOfTwo(3))));
        let g = Poly::new(c, vec![1, 2, 3, 4]).unwrap();
        assert!(matches!(mul(&c, &f, &g), Err(Error::LengthMismatch(3, 4))));
    }

    #[test]
    fn count_formulas() {
        assert_eq!(mul_count(1), 1);
        assert_eq!(mul_count(256), 6561);
        assert_eq!(mul_count(256), 256u128.pow(0) * 3u128.pow(8));
        assert_eq!(add_count(1), 0);
        assert_eq!(add_count(2), 4);
        // The implementation count stays below the d^(log2 3) estimate
        // 8(3^k - d) used by the cost model.
        for k in 0..=10u32 {
            let d = 1u128 << k;
            assert!(add_count(d as usize) <= 8 * (3u128.pow(k) - d));
        }
    }

    #[test]
    fn matches_schoolbook_up_to_512() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for log_d in 0..=9 {
            let d = 1usize << log_d;
            let f = Poly::random(c, d, &mut rng);
            let g = Poly::random(c, d, &mut rng);
            let fast = mul(&c, &f, &g).unwrap();
            let slow = poly::schoolbook_mul(&c, &f, &g).unwrap();
            assert_eq!(fast.coeffs(), slow.coeffs(), "d = {d}");
        }
    }

    proptest! {
        #[test]
        fn agrees_with_schoolbook(
            log_d in 0u32..6,
            seed in any::<u64>(),
        ) {
            let c = ctx(8380417);
            let d = 1usize << log_d;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Poly::random(c, d, &mut rng);
            let g = Poly::random(c, d, &mut rng);
            let fast = mul(&c, &f, &g).unwrap();
            let slow = poly::schoolbook_mul(&c, &f, &g).unwrap();
            prop_assert_eq!(fast.coeffs(), slow.coeffs());
        }
    }
}
