//! Prime-field arithmetic for F_q with an interception seam for operation
//! counting, plus 2-adic valuations and root-of-unity discovery.
//!
//! Residues are plain `u64` values in `[0, q - 1]`. All reductions go
//! through the free functions below so that the counted and uncounted
//! paths share one arithmetic implementation.

use crate::Error;

/// Moduli are capped below 2^62 so that sums fit in `u64` and products in
/// `u128` without overflow.
pub const MAX_MODULUS_BITS: u32 = 62;

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The fixed witness set is exact for every
/// `u64`, which covers the 2^62 modulus bound with room to spare.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest v with 2^v dividing `m`.
///
/// # Panics
/// Panics on `m = 0`, which has no finite valuation.
pub fn two_adic_valuation(m: u64) -> u32 {
    assert!(m != 0, "2-adic valuation of zero is undefined");
    m.trailing_zeros()
}

/// An odd prime modulus q. Copyable and immutable; safe to share freely.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FieldCtx {
    q: u64,
}

impl FieldCtx {
    /// Builds a context, rejecting non-primes, even numbers, and moduli at
    /// or above 2^62.
    pub fn new(q: u64) -> Result<Self, Error> {
        if q >> MAX_MODULUS_BITS != 0 {
            return Err(Error::ModulusTooLarge(q));
        }
        if q < 3 || q.is_multiple_of(2) || !is_prime_u64(q) {
            return Err(Error::NotOddPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }
}

/// Arithmetic in F_q with tally hooks.
///
/// `FieldCtx` implements this with no-op hooks; the counting wrapper in
/// [`crate::opcounter`] overrides them. Algorithms take `&impl Field` so a
/// single schedule of operations serves both the audited and the plain
/// execution paths.
pub trait Field {
    /// The plain context, used for precomputing constants that must not
    /// show up in operation tallies.
    fn ctx(&self) -> FieldCtx;

    #[inline]
    fn q(&self) -> u64 {
        self.ctx().q()
    }

    #[inline]
    fn note_add(&self) {}

    #[inline]
    fn note_mul(&self) {}

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        self.note_add();
        add_mod(a, b, self.q())
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        self.note_add();
        sub_mod(a, b, self.q())
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.note_mul();
        mul_mod(a, b, self.q())
    }

    /// Negation; not an A/M unit, so it is never tallied.
    #[inline]
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q() - a
        }
    }

    /// Square-and-multiply. Constituent multiplications go through
    /// [`Field::mul`], so they are tallied on counting contexts.
    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn inv(&self, a: u64) -> Result<u64, Error> {
        if a == 0 {
            return Err(Error::ZeroInverse(self.q()));
        }
        Ok(self.pow(a, self.q() - 2))
    }
}

impl Field for FieldCtx {
    #[inline]
    fn ctx(&self) -> FieldCtx {
        *self
    }
}

/// Maximal admissible incomplete-NTT depth: min(v2(q-1) - 1, log2 n).
///
/// # Panics
/// Panics if `n` is not a power of two.
pub fn max_ntt_depth(ctx: FieldCtx, n: usize) -> u32 {
    assert!(n.is_power_of_two(), "ring size must be a power of two");
    let v = two_adic_valuation(ctx.q() - 1);
    (v - 1).min(n.trailing_zeros())
}

/// Deterministic primitive root of unity of the given 2-power order.
///
/// Finds the smallest quadratic non-residue g >= 2 and returns
/// g^((q-1)/order). The result z satisfies z^(order/2) = -1, hence has
/// exact order `order`.
pub fn primitive_root_of_unity(ctx: FieldCtx, order: u64) -> Result<u64, Error> {
    let q = ctx.q();
    assert!(
        order >= 2 && order.is_power_of_two(),
        "root order must be a power of two >= 2"
    );
    if !(q - 1).is_multiple_of(order) {
        return Err(Error::RootOrderUnavailable { q, order });
    }
    let half = (q - 1) / 2;
    let mut g = 2u64;
    while ctx.pow(g, half) != q - 1 {
        g += 1;
        debug_assert!(g < q, "no quadratic non-residue found; q is not prime");
    }
    let zeta = ctx.pow(g, (q - 1) / order);
    debug_assert_eq!(ctx.pow(zeta, order / 2), q - 1);
    Ok(zeta)
}
