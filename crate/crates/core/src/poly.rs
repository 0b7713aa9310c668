//! Dense polynomials over F_q, schoolbook multiplication (the correctness
//! oracle for every faster method), and reduction modulo binomials x^d - w.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::{Field, FieldCtx};
use crate::Error;

/// Dense coefficient vector over F_q; index i holds the coefficient of x^i.
/// The stored length is the declared size and may include trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ctx: FieldCtx,
    coeffs: Vec<u64>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Poly(q={}, {:?})", self.ctx.q(), self.coeffs)
    }
}

impl Poly {
    /// Wraps validated coefficients; every entry must lie in `[0, q - 1]`
    /// and the vector must be nonempty.
    pub fn new(ctx: FieldCtx, coeffs: Vec<u64>) -> Result<Self, Error> {
        if coeffs.is_empty() {
            return Err(Error::Encoding("empty coefficient vector".into()));
        }
        if let Some(&value) = coeffs.iter().find(|&&c| c >= ctx.q()) {
            return Err(Error::CoefficientOutOfRange { value, q: ctx.q() });
        }
        Ok(Self { ctx, coeffs })
    }

    pub(crate) fn from_raw(ctx: FieldCtx, coeffs: Vec<u64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        debug_assert!(coeffs.iter().all(|&c| c < ctx.q()));
        Self { ctx, coeffs }
    }

    pub fn zeros(ctx: FieldCtx, len: usize) -> Self {
        assert!(len >= 1);
        Self {
            ctx,
            coeffs: vec![0; len],
        }
    }

    /// The constant polynomial 1 padded to `len`.
    pub fn one(ctx: FieldCtx, len: usize) -> Self {
        let mut p = Self::zeros(ctx, len);
        p.coeffs[0] = 1 % ctx.q();
        p
    }

    pub fn random<R: Rng + ?Sized>(ctx: FieldCtx, len: usize, rng: &mut R) -> Self {
        assert!(len >= 1);
        let coeffs = (0..len).map(|_| rng.gen_range(0..ctx.q())).collect();
        Self { ctx, coeffs }
    }

    #[inline]
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Never true: construction requires at least one coefficient.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    /// Largest index with a nonzero coefficient; `None` for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Zero-pads to `len` (no-op when already at least that long).
    pub fn padded(&self, len: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < len {
            coeffs.resize(len, 0);
        }
        Self {
            ctx: self.ctx,
            coeffs,
        }
    }

    /// Structural equality up to trailing zeros.
    pub fn same_polynomial(&self, other: &Poly) -> bool {
        if self.ctx != other.ctx {
            return false;
        }
        let n = self.len().max(other.len());
        (0..n).all(|i| {
            self.coeffs.get(i).copied().unwrap_or(0) == other.coeffs.get(i).copied().unwrap_or(0)
        })
    }
}

fn check_same_ctx(f: &Poly, g: &Poly) -> Result<FieldCtx, Error> {
    if f.ctx != g.ctx {
        return Err(Error::ModulusMismatch(f.q(), g.q()));
    }
    Ok(f.ctx)
}

/// Coefficient-wise sum with length `max(len f, len g)`. Each position
/// where both operands contribute costs one A; the tail is copied.
pub fn add<F: Field>(field: &F, f: &Poly, g: &Poly) -> Result<Poly, Error> {
    let ctx = check_same_ctx(f, g)?;
    let n = f.len().max(g.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = match (f.coeffs.get(i), g.coeffs.get(i)) {
            (Some(&a), Some(&b)) => field.add(a, b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        out.push(c);
    }
    Ok(Poly::from_raw(ctx, out))
}

/// Coefficient-wise difference with length `max(len f, len g)`.
pub fn sub<F: Field>(field: &F, f: &Poly, g: &Poly) -> Result<Poly, Error> {
    let ctx = check_same_ctx(f, g)?;
    let n = f.len().max(g.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = match (f.coeffs.get(i), g.coeffs.get(i)) {
            (Some(&a), Some(&b)) => field.sub(a, b),
            (Some(&a), None) => a,
            (None, Some(&b)) => field.sub(0, b),
            (None, None) => unreachable!(),
        };
        out.push(c);
    }
    Ok(Poly::from_raw(ctx, out))
}

/// Plain convolution; the oracle against which the fast methods are
/// checked. Uses exactly `len(f) * len(g)` multiplications and
/// `(len(f) - 1) * (len(g) - 1)` additions, independent of the values.
pub fn schoolbook_mul<F: Field>(field: &F, f: &Poly, g: &Poly) -> Result<Poly, Error> {
    let ctx = check_same_ctx(f, g)?;
    Ok(Poly::from_raw(
        ctx,
        schoolbook_raw(field, &f.coeffs, &g.coeffs),
    ))
}

pub(crate) fn schoolbook_raw<F: Field>(field: &F, a: &[u64], b: &[u64]) -> Vec<u64> {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![0u64; da + db - 1];
    for i in 0..da {
        for j in 0..db {
            let p = field.mul(a[i], b[j]);
            // (i, j) is the first pair writing position i + j exactly when
            // i == 0 or j == db - 1, so zero-initialization is never added
            // into and the add count is (da - 1)(db - 1).
            if i == 0 || j == db - 1 {
                out[i + j] = p;
            } else {
                out[i + j] = field.add(out[i + j], p);
            }
        }
    }
    out
}

/// Remainder of `c` modulo x^d - omega in a single folding pass:
/// coefficient i >= d folds into position i - d with weight omega.
/// Costs (len - d) M + (len - d) A, with no multiplications when
/// omega = +-1.
pub fn reduce_binomial<F: Field>(field: &F, c: &Poly, d: usize, omega: u64) -> Result<Poly, Error> {
    assert!(d >= 1);
    let len = c.len();
    if len > 2 * d - 1 {
        return Err(Error::ReductionTooLong { len, d });
    }
    debug_assert_eq!(c.q(), field.q());
    Ok(Poly::from_raw(
        c.ctx,
        reduce_binomial_raw(field, &c.coeffs, d, omega),
    ))
}

pub(crate) fn reduce_binomial_raw<F: Field>(
    field: &F,
    c: &[u64],
    d: usize,
    omega: u64,
) -> Vec<u64> {
    debug_assert!(c.len() < 2 * d);
    let q = field.q();
    let mut out = c[..c.len().min(d)].to_vec();
    out.resize(d, 0);
    for i in d..c.len() {
        if omega == 1 {
            out[i - d] = field.add(out[i - d], c[i]);
        } else if omega == q - 1 {
            out[i - d] = field.sub(out[i - d], c[i]);
        } else {
            out[i - d] = field.add(out[i - d], field.mul(c[i], omega));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical text form
// ---------------------------------------------------------------------------

/// Wire form of a polynomial file: UTF-8 JSON with an integer modulus,
/// an optional ring size, and coefficients lowest-degree first.
#[derive(Serialize, Deserialize)]
struct PolyEncoding {
    q: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    coeffs: Vec<u64>,
}

impl Poly {
    /// Parses the canonical JSON form, validating the modulus (odd prime)
    /// and the coefficient range. When `n` is present the coefficients are
    /// zero-padded to length `n`; more than `n` coefficients is an error.
    pub fn from_json(s: &str) -> Result<(Poly, Option<usize>), Error> {
        let enc: PolyEncoding =
            serde_json::from_str(s).map_err(|e| Error::Encoding(e.to_string()))?;
        let ctx = FieldCtx::new(enc.q)?;
        if let Some(n) = enc.n {
            if enc.coeffs.len() > n {
                return Err(Error::Encoding(format!(
                    "{} coefficients exceed the declared ring size {n}",
                    enc.coeffs.len()
                )));
            }
        }
        let poly = Poly::new(ctx, enc.coeffs)?;
        Ok(match enc.n {
            Some(n) => (poly.padded(n), Some(n)),
            None => (poly, None),
        })
    }

    /// Canonical JSON form; inverse of [`Poly::from_json`].
    pub fn to_json(&self, n: Option<usize>) -> String {
        let enc = PolyEncoding {
            q: self.q(),
            n,
            coeffs: self.coeffs.clone(),
        };
        serde_json::to_string(&enc).expect("polynomial encoding cannot fail")
    }
}
