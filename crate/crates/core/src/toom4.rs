//! Toom-4 multiplication with scaled interpolation: quarter splitting, a
//! fixed 13-step evaluation schedule at the points {0, +-1, +-2, 3, inf},
//! interpolation through addition chains that produce 120-times-scaled
//! coefficients, overlap-add recomposition, and uniform-depth recursion
//! with a single deferred rescale by 120^(-L).
//!
//! Per level the schedule costs exactly 38(d/4) additions for both
//! evaluations, 58 + 28 = 86 block additions/subtractions on the
//! length-(d/2 - 1) products for the chains and the coefficient recovery,
//! and 6(d/4 - 1) overlap additions in recomposition: 54d - 92 field
//! additions in total, with no multiplications outside the recursive
//! products.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::addchain::toom4_chains;
use crate::field::Field;
use crate::karatsuba;
use crate::poly::Poly;
use crate::Error;

/// All interpolation denominators divide 120, so scaled coefficients carry
/// one factor of 120 per recursion level.
pub const SCALE: u64 = 120;

/// The seven evaluation points in interpolation-column order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EvalPoint {
    Zero,
    One,
    NegOne,
    Two,
    NegTwo,
    Three,
    Infinity,
}

impl EvalPoint {
    pub const ALL: [EvalPoint; 7] = [
        EvalPoint::Zero,
        EvalPoint::One,
        EvalPoint::NegOne,
        EvalPoint::Two,
        EvalPoint::NegTwo,
        EvalPoint::Three,
        EvalPoint::Infinity,
    ];
}

impl std::fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EvalPoint::Zero => "0",
            EvalPoint::One => "1",
            EvalPoint::NegOne => "-1",
            EvalPoint::Two => "2",
            EvalPoint::NegTwo => "-2",
            EvalPoint::Three => "3",
            EvalPoint::Infinity => "inf",
        };
        f.write_str(s)
    }
}

/// 120 times the inverse of the evaluation matrix. Row i recovers the
/// scaled coefficient 120*h_i; columns follow [`EvalPoint::ALL`].
const INTERP_MATRIX: [[i64; 7]; 7] = [
    [120, 0, 0, 0, 0, 0, 0],
    [-40, 120, -60, -30, 6, 4, -1440],
    [-150, 80, 80, -5, -5, 0, 480],
    [50, -70, -5, 35, -5, -5, 1800],
    [30, -20, -20, 5, 5, 0, -600],
    [-10, 10, 5, -5, -1, 1, -360],
    [0, 0, 0, 0, 0, 0, 120],
];

pub fn interpolation_matrix() -> &'static [[i64; 7]; 7] {
    &INTERP_MATRIX
}

/// Maximum uniform recursion depth on size `d`: every level must split
/// into quarters, so depth L needs 4^L | d.
///
/// # Panics
/// Panics if `d` is not a power of two.
pub fn max_levels(d: usize) -> u32 {
    assert!(d.is_power_of_two(), "Toom-4 sizes must be powers of two");
    d.trailing_zeros() / 2
}

/// The interpolation scalars invert 120 = 2^3 * 3 * 5, so the field
/// characteristic must avoid 2, 3, and 5.
pub(crate) fn require_coprime_to_30(q: u64) -> Result<(), Error> {
    if q.is_multiple_of(3) || q.is_multiple_of(5) || q.is_multiple_of(2) {
        return Err(Error::SmallCharacteristic(q));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Interpolation plan: chain programs plus recovery schedules, fixed once
// ---------------------------------------------------------------------------

struct ChainProgram {
    /// For each element after the leading 1, the two earlier positions
    /// whose ladder entries sum to it.
    steps: Vec<(usize, usize)>,
    /// Ladder position of every multiple the recovery step reads.
    index: BTreeMap<u64, usize>,
}

struct RecoveryRow {
    /// Positive first term; the accumulator starts as a copy of it.
    start: (usize, u64),
    /// Remaining terms in column order: (column, multiple, added?).
    rest: Vec<(usize, u64, bool)>,
}

struct InterpPlan {
    programs: [ChainProgram; 7],
    rows: [RecoveryRow; 5],
}

/// Integer sanity check run once at startup: the stored matrix times the
/// evaluation-point Vandermonde matrix must be 120 times the identity.
fn verify_interpolation_matrix() {
    let mut vand = [[0i128; 7]; 7];
    for (r, alpha) in [0i128, 1, -1, 2, -2, 3].iter().enumerate() {
        let mut power = 1i128;
        for cell in vand[r].iter_mut() {
            *cell = power;
            power *= alpha;
        }
    }
    vand[6][6] = 1;
    for (i, row) in INTERP_MATRIX.iter().enumerate() {
        for k in 0..7 {
            let s: i128 = row
                .iter()
                .zip(&vand)
                .map(|(&entry, vrow)| entry as i128 * vrow[k])
                .sum();
            let expect = if i == k { 120 } else { 0 };
            assert_eq!(s, expect, "interpolation matrix check failed at ({i}, {k})");
        }
    }
}

fn interp_plan() -> &'static InterpPlan {
    static PLAN: OnceLock<InterpPlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        verify_interpolation_matrix();
        let chains = toom4_chains();
        let programs: [ChainProgram; 7] = std::array::from_fn(|c| {
            let labeled = &chains[c];
            assert_eq!(labeled.point, EvalPoint::ALL[c]);
            let steps = labeled
                .chain
                .decompose()
                .expect("stored interpolation chain must validate");
            // Multiples needed from this column: matrix entries plus the
            // scale factor for the two trivial rows.
            let mut needed: Vec<u64> = (0..7)
                .filter_map(|r| {
                    let e = INTERP_MATRIX[r][c];
                    (e != 0).then_some(e.unsigned_abs())
                })
                .collect();
            needed.sort_unstable();
            needed.dedup();
            let elements = labeled.chain.elements();
            let index: BTreeMap<u64, usize> = needed
                .iter()
                .map(|&v| {
                    let pos = elements
                        .iter()
                        .position(|&e| e == v)
                        .expect("chain misses a required multiple");
                    (v, pos)
                })
                .collect();
            // The chain targets are exactly the nontrivial multiples.
            let nontrivial: Vec<u64> = needed.iter().copied().filter(|&v| v != 1).collect();
            let targets: Vec<u64> = labeled.chain.targets().iter().copied().collect();
            assert_eq!(targets, nontrivial, "chain targets for column {c}");
            ChainProgram { steps, index }
        });

        let rows: [RecoveryRow; 5] = std::array::from_fn(|k| {
            let row = &INTERP_MATRIX[k + 1];
            let terms: Vec<(usize, u64, bool)> = row
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(c, &e)| (c, e.unsigned_abs(), e > 0))
                .collect();
            let start_at = terms
                .iter()
                .position(|&(_, _, positive)| positive)
                .expect("every recovery row has a positive entry");
            let start = (terms[start_at].0, terms[start_at].1);
            let rest = terms
                .into_iter()
                .enumerate()
                .filter(|&(i, _)| i != start_at)
                .map(|(_, t)| t)
                .collect();
            RecoveryRow { start, rest }
        });

        InterpPlan { programs, rows }
    })
}

// ---------------------------------------------------------------------------
// Raw block kernels
// ---------------------------------------------------------------------------

/// Evaluations at [0, 1, -1, 2, -2, 3, inf] via the fixed schedule:
/// exactly 19 block additions/subtractions per operand, doublings counted
/// as additions.
fn eval_raw<F: Field>(field: &F, b: [&[u64]; 4]) -> [Vec<u64>; 7] {
    let add = |x: &[u64], y: &[u64]| -> Vec<u64> {
        x.iter().zip(y).map(|(&u, &v)| field.add(u, v)).collect()
    };
    let sub = |x: &[u64], y: &[u64]| -> Vec<u64> {
        x.iter().zip(y).map(|(&u, &v)| field.sub(u, v)).collect()
    };

    let even = add(b[0], b[2]);
    let odd = add(b[1], b[3]);
    let at_one = add(&even, &odd);
    let at_neg_one = sub(&even, &odd);
    let high2 = add(b[3], b[3]);
    let high3 = add(&high2, b[3]);
    let lift_pos = add(&at_one, &high3); // f0 + f1 + f2 + 4 f3
    let lift_neg = sub(&at_neg_one, &high3); // f0 - f1 + f2 - 4 f3
    let mid_pos = add(&lift_pos, b[2]);
    let mid_neg = add(&lift_neg, b[2]);
    let dbl_pos = add(&mid_pos, &mid_pos);
    let dbl_neg = add(&mid_neg, &mid_neg);
    let at_two = sub(&dbl_pos, b[0]);
    let at_neg_two = sub(&dbl_neg, b[0]);
    let high6 = add(&high3, &high3);
    let tail = sub(&at_two, b[0]); // 2 f1 + 4 f2 + 8 f3
    let tail_lift = add(&tail, &high6); // 2 f1 + 4 f2 + 14 f3
    let tail_dbl = add(&tail_lift, &tail_lift);
    let at_three = add(&tail_dbl, &at_neg_one);

    [
        b[0].to_vec(),
        at_one,
        at_neg_one,
        at_two,
        at_neg_two,
        at_three,
        b[3].to_vec(),
    ]
}

/// Scaled interpolation: seven equal-length products in, the blocks
/// 120*h_0 .. 120*h_6 out. All scalar multiples come from the addition
/// chains (58 block additions); the middle five coefficients then take
/// 6 + 5 + 6 + 5 + 6 = 28 block additions/subtractions.
fn interpolate_raw<F: Field>(field: &F, products: &[Vec<u64>; 7]) -> [Vec<u64>; 7] {
    let plan = interp_plan();
    let len = products[0].len();
    debug_assert!(products.iter().all(|p| p.len() == len));

    let ladders: Vec<Vec<Vec<u64>>> = plan
        .programs
        .iter()
        .zip(products)
        .map(|(prog, product)| {
            let mut ladder: Vec<Vec<u64>> = Vec::with_capacity(prog.steps.len() + 1);
            ladder.push(product.clone());
            for &(i, j) in &prog.steps {
                let next: Vec<u64> = ladder[i]
                    .iter()
                    .zip(&ladder[j])
                    .map(|(&x, &y)| field.add(x, y))
                    .collect();
                ladder.push(next);
            }
            ladder
        })
        .collect();
    let multiple = |column: usize, value: u64| -> &Vec<u64> {
        &ladders[column][plan.programs[column].index[&value]]
    };

    let mut out: [Vec<u64>; 7] = Default::default();
    out[0] = multiple(0, SCALE).clone();
    out[6] = multiple(6, SCALE).clone();
    for (k, row) in plan.rows.iter().enumerate() {
        let mut acc = multiple(row.start.0, row.start.1).clone();
        for &(column, value, added) in &row.rest {
            let term = multiple(column, value);
            for (a, &t) in acc.iter_mut().zip(term) {
                *a = if added {
                    field.add(*a, t)
                } else {
                    field.sub(*a, t)
                };
            }
        }
        out[k + 1] = acc;
    }
    out
}

/// Overlap-add of the seven blocks at stride d/4. Blocks have length
/// 2(d/4) - 1, so only adjacent blocks overlap: six overlap regions of
/// d/4 - 1 additions each.
fn recompose_raw<F: Field>(field: &F, blocks: &[Vec<u64>; 7], quarter: usize) -> Vec<u64> {
    let block_len = 2 * quarter - 1;
    debug_assert!(blocks.iter().all(|b| b.len() == block_len));
    let mut out = vec![0u64; 8 * quarter - 1];
    out[..block_len].copy_from_slice(&blocks[0]);
    for (i, block) in blocks.iter().enumerate().skip(1) {
        let offset = i * quarter;
        let overlap = quarter - 1;
        for (j, &c) in block[..overlap].iter().enumerate() {
            out[offset + j] = field.add(out[offset + j], c);
        }
        out[offset + overlap..offset + block_len].copy_from_slice(&block[overlap..]);
    }
    out
}

pub(crate) fn mul_scaled_raw<F: Field>(field: &F, f: &[u64], g: &[u64], levels: u32) -> Vec<u64> {
    if levels == 0 {
        return karatsuba::mul_raw(field, f, g);
    }
    let quarter = f.len() / 4;
    let fb: [&[u64]; 4] = std::array::from_fn(|i| &f[i * quarter..(i + 1) * quarter]);
    let gb: [&[u64]; 4] = std::array::from_fn(|i| &g[i * quarter..(i + 1) * quarter]);
    let fe = eval_raw(field, fb);
    let ge = eval_raw(field, gb);
    let products: [Vec<u64>; 7] =
        std::array::from_fn(|k| mul_scaled_raw(field, &fe[k], &ge[k], levels - 1));
    let scaled = interpolate_raw(field, &products);
    recompose_raw(field, &scaled, quarter)
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Splits a polynomial of 4-divisible length into its four quarter blocks,
/// low block first.
///
/// # Panics
/// Panics when the length is not divisible by four; zero-pad at the
/// pipeline entry instead.
pub fn split(f: &Poly) -> [Poly; 4] {
    let d = f.len();
    assert!(
        d.is_multiple_of(4),
        "Toom-4 split needs a 4-divisible length"
    );
    let quarter = d / 4;
    std::array::from_fn(|i| {
        Poly::from_raw(f.ctx(), f.coeffs()[i * quarter..(i + 1) * quarter].to_vec())
    })
}

/// Runs the evaluation schedule on four equal-length blocks; returns the
/// evaluations in [`EvalPoint::ALL`] order.
pub fn evaluate<F: Field>(field: &F, blocks: &[Poly; 4]) -> Result<[Poly; 7], Error> {
    let len = blocks[0].len();
    for b in blocks {
        if b.len() != len {
            return Err(Error::LengthMismatch(len, b.len()));
        }
        if b.ctx() != blocks[0].ctx() {
            return Err(Error::ModulusMismatch(blocks[0].q(), b.q()));
        }
    }
    let ctx = blocks[0].ctx();
    let raw = eval_raw(field, std::array::from_fn(|i| blocks[i].coeffs()));
    Ok(raw.map(|c| Poly::from_raw(ctx, c)))
}

/// Interpolates the seven equal-length products into the scaled
/// coefficients 120*h_0 .. 120*h_6.
pub fn interpolate_scaled<F: Field>(field: &F, products: &[Poly; 7]) -> Result<[Poly; 7], Error> {
    let len = products[0].len();
    for p in products {
        if p.len() != len {
            return Err(Error::LengthMismatch(len, p.len()));
        }
    }
    let ctx = products[0].ctx();
    let raw: [Vec<u64>; 7] = std::array::from_fn(|i| products[i].coeffs().to_vec());
    Ok(interpolate_raw(field, &raw).map(|c| Poly::from_raw(ctx, c)))
}

/// Recomposes seven blocks of length 2(d/4) - 1 into the length-(2d - 1)
/// result at stride d/4.
pub fn recompose<F: Field>(field: &F, blocks: &[Poly; 7], d: usize) -> Result<Poly, Error> {
    assert!(d.is_multiple_of(4));
    let quarter = d / 4;
    for b in blocks {
        if b.len() != 2 * quarter - 1 {
            return Err(Error::LengthMismatch(2 * quarter - 1, b.len()));
        }
    }
    let ctx = blocks[0].ctx();
    let raw: [Vec<u64>; 7] = std::array::from_fn(|i| blocks[i].coeffs().to_vec());
    Ok(Poly::from_raw(ctx, recompose_raw(field, &raw, quarter)))
}

fn check_mul_inputs(f: &Poly, g: &Poly, levels: u32) -> Result<(), Error> {
    if f.ctx() != g.ctx() {
        return Err(Error::ModulusMismatch(f.q(), g.q()));
    }
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    let d = f.len();
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    let max = max_levels(d);
    if levels > max {
        return Err(Error::ToomDepthTooLarge { d, levels, max });
    }
    if levels > 0 {
        require_coprime_to_30(f.q())?;
    }
    Ok(())
}

/// The product scaled by 120^levels, via `levels` uniform Toom-4 levels
/// over a Karatsuba base case. Depth 0 is exactly Karatsuba. No field
/// multiplications occur outside the recursive products.
pub fn mul_scaled<F: Field>(field: &F, f: &Poly, g: &Poly, levels: u32) -> Result<Poly, Error> {
    check_mul_inputs(f, g, levels)?;
    Ok(Poly::from_raw(
        f.ctx(),
        mul_scaled_raw(field, f.coeffs(), g.coeffs(), levels),
    ))
}

/// Multiplies every coefficient by 120^(-levels): the single deferred
/// rescale, costing one multiplication per coefficient (2d - 1 for a full
/// product). Depth 0 is the identity and costs nothing.
pub fn rescale<F: Field>(field: &F, p: &Poly, levels: u32) -> Result<Poly, Error> {
    if levels == 0 {
        return Ok(p.clone());
    }
    let ctx = field.ctx();
    require_coprime_to_30(ctx.q())?;
    let inv_scale = ctx.inv(SCALE % ctx.q())?;
    let factor = ctx.pow(inv_scale, levels as u64);
    let coeffs = p.coeffs().iter().map(|&c| field.mul(c, factor)).collect();
    Ok(Poly::from_raw(p.ctx(), coeffs))
}

/// Convenience wrapper: scaled multiplication followed by the rescale.
pub fn mul<F: Field>(field: &F, f: &Poly, g: &Poly, levels: u32) -> Result<Poly, Error> {
    let scaled = mul_scaled(field, f, g, levels)?;
    rescale(field, &scaled, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(q: u64) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    fn poly_of(c: FieldCtx, coeffs: &[u64]) -> Poly {
        Poly::new(c, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn matrix_identity_holds() {
        verify_interpolation_matrix();
    }

    #[test]
    fn matrix_row_for_first_coefficient() {
        assert_eq!(INTERP_MATRIX[1], [-40, 120, -60, -30, 6, 4, -1440]);
    }

    #[test]
    fn max_levels_bounds() {
        assert_eq!(max_levels(1), 0);
        assert_eq!(max_levels(2), 0);
        assert_eq!(max_levels(4), 1);
        assert_eq!(max_levels(128), 3);
        assert_eq!(max_levels(256), 4);
        assert_eq!(max_levels(1024), 5);
    }

    #[test]
    fn split_and_join_round_trip() {
        let c = ctx(3329);
        let f = poly_of(c, &[10, 11, 12, 13]);
        let blocks = split(&f);
        assert_eq!(blocks[0].coeffs(), &[10]);
        assert_eq!(blocks[3].coeffs(), &[13]);

        let x7 = poly_of(c, &[0, 0, 0, 0, 0, 0, 0, 1]);
        let blocks = split(&x7);
        assert_eq!(blocks[3].coeffs(), &[0, 1]);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Poly::random(c, 32, &mut rng);
        let blocks = split(&f);
        let joined: Vec<u64> = blocks
            .iter()
            .flat_map(|b| b.coeffs().iter().copied())
            .collect();
        assert_eq!(joined, f.coeffs());
    }

    /// Direct evaluation oracle: F at a signed point via Horner, blockwise.
    fn horner_eval(c: FieldCtx, blocks: &[Poly; 4], alpha: i64) -> Vec<u64> {
        let a = if alpha < 0 {
            c.q() - (-alpha) as u64
        } else {
            alpha as u64
        };
        let mut acc = blocks[3].coeffs().to_vec();
        for b in blocks[..3].iter().rev() {
            acc = acc
                .iter()
                .zip(b.coeffs())
                .map(|(&hi, &lo)| c.add(c.mul(hi, a), lo))
                .collect();
        }
        acc
    }

    #[test]
    fn evaluate_all_ones() {
        let c = ctx(8380417);
        let blocks: [Poly; 4] = std::array::from_fn(|_| poly_of(c, &[1]));
        let evals = evaluate(&c, &blocks).unwrap();
        let expected: [u64; 7] = [1, 4, 0, 15, c.q() - 5, 40, 1];
        for (e, want) in evals.iter().zip(expected) {
            assert_eq!(e.coeffs(), &[want]);
        }
    }

    #[test]
    fn evaluate_constant_one() {
        let c = ctx(8380417);
        let one = poly_of(c, &[1]);
        let zero = poly_of(c, &[0]);
        let blocks = [one, zero.clone(), zero.clone(), zero];
        let evals = evaluate(&c, &blocks).unwrap();
        for e in &evals[..6] {
            assert_eq!(e.coeffs(), &[1]);
        }
        assert_eq!(evals[6].coeffs(), &[0]);
    }

    #[test]
    fn evaluate_matches_horner_oracle() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..16 {
            let blocks: [Poly; 4] = std::array::from_fn(|_| Poly::random(c, 8, &mut rng));
            let evals = evaluate(&c, &blocks).unwrap();
            for (k, alpha) in [0i64, 1, -1, 2, -2, 3].iter().enumerate() {
                assert_eq!(
                    evals[k].coeffs(),
                    horner_eval(c, &blocks, *alpha),
                    "point {alpha}"
                );
            }
            assert_eq!(evals[6].coeffs(), blocks[3].coeffs());
        }
    }

    #[test]
    fn interpolation_of_constant_product() {
        let c = ctx(8380417);
        let one = poly_of(c, &[1]);
        let zero = poly_of(c, &[0]);
        let products = [
            one.clone(),
            one.clone(),
            one.clone(),
            one.clone(),
            one.clone(),
            one,
            zero,
        ];
        let scaled = interpolate_scaled(&c, &products).unwrap();
        assert_eq!(scaled[0].coeffs(), &[120]);
        for h in &scaled[1..] {
            assert_eq!(h.coeffs(), &[0]);
        }
    }

    #[test]
    fn interpolation_inverts_forward_evaluation() {
        let c = ctx(8380417);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            // Pick coefficients h_0..h_6 freely, evaluate the degree-6
            // polynomial at the seven points, and demand 120*h_i back.
            let h: [Poly; 7] = std::array::from_fn(|_| Poly::random(c, 5, &mut rng));
            let points = [0i64, 1, -1, 2, -2, 3];
            let products: [Poly; 7] = std::array::from_fn(|k| {
                if k == 6 {
                    return h[6].clone();
                }
                let alpha = points[k];
                let a = if alpha < 0 {
                    c.q() - (-alpha) as u64
                } else {
                    alpha as u64
                };
                let mut acc = h[6].coeffs().to_vec();
                for blk in h[..6].iter().rev() {
                    acc = acc
                        .iter()
                        .zip(blk.coeffs())
                        .map(|(&hi, &lo)| c.add(c.mul(hi, a), lo))
                        .collect();
                }
                Poly::new(c, acc).unwrap()
            });
            let scaled = interpolate_scaled(&c, &products).unwrap();
            for (got, want) in scaled.iter().zip(&h) {
                let expected: Vec<u64> = want.coeffs().iter().map(|&x| c.mul(x, SCALE)).collect();
                assert_eq!(got.coeffs(), expected);
            }
        }
    }

    #[test]
    fn recompose_scalar_blocks() {
        let c = ctx(3329);
        let blocks: [Poly; 7] = std::array::from_fn(|_| poly_of(c, &[9]));
        let out = recompose(&c, &blocks, 4).unwrap();
        assert_eq!(out.coeffs(), &[9, 9, 9, 9, 9, 9, 9]);
    }

    #[test]
    fn recompose_single_block() {
        let c = ctx(3329);
        let mut blocks: [Poly; 7] = std::array::from_fn(|_| Poly::zeros(c, 3));
        blocks[0] = poly_of(c, &[1, 1, 1]);
        let out = recompose(&c, &blocks, 8).unwrap();
        let mut expected = vec![0u64; 15];
        expected[..3].copy_from_slice(&[1, 1, 1]);
        assert_eq!(out.coeffs(), expected);
    }

    #[test]
    fn recompose_matches_substitution_oracle() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 16;
        let quarter = d / 4;
        let blocks: [Poly; 7] = std::array::from_fn(|_| Poly::random(c, 2 * quarter - 1, &mut rng));
        let out = recompose(&c, &blocks, d).unwrap();
        // Substitution oracle: sum blocks shifted by i * d/4.
        let mut expected = vec![0u64; 2 * d - 1];
        for (i, b) in blocks.iter().enumerate() {
            for (j, &x) in b.coeffs().iter().enumerate() {
                let pos = i * quarter + j;
                expected[pos] = c.add(expected[pos], x);
            }
        }
        assert_eq!(out.coeffs(), expected);
    }

    #[test]
    fn depth_zero_is_karatsuba() {
        let c = ctx(3329);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Poly::random(c, 16, &mut rng);
        let g = Poly::random(c, 16, &mut rng);
        let toom = mul_scaled(&c, &f, &g, 0).unwrap();
        let kara = karatsuba::mul(&c, &f, &g).unwrap();
        assert_eq!(toom.coeffs(), kara.coeffs());
    }

    #[test]
    fn one_level_all_ones() {
        let c = ctx(8380417);
        let f = poly_of(c, &[1, 1, 1, 1]);
        let scaled = mul_scaled(&c, &f, &f, 1).unwrap();
        let expected: Vec<u64> = [1u64, 2, 3, 4, 3, 2, 1]
            .iter()
            .map(|&x| c.mul(x, 120))
            .collect();
        assert_eq!(scaled.coeffs(), expected);
    }

    #[test]
    fn rescale_basics() {
        let c = ctx(8380417);
        let p = poly_of(c, &[14400, 120, 1]);
        assert_eq!(rescale(&c, &p, 0).unwrap().coeffs(), p.coeffs());
        let down = rescale(&c, &p, 2).unwrap();
        assert_eq!(down.coeffs()[0], 1);
        // 120 * 120^-2 = 120^-1.
        assert_eq!(c.mul(down.coeffs()[1], 120), 1);

        // 120 = 1 mod 7, so the rescale is the identity map there.
        let c7 = ctx(7);
        let p7 = poly_of(c7, &[3, 5]);
        assert_eq!(rescale(&c7, &p7, 4).unwrap().coeffs(), p7.coeffs());
    }

    #[test]
    fn small_characteristic_is_rejected() {
        let c3 = ctx(3);
        let f = Poly::zeros(c3, 4);
        assert!(matches!(
            mul_scaled(&c3, &f, &f, 1),
            Err(Error::SmallCharacteristic(3))
        ));
        let c5 = ctx(5);
        let f = Poly::zeros(c5, 4);
        assert!(matches!(
            mul_scaled(&c5, &f, &f, 1),
            Err(Error::SmallCharacteristic(5))
        ));
        // Depth 0 never touches the interpolation scalars.
        assert!(mul_scaled(&c5, &f, &f, 0).is_ok());
    }

    #[test]
    fn depth_bound_is_enforced() {
        let c = ctx(3329);
        let f = Poly::zeros(c, 16);
        assert!(matches!(
            mul_scaled(&c, &f, &f, 3),
            Err(Error::ToomDepthTooLarge {
                d: 16,
                levels: 3,
                max: 2
            })
        ));
    }

    #[test]
    fn oracle_equivalence_across_sizes_and_depths() {
        let c = ctx(8380417);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for log_d in 2..=10u32 {
            let d = 1usize << log_d;
            for levels in 0..=max_levels(d) {
                let f = Poly::random(c, d, &mut rng);
                let g = Poly::random(c, d, &mut rng);
                let fast = mul(&c, &f, &g, levels).unwrap();
                let slow = poly::schoolbook_mul(&c, &f, &g).unwrap();
                assert_eq!(fast.coeffs(), slow.coeffs(), "d = {d}, levels = {levels}");
            }
        }
    }

    #[test]
    fn oracle_equivalence_small_prime() {
        // gcd(q, 30) = 1 holds for q = 7 even though q < 120.
        let c = ctx(7);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for levels in 0..=2 {
            let f = Poly::random(c, 16, &mut rng);
            let g = Poly::random(c, 16, &mut rng);
            let fast = mul(&c, &f, &g, levels).unwrap();
            let slow = poly::schoolbook_mul(&c, &f, &g).unwrap();
            assert_eq!(fast.coeffs(), slow.coeffs(), "levels = {levels}");
        }
    }
}
