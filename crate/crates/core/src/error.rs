use thiserror::Error;

/// Errors raised by the arithmetic layers and the parameter checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {0} does not fit below 2^62")]
    ModulusTooLarge(u64),
    #[error("cannot invert zero in F_{0}")]
    ZeroInverse(u64),
    #[error("operands use different moduli: {0} and {1}")]
    ModulusMismatch(u64, u64),
    #[error("no primitive root: order {order} does not divide q - 1 for q = {q}")]
    RootOrderUnavailable { q: u64, order: u64 },
    #[error("transform depth {ell} is not admissible for q = {q}, n = {n} (max depth {max})")]
    DepthNotAdmissible {
        q: u64,
        n: usize,
        ell: u32,
        max: u32,
    },
    #[error("size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("Toom-4 requires gcd(q, 30) = 1, but q = {0} is divisible by 2, 3, or 5")]
    SmallCharacteristic(u64),
    #[error("Toom-4 recursion depth {levels} exceeds the maximum {max} for size {d}")]
    ToomDepthTooLarge { d: usize, levels: u32, max: u32 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coefficient {value} is out of range for modulus {q}")]
    CoefficientOutOfRange { value: u64, q: u64 },
    #[error("reduction input of length {len} exceeds 2*{d} - 1; one folding pass is not enough")]
    ReductionTooLong { len: usize, d: usize },
    #[error("addition-chain search needs a nonempty target set")]
    EmptyTargets,
    #[error("invalid polynomial encoding: {0}")]
    Encoding(String),
}
