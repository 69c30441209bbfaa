//! Arbitrary-precision number-theoretic primitives shared by the attacks:
//! integer roots, perfect-power detection, primality, gcd, and an exact
//! integer quadratic solver.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Default Miller-Rabin round count for inputs above the deterministic range.
pub const DEFAULT_MR_ROUNDS: u32 = 40;

/// First 64 primes: trial-division filter and Miller-Rabin witness pool.
const SMALL_PRIMES: [u64; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
    157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233,
    239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
];

/// Floor square root: the r with r^2 <= n < (r+1)^2.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Floor s-th root: the r with r^s <= n < (r+1)^s. Panics if s = 0.
pub fn iroot(n: &BigUint, s: u32) -> BigUint {
    assert!(s >= 1, "iroot: root degree must be positive");
    n.nth_root(s)
}

const fn squares_mod<const M: usize>() -> [bool; M] {
    let mut table = [false; M];
    let mut i = 0;
    while i < M {
        table[i * i % M] = true;
        i += 1;
    }
    table
}

static QR64: [bool; 64] = squares_mod::<64>();
static QR63: [bool; 63] = squares_mod::<63>();
static QR65: [bool; 65] = squares_mod::<65>();
static QR11: [bool; 11] = squares_mod::<11>();

/// Quick rejection: a square must be a square residue mod 64, 63, 65 and 11.
/// Together these pass less than 1% of non-squares.
pub(crate) fn may_be_square(n: &BigUint) -> bool {
    let low = (n % 64u32).to_usize().unwrap();
    if !QR64[low] {
        return false;
    }
    // 45045 = 63 * 65 * 11
    let m = (n % 45045u32).to_usize().unwrap();
    QR63[m % 63] && QR65[m % 65] && QR11[m % 11]
}

/// Exact root extraction: Some(r) iff r^s = n. Cheap residue filters (2-adic
/// valuation, square residues for s = 2) reject most non-powers before the
/// full root is computed; observable behavior is unchanged by the filters.
pub fn perfect_root(n: &BigUint, s: u32) -> Option<BigUint> {
    assert!(s >= 1, "perfect_root: root degree must be positive");
    if n.is_zero() {
        return None; // domain is n >= 1
    }
    if s == 1 || n.is_one() {
        return Some(n.clone());
    }
    // the 2-adic valuation of an s-th power is a multiple of s
    let tz = n.trailing_zeros().unwrap_or(0);
    if tz % s as u64 != 0 {
        return None;
    }
    if s == 2 {
        if !may_be_square(n) {
            return None;
        }
        let r = n.sqrt();
        return if &r * &r == *n { Some(r) } else { None };
    }
    let r = n.nth_root(s);
    if r.pow(s) == *n {
        Some(r)
    } else {
        None
    }
}

/// Deterministically correct for n < 2^64 (fixed 12-witness set); Miller-Rabin
/// with `rounds` witnesses (the first `rounds` primes) above that. Composite
/// verdicts are always correct.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    if *n < BigUint::from(2u32) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        if (n % p).is_zero() {
            return *n == BigUint::from(p);
        }
    }
    // n is odd and exceeds every tabled prime here
    let n_minus_1 = n - 1u32;
    let t = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> t;
    let witnesses = if n.bits() <= 64 {
        12
    } else {
        rounds.clamp(1, SMALL_PRIMES.len() as u32) as usize
    };
    'witness: for &w in &SMALL_PRIMES[..witnesses] {
        let mut x = BigUint::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..t {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Greatest common divisor; gcd(0, b) = b.
pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

/// Integer roots of X^2 - S*X + C = 0: Some((x1, x2)) with x1 <= x2 iff the
/// discriminant D = S^2 - 4C is a perfect square and sqrt(D) has the parity
/// of S (both conditions are needed for the roots (S +- sqrt(D))/2 to be
/// integers); None otherwise.
pub fn solve_monic_quadratic(s: &BigUint, c: &BigUint) -> Option<(BigUint, BigUint)> {
    let s2 = s * s;
    let c4 = c << 2;
    if s2 < c4 {
        return None;
    }
    let d = s2 - c4;
    if !may_be_square(&d) {
        return None;
    }
    let sd = d.sqrt();
    if &sd * &sd != d {
        return None;
    }
    if s.bit(0) != sd.bit(0) {
        return None;
    }
    let x1 = (s - &sd) >> 1;
    let x2 = (s + &sd) >> 1;
    Some((x1, x2))
}
