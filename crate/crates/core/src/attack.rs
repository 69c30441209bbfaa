//! The three window-scan attacks and their supporting types: scan windows,
//! hint sets, outcome reporting, and factorization verification.
//!
//! All three attacks share the same skeleton: compute a small candidate
//! window from the public modulus and the leaked residues, scan it in
//! ascending order, and gate every candidate behind an exact divisibility
//! check so that a reported factorization is always genuine, even under
//! corrupted hints.

use crate::bigmath::{gcd, iroot, isqrt, perfect_root, solve_monic_quadratic};
use crate::keygen::ModulusShape;
use num_bigint::BigUint;
use num_traits::{CheckedSub, One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::fmt;
use std::time::{Duration, Instant};

/// Default cap on scan work: windows (or hint products, for the quadratic
/// attack) beyond this are rejected as precondition violations.
pub const DEFAULT_WINDOW_BUDGET: u64 = 1 << 24;

/// The attacker's side information: both residues and the modulus shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HintSet {
    pub r_p: BigUint,
    pub r_q: BigUint,
    pub shape: ModulusShape,
}

/// Inclusive candidate range for the scan variable k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchWindow {
    pub lo: BigUint,
    pub hi: BigUint,
}

impl SearchWindow {
    pub fn width(&self) -> BigUint {
        &self.hi - &self.lo + 1u32
    }

    pub fn contains(&self, k: &BigUint) -> bool {
        self.lo <= *k && *k <= self.hi
    }
}

/// Why an attack refused to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The hint set describes a different modulus shape.
    ShapeMismatch,
    /// A residue hint is zero or the modulus is below 2.
    BadHints,
    /// The window is empty for these inputs.
    DegenerateWindow,
    /// The scan would exceed the configured work budget.
    BudgetExceeded,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Violation::ShapeMismatch => "hint set is for a different modulus shape",
            Violation::BadHints => "hints must be >= 1 and shape parameters valid",
            Violation::DegenerateWindow => "window is empty for these inputs",
            Violation::BudgetExceeded => "scan would exceed the window budget",
        };
        f.write_str(msg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttackStatus {
    Factored { p: BigUint, q: BigUint },
    Exhausted,
    PreconditionViolated(Violation),
}

/// Everything observable about one attack run. `elapsed` is wall time and is
/// excluded from equality comparisons.
#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub status: AttackStatus,
    pub k_hit: Option<BigUint>,
    pub iterations: u64,
    pub window: Option<SearchWindow>,
    pub elapsed: Duration,
}

impl AttackOutcome {
    fn violated(v: Violation, window: Option<SearchWindow>, start: Instant) -> Self {
        AttackOutcome {
            status: AttackStatus::PreconditionViolated(v),
            k_hit: None,
            iterations: 0,
            window,
            elapsed: start.elapsed(),
        }
    }

    fn exhausted(iterations: u64, window: SearchWindow, start: Instant) -> Self {
        AttackOutcome {
            status: AttackStatus::Exhausted,
            k_hit: None,
            iterations,
            window: Some(window),
            elapsed: start.elapsed(),
        }
    }

    fn factored(
        p: BigUint,
        q: BigUint,
        k_hit: BigUint,
        iterations: u64,
        window: SearchWindow,
        start: Instant,
    ) -> Self {
        AttackOutcome {
            status: AttackStatus::Factored { p, q },
            k_hit: Some(k_hit),
            iterations,
            window: Some(window),
            elapsed: start.elapsed(),
        }
    }

    /// Field-wise equality ignoring wall time.
    pub fn same_result(&self, other: &AttackOutcome) -> bool {
        self.status == other.status
            && self.k_hit == other.k_hit
            && self.iterations == other.iterations
            && self.window == other.window
    }

    pub fn elapsed_ns(&self) -> u128 {
        self.elapsed.as_nanos()
    }
}

#[derive(Clone, Debug)]
pub struct AttackConfig {
    pub window_budget: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig { window_budget: DEFAULT_WINDOW_BUDGET }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateWindowError;

impl fmt::Display for DegenerateWindowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("window is empty for these inputs")
    }
}

impl std::error::Error for DegenerateWindowError {}

fn saturating_sub(a: &BigUint, b: &BigUint) -> BigUint {
    if a > b {
        a - b
    } else {
        BigUint::zero()
    }
}

fn ceil_div(x: &BigUint, d: u64) -> BigUint {
    (x + (d - 1)) / d
}

/// Window for N = p*q: k = sqrt(a^m1 * b^m2) lies in
/// [isqrt(N) - ceil(r_q/2) - r_p - 2, isqrt(N) - isqrt(r_p*r_q) + 1],
/// the lower end clamped at zero. The additive slack absorbs the rounding
/// of the real square roots the bounds come from.
pub fn window_pq(
    n: &BigUint,
    r_p: &BigUint,
    r_q: &BigUint,
) -> Result<SearchWindow, DegenerateWindowError> {
    let root = isqrt(n);
    let down = ((r_q + 1u32) >> 1) + r_p + 2u32;
    let lo = saturating_sub(&root, &down);
    let hi = (root + 1u32)
        .checked_sub(&isqrt(&(r_p * r_q)))
        .ok_or(DegenerateWindowError)?;
    if hi < lo {
        return Err(DegenerateWindowError);
    }
    Ok(SearchWindow { lo, hi })
}

/// Window for N = p^s*q: k = p * b^(m2/s) lies in
/// [iroot(N,s) - ceil(r_q/s) - ceil(r_p*r_q/s) - 1, iroot(N,s) + 1],
/// the lower end clamped at zero.
pub fn window_power_q(
    n: &BigUint,
    s: u32,
    r_p: &BigUint,
    r_q: &BigUint,
) -> Result<SearchWindow, DegenerateWindowError> {
    let root = iroot(n, s);
    let down = ceil_div(r_q, s as u64) + ceil_div(&(r_p * r_q), s as u64) + 1u32;
    let lo = saturating_sub(&root, &down);
    let hi = root + 1u32;
    if hi < lo {
        return Err(DegenerateWindowError);
    }
    Ok(SearchWindow { lo, hi })
}

/// Window for N = p^(s+l)*q^s: Gamma = q * a^(m1*l/s) * (p*s + l*r_p) lies in
/// [s*iroot(N,s) - B - T - s, s*(iroot(N,s) + 1) + T + 1] with B = l*r_p^2
/// and T = ceil(l*(s-l)*(r_p^2 + r_p^3) / (2s)), the lower end clamped at
/// zero.
pub fn window_power_power(
    n: &BigUint,
    s: u32,
    l: u32,
    r_p: &BigUint,
) -> Result<SearchWindow, DegenerateWindowError> {
    let root = iroot(n, s);
    let rp2 = r_p * r_p;
    let rp3 = &rp2 * r_p;
    let spread = l as u64 * (s - l) as u64;
    let b = &rp2 * l;
    let t = ceil_div(&((rp2 + rp3) * spread), 2 * s as u64);
    let lo = saturating_sub(&(&root * s), &(&b + &t + s));
    let hi = (root + 1u32) * s + &t + 1u32;
    if hi < lo {
        return Err(DegenerateWindowError);
    }
    Ok(SearchWindow { lo, hi })
}

/// Quadratic-root attack on N = p*q. For each k, the integer roots of
/// X^2 - S*X + C with S = N - k^2 - r_p*r_q and C = k^2*r_p*r_q are the two
/// products a^m1*r_q and b^m2*r_p when k is the scan target; dividing out the
/// matching residue and adding the other recovers a factor, which is accepted
/// only if it exactly divides N.
pub fn attack_pq(n: &BigUint, hints: &HintSet, cfg: &AttackConfig) -> AttackOutcome {
    let start = Instant::now();
    if hints.shape != ModulusShape::Pq {
        return AttackOutcome::violated(Violation::ShapeMismatch, None, start);
    }
    if hints.r_p.is_zero() || hints.r_q.is_zero() || *n < BigUint::from(2u32) {
        return AttackOutcome::violated(Violation::BadHints, None, start);
    }
    let window = match window_pq(n, &hints.r_p, &hints.r_q) {
        Ok(w) => w,
        Err(_) => return AttackOutcome::violated(Violation::DegenerateWindow, None, start),
    };
    let rpq = &hints.r_p * &hints.r_q;
    if rpq > BigUint::from(cfg.window_budget) {
        return AttackOutcome::violated(Violation::BudgetExceeded, Some(window), start);
    }
    let mut k = window.lo.clone();
    let mut iterations = 0u64;
    while k <= window.hi {
        iterations += 1;
        let ksq = &k * &k;
        let floor = &ksq + &rpq;
        if *n > floor {
            let s_val = n - &floor;
            let c_val = &ksq * &rpq;
            if let Some((x1, x2)) = solve_monic_quadratic(&s_val, &c_val) {
                for x in [&x1, &x2] {
                    if let Some((p, q)) = split_from_root(n, x, &hints.r_p, &hints.r_q) {
                        return AttackOutcome::factored(p, q, k, iterations, window, start);
                    }
                }
            }
        }
        k += 1u32;
    }
    AttackOutcome::exhausted(iterations, window, start)
}

/// Try a quadratic root as a^m1*r_q (recovering p) and as b^m2*r_p
/// (recovering q); only exact divisors of N are accepted.
fn split_from_root(
    n: &BigUint,
    x: &BigUint,
    r_p: &BigUint,
    r_q: &BigUint,
) -> Option<(BigUint, BigUint)> {
    let one = BigUint::one();
    if (x % r_q).is_zero() {
        let p = x / r_q + r_p;
        if p > one && p < *n && (n % &p).is_zero() {
            let q = n / &p;
            return Some((p, q));
        }
    }
    if (x % r_p).is_zero() {
        let q = x / r_p + r_q;
        if q > one && q < *n && (n % &q).is_zero() {
            let p = n / &q;
            return Some((p, q));
        }
    }
    None
}

fn pow_mod_u64(base: u64, mut exp: u32, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Root-recovery attack on N = p^s*q. For each k, D = N - k^s must be
/// divisible by r_q with quotient an exact s-th power p^s; the candidate p is
/// accepted only if p^s divides N with a nontrivial cofactor.
pub fn attack_power_q(n: &BigUint, hints: &HintSet, cfg: &AttackConfig) -> AttackOutcome {
    let start = Instant::now();
    let s = match hints.shape {
        ModulusShape::PsQ { s } if s >= 2 => s,
        _ => return AttackOutcome::violated(Violation::ShapeMismatch, None, start),
    };
    if hints.r_p.is_zero() || hints.r_q.is_zero() || *n < BigUint::from(2u32) {
        return AttackOutcome::violated(Violation::BadHints, None, start);
    }
    let window = match window_power_q(n, s, &hints.r_p, &hints.r_q) {
        Ok(w) => w,
        Err(_) => return AttackOutcome::violated(Violation::DegenerateWindow, None, start),
    };
    let width = window.width();
    if width > BigUint::from(cfg.window_budget) {
        return AttackOutcome::violated(Violation::BudgetExceeded, Some(window), start);
    }
    let width = width.to_u64().expect("width fits u64 once under budget");

    // k^s = N (mod r_q) is necessary for r_q | D; precompute the admissible
    // residue classes when r_q is small, or test per candidate otherwise
    let rq_u64 = hints.r_q.to_u64();
    let table: Option<Vec<bool>> = match rq_u64 {
        Some(m) if m <= 1 << 22 => {
            let n_mod = (n % m).to_u64().unwrap();
            Some((0..m).map(|c| pow_mod_u64(c, s, m) == n_mod).collect())
        }
        _ => None,
    };
    let n_mod_rq = (n % &hints.r_q).to_u64();
    let mut c_mod: u64 = match rq_u64 {
        Some(m) => (&window.lo % m).to_u64().unwrap(),
        None => 0,
    };

    let one = BigUint::one();
    for i in 0..width {
        let admissible = match (&table, rq_u64) {
            (Some(t), _) => t[c_mod as usize],
            (None, Some(m)) => pow_mod_u64(c_mod, s, m) == n_mod_rq.unwrap(),
            (None, None) => true,
        };
        if admissible {
            let k = &window.lo + i;
            let ks = k.pow(s);
            if ks < *n {
                let d = n - &ks;
                if rq_u64.is_some() || (&d % &hints.r_q).is_zero() {
                    let t_val = &d / &hints.r_q;
                    if let Some(p) = perfect_root(&t_val, s) {
                        if p > one {
                            let ps = p.pow(s);
                            if (n % &ps).is_zero() {
                                let q = n / &ps;
                                if q > one {
                                    return AttackOutcome::factored(
                                        p,
                                        q,
                                        k,
                                        i + 1,
                                        window,
                                        start,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        if let Some(m) = rq_u64 {
            c_mod += 1;
            if c_mod == m {
                c_mod = 0;
            }
        }
    }
    AttackOutcome::exhausted(width, window, start)
}

/// Gcd attack on N = p^(s+l)*q^s. The window contains
/// Gamma = q * a^(m1*l/s) * (p*s + l*r_p), which shares the factor q with N;
/// any candidate k with 1 < gcd(N, k) < N is mined for a perfect-power root
/// that splits N.
pub fn attack_power_power(n: &BigUint, hints: &HintSet, cfg: &AttackConfig) -> AttackOutcome {
    let start = Instant::now();
    let (s, l) = match hints.shape {
        ModulusShape::PslQs { s, l } if l >= 1 && 2 * l < s => (s, l),
        _ => return AttackOutcome::violated(Violation::ShapeMismatch, None, start),
    };
    if hints.r_p.is_zero() || hints.r_q.is_zero() || *n < BigUint::from(2u32) {
        return AttackOutcome::violated(Violation::BadHints, None, start);
    }
    let window = match window_power_power(n, s, l, &hints.r_p) {
        Ok(w) => w,
        Err(_) => return AttackOutcome::violated(Violation::DegenerateWindow, None, start),
    };
    let width = window.width();
    if width > BigUint::from(cfg.window_budget) {
        return AttackOutcome::violated(Violation::BudgetExceeded, Some(window), start);
    }
    let width = width.to_u64().expect("width fits u64 once under budget");

    // Work in chunks: multiplying a chunk's candidates mod N and taking one
    // gcd tells whether any of them shares a factor with N. Chunks are
    // independent, so blocks of them run in parallel; the smallest hit in a
    // block wins, keeping the result identical to a sequential ascending
    // scan.
    const CHUNK: u64 = 1 << 10;
    const BLOCK: u64 = 1 << 16;
    if width <= CHUNK {
        // too small to be worth fanning out
        if let Some((off, p, q)) = scan_chunk(n, s, l, &window.lo, 0, width) {
            let k = &window.lo + off;
            return AttackOutcome::factored(p, q, k, off + 1, window, start);
        }
        return AttackOutcome::exhausted(width, window, start);
    }
    let mut base = 0u64;
    while base < width {
        let block_end = (base + BLOCK).min(width);
        let starts: Vec<u64> = (base..block_end).step_by(CHUNK as usize).collect();
        let hit = starts
            .into_par_iter()
            .filter_map(|from| scan_chunk(n, s, l, &window.lo, from, (from + CHUNK).min(block_end)))
            .min_by_key(|(off, _, _)| *off);
        if let Some((off, p, q)) = hit {
            let k = &window.lo + off;
            return AttackOutcome::factored(p, q, k, off + 1, window, start);
        }
        base = block_end;
    }
    AttackOutcome::exhausted(width, window, start)
}

fn scan_chunk(
    n: &BigUint,
    s: u32,
    l: u32,
    lo: &BigUint,
    from: u64,
    to: u64,
) -> Option<(u64, BigUint, BigUint)> {
    // gcd(N, prod k mod N) = 1 exactly when every candidate is coprime to N
    let limit_bits = n.bits() + 64;
    let mut acc = BigUint::one();
    let mut k = lo + from;
    for _ in from..to {
        acc *= &k;
        if acc.bits() > limit_bits {
            acc %= n;
        }
        k += 1u32;
    }
    if gcd(n, &(acc % n)).is_one() {
        return None;
    }
    // something in this chunk shares a factor; find the first usable one
    let mut k = lo + from;
    for i in from..to {
        let g = gcd(n, &k);
        if !g.is_one() && g != *n {
            if let Some((p, q)) = try_root_split(n, &g, s, l) {
                return Some((i, p, q));
            }
        }
        k += 1u32;
    }
    None
}

/// A nontrivial g = gcd(N, k) is q^i for scan targets; try every root
/// g^(1/r) as q (cofactor a perfect (s+l)-th power) and as p (cofactor a
/// perfect s-th power).
fn try_root_split(n: &BigUint, g: &BigUint, s: u32, l: u32) -> Option<(BigUint, BigUint)> {
    let one = BigUint::one();
    for r in 1..=s {
        let Some(x) = perfect_root(g, r) else { continue };
        let xs = x.pow(s);
        if (n % &xs).is_zero() {
            if let Some(p) = perfect_root(&(n / &xs), s + l) {
                if p > one {
                    return Some((p, x));
                }
            }
        }
        let xsl = x.pow(s + l);
        if (n % &xsl).is_zero() {
            if let Some(q) = perfect_root(&(n / &xsl), s) {
                if q > one {
                    return Some((x, q));
                }
            }
        }
    }
    None
}

/// Dispatch on the hint set's shape.
pub fn run_attack(n: &BigUint, hints: &HintSet, cfg: &AttackConfig) -> AttackOutcome {
    match hints.shape {
        ModulusShape::Pq => attack_pq(n, hints, cfg),
        ModulusShape::PsQ { .. } => attack_power_q(n, hints, cfg),
        ModulusShape::PslQs { .. } => attack_power_power(n, hints, cfg),
    }
}

/// Exact recomposition check: p, q >= 2 and p^ep * q^eq = N for the shape's
/// exponents.
pub fn verify_factorization(n: &BigUint, p: &BigUint, q: &BigUint, shape: ModulusShape) -> bool {
    let two = BigUint::from(2u32);
    if *p < two || *q < two {
        return false;
    }
    shape.compose(p, q) == *n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn hints_pq(rp: u64, rq: u64) -> HintSet {
        HintSet { r_p: big(rp), r_q: big(rq), shape: ModulusShape::Pq }
    }

    fn hints_psq(rp: u64, rq: u64, s: u32) -> HintSet {
        HintSet { r_p: big(rp), r_q: big(rq), shape: ModulusShape::PsQ { s } }
    }

    fn hints_pslqs(rp: u64, rq: u64, s: u32, l: u32) -> HintSet {
        HintSet { r_p: big(rp), r_q: big(rq), shape: ModulusShape::PslQs { s, l } }
    }

    #[test]
    fn window_pq_desk_values() {
        let w = window_pq(&big(551), &big(3), &big(4)).unwrap();
        assert_eq!((w.lo.clone(), w.hi.clone()), (big(16), big(21)));
        assert_eq!(w.width(), big(6));
        // degenerate: isqrt(100) = 10 exceeds isqrt(6) + 1
        assert!(window_pq(&big(6), &big(10), &big(10)).is_err());
        // lower edge clamped at zero while the upper edge survives
        let w = window_pq(&big(9), &big(1), &big(9)).unwrap();
        assert_eq!((w.lo.clone(), w.hi.clone()), (big(0), big(1)));
    }

    #[test]
    fn attack_pq_desk_instance() {
        let out = attack_pq(&big(551), &hints_pq(3, 4), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Factored { p: big(19), q: big(29) });
        assert_eq!(out.k_hit, Some(big(20)));
        assert_eq!(out.iterations, 5);
        let w = out.window.unwrap();
        assert_eq!((w.lo, w.hi), (big(16), big(21)));
    }

    #[test]
    fn attack_pq_wrong_hints_exhaust() {
        let out = attack_pq(&big(551), &hints_pq(1, 1), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Exhausted);
        assert_eq!(out.k_hit, None);
        let w = out.window.unwrap();
        // isqrt(551) = 23: [23 - 3, 23 - 1 + 1]
        assert_eq!((w.lo.clone(), w.hi.clone()), (big(19), big(23)));
        assert_eq!(out.iterations, 5);
    }

    #[test]
    fn attack_pq_square_modulus() {
        // N = 19^2 with both residues 3: the window holds k = 16 and the
        // double root splits N as (19, 19)
        let out = attack_pq(&big(361), &hints_pq(3, 3), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Factored { p: big(19), q: big(19) });
        assert_eq!(out.k_hit, Some(big(16)));
    }

    #[test]
    fn attack_pq_preconditions() {
        // budget: r_p * r_q = 2^26 over the default 2^24
        let n = big(1_000_000_007) * big(1_000_000_009);
        let out = attack_pq(&n, &hints_pq(1 << 13, 1 << 13), &AttackConfig::default());
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::BudgetExceeded)
        );
        assert_eq!(out.iterations, 0);
        assert!(out.window.is_some());
        // a raised budget lets the same inputs run (and exhaust)
        let out = attack_pq(&n, &hints_pq(1 << 13, 1 << 13), &AttackConfig { window_budget: 1 << 27 });
        assert_eq!(out.status, AttackStatus::Exhausted);
        // shape mismatch
        let out = attack_pq(&big(551), &hints_psq(3, 4, 2), &AttackConfig::default());
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::ShapeMismatch)
        );
        // zero hints
        let out = attack_pq(&big(551), &hints_pq(0, 4), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::PreconditionViolated(Violation::BadHints));
        // degenerate window
        let out = attack_pq(&big(6), &hints_pq(10, 10), &AttackConfig::default());
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::DegenerateWindow)
        );
    }

    #[test]
    fn window_power_q_desk_values() {
        let w = window_power_q(&big(2075), 2, &big(1), &big(2)).unwrap();
        assert_eq!((w.lo, w.hi), (big(42), big(46)));
    }

    #[test]
    fn attack_power_q_desk_instance() {
        let out = attack_power_q(&big(2075), &hints_psq(1, 2, 2), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Factored { p: big(5), q: big(83) });
        assert_eq!(out.k_hit, Some(big(45)));
        assert_eq!(out.iterations, 4);
    }

    #[test]
    fn attack_power_q_perfect_power_is_not_a_hit() {
        // N = 49 = 7^2: k = 7 gives D = 0, which the scan skips, and no other
        // candidate passes the divisibility gate
        let out = attack_power_q(&big(49), &hints_psq(1, 3, 2), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Exhausted);
        let w = out.window.unwrap();
        assert_eq!((w.lo, w.hi), (big(2), big(8)));
        assert_eq!(out.iterations, 7);
    }

    #[test]
    fn attack_power_q_preconditions() {
        // width from the formula: 2^12 + 2^24 + 3 over the 2^24 budget
        let out = attack_power_q(
            &(big(1) << 200),
            &hints_psq(1 << 12, 1 << 13, 2),
            &AttackConfig::default(),
        );
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::BudgetExceeded)
        );
        let out = attack_power_q(&big(2075), &hints_pq(1, 2), &AttackConfig::default());
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::ShapeMismatch)
        );
    }

    #[test]
    fn window_power_power_desk_values() {
        // iroot(395307, 3) = 73, B = 9, T = ceil(2 * 36 / 6) = 12
        let w = window_power_power(&big(395307), 3, 1, &big(3)).unwrap();
        assert_eq!((w.lo, w.hi), (big(195), big(235)));
    }

    #[test]
    fn attack_power_power_desk_instance() {
        let out =
            attack_power_power(&big(395307), &hints_pslqs(3, 1, 3, 1), &AttackConfig::default());
        // the first multiple of q = 3 in the window is k = 195, before the
        // theorem's Gamma = 216
        assert_eq!(out.status, AttackStatus::Factored { p: big(11), q: big(3) });
        assert_eq!(out.k_hit, Some(big(195)));
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn attack_power_power_coprime_window_exhausts() {
        // N = 1009^4 * 1013^3: with r_p = 1 the eleven-candidate window
        // straddles 3 * iroot(N, 3) and contains no multiple of either prime
        let n = big(1009).pow(4) * big(1013).pow(3);
        let out = attack_power_power(&n, &hints_pslqs(1, 1, 3, 1), &AttackConfig::default());
        assert_eq!(out.status, AttackStatus::Exhausted);
        let w = out.window.unwrap();
        assert_eq!(out.iterations, w.width().to_u64().unwrap());
    }

    #[test]
    fn attack_power_power_preconditions() {
        let out = attack_power_power(
            &big(395307),
            &hints_pslqs(1 << 12, 1, 3, 1),
            &AttackConfig::default(),
        );
        // T alone is about 2^35 for r_p = 2^12
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::BudgetExceeded)
        );
        let out =
            attack_power_power(&big(395307), &hints_psq(3, 1, 3), &AttackConfig::default());
        assert_eq!(
            out.status,
            AttackStatus::PreconditionViolated(Violation::ShapeMismatch)
        );
    }

    #[test]
    fn verify_factorization_by_shape() {
        assert!(verify_factorization(&big(551), &big(19), &big(29), ModulusShape::Pq));
        assert!(!verify_factorization(&big(551), &big(19), &big(30), ModulusShape::Pq));
        assert!(!verify_factorization(&big(551), &big(1), &big(551), ModulusShape::Pq));
        assert!(verify_factorization(&big(2075), &big(5), &big(83), ModulusShape::PsQ { s: 2 }));
        assert!(verify_factorization(
            &big(395307),
            &big(11),
            &big(3),
            ModulusShape::PslQs { s: 3, l: 1 }
        ));
        assert!(!verify_factorization(
            &big(395307),
            &big(3),
            &big(11),
            ModulusShape::PslQs { s: 3, l: 1 }
        ));
    }

    #[test]
    fn run_attack_dispatches_by_shape() {
        let out = run_attack(&big(551), &hints_pq(3, 4), &AttackConfig::default());
        assert!(matches!(out.status, AttackStatus::Factored { .. }));
        let out = run_attack(&big(2075), &hints_psq(1, 2, 2), &AttackConfig::default());
        assert!(matches!(out.status, AttackStatus::Factored { .. }));
        let out = run_attack(&big(395307), &hints_pslqs(3, 1, 3, 1), &AttackConfig::default());
        assert!(matches!(out.status, AttackStatus::Factored { .. }));
    }

    #[test]
    fn outcomes_are_deterministic() {
        for _ in 0..3 {
            let a = attack_power_power(
                &big(395307),
                &hints_pslqs(3, 1, 3, 1),
                &AttackConfig::default(),
            );
            let b = attack_power_power(
                &big(395307),
                &hints_pslqs(3, 1, 3, 1),
                &AttackConfig::default(),
            );
            assert!(a.same_result(&b));
        }
    }
}
