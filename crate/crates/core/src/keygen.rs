//! Vulnerable-instance generation: structured primes p = a^m + r, moduli of
//! the three supported shapes with attacker-known residues, JSON key files,
//! and optional RSA exponent assembly.
//!
//! Residue scans deliberately start at r = 2 (odd bases) or r = 3 (even
//! bases): r = 1 would put the prime immediately adjacent to a perfect power,
//! which the brute-force oracle already covers and which makes hint-stripping
//! trivial, so generated instances always carry r >= 2. Hand-built instances
//! with r = 1 remain representable.

use crate::attack::{self, HintSet, DEFAULT_WINDOW_BUDGET};
use crate::bigmath::{is_probable_prime, isqrt, DEFAULT_MR_ROUNDS};
use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeygenError {
    /// No residue up to r_max made the base prime.
    ResidueExhausted { r_max: BigUint },
    /// The requested parameters cannot produce an attackable key.
    Infeasible(String),
    /// gcd(e, phi(N)) != 1, so no private exponent exists.
    NonInvertible,
    /// A key violates a structural invariant.
    Invalid(String),
    /// A key file could not be decoded.
    Parse(String),
}

impl fmt::Display for KeygenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeygenError::ResidueExhausted { r_max } => {
                write!(f, "no residue up to {r_max} yields a prime")
            }
            KeygenError::Infeasible(msg) => write!(f, "infeasible parameters: {msg}"),
            KeygenError::NonInvertible => write!(f, "public exponent shares a factor with phi(N)"),
            KeygenError::Invalid(msg) => write!(f, "invalid key: {msg}"),
            KeygenError::Parse(msg) => write!(f, "malformed key file: {msg}"),
        }
    }
}

impl std::error::Error for KeygenError {}

/// The three supported modulus shapes: N = p*q, N = p^s*q, N = p^(s+l)*q^s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModulusShape {
    Pq,
    PsQ { s: u32 },
    PslQs { s: u32, l: u32 },
}

impl ModulusShape {
    pub fn ps_q(s: u32) -> Result<Self, KeygenError> {
        let shape = ModulusShape::PsQ { s };
        shape.validate()?;
        Ok(shape)
    }

    pub fn psl_qs(s: u32, l: u32) -> Result<Self, KeygenError> {
        let shape = ModulusShape::PslQs { s, l };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<(), KeygenError> {
        match *self {
            ModulusShape::Pq => Ok(()),
            ModulusShape::PsQ { s } => {
                if s < 2 {
                    Err(KeygenError::Invalid(format!("p^s*q requires s >= 2, got s={s}")))
                } else {
                    Ok(())
                }
            }
            ModulusShape::PslQs { s, l } => {
                if l < 1 || 2 * l >= s {
                    Err(KeygenError::Invalid(format!(
                        "p^(s+l)*q^s requires 1 <= l < s/2, got s={s} l={l}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModulusShape::Pq => "pq",
            ModulusShape::PsQ { .. } => "psq",
            ModulusShape::PslQs { .. } => "pslqs",
        }
    }

    pub fn s(&self) -> Option<u32> {
        match *self {
            ModulusShape::Pq => None,
            ModulusShape::PsQ { s } | ModulusShape::PslQs { s, .. } => Some(s),
        }
    }

    pub fn l(&self) -> Option<u32> {
        match *self {
            ModulusShape::PslQs { l, .. } => Some(l),
            _ => None,
        }
    }

    /// Exponents (on p, on q) in the modulus.
    pub fn exponents(&self) -> (u32, u32) {
        match *self {
            ModulusShape::Pq => (1, 1),
            ModulusShape::PsQ { s } => (s, 1),
            ModulusShape::PslQs { s, l } => (s + l, s),
        }
    }

    /// N = p^ep * q^eq for this shape.
    pub fn compose(&self, p: &BigUint, q: &BigUint) -> BigUint {
        let (ep, eq) = self.exponents();
        p.pow(ep) * q.pow(eq)
    }
}

/// A prime of the form p = a^m + r with a >= 2, m >= 1, r >= 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredPrime {
    pub p: BigUint,
    pub a: BigUint,
    pub m: u32,
    pub r: BigUint,
}

impl StructuredPrime {
    /// Build with full checks, including primality of a^m + r.
    pub fn new(a: BigUint, m: u32, r: BigUint) -> Result<Self, KeygenError> {
        if a < BigUint::from(2u32) {
            return Err(KeygenError::Invalid("base a must be >= 2".into()));
        }
        if m < 1 {
            return Err(KeygenError::Invalid("exponent m must be >= 1".into()));
        }
        if r.is_zero() {
            return Err(KeygenError::Invalid("residue r must be >= 1".into()));
        }
        let p = a.pow(m) + &r;
        if !is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
            return Err(KeygenError::Invalid(format!("{a}^{m} + {r} is not prime")));
        }
        Ok(StructuredPrime { p, a, m, r })
    }

    /// The perfect-power part a^m.
    pub fn power(&self) -> BigUint {
        self.a.pow(self.m)
    }
}

/// A generated or imported instance: modulus, both structured primes, and
/// optionally the RSA exponent pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VulnerableKey {
    pub shape: ModulusShape,
    pub n: BigUint,
    pub prime_p: StructuredPrime,
    pub prime_q: StructuredPrime,
    pub e: Option<BigUint>,
    pub d: Option<BigUint>,
}

impl VulnerableKey {
    /// Assemble a key from its primes, checking every shape invariant.
    pub fn from_parts(
        shape: ModulusShape,
        prime_p: StructuredPrime,
        prime_q: StructuredPrime,
    ) -> Result<Self, KeygenError> {
        let n = shape.compose(&prime_p.p, &prime_q.p);
        let key = VulnerableKey { shape, n, prime_p, prime_q, e: None, d: None };
        key.verify()?;
        Ok(key)
    }

    /// Re-check all structural invariants.
    pub fn verify(&self) -> Result<(), KeygenError> {
        self.shape.validate()?;
        for (label, sp) in [("p", &self.prime_p), ("q", &self.prime_q)] {
            if sp.a < BigUint::from(2u32) || sp.m < 1 || sp.r.is_zero() {
                return Err(KeygenError::Invalid(format!("{label}: malformed structured prime")));
            }
            if sp.power() + &sp.r != sp.p {
                return Err(KeygenError::Invalid(format!("{label} != a^m + r")));
            }
            if !is_probable_prime(&sp.p, DEFAULT_MR_ROUNDS) {
                return Err(KeygenError::Invalid(format!("{label} is not prime")));
            }
        }
        if self.prime_p.p == self.prime_q.p {
            return Err(KeygenError::Invalid("p and q must be distinct".into()));
        }
        if self.n != self.shape.compose(&self.prime_p.p, &self.prime_q.p) {
            return Err(KeygenError::Invalid("modulus does not match its factors".into()));
        }
        let pm = self.prime_p.power();
        let qm = self.prime_q.power();
        match self.shape {
            ModulusShape::Pq => {
                // scan target sqrt(a^m1 * b^m2) must be an integer, and the
                // powers must be within a factor of two of each other
                if qm <= pm || qm >= (&pm << 1) + 2u32 {
                    return Err(KeygenError::Invalid(
                        "pq shape needs a^m1 < b^m2 < 2*a^m1 + 1".into(),
                    ));
                }
                let prod = &pm * &qm;
                let root = isqrt(&prod);
                if &root * &root != prod {
                    return Err(KeygenError::Invalid(
                        "pq shape needs a^m1 * b^m2 to be a perfect square".into(),
                    ));
                }
            }
            ModulusShape::PsQ { s } => {
                if self.prime_q.m % s != 0 {
                    return Err(KeygenError::Invalid("p^s*q shape needs s | m2".into()));
                }
                let t = self.prime_q.m / s;
                // theorem hypothesis: q > p * b^(m2/s), i.e. b^(m2 - t) > a^m1
                if self.prime_q.a.pow(self.prime_q.m - t) <= pm {
                    return Err(KeygenError::Invalid(
                        "p^s*q shape needs b^(m2 - m2/s) > a^m1".into(),
                    ));
                }
                if self.prime_q.p <= self.prime_p.p {
                    return Err(KeygenError::Invalid("p^s*q shape needs q > p".into()));
                }
            }
            ModulusShape::PslQs { s, l } => {
                if (self.prime_p.m as u64 * l as u64) % s as u64 != 0 {
                    return Err(KeygenError::Invalid("p^(s+l)*q^s shape needs s | m1*l".into()));
                }
                let e1 = self.prime_p.m * l / s;
                // theorem hypothesis: q * a^(m1*l/s) < a^m1
                if &self.prime_q.p * self.prime_p.a.pow(e1) >= pm {
                    return Err(KeygenError::Invalid(
                        "p^(s+l)*q^s shape needs q * a^(m1*l/s) < a^m1".into(),
                    ));
                }
                if self.prime_p.p <= self.prime_q.p {
                    return Err(KeygenError::Invalid("p^(s+l)*q^s shape needs p > q".into()));
                }
            }
        }
        if let (Some(e), Some(d)) = (&self.e, &self.d) {
            let phi = self.phi();
            if (e * d) % &phi != BigUint::one() {
                return Err(KeygenError::Invalid("e*d != 1 mod phi(N)".into()));
            }
        }
        Ok(())
    }

    /// Euler's totient of N from the known factorization.
    pub fn phi(&self) -> BigUint {
        let (ep, eq) = self.shape.exponents();
        let p = &self.prime_p.p;
        let q = &self.prime_q.p;
        p.pow(ep - 1) * (p - 1u32) * q.pow(eq - 1) * (q - 1u32)
    }

    /// The attacker-known side channel: both residues plus the shape.
    pub fn hints(&self) -> HintSet {
        HintSet {
            r_p: self.prime_p.r.clone(),
            r_q: self.prime_q.r.clone(),
            shape: self.shape,
        }
    }

    /// Canonical single-line JSON encoding; all numbers are decimal strings.
    pub fn to_json(&self) -> String {
        let wire = KeyWire {
            shape: self.shape.name().to_string(),
            s: self.shape.s().map(|v| v.to_string()),
            l: self.shape.l().map(|v| v.to_string()),
            n: self.n.to_string(),
            p: self.prime_p.p.to_string(),
            q: self.prime_q.p.to_string(),
            a: self.prime_p.a.to_string(),
            b: self.prime_q.a.to_string(),
            m1: self.prime_p.m.to_string(),
            m2: self.prime_q.m.to_string(),
            rp: self.prime_p.r.to_string(),
            rq: self.prime_q.r.to_string(),
            e: self.e.as_ref().map(|v| v.to_string()),
            d: self.d.as_ref().map(|v| v.to_string()),
        };
        serde_json::to_string(&wire).expect("key serialization cannot fail")
    }

    /// Decode and fully re-verify a key file.
    pub fn from_json(text: &str) -> Result<Self, KeygenError> {
        let wire: KeyWire =
            serde_json::from_str(text).map_err(|e| KeygenError::Parse(e.to_string()))?;
        let shape = match wire.shape.as_str() {
            "pq" => {
                if wire.s.is_some() || wire.l.is_some() {
                    return Err(KeygenError::Parse("pq shape takes no s or l".into()));
                }
                ModulusShape::Pq
            }
            "psq" => {
                if wire.l.is_some() {
                    return Err(KeygenError::Parse("psq shape takes no l".into()));
                }
                let s = parse_u32(wire.s.as_deref().ok_or_else(|| {
                    KeygenError::Parse("psq shape needs s".into())
                })?)?;
                ModulusShape::ps_q(s)?
            }
            "pslqs" => {
                let s = parse_u32(wire.s.as_deref().ok_or_else(|| {
                    KeygenError::Parse("pslqs shape needs s".into())
                })?)?;
                let l = parse_u32(wire.l.as_deref().ok_or_else(|| {
                    KeygenError::Parse("pslqs shape needs l".into())
                })?)?;
                ModulusShape::psl_qs(s, l)?
            }
            other => return Err(KeygenError::Parse(format!("unknown shape {other:?}"))),
        };
        let prime_p = StructuredPrime::new(
            parse_big(&wire.a)?,
            parse_u32(&wire.m1)?,
            parse_big(&wire.rp)?,
        )?;
        let prime_q = StructuredPrime::new(
            parse_big(&wire.b)?,
            parse_u32(&wire.m2)?,
            parse_big(&wire.rq)?,
        )?;
        if prime_p.p != parse_big(&wire.p)? {
            return Err(KeygenError::Parse("p does not match a^m1 + rp".into()));
        }
        if prime_q.p != parse_big(&wire.q)? {
            return Err(KeygenError::Parse("q does not match b^m2 + rq".into()));
        }
        let mut key = VulnerableKey::from_parts(shape, prime_p, prime_q)?;
        if key.n != parse_big(&wire.n)? {
            return Err(KeygenError::Parse("n does not match the factorization".into()));
        }
        key.e = wire.e.as_deref().map(parse_big).transpose()?;
        key.d = wire.d.as_deref().map(parse_big).transpose()?;
        key.verify()?;
        Ok(key)
    }
}

#[derive(Serialize, Deserialize)]
struct KeyWire {
    shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<String>,
    n: String,
    p: String,
    q: String,
    a: String,
    b: String,
    m1: String,
    m2: String,
    rp: String,
    rq: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<String>,
}

fn parse_big(text: &str) -> Result<BigUint, KeygenError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(KeygenError::Parse(format!("not a decimal number: {text:?}")));
    }
    BigUint::parse_bytes(text.as_bytes(), 10)
        .ok_or_else(|| KeygenError::Parse(format!("not a decimal number: {text:?}")))
}

fn parse_u32(text: &str) -> Result<u32, KeygenError> {
    text.parse::<u32>().map_err(|_| KeygenError::Parse(format!("not a small number: {text:?}")))
}

/// Smallest residue of the right parity making a^m + r prime, scanning
/// r = 2, 4, 6, ... (odd base) or r = 3, 5, 7, ... (even base) up to r_max.
pub fn scan_residue(
    a: &BigUint,
    m: u32,
    r_max: &BigUint,
) -> Result<StructuredPrime, KeygenError> {
    assert!(*a >= BigUint::from(2u32) && m >= 1);
    let base = a.pow(m);
    let start: u32 = if base.bit(0) { 2 } else { 3 };
    let mut r = BigUint::from(start);
    while r <= *r_max {
        let p = &base + &r;
        if probably_prime_two_stage(&p) {
            return Ok(StructuredPrime { p, a: a.clone(), m, r });
        }
        r += 2u32;
    }
    Err(KeygenError::ResidueExhausted { r_max: r_max.clone() })
}

/// Cheap 2-round screen first, then the full default round count. Composites
/// almost always fail the first modexp, so scans stay fast.
fn probably_prime_two_stage(p: &BigUint) -> bool {
    if !is_probable_prime(p, 2) {
        return false;
    }
    p.bits() <= 64 || is_probable_prime(p, DEFAULT_MR_ROUNDS)
}

/// One random base draw of exactly base_bits bits followed by a residue scan.
/// Callers wanting a different base simply retry with another seed.
pub fn gen_structured_prime(
    base_bits: u64,
    m: u32,
    r_max: &BigUint,
    rng_seed: u64,
) -> Result<StructuredPrime, KeygenError> {
    assert!(base_bits >= 2, "base must have at least 2 bits");
    assert!(m >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let a = random_exact_bits(&mut rng, base_bits);
    scan_residue(&a, m, r_max)
}

fn random_exact_bits(rng: &mut ChaCha20Rng, bits: u64) -> BigUint {
    let mut a = rng.gen_biguint(bits);
    a.set_bit(bits - 1, true);
    a
}

/// Random base of exactly `bits` bits with the low bit forced, so that
/// a^m + r comes out odd for the fixed residue's parity.
fn random_exact_bits_parity(rng: &mut ChaCha20Rng, bits: u64, low_bit: bool) -> BigUint {
    let mut a = random_exact_bits(rng, bits);
    a.set_bit(0, low_bit);
    a
}

/// Base draw sized so a^m can have exactly target_bits bits; retries a few
/// times because the top end of the base range overshoots.
fn draw_base(rng: &mut ChaCha20Rng, target_bits: u64, m: u32) -> Option<BigUint> {
    let bb = target_bits.div_ceil(m as u64).max(2);
    for _ in 0..64 {
        let a = random_exact_bits(rng, bb);
        if a.pow(m).bits() == target_bits {
            return Some(a);
        }
    }
    None
}

fn draw_base_parity(
    rng: &mut ChaCha20Rng,
    target_bits: u64,
    m: u32,
    low_bit: bool,
) -> Option<BigUint> {
    let bb = target_bits.div_ceil(m as u64).max(2);
    for _ in 0..64 {
        let a = random_exact_bits_parity(rng, bb, low_bit);
        if a.pow(m).bits() == target_bits {
            return Some(a);
        }
    }
    None
}

const MAX_ATTEMPTS: u32 = 512;

/// Deterministic generation of an attackable key: primes of exactly
/// prime_bits bits for p, residues capped at 2^r_bits, and the scan target
/// guaranteed to sit inside the matching attack window under the default
/// window budget.
pub fn gen_key(
    shape: ModulusShape,
    prime_bits: u64,
    r_bits: u32,
    rng_seed: u64,
) -> Result<VulnerableKey, KeygenError> {
    shape.validate()?;
    if prime_bits < 16 {
        return Err(KeygenError::Infeasible("prime_bits must be at least 16".into()));
    }
    if r_bits < 2 {
        return Err(KeygenError::Infeasible("r_bits must be at least 2".into()));
    }
    let r_max = BigUint::one() << r_bits;
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    for _ in 0..MAX_ATTEMPTS {
        let candidate = match shape {
            ModulusShape::Pq => gen_pq(&mut rng, prime_bits, &r_max),
            ModulusShape::PsQ { s } => gen_psq(&mut rng, prime_bits, &r_max, s),
            ModulusShape::PslQs { s, l } => gen_pslqs(&mut rng, prime_bits, &r_max, s, l),
        };
        if let Some(key) = candidate {
            return Ok(key);
        }
    }
    Err(KeygenError::Infeasible(format!(
        "no attackable {} key found for prime_bits={prime_bits} r_bits={r_bits}",
        shape.name()
    )))
}

/// Like gen_key but with both residues fixed in advance; used to reproduce
/// specific parameter regimes exactly.
pub fn gen_key_with_residues(
    shape: ModulusShape,
    prime_bits: u64,
    r_p: &BigUint,
    r_q: &BigUint,
    rng_seed: u64,
) -> Result<VulnerableKey, KeygenError> {
    shape.validate()?;
    if prime_bits < 16 {
        return Err(KeygenError::Infeasible("prime_bits must be at least 16".into()));
    }
    if r_p.is_zero() || r_q.is_zero() {
        return Err(KeygenError::Infeasible("residues must be >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    for _ in 0..MAX_ATTEMPTS {
        let candidate = match shape {
            ModulusShape::Pq => gen_pq_fixed(&mut rng, prime_bits, r_p, r_q),
            ModulusShape::PsQ { s } => gen_psq_fixed(&mut rng, prime_bits, r_p, r_q, s),
            ModulusShape::PslQs { s, l } => gen_pslqs_fixed(&mut rng, prime_bits, r_p, r_q, s, l),
        };
        if let Some(key) = candidate {
            return Ok(key);
        }
    }
    Err(KeygenError::Infeasible(format!(
        "no attackable {} key found for prime_bits={prime_bits} rp={r_p} rq={r_q}",
        shape.name()
    )))
}

/// Scan target containment plus window-budget feasibility; every generated
/// key must pass before being returned.
fn attackable(key: &VulnerableKey) -> bool {
    let budget = BigUint::from(DEFAULT_WINDOW_BUDGET);
    let hints = key.hints();
    match key.shape {
        ModulusShape::Pq => {
            let Ok(win) = attack::window_pq(&key.n, &hints.r_p, &hints.r_q) else {
                return false;
            };
            if &hints.r_p * &hints.r_q > budget {
                return false;
            }
            let target = isqrt(&(key.prime_p.power() * key.prime_q.power()));
            win.lo <= target && target <= win.hi
        }
        ModulusShape::PsQ { s } => {
            let Ok(win) = attack::window_power_q(&key.n, s, &hints.r_p, &hints.r_q) else {
                return false;
            };
            if win.width() > budget {
                return false;
            }
            let t = key.prime_q.m / s;
            let target = &key.prime_p.p * key.prime_q.a.pow(t);
            win.lo <= target && target <= win.hi
        }
        ModulusShape::PslQs { s, l } => {
            let Ok(win) = attack::window_power_power(&key.n, s, l, &hints.r_p) else {
                return false;
            };
            if win.width() > budget {
                return false;
            }
            let e1 = key.prime_p.m * l / s;
            let gamma = &key.prime_q.p
                * key.prime_p.a.pow(e1)
                * (&key.prime_p.p * s + &hints.r_p * l);
            win.lo <= gamma && gamma <= win.hi
        }
    }
}

fn finish(
    shape: ModulusShape,
    prime_p: StructuredPrime,
    prime_q: StructuredPrime,
) -> Option<VulnerableKey> {
    let key = VulnerableKey::from_parts(shape, prime_p, prime_q).ok()?;
    attackable(&key).then_some(key)
}

fn gen_pq(rng: &mut ChaCha20Rng, prime_bits: u64, r_max: &BigUint) -> Option<VulnerableKey> {
    let m1 = *[2u32, 4, 6].choose(rng).unwrap();
    let a = draw_base(rng, prime_bits, m1)?;
    let sp_p = scan_residue(&a, m1, r_max).ok()?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let pm = sp_p.power();
    let pm_double = &pm << 1;
    // a^m1 * b^m2 must be a perfect square: keep m2 even, or make the base a
    // square when m2 is odd
    let odd_exponent = rng.gen_range(0..4u32) == 0;
    let (mut c, m2, square_base) = if odd_exponent {
        let m2 = *[3u32, 5].choose(rng).unwrap();
        (crate::bigmath::iroot(&pm, 2 * m2) + 1u32, m2, true)
    } else {
        let m2 = *[2u32, 4, 6].choose(rng).unwrap();
        (crate::bigmath::iroot(&pm, m2) + 1u32, m2, false)
    };
    for _ in 0..64 {
        let b = if square_base { &c * &c } else { c.clone() };
        let bpow = b.pow(m2);
        if bpow > pm_double {
            return None; // walked past 2*a^m1 without a prime
        }
        if bpow > pm {
            if let Ok(sp_q) = scan_residue(&b, m2, r_max) {
                if sp_q.p != sp_p.p {
                    if let Some(key) = finish(ModulusShape::Pq, sp_p.clone(), sp_q) {
                        return Some(key);
                    }
                }
            }
        }
        c += 1u32;
    }
    None
}

fn gen_psq(
    rng: &mut ChaCha20Rng,
    prime_bits: u64,
    r_max: &BigUint,
    s: u32,
) -> Option<VulnerableKey> {
    let m1 = *[2u32, 3, 4].choose(rng).unwrap();
    let a = draw_base(rng, prime_bits, m1)?;
    let sp_p = scan_residue(&a, m1, r_max).ok()?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let t = *[1u32, 2].choose(rng).unwrap();
    let m2 = s * t;
    // q must dominate p * b^(m2/s): a couple of guard bits over the minimum
    let q_bits = (prime_bits * s as u64).div_ceil((s - 1) as u64) + 2;
    let b = draw_base(rng, q_bits, m2)?;
    if b.pow(m2 - t) <= sp_p.power() {
        return None;
    }
    let sp_q = scan_residue(&b, m2, r_max).ok()?;
    if sp_q.p <= sp_p.p {
        return None;
    }
    finish(ModulusShape::PsQ { s }, sp_p, sp_q)
}

fn pslqs_m1_menu(prime_bits: u64, s: u32, l: u32) -> Vec<u32> {
    let unit = s / s.gcd(&l);
    [unit, 2 * unit, 3 * unit]
        .into_iter()
        .filter(|&m1| (m1 as u64) < prime_bits)
        .collect()
}

fn gen_pslqs(
    rng: &mut ChaCha20Rng,
    prime_bits: u64,
    r_max: &BigUint,
    s: u32,
    l: u32,
) -> Option<VulnerableKey> {
    let menu = pslqs_m1_menu(prime_bits, s, l);
    let m1 = *menu.choose(rng)?;
    let a = draw_base(rng, prime_bits, m1)?;
    let sp_p = scan_residue(&a, m1, r_max).ok()?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let e1 = m1 * l / s;
    // hypothesis q * a^(m1*l/s) < a^m1, so q must stay under a^(m1 - e1)
    let cap = a.pow(m1 - e1);
    let cap_bits = cap.bits();
    if cap_bits < 8 {
        return None;
    }
    let q_bits = cap_bits - 2;
    let m2_menu: Vec<u32> = [2u32, 3].into_iter().filter(|&m| (m as u64) < q_bits).collect();
    let m2 = *m2_menu.choose(rng)?;
    let b = draw_base(rng, q_bits, m2)?;
    let sp_q = scan_residue(&b, m2, r_max).ok()?;
    if &sp_q.p * a.pow(e1) >= sp_p.power() {
        return None;
    }
    finish(ModulusShape::PslQs { s, l }, sp_p, sp_q)
}

/// Fixed-residue prime probe: random bases of the parity that keeps
/// a^m + r odd, until one lands prime.
fn probe_fixed_residue(
    rng: &mut ChaCha20Rng,
    target_bits: u64,
    m: u32,
    r: &BigUint,
) -> Option<StructuredPrime> {
    // a^m must have the opposite parity of r
    let base_low_bit = !r.bit(0);
    let draws = 64 + 16 * target_bits;
    for _ in 0..draws {
        let Some(a) = draw_base_parity(rng, target_bits, m, base_low_bit) else {
            return None;
        };
        let p = a.pow(m) + r;
        if probably_prime_two_stage(&p) {
            return Some(StructuredPrime { p, a, m, r: r.clone() });
        }
    }
    None
}

fn gen_pq_fixed(
    rng: &mut ChaCha20Rng,
    prime_bits: u64,
    r_p: &BigUint,
    r_q: &BigUint,
) -> Option<VulnerableKey> {
    let sp_p = probe_fixed_residue(rng, prime_bits, 2, r_p)?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let pm = sp_p.power();
    let pm_double = &pm << 1;
    // walk b upward from a, parity fixed so b^2 + r_q is odd
    let b_low_bit = !r_q.bit(0);
    let mut b = &sp_p.a + 1u32;
    if b.bit(0) != b_low_bit {
        b += 1u32;
    }
    let limit = 64 + 32 * prime_bits;
    for _ in 0..limit {
        let bpow = &b * &b;
        if bpow > pm_double {
            return None;
        }
        let q = &bpow + r_q;
        if probably_prime_two_stage(&q) && q != sp_p.p {
            let sp_q = StructuredPrime { p: q, a: b.clone(), m: 2, r: r_q.clone() };
            if let Some(key) = finish(ModulusShape::Pq, sp_p.clone(), sp_q) {
                return Some(key);
            }
        }
        b += 2u32;
    }
    None
}

fn gen_psq_fixed(
    rng: &mut ChaCha20Rng,
    prime_bits: u64,
    r_p: &BigUint,
    r_q: &BigUint,
    s: u32,
) -> Option<VulnerableKey> {
    let sp_p = probe_fixed_residue(rng, prime_bits, 2, r_p)?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let q_bits = (prime_bits * s as u64).div_ceil((s - 1) as u64) + 2;
    let b_low_bit = !r_q.bit(0);
    for _ in 0..(64 + 16 * q_bits) {
        let Some(b) = draw_base_parity(rng, q_bits, s, b_low_bit) else {
            return None;
        };
        if b.pow(s - 1) <= sp_p.power() {
            continue;
        }
        let q = b.pow(s) + r_q;
        if probably_prime_two_stage(&q) && q > sp_p.p {
            let sp_q = StructuredPrime { p: q, a: b, m: s, r: r_q.clone() };
            if let Some(key) = finish(ModulusShape::PsQ { s }, sp_p.clone(), sp_q) {
                return Some(key);
            }
        }
    }
    None
}

fn gen_pslqs_fixed(
    rng: &mut ChaCha20Rng,
    prime_bits: u64,
    r_p: &BigUint,
    r_q: &BigUint,
    s: u32,
    l: u32,
) -> Option<VulnerableKey> {
    let m1 = *pslqs_m1_menu(prime_bits, s, l).first()?;
    let sp_p = probe_fixed_residue(rng, prime_bits, m1, r_p)?;
    if sp_p.p.bits() != prime_bits {
        return None;
    }
    let e1 = m1 * l / s;
    let cap_bits = sp_p.a.pow(m1 - e1).bits();
    if cap_bits < 8 {
        return None;
    }
    let q_bits = cap_bits - 2;
    let b_low_bit = !r_q.bit(0);
    for _ in 0..(64 + 16 * q_bits) {
        let Some(b) = draw_base_parity(rng, q_bits, 2, b_low_bit) else {
            return None;
        };
        let q = &b * &b + r_q;
        if probably_prime_two_stage(&q) && &q * sp_p.a.pow(e1) < sp_p.power() {
            let sp_q = StructuredPrime { p: q, a: b, m: 2, r: r_q.clone() };
            if let Some(key) = finish(ModulusShape::PslQs { s, l }, sp_p.clone(), sp_q) {
                return Some(key);
            }
        }
    }
    None
}

/// Attach an RSA exponent pair: d = e^-1 mod phi(N).
pub fn assemble_rsa(mut key: VulnerableKey, e: &BigUint) -> Result<VulnerableKey, KeygenError> {
    if e.is_zero() {
        return Err(KeygenError::Infeasible("public exponent must be >= 1".into()));
    }
    let phi = key.phi();
    let d = modinv(e, &phi).ok_or(KeygenError::NonInvertible)?;
    key.e = Some(e.clone());
    key.d = Some(d);
    Ok(key)
}

/// Modular inverse via the extended Euclidean algorithm.
fn modinv(e: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let ext = BigInt::from(e.clone()).extended_gcd(&BigInt::from(m.clone()));
    if !ext.gcd.is_one() {
        return None;
    }
    let m_int = BigInt::from(m.clone());
    let mut x = ext.x % &m_int;
    if x.is_negative() {
        x += &m_int;
    }
    x.to_biguint()
}
