//! Independent ground-truth factorizers for cross-checking attack outputs at
//! desk scale: trial division, Fermat's difference-of-squares method, and a
//! brute-force search for structured representations p = a^m + r.

use crate::bigmath::{iroot, isqrt, perfect_root};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Strip every prime factor <= bound from n. Returns (factor, multiplicity)
/// pairs in increasing factor order plus the remaining cofactor, which is 1
/// exactly when the factorization is complete.
pub fn trial_division(n: &BigUint, bound: &BigUint) -> (Vec<(BigUint, u32)>, BigUint) {
    assert!(*n >= BigUint::from(2u32), "trial_division: n must be >= 2");
    let mut rem = n.clone();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut d = BigUint::from(2u32);
    // candidates 2, 3, then 6k +- 1
    let mut step = 2u32;
    while &d * &d <= rem && d <= *bound {
        let mut mult = 0u32;
        while (&rem % &d).is_zero() {
            rem /= &d;
            mult += 1;
        }
        if mult > 0 {
            factors.push((d.clone(), mult));
        }
        if d == BigUint::from(2u32) {
            d = BigUint::from(3u32);
        } else if d == BigUint::from(3u32) {
            d = BigUint::from(5u32);
        } else {
            d += step;
            step = 6 - step;
        }
    }
    if rem > BigUint::one() && rem <= *bound {
        // no candidate below sqrt(rem) divides it, so the remainder is prime
        factors.push((rem.clone(), 1));
        rem = BigUint::one();
    }
    (factors, rem)
}

/// Fermat's method: ascending x from ceil(sqrt(N)), looking for x^2 - N = y^2.
/// Returns the first nontrivial split (p, q) with p <= q, or None once
/// max_steps values of x have been tried. N must be odd and >= 9.
pub fn fermat_factor(n: &BigUint, max_steps: u64) -> Option<(BigUint, BigUint)> {
    assert!(n.bit(0) && *n >= BigUint::from(9u32), "fermat_factor: n must be odd and >= 9");
    let mut x = isqrt(n);
    if &x * &x < *n {
        x += 1u32;
    }
    let mut d = &x * &x - n; // x^2 - N, maintained incrementally
    for _ in 0..max_steps {
        if let Some(y) = exact_sqrt(&d) {
            let p = &x - &y;
            // a trivial split (x - y = 1) means keep looking
            if p > BigUint::one() {
                return Some((p, &x + &y));
            }
        }
        d += (&x << 1) + 1u32;
        x += 1u32;
    }
    None
}

fn exact_sqrt(d: &BigUint) -> Option<BigUint> {
    if d.is_zero() {
        return Some(BigUint::zero());
    }
    perfect_root(d, 2)
}

/// Every representation p = a^m + r with a >= 2, 1 <= m <= m_max and
/// 1 <= r <= r_max, in (m, r) lexicographic order. The m = 1 family
/// (a = p - r) is degenerate but part of the enumeration; callers interested
/// in attack-relevant structure should filter to m >= 2.
pub fn brute_force_structured(
    p: &BigUint,
    r_max: &BigUint,
    m_max: u32,
) -> Vec<(BigUint, u32, BigUint)> {
    assert!(*p >= BigUint::from(3u32), "brute_force_structured: p must be >= 3");
    assert!(m_max >= 1);
    let two = BigUint::from(2u32);
    let mut out = Vec::new();
    for m in 1..=m_max {
        let mut r = BigUint::one();
        while r <= *r_max {
            // a^m = p - r must be at least 2
            if *p < &r + &two {
                break;
            }
            let t = p - &r;
            let a = iroot(&t, m);
            if a >= two && a.pow(m) == t {
                out.push((a, m, r.clone()));
            }
            r += 1u32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn trial_division_desk_values() {
        let (factors, cofactor) = trial_division(&big(395307), &big(1000));
        assert_eq!(factors, vec![(big(3), 3), (big(11), 4)]);
        assert!(cofactor.is_one());

        let (factors, cofactor) = trial_division(&big(551), &big(29));
        assert_eq!(factors, vec![(big(19), 1), (big(29), 1)]);
        assert!(cofactor.is_one());

        // bound below both factors leaves everything in the cofactor
        let (factors, cofactor) = trial_division(&big(551), &big(18));
        assert!(factors.is_empty());
        assert_eq!(cofactor, big(551));

        // prime remainder above the bound stays unfactored
        let (factors, cofactor) = trial_division(&big(2075), &big(10));
        assert_eq!(factors, vec![(big(5), 2)]);
        assert_eq!(cofactor, big(83));

        let (factors, cofactor) = trial_division(&big(7), &big(100));
        assert_eq!(factors, vec![(big(7), 1)]);
        assert!(cofactor.is_one());

        let (factors, cofactor) = trial_division(&big(1024), &big(2));
        assert_eq!(factors, vec![(big(2), 10)]);
        assert!(cofactor.is_one());
    }

    #[test]
    fn trial_division_recomposes() {
        for n in 2u64..=20_000 {
            let nb = big(n);
            let (factors, cofactor) = trial_division(&nb, &nb);
            assert!(cofactor.is_one(), "n={n} left a cofactor");
            let mut prod = BigUint::one();
            let mut prev = BigUint::zero();
            for (f, m) in &factors {
                assert!(*f > prev, "factors out of order for n={n}");
                prev = f.clone();
                prod *= f.pow(*m);
            }
            assert_eq!(prod, nb, "n={n} does not recompose");
        }
    }

    #[test]
    fn fermat_desk_values() {
        assert_eq!(fermat_factor(&big(551), 100), Some((big(19), big(29))));
        // odd prime square factors at the first step
        assert_eq!(fermat_factor(&big(841), 1), Some((big(29), big(29))));
        // a prime has no nontrivial split
        assert_eq!(fermat_factor(&big(101), 1000), None);
        // zero step budget examines nothing, even though x = 24 would hit
        assert_eq!(fermat_factor(&big(551), 0), None);
        assert_eq!(fermat_factor(&big(551), 1), Some((big(19), big(29))));
    }

    #[test]
    fn fermat_agrees_with_trial_division_on_odd_semiprimes() {
        // exhaustive over odd semiprimes p*q < 10^5 (p, q odd primes),
        // with the step budget sized from the known factors
        const LIMIT: u64 = 100_000;
        let mut sieve = vec![true; (LIMIT / 3 + 1) as usize];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2usize;
        while i * i < sieve.len() {
            if sieve[i] {
                let mut j = i * i;
                while j < sieve.len() {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        let primes: Vec<u64> = (3..sieve.len() as u64).filter(|&p| sieve[p as usize]).collect();
        let mut checked = 0u64;
        for (ip, &p) in primes.iter().enumerate() {
            if p * p >= LIMIT {
                break;
            }
            for &q in &primes[ip..] {
                let n = p * q;
                if n >= LIMIT {
                    break;
                }
                let nb = big(n);
                let x_hit = (p + q) / 2;
                let steps = x_hit - isqrt(&nb).to_u64().unwrap() + 2;
                let got = fermat_factor(&nb, steps);
                assert_eq!(got, Some((big(p), big(q))), "fermat missed {p}*{q}");
                let (factors, cofactor) = trial_division(&nb, &nb);
                assert!(cofactor.is_one());
                let expected = if p == q {
                    vec![(big(p), 2)]
                } else {
                    vec![(big(p), 1), (big(q), 1)]
                };
                assert_eq!(factors, expected, "trial division missed {p}*{q}");
                checked += 1;
            }
        }
        assert!(checked > 10_000, "only {checked} semiprimes covered");
    }

    #[test]
    fn brute_force_structured_desk_values() {
        let reps = brute_force_structured(&big(19), &big(16), 8);
        // all entries must recompose
        for (a, m, r) in &reps {
            assert_eq!(a.pow(*m) + r, big(19));
            assert!(*a >= big(2));
            assert!(*r >= BigUint::one() && *r <= big(16));
        }
        // the attack-relevant representations
        assert!(reps.contains(&(big(2), 4, big(3))));
        assert!(reps.contains(&(big(4), 2, big(3))));
        assert!(reps.contains(&(big(2), 3, big(11))));
        assert!(reps.contains(&(big(3), 2, big(10))));
        // the degenerate m = 1 family: a = 19 - r for every r up to 16
        let m1: Vec<_> = reps.iter().filter(|(_, m, _)| *m == 1).collect();
        assert_eq!(m1.len(), 16);
        // ordering is (m, r) lexicographic
        let mut sorted = reps.clone();
        sorted.sort_by(|x, y| (x.1, x.2.clone()).cmp(&(y.1, y.2.clone())));
        assert_eq!(reps, sorted);
    }

    #[test]
    fn brute_force_structured_matches_direct_enumeration() {
        // oracle-on-oracle: recompute by enumerating a^m + r directly
        for p in [29u64, 83, 101, 16411] {
            let pb = big(p);
            let reps = brute_force_structured(&pb, &big(64), 10);
            let mut expected = Vec::new();
            for m in 1u32..=10 {
                for r in 1u64..=64 {
                    if p <= r + 1 {
                        continue;
                    }
                    let t = p - r;
                    let mut a = 2u64;
                    loop {
                        let power = big(a).pow(m);
                        if power > big(t) {
                            break;
                        }
                        if power == big(t) {
                            expected.push((big(a), m, big(r)));
                        }
                        a += 1;
                    }
                }
            }
            expected.sort_by(|x, y| (x.1, x.2.clone()).cmp(&(y.1, y.2.clone())));
            assert_eq!(reps, expected, "mismatch for p={p}");
        }
    }
}
