//! Factoring attacks on RSA-type moduli N = p*q, N = p^s*q and
//! N = p^(s+l)*q^s whose prime factors have the structure p = a^m + r with
//! the residue r known to the attacker. Window sizes depend polynomially on
//! the residues, not on N, which is what makes such keys brittle.
//!
//! - [`bigmath`]: integer roots, perfect powers, primality, exact quadratics
//! - [`keygen`]: vulnerable-instance generation and key files
//! - [`attack`]: the three window-scan attacks
//! - [`oracle`]: independent ground-truth factorizers for cross-checking
//! - [`bench`]: sweep harness with CSV output

pub mod attack;
pub mod bench;
pub mod bigmath;
pub mod keygen;
pub mod oracle;
