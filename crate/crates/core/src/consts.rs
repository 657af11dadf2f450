//! Fundamental constants: Euler's γ, e^γ, ζ(k), π, log 2.
//!
//! Values are memoized per `(constant, bits)`. The memo is a global mutex-held
//! map; concurrent first access may compute the same value twice, which is
//! harmless since the computation is deterministic.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::precision::{BigReal, Precision};
use crate::series::alternating_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Gamma,
    ExpGamma,
    ExpMinusGamma,
    Zeta(u32),
}

fn memo() -> &'static Mutex<HashMap<(Key, usize), BigReal>> {
    static MEMO: OnceLock<Mutex<HashMap<(Key, usize), BigReal>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: Key, bits: usize, compute: impl FnOnce() -> BigReal) -> BigReal {
    if let Some(v) = memo().lock().expect("constant memo").get(&(key, bits)) {
        return v.clone();
    }
    let v = compute();
    memo()
        .lock()
        .expect("constant memo")
        .insert((key, bits), v.clone());
    v
}

/// Euler–Mascheroni constant γ.
pub fn euler_gamma(p: Precision) -> BigReal {
    euler_gamma_bits(p.bits())
}

pub fn euler_gamma_bits(bits: usize) -> BigReal {
    cached(Key::Gamma, bits, || brent_mcmillan(bits))
}

pub fn exp_gamma_bits(bits: usize) -> BigReal {
    cached(Key::ExpGamma, bits, || euler_gamma_bits(bits).exp())
}

pub fn exp_minus_gamma_bits(bits: usize) -> BigReal {
    cached(Key::ExpMinusGamma, bits, || (-euler_gamma_bits(bits)).exp())
}

/// Brent–McMillan: γ = U/V − O(e^{−4n}) with Bessel-type sums
/// U = Σ (n^k/k!)² (H_k − ln n), V = Σ (n^k/k!)².
fn brent_mcmillan(bits: usize) -> BigReal {
    let n = ((bits as f64) * std::f64::consts::LN_2 / 4.0).ceil() as u64 + 2;
    let work = bits + 32 + 64 - (n.leading_zeros() as usize);
    let n_sq = BigReal::from_u64(n * n, work);
    let mut a = -BigReal::from_u64(n, work).ln().expect("ln n");
    let mut b = BigReal::one(work);
    let mut u = a.clone();
    let mut v = b.clone();
    let mut k: u64 = 1;
    loop {
        b = (&b * &n_sq).div_int((k * k) as i64);
        a = (&(&a * &n_sq).div_int(k as i64) + &b).div_int(k as i64);
        u += &a;
        v += &b;
        if k > n {
            let lim = v.log10_abs() - (work as f64) * std::f64::consts::LOG10_2;
            if b.log10_abs() < lim && a.log10_abs() < lim {
                break;
            }
        }
        k += 1;
    }
    (u / v).with_bits(bits)
}

/// Riemann zeta at integer `k ≥ 2`; `k ≤ 1` is a domain error.
pub fn zeta(k: i64, p: Precision) -> Result<BigReal> {
    zeta_bits(k, p.bits())
}

pub fn zeta_bits(k: i64, bits: usize) -> Result<BigReal> {
    if k <= 1 {
        return Err(Error::domain("zeta", format!("ζ({k}) diverges or is out of range")));
    }
    let k = k as u32;
    Ok(cached(Key::Zeta(k), bits, || {
        if k == 2 {
            BigReal::pi(bits).square().div_int(6)
        } else {
            let eta = eta_bits(k, bits);
            let factor = BigReal::one(bits + 16) - BigReal::pow2(1 - k as i64, bits + 16);
            (eta.with_bits(bits + 16) / factor).with_bits(bits)
        }
    }))
}

/// Dirichlet eta η(k) = Σ_{n≥1} (−1)^{n−1}/n^k, k ≥ 1.
pub fn eta_bits(k: u32, bits: usize) -> BigReal {
    if k == 1 {
        return BigReal::ln2(bits);
    }
    let work = bits + 16;
    alternating_sum(work, |j| BigReal::from_u64(j as u64 + 1, work).powi(k).recip()).with_bits(bits)
}

/// Positive integer logarithm ln(m).
pub fn ln_int(m: u64, bits: usize) -> BigReal {
    BigReal::from_u64(m, bits).ln().expect("positive integer")
}

#[cfg(test)]
mod tests {
    use super::*;

    // 110 digits of γ, frozen from an independent high-precision evaluation (mpmath).
    const GAMMA_110: &str = "5.7721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951463144725e-1";
    const ZETA3_60: &str = "1.20205690315959428539973816151144999076498629234049888179227e0";

    fn prefix(s: &str, n: usize) -> String {
        s.chars().take(n).collect()
    }

    #[test]
    fn gamma_thirty_digits() {
        let g = euler_gamma(Precision::new(30).unwrap());
        assert_eq!(g.to_sci_string(30), "5.77215664901532860606512090082e-1");
    }

    #[test]
    fn gamma_hundred_digits_and_consistency() {
        let g100 = euler_gamma(Precision::new(100).unwrap()).to_sci_string(100);
        assert_eq!(prefix(&g100, 95), prefix(GAMMA_110, 95));
        let g30 = euler_gamma(Precision::new(30).unwrap()).to_sci_string(30);
        assert_eq!(prefix(&g30, 30), prefix(&g100, 30));
    }

    #[test]
    fn gamma_derived_checks() {
        let bits = Precision::new(30).unwrap().bits();
        let emg = exp_minus_gamma_bits(bits);
        assert_eq!(emg.mul_int(2).to_sci_string(5), "1.1229e0");
        let m = &emg - &euler_gamma_bits(bits);
        assert_eq!(m.to_sci_string(5), "-1.5756e-2");
    }

    #[test]
    fn zeta_values() {
        let p = Precision::new(60).unwrap();
        let z2 = zeta(2, p).unwrap();
        let ratio = &z2.mul_int(6) / &BigReal::pi(p.bits()).square();
        assert!((ratio - BigReal::one(p.bits())).abs() < p.epsilon());
        let z3 = zeta(3, p).unwrap().to_sci_string(58);
        assert_eq!(prefix(&z3, 58), prefix(ZETA3_60, 58));
        assert!(matches!(zeta(1, p), Err(Error::Domain { .. })));
    }

    #[test]
    fn zeta3_against_direct_series() {
        // Σ_{n≤N} n^-3 + tail, with the Euler–Maclaurin tail 1/(2N²) − 1/(2N³) + 1/(4N⁴)
        let n = 2000u64;
        let mut s = 0.0f64;
        for i in (1..=n).rev() {
            s += 1.0 / (i as f64).powi(3);
        }
        let nf = n as f64;
        s += 1.0 / (2.0 * nf * nf) - 1.0 / (2.0 * nf.powi(3)) + 1.0 / (4.0 * nf.powi(4));
        let z3 = zeta(3, Precision::new(30).unwrap()).unwrap().to_f64();
        assert!((s - z3).abs() < 1e-13, "{s} vs {z3}");
    }

    #[test]
    fn large_zeta_tends_to_one() {
        let p = Precision::new(40).unwrap();
        let z = zeta(40, p).unwrap();
        // ζ(40) − 1 ≈ 2^−40
        let d = (z - BigReal::one(p.bits())).to_f64();
        assert!((d / 2f64.powi(-40) - 1.0).abs() < 1e-6);
    }
}
