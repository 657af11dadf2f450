//! Classical polylogarithms Li_k(z) = Σ_{n>0} z^n/n^k on the real segment |z| ≤ 1.

use crate::consts::{eta_bits, zeta_bits};
use crate::error::{Error, Result};
use crate::precision::{BigReal, Precision};
use crate::series::alternating_sum;

/// Li_k(z) at precision `p`. Requires `|z| ≤ 1`, and `z < 1` when `k = 1`.
pub fn li_classical(k: u32, z: &BigReal, p: Precision) -> Result<BigReal> {
    li(k, &z.with_bits(p.bits()))
}

/// Li_k(z) at the precision carried by `z`.
pub fn li(k: u32, z: &BigReal) -> Result<BigReal> {
    let bits = z.bits();
    if k == 0 {
        return Err(Error::domain("li", "weight must be at least 1"));
    }
    let one = BigReal::one(bits);
    if z.abs() > one {
        return Err(Error::domain("li", format!("|z| = {} > 1", z.abs().to_sci_string(8))));
    }
    if z.is_zero() {
        return Ok(BigReal::zero(bits));
    }
    if k == 1 {
        if *z == one {
            return Err(Error::domain("li", "Li_1(1) diverges"));
        }
        return (one - z).ln().map(|l| -l);
    }
    if *z == one {
        return zeta_bits(k as i64, bits);
    }
    if *z == -&one {
        return Ok(-eta_bits(k, bits));
    }
    let half = BigReal::ratio(1, 2, bits);
    if *z < -&half {
        // Li_k(−x) = −Σ_{j≥0} (−1)^j x^{j+1}/(j+1)^k
        let x = -z;
        let work = bits + 8;
        let x = x.with_bits(work);
        let s = alternating_sum(work, |j| {
            let n = j as u64 + 1;
            &x.powi(n as u32) / &int_pow(n, k, work)
        });
        return Ok((-s).with_bits(bits));
    }
    if k == 2 && *z > half {
        // reflection: Li₂(z) + Li₂(1−z) = ζ₂ − ln z ln(1−z)
        let w = &one - z;
        let refl = li(2, &w)?;
        return Ok(zeta_bits(2, bits)? - &z.ln()? * &w.ln()? - refl);
    }
    Ok(direct_series(k, z))
}

/// n^k as a big real, exact when it fits 128 bits.
pub(crate) fn int_pow(n: u64, k: u32, bits: usize) -> BigReal {
    if (k as f64) * (n as f64).log2() < 127.0 {
        BigReal::from_u128((n as u128).pow(k), bits)
    } else {
        BigReal::from_u64(n, bits).powi(k)
    }
}

/// Σ z^n/n^k with a geometric tail bound relative to the first term.
fn direct_series(k: u32, z: &BigReal) -> BigReal {
    let bits = z.bits();
    let work = bits + 8;
    let r = z.abs().to_f64();
    let log_r = r.log2();
    let tail_log2 = |n: f64| (n + 1.0) * log_r - (k as f64) * (n + 1.0).log2() - (1.0 - r).log2() - log_r;
    let mut n_max = 1.0f64;
    while tail_log2(n_max) > -(work as f64) {
        n_max = (n_max * 1.25).ceil();
    }
    let n_max = n_max as u64;
    let z = z.with_bits(work);
    let mut pw = z.clone();
    let mut s = z.clone();
    for n in 2..=n_max {
        pw *= &z;
        s += &pw / &int_pow(n, k, work);
    }
    s.with_bits(bits)
}

/// Li_k(z) for real z < −1 by the inversion relation
/// Li_k(−x) = (−1)^{k−1} Li_k(−1/x) − ln^k(x)/k! − 2 Σ_{r=1}^{⌊k/2⌋} η(2r) ln^{k−2r}(x)/(k−2r)!.
pub fn li_inverted(k: u32, z: &BigReal) -> Result<BigReal> {
    let bits = z.bits();
    if *z >= -BigReal::one(bits) {
        return Err(Error::domain("li_inverted", "inversion needs z < −1"));
    }
    let x = -z;
    let lx = x.ln()?;
    let mut v = li(k, &(-x.recip()))?;
    if k % 2 == 0 {
        v = -v;
    }
    v -= lx.powi(k) / factorial(k, bits);
    for r in 1..=k / 2 {
        let t = eta_bits(2 * r, bits) * lx.powi(k - 2 * r) / factorial(k - 2 * r, bits);
        v -= t.mul_int(2);
    }
    Ok(v)
}

pub(crate) fn factorial(n: u32, bits: usize) -> BigReal {
    (1..=n as i64).fold(BigReal::one(bits), |acc, i| acc.mul_int(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::zeta;

    fn p60() -> Precision {
        Precision::new(60).unwrap()
    }

    fn close(a: &BigReal, b: &BigReal, digits: i64) -> bool {
        (a - b).abs().log10_abs() < -(digits as f64)
    }

    #[test]
    fn li2_half_closed_form() {
        let p = p60();
        let bits = p.bits();
        let v = li_classical(2, &BigReal::ratio(1, 2, bits), p).unwrap();
        let l2 = BigReal::ln2(bits);
        let expect = zeta(2, p).unwrap().div_int(2) - l2.square().div_int(2);
        assert!(close(&v, &expect, 58));
    }

    #[test]
    fn li1_is_log() {
        let p = p60();
        let v = li_classical(1, &BigReal::ratio(1, 2, p.bits()), p).unwrap();
        assert!(close(&v, &BigReal::ln2(p.bits()), 58));
    }

    #[test]
    fn li2_quarter_against_frozen_value() {
        // 60 direct terms with geometric tail < 4^-60: 0.267652639082732606919183828488...
        let p = Precision::new(30).unwrap();
        let v = li_classical(2, &BigReal::ratio(1, 4, p.bits()), p).unwrap();
        assert_eq!(v.to_sci_string(30), "2.67652639082732606919183828488e-1");
        let mut s = 0.0f64;
        for n in 1..=60 {
            s += 0.25f64.powi(n) / (n * n) as f64;
        }
        assert!((s - v.to_f64()).abs() < 1e-15);
    }

    #[test]
    fn unit_circle_closed_forms() {
        let p = p60();
        let bits = p.bits();
        let l3m1 = li(3, &BigReal::from_i64(-1, bits)).unwrap();
        let expect = -zeta(3, p).unwrap().mul_int(3).div_int(4);
        assert!(close(&l3m1, &expect, 58));
        assert_eq!(li(4, &BigReal::one(bits)).unwrap(), zeta(4, p).unwrap());
    }

    #[test]
    fn negative_arguments_agree_across_routes() {
        // CVZ route at z = −0.6 versus the identity Li_k(z)+Li_k(−z) = 2^{1−k} Li_k(z²)
        let bits = p60().bits();
        for k in 2..=5u32 {
            let z = BigReal::ratio(-3, 5, bits);
            let lhs = li(k, &z).unwrap() + li(k, &-&z).unwrap();
            let rhs = BigReal::pow2(1 - k as i64, bits) * li(k, &z.square()).unwrap();
            assert!(close(&lhs, &rhs, 57), "k = {k}");
        }
    }

    #[test]
    fn reflection_route_matches_direct() {
        let bits = p60().bits();
        let z = BigReal::ratio(7, 10, bits);
        let a = li(2, &z).unwrap();
        let b = direct_series(2, &z);
        assert!(close(&a, &b, 57));
    }

    #[test]
    fn domain_errors() {
        let bits = p60().bits();
        assert!(li(2, &BigReal::ratio(11, 10, bits)).is_err());
        assert!(li(1, &BigReal::one(bits)).is_err());
        assert!(li(0, &BigReal::ratio(1, 2, bits)).is_err());
    }

    #[test]
    fn inversion_at_minus_three() {
        // Li₃(−3) = Li₃(−1/3) − π² ln3/6 − ln³3/6
        let bits = p60().bits();
        let v = li_inverted(3, &BigReal::from_i64(-3, bits)).unwrap();
        let l3 = BigReal::from_u64(3, bits).ln().unwrap();
        let expect = li(3, &BigReal::ratio(-1, 3, bits)).unwrap()
            - BigReal::pi(bits).square() * &l3 / BigReal::from_u64(6, bits)
            - l3.powi(3).div_int(6);
        assert!(close(&v, &expect, 57));
        // Li₂(−x) = −Li₂(−1/x) − ln²x/2 − ζ₂
        let v2 = li_inverted(2, &BigReal::from_i64(-4, bits)).unwrap();
        let l4 = BigReal::from_u64(4, bits).ln().unwrap();
        let e2 = -li(2, &BigReal::ratio(-1, 4, bits)).unwrap() - l4.square().div_int(2)
            - zeta_bits(2, bits).unwrap();
        assert!(close(&v2, &e2, 57));
    }
}
