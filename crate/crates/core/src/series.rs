//! Series acceleration.

use crate::precision::BigReal;

/// Σ_{k≥0} (−1)^k a_k for a totally monotone sequence `a` (a Hausdorff moment
/// sequence, e.g. `x^(k+1)/(k+1)^s` with `0 ≤ x ≤ 1`), by the
/// Cohen–Villegas–Zagier Chebyshev acceleration. The error after `n` terms is
/// at most `2·a_0/5.828^n`; `n` is chosen for `bits` of accuracy.
pub fn alternating_sum(bits: usize, a: impl Fn(usize) -> BigReal) -> BigReal {
    let n = (bits as f64 / (3.0 + 8f64.sqrt()).log2()).ceil() as i64 + 3;
    let work = bits + 16;
    let root = BigReal::from_u64(3, work) + BigReal::from_u64(8, work).sqrt().expect("sqrt 8");
    let mut d = root.powi(n as u32);
    d = (&d + &d.recip()).div_int(2);
    let mut b = -BigReal::one(work);
    let mut c = -d.clone();
    let mut s = BigReal::zero(work);
    for k in 0..n {
        c = &b - &c;
        s += &c * &a(k as usize).with_bits(work);
        // b ← b·(k+n)(k−n) / ((k+½)(k+1))
        b = (&b).mul_int(2 * (k + n) * (k - n)).div_int((2 * k + 1) * (k + 1));
    }
    (s / d).with_bits(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_harmonic_is_ln2() {
        let bits = 300;
        let s = alternating_sum(bits, |k| BigReal::from_u64(k as u64 + 1, bits).recip());
        let err = (s - BigReal::ln2(bits)).abs();
        assert!(err.log10_abs() < -85.0, "{err:?}");
    }

    #[test]
    fn leibniz_series_is_quarter_pi() {
        let bits = 200;
        let s = alternating_sum(bits, |k| BigReal::from_u64(2 * k as u64 + 1, bits).recip());
        let err = (s - BigReal::pi(bits).div_int(4)).abs();
        assert!(err.log10_abs() < -55.0, "{err:?}");
    }
}
