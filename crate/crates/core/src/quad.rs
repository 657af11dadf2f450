//! Adaptive Gauss–Legendre quadrature on big reals.

use crate::error::{Error, Result};
use crate::precision::BigReal;

/// Nodes and weights of an `m`-point rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<BigReal>,
    weights: Vec<BigReal>,
}

impl GaussLegendre {
    pub fn new(m: usize, bits: usize) -> Self {
        let work = bits + 16;
        let one = BigReal::one(work);
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let eps = BigReal::pow2(-(work as i64) + 8, work);
        for i in 1..=m {
            let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            let mut x = BigReal::from_f64(guess, work);
            let mut dp;
            loop {
                let (p, d) = legendre(m, &x);
                dp = d;
                let step = &p / &dp;
                x -= &step;
                if step.abs() < eps {
                    break;
                }
            }
            let (_, d) = legendre(m, &x);
            dp = d;
            let w = BigReal::from_u64(2, work) / (&(&one - &x.square()) * &dp.square());
            nodes.push(x.with_bits(bits));
            weights.push(w.with_bits(bits));
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f` by this rule.
    pub fn apply(&self, a: &BigReal, b: &BigReal, f: &impl Fn(&BigReal) -> Result<BigReal>) -> Result<BigReal> {
        let half = (b - a).div_int(2);
        let mid = (a + b).div_int(2);
        let mut acc = BigReal::zero(half.bits());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * &f(&(&mid + &(&half * x)))?;
        }
        Ok(acc * half)
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: &BigReal) -> (BigReal, BigReal) {
    let bits = x.bits();
    let mut p0 = BigReal::one(bits);
    let mut p1 = x.clone();
    for k in 2..=m as i64 {
        let p2 = ((x * &p1).mul_int(2 * k - 1) - p0.mul_int(k - 1)).div_int(k);
        p0 = p1;
        p1 = p2;
    }
    let d = (&(x * &p1) - &p0).mul_int(m as i64) / (&x.square() - &BigReal::one(bits));
    (p1, d)
}

/// Bisects until a panel and its two halves agree to `tol`.
pub fn adaptive(
    rule: &GaussLegendre,
    a: &BigReal,
    b: &BigReal,
    tol: &BigReal,
    f: &impl Fn(&BigReal) -> Result<BigReal>,
) -> Result<BigReal> {
    fn go(
        rule: &GaussLegendre,
        a: &BigReal,
        b: &BigReal,
        whole: BigReal,
        tol: &BigReal,
        depth: usize,
        f: &impl Fn(&BigReal) -> Result<BigReal>,
    ) -> Result<BigReal> {
        let mid = (a + b).div_int(2);
        let left = rule.apply(a, &mid, f)?;
        let right = rule.apply(&mid, b, f)?;
        let halves = &left + &right;
        if (&halves - &whole).abs() <= *tol {
            return Ok(halves);
        }
        if depth == 0 {
            return Err(Error::NoConvergence {
                op: "adaptive quadrature",
                iterations: 40,
            });
        }
        let t = tol.div_int(2);
        Ok(go(rule, a, &mid, left, &t, depth - 1, f)? + go(rule, &mid, b, right, &t, depth - 1, f)?)
    }
    let whole = rule.apply(a, b, f)?;
    go(rule, a, b, whole, tol, 40, f)
}

/// Splits `[a, b]` at every integer strictly inside and integrates each piece.
pub fn integrate_piecewise(
    rule: &GaussLegendre,
    a: &BigReal,
    b: &BigReal,
    tol: &BigReal,
    f: &impl Fn(&BigReal) -> Result<BigReal>,
) -> Result<BigReal> {
    let bits = a.bits().min(b.bits());
    let mut cuts = vec![a.clone()];
    let mut k = a.floor() + BigReal::one(bits);
    while k < *b {
        cuts.push(k.clone());
        k = k + BigReal::one(bits);
    }
    cuts.push(b.clone());
    let pieces = (cuts.len() - 1) as i64;
    let t = tol.div_int(pieces.max(1));
    let mut acc = BigReal::zero(bits);
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            acc += adaptive(rule, &w[0], &w[1], &t, f)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let bits = 200;
        let g = GaussLegendre::new(10, bits);
        let a = BigReal::zero(bits);
        let b = BigReal::one(bits);
        // ∫_0^1 x^19 = 1/20
        let v = g.apply(&a, &b, &|x: &BigReal| Ok(x.powi(19))).unwrap();
        assert!((v - BigReal::ratio(1, 20, bits)).abs().log10_abs() < -55.0);
    }

    #[test]
    fn adaptive_log_integral() {
        // ∫_1^4 ln x dx = 4 ln 4 − 3
        let bits = 140;
        let g = GaussLegendre::new(16, bits);
        let tol = BigReal::ten_pow(-28, bits);
        let a = BigReal::one(bits);
        let b = BigReal::from_u64(4, bits);
        let v = integrate_piecewise(&g, &a, &b, &tol, &|x: &BigReal| x.ln()).unwrap();
        let exact = BigReal::from_u64(4, bits).ln().unwrap().mul_int(4) - BigReal::from_u64(3, bits);
        assert!((v - exact).abs().log10_abs() < -27.0);
    }
}
