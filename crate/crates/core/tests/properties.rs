use std::sync::OnceLock;

use dickman::dickman::{pk, pk_direct, rho, sigma};
use dickman::furry::{build_table, FurryTable};
use dickman::mpl::{multipolylog, multipolylog_bruteforce, MultiPolylogSpec, TruncationPlan};
use dickman::polylog::li_classical;
use dickman::sieve::{
    bruteforce_census, census, classify_survivor, find_factor, is_probable_prime, segmented_sieve, SieveRange,
};
use dickman::{BigReal, Precision};
use proptest::prelude::*;

fn table() -> &'static FurryTable {
    static T: OnceLock<FurryTable> = OnceLock::new();
    T.get_or_init(|| build_table(12, 11, Precision::digits(40)).unwrap())
}

fn naive_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn depth_one_is_classical(k in 1u32..5, num in -90i64..90) {
        let p = Precision::digits(40);
        let spec = MultiPolylogSpec::rational(&[k], &[(num, 100)], p.bits()).unwrap();
        let z = BigReal::ratio(num, 100, p.bits());
        let a = multipolylog(&spec, p).unwrap();
        let b = li_classical(k, &z, p).unwrap();
        prop_assert!((a - b).abs().log10_abs() < -38.0);
    }

    #[test]
    fn nested_sum_matches_literal_loops(
        s1 in 1u32..3, s2 in 1u32..3,
        a in -60i64..60, b in -60i64..60,
    ) {
        prop_assume!(a != 0 && b != 0);
        let p = Precision::digits(20);
        let spec = MultiPolylogSpec::rational(&[s1, s2], &[(a, 100), (b, 100)], p.bits()).unwrap();
        let fast = multipolylog(&spec, p).unwrap();
        let slow = multipolylog_bruteforce(&spec, 200).unwrap();
        prop_assert!((fast - slow).abs().log10_abs() < -18.0);
    }

    #[test]
    fn truncation_grows_with_precision(w in 0.05f64..0.95, d in 1usize..5) {
        let w_abs = vec![w; d];
        let s = vec![1u32; d];
        let lo = TruncationPlan::for_prefix(&w_abs, &s, 100);
        let hi = TruncationPlan::for_prefix(&w_abs, &s, 200);
        prop_assert!(hi.cutoff >= lo.cutoff);
    }

    #[test]
    fn rho_is_a_decreasing_density(a in 1.0f64..11.5, h in 0.01f64..0.5) {
        let t = table();
        let bits = t.bits();
        let u = BigReal::from_f64(a, bits);
        let v = BigReal::from_f64(a + h, bits);
        let ru = rho(&u, t).unwrap();
        let rv = rho(&v, t).unwrap();
        prop_assert!(rv.is_positive());
        prop_assert!(rv < ru);
        prop_assert!(ru <= BigReal::one(bits));
        prop_assert!(sigma(&u, t).unwrap() >= ru);
    }

    #[test]
    fn table_and_direct_sums_agree(k in 2usize..5, off in 0.05f64..1.9) {
        let t = table();
        let u = BigReal::from_f64(k as f64 + off, t.bits());
        let a = pk(k, &u, t).unwrap();
        let b = pk_direct(k, &u, Precision::digits(40)).unwrap();
        prop_assert!((a - b).abs().log10_abs() < -35.0);
    }

    #[test]
    fn primality_matches_trial_division(n in 0u64..2_000_000) {
        prop_assert_eq!(is_probable_prime(n as u128), naive_prime(n));
    }

    #[test]
    fn rho_factor_divides(i in 0usize..2000, j in 0usize..2000) {
        let ps = dickman::sieve::primes_below(200_000);
        let (p, q) = (ps[ps.len() - 1 - i] as u64, ps[ps.len() - 1 - j] as u64);
        let n = p as u128 * q as u128;
        let d = find_factor(n).unwrap();
        prop_assert!(d == p as u128 || d == q as u128);
    }

    #[test]
    fn classification_reproduces_n(a in 0usize..40, b in 0usize..40, c in 0usize..40, three in any::<bool>()) {
        let ps: Vec<u128> = (100_000u64..101_000).filter(|&n| naive_prime(n)).map(u128::from).collect();
        let n = if three { ps[a] * ps[b] * ps[c] } else { ps[a] * ps[b] };
        let class = classify_survivor(n, 100_000).unwrap();
        prop_assert_eq!(class.factors().iter().product::<u128>(), n);
        prop_assert!(class.factors().iter().all(|&f| is_probable_prime(f) && f >= 100_000));
        prop_assert_eq!(class.omega(), if three { 3 } else { 2 });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sieve_keeps_exactly_the_rough_numbers(n1 in 1000u128..5_000_000, w in 1u128..5000, b in 2u64..40) {
        let r = SieveRange::new(n1, n1 + w, b).unwrap();
        let got: Vec<u128> = segmented_sieve(&r).collect();
        let want: Vec<u128> = (n1..=n1 + w).filter(|&n| (2..b as u128).all(|d| n % d != 0)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn census_conserves_and_matches_oracle(n2 in 100_000u128..100_000_000, w in 100u128..20_000) {
        let r = SieveRange::ending_at(n2, w).unwrap();
        let c = census(&r).unwrap();
        prop_assert_eq!(c.survivors, c.c0 + c.c1 + c.c2);
        prop_assert_eq!(c, bruteforce_census(&r).unwrap());
    }
}
