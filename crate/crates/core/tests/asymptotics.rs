use dickman::dickman::{dickman_constants, pk, pk_asymptotic};
use dickman::furry::build_table;
use dickman::{BigReal, Precision};

const US: [f64; 3] = [20.0, 30.0, 40.0];

fn gaps(k: usize) -> Vec<f64> {
    let table = build_table(41, 40, Precision::digits(60)).unwrap();
    let dc = dickman_constants(6, Precision::digits(60)).unwrap();
    US.iter()
        .map(|&u| {
            let u = BigReal::from_f64(u, table.bits());
            (pk(k, &u, &table).unwrap() - pk_asymptotic(k, &u, &dc).unwrap()).abs().to_f64()
        })
        .collect()
}

#[test]
fn weight_one_expansion_is_exact() {
    // P_1(u) = log u
    assert!(gaps(1).iter().all(|&g| g < 1e-50));
}

#[test]
fn expansion_gap_shrinks_for_low_weights() {
    for k in 2..=4 {
        let g = gaps(k);
        assert!(g[0] > g[1] && g[1] > g[2], "k = {k}: {g:?}");
    }
}

#[test]
fn expansion_gap_scales_like_log_power_over_u() {
    // the remainder behaves as c_k log^{k-1}(u)/u, which still rises on [20, 40] for k >= 5
    for k in 2..=6 {
        let scaled: Vec<f64> = gaps(k)
            .iter()
            .zip(US)
            .map(|(g, u)| g * u / u.ln().powi(k as i32 - 1))
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0f64), |(a, b), &s| (a.min(s), b.max(s)));
        assert!(hi / lo < 1.5, "k = {k}: {scaled:?}");
    }
}
