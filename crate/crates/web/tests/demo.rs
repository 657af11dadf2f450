use dickman_web::{density_values, discrepancy_values, rho_text, share_values, MAX_U};

#[test]
fn density_curve_shape() {
    let v = density_values(0.5, 4.0, 0.5).unwrap();
    assert_eq!(v.len(), 3 * 8);
    // ρ = σ = 1 up to u = 1
    assert_eq!(v[1], 0.0);
    assert_eq!(v[2], 0.0);
    // log10 ρ(2) = log10(1 − log 2)
    let i = 3 * 3;
    assert_eq!(v[i], 2.0);
    assert!((v[i + 1] - (1.0 - 2f64.ln()).log10()).abs() < 1e-12);
    assert!(v.chunks(3).all(|c| c[2] >= c[1]));
}

#[test]
fn shares_sum_to_one() {
    let v = share_values(10.0).unwrap();
    let (shares, moments) = v.split_at(v.len() - 2);
    assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((moments[0] - 1.4867).abs() < 1e-4);
    assert!((moments[1] - 1.0039).abs() < 1e-4);
}

#[test]
fn discrepancy_changes_sign_near_known_zeros() {
    let v = discrepancy_values(1.0, 3.5, 0.05).unwrap();
    let signs = v.chunks(2).filter(|c| c[1] != 0.0).map(|c| c[1] > 0.0).collect::<Vec<_>>();
    let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
    // zeros near 1.4833, 2.2270 and 3.0017
    assert_eq!(flips, 3);
}

#[test]
fn rho_text_and_limits() {
    assert!(rho_text(1.5, 12).unwrap().starts_with("5.9453489189"));
    assert!(rho_text(MAX_U + 1.0, 10).is_err());
    assert!(density_values(1.0, 2.0, 0.0).is_err());
    assert!(density_values(0.0, 20.0, 0.001).is_err());
}
