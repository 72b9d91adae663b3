use polymax::parabolic::rho;
use polymax_web::{g_profile_json, rho_sphere, sigma_hat_slice};

#[test]
fn sphere_points_have_the_requested_norm() {
    let pts = rho_sphere(1.7, 64).unwrap();
    assert_eq!(pts.len(), 2 * 65);
    for p in pts.chunks(2) {
        assert!((rho(p) - 1.7).abs() < 1e-12);
    }
}

#[test]
fn slice_respects_its_bound() {
    let data = sigma_hat_slice(3.0, 0.0, 20.0, 50).unwrap();
    assert_eq!(data.len(), 150);
    assert!((data[1] - polymax::curve::sigma_hat(&[0.0, 3.0], 1e-10).unwrap().value().unwrap().norm()).abs() < 1e-7);
    for t in data.chunks(3) {
        assert!(t[1].is_nan() || t[1] <= t[2] + 1e-7);
    }
}

#[test]
fn profile_json_shape() {
    let v: serde_json::Value = serde_json::from_str(&g_profile_json(1.0, 0.5, 1e-4).unwrap()).unwrap();
    let n = v["values"].as_array().unwrap().len() as i64;
    assert_eq!(n, v["k_max"].as_i64().unwrap() - v["k_min"].as_i64().unwrap() + 1);
    assert!(v["g"].as_f64().unwrap() > 0.0);
}
