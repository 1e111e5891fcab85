//! Comparisons against values frozen in `tests/data/oracles.json`, produced
//! by `tests/oracles/generate.py` (arbitrary-precision and brute-force
//! references that share no code with the crate).

use std::sync::OnceLock;

use lora_ser::*;
use num_complex::Complex64;
use serde_json::Value;

fn oracles() -> &'static Value {
    static DATA: OnceLock<Value> = OnceLock::new();
    DATA.get_or_init(|| {
        let text = include_str!("data/oracles.json");
        serde_json::from_str(text).expect("valid oracle file")
    })
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) => s.parse().expect("numeric string"),
        Value::Number(n) => n.as_f64().unwrap(),
        other => panic!("not a number: {other}"),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn k_channel(k: f64) -> ChannelParams {
    ChannelParams::from_k_factor(k).unwrap()
}

#[test]
fn modulated_samples() {
    let p = LoRaParams::new(3, 1.0).unwrap();
    let x = modulate(&p, SymbolIndex(3)).unwrap();
    let want = oracles()["modulate_e1_m8_m3"].as_array().unwrap();
    for (got, w) in x.samples().iter().zip(want) {
        let w = Complex64::new(num(&w[0]), num(&w[1]));
        assert!((got - w).norm() < 1e-14, "{got} vs {w}");
    }
}

#[test]
fn log_binomials() {
    for row in oracles()["log_binomial"].as_array().unwrap() {
        let n = row[0].as_u64().unwrap();
        let k = row[1].as_u64().unwrap();
        let want = num(&row[2]);
        let got = log_binomial(n, k).unwrap();
        if want == 0.0 {
            assert_eq!(got, 0.0);
        } else {
            assert!(rel(got, want) < 1e-13, "C({n},{k}): {got} vs {want}");
        }
    }
}

#[test]
fn scaled_bessel() {
    for row in oracles()["bessel_i0e"].as_array().unwrap() {
        let x = num(&row[0]);
        let want = num(&row[1]);
        let got = bessel_i0_scaled(x).unwrap();
        assert!(rel(got, want) < 1e-12, "x={x}: {got} vs {want}");
    }
}

#[test]
fn marcum_spot_value() {
    let row = &oracles()["marcum_spot"][0];
    let got = marcum_q1(num(&row[0]), num(&row[1])).unwrap();
    assert!((got - num(&row[2])).abs() < 1e-12);
}

#[test]
fn marcum_grid() {
    let g = &oracles()["marcum_grid"];
    let n = g["n"].as_u64().unwrap() as usize;
    let max = num(&g["max"]);
    let values = g["values"].as_array().unwrap();
    let mut worst = 0.0f64;
    for i in 0..n {
        let a = max * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let b = max * j as f64 / (n - 1) as f64;
            let err = (marcum_q1(a, b).unwrap() - num(&values[i * n + j])).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst < 1e-12, "max abs error {worst:e}");
}

#[test]
fn chi2_cdf_matches_density_quadrature() {
    let d = NoncentralChi2::new(2.0, 1.0).unwrap();
    let want = num(&oracles()["chi2_cdf_s2_sigma1_r5"]);
    assert!((d.cdf(5.0).unwrap() - want).abs() < 1e-10);
}

#[test]
fn exact_sum_against_high_precision() {
    for row in oracles()["exact_sf5_k1"].as_array().unwrap() {
        let db = num(&row[0]);
        let want = num(&row[1]);
        let lb = LinkBudget::from_ebn0_db(5, k_channel(1.0), db).unwrap();
        let got = ser_exact_rician(&lb).unwrap();
        assert!(
            rel(got.value, want) < 1e-10,
            "{db} dB: {} vs {want}",
            got.value
        );
        assert!(!got.cancellation_limited);
    }
}

#[test]
fn noncoherent_against_high_precision() {
    let p = LoRaParams::new(5, 1.0).unwrap();
    let want = num(&oracles()["noncoherent_sf5_es20"]);
    assert!(rel(ser_noncoherent(&p, 20.0).unwrap(), want) < 1e-10);
}

#[test]
fn exponential_bounds_against_rederivation() {
    let lb = LinkBudget::from_ebn0_db(7, k_channel(1.0), 20.0).unwrap();
    let want = num(&oracles()["upper_exp_sf7_k1_20db"]);
    assert!(rel(ser_upper_exp(&lb).unwrap().value, want) < 1e-11);

    let lb = LinkBudget::from_ebn0_db(12, k_channel(10.0), 25.0).unwrap();
    let want = num(&oracles()["lower_exp_sf12_k10_25db"]);
    assert!(rel(ser_lower_exp(&lb).unwrap().value, want) < 1e-11);
}

#[test]
fn integration_against_trapezoid() {
    for row in oracles()["trapezoid_ser"].as_array().unwrap() {
        let sf = row[0].as_u64().unwrap() as u32;
        let k = num(&row[1]);
        let db = num(&row[2]);
        let want = num(&row[3]);
        let lb = LinkBudget::from_ebn0_db(sf, k_channel(k), db).unwrap();
        let got = ser_numeric_integration(&lb).unwrap();
        assert!(rel(got, want) < 1e-8, "{sf} {k} {db}: {got} vs {want}");
        assert!(ser_upper(&lb).value >= want);
    }
}
