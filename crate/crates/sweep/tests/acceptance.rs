//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lora_ser::{
    ber_from_ser, marcum_q1, ser_exact_rician, ser_lower, ser_lower_exp, ser_lower_rayleigh,
    ser_noncoherent, ser_numeric_integration, ser_upper, ser_upper_exp, ser_upper_rayleigh,
    simulate_ser, ChannelParams, Error, LinkBudget, LoRaParams, McConfig, NoncentralChi2,
};
use num_complex::Complex64;
use serde_json::Value;

const ORACLES: &str = include_str!("../../core/tests/data/oracles.json");

type Check = Result<String, String>;

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

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn bracketing() -> Check {
    let start = Instant::now();
    let slack = 1e-9;
    for sf in [5, 7, 12] {
        for k in [0.1, 1.0, 10.0] {
            for db in 0..=40 {
                let lb = lib(LinkBudget::from_ebn0_db(sf, k_channel(k), db as f64))?;
                let chain = [
                    lib(ser_lower_exp(&lb))?.value,
                    ser_lower(&lb).value,
                    lib(ser_numeric_integration(&lb))?,
                    ser_upper(&lb).value,
                    lib(ser_upper_exp(&lb))?.value,
                ];
                ensure(chain.windows(2).all(|w| w[0] <= w[1] + slack), || {
                    format!("SF={sf} K={k} {db} dB: {chain:?}")
                })?;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("369 points ordered, {:.1} s", t.as_secs_f64()))
}

fn exact_formula(oracles: &Value) -> Check {
    let (mut worst_oracle, mut worst_quad) = (0.0f64, 0.0f64);
    let rows = oracles["exact_sf5_k1"].as_array().unwrap();
    for row in rows {
        let db = num(&row[0]);
        let lb = lib(LinkBudget::from_ebn0_db(5, k_channel(1.0), db))?;
        let e = lib(ser_exact_rician(&lb))?.value;
        worst_oracle = worst_oracle.max(rel(e, num(&row[1])));
        worst_quad = worst_quad.max(rel(lib(ser_numeric_integration(&lb))?, e));
    }
    let detail = format!(
        "{} points, max rel err {worst_oracle:.1e} vs oracle, {worst_quad:.1e} vs integral",
        rows.len()
    );
    ensure(
        rows.len() == 41 && worst_oracle < 1e-10 && worst_quad < 1e-6,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn monte_carlo() -> Check {
    let start = Instant::now();
    let mut excursions = Vec::new();
    let mut checked = 0;
    for i in 0..=8u64 {
        let db = 5.0 * i as f64;
        let lb = lib(LinkBudget::from_ebn0_db(5, k_channel(1.0), db))?;
        let exact = lib(ser_exact_rician(&lb))?.value;
        if exact <= 1e-4 {
            continue;
        }
        checked += 1;
        let r = lib(simulate_ser(&lb, &McConfig::new(1_000_000, 100 + i)))?;
        if (r.ser_hat - exact).abs() >= 4.0 * r.stderr {
            excursions.push(db);
        }
    }
    let t = start.elapsed();
    let detail = format!(
        "{checked} points checked, excursions at {excursions:?} dB, {:.1} s",
        t.as_secs_f64()
    );
    ensure(
        excursions.len() <= 1 && t < Duration::from_secs(300),
        || detail.clone(),
    )?;
    Ok(detail)
}

/// Eb/N0 where a decreasing BER curve sampled on a 1 dB grid crosses
/// `target`, interpolating log10(BER) linearly between grid points.
fn crossing(ber: impl Fn(f64) -> Result<f64, String>, target: f64) -> Result<f64, String> {
    let mut prev = (0.0, ber(0.0)?);
    for db in 1..=40 {
        let db = db as f64;
        let b = ber(db)?;
        if prev.1 >= target && b < target {
            let (l0, l1, lt) = (prev.1.log10(), b.log10(), target.log10());
            return Ok(prev.0 + (l0 - lt) / (l0 - l1) * (db - prev.0));
        }
        prev = (db, b);
    }
    Err(format!("BER never crosses {target:e} on 0-40 dB"))
}

fn sf7_ber(f: impl Fn(&LinkBudget) -> Result<f64, String>) -> impl Fn(f64) -> Result<f64, String> {
    move |db| {
        let lb = lib(LinkBudget::from_ebn0_db(7, k_channel(1.0), db))?;
        lib(ber_from_ser(lb.params(), f(&lb)?))
    }
}

fn reference_crossing() -> Result<f64, String> {
    crossing(sf7_ber(|lb| lib(ser_numeric_integration(lb))), 1e-3)
}

fn upper_tightness() -> Check {
    let reference = reference_crossing()?;
    let upper = crossing(sf7_ber(|lb| Ok(ser_upper(lb).value)), 1e-3)?;
    let gap = (upper - reference).abs();
    let detail = format!("upper {upper:.2} dB vs integral {reference:.2} dB, gap {gap:.2} dB");
    ensure(gap <= 0.5, || detail.clone())?;
    Ok(detail)
}

fn lower_gap() -> Check {
    let reference = reference_crossing()?;
    let lower = crossing(sf7_ber(|lb| Ok(ser_lower(lb).value)), 1e-3)?;
    let gap = reference - lower;
    let detail = format!("lower {lower:.2} dB vs integral {reference:.2} dB, gap {gap:.2} dB");
    ensure((gap - 2.5).abs() <= 0.7, || detail.clone())?;
    Ok(detail)
}

fn reductions() -> Check {
    let awgn = lib(ChannelParams::rician(Complex64::new(1.0, 0.0), 0.0))?;
    let p = lib(LoRaParams::new(7, 1.0))?;
    let mut worst_a = 0.0f64;
    for i in 0..20 {
        let x = 0.75 * i as f64;
        let lb = lib(LinkBudget::from_es_n0(7, awgn, x))?;
        let e = lib(ser_exact_rician(&lb))?.value;
        worst_a = worst_a.max(rel(e, lib(ser_noncoherent(&p, x))?));
    }

    let rayleigh = lib(ChannelParams::rayleigh(1.0))?;
    let mut worst_b = 0.0f64;
    for db in 0..40 {
        let lb = lib(LinkBudget::from_ebn0_db(7, rayleigh, db as f64))?;
        let (p, x) = (lb.params(), lb.es_n0());
        worst_b = worst_b
            .max(rel(
                ser_upper(&lb).value,
                lib(ser_upper_rayleigh(p, 1.0, x))?.value,
            ))
            .max(rel(
                ser_lower(&lb).value,
                lib(ser_lower_rayleigh(p, 1.0, x))?.value,
            ));
    }

    let mut worst_c = 0.0f64;
    for sf in 2..=7 {
        let lb = lib(LinkBudget::from_es_n0(sf, k_channel(1.0), 0.0))?;
        let m = (1u64 << sf) as f64;
        worst_c = worst_c.max((lib(ser_exact_rician(&lb))?.value - (m - 1.0) / m).abs());
    }
    let detail = format!(
        "awgn {worst_a:.1e} (20 pts), rayleigh {worst_b:.1e} (40 pts), zero-SNR {worst_c:.1e}"
    );
    ensure(
        worst_a < 1e-12 && worst_b < 1e-12 && worst_c < 1e-12,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn density_mass(d: &NoncentralChi2, t_hi: f64, n: usize) -> Result<f64, String> {
    let h = t_hi / n as f64;
    let g = |t: f64| lib(d.pdf(t * t)).map(|p| 2.0 * t * p);
    let mut acc = g(0.0)? + g(t_hi)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(h * i as f64)?;
    }
    Ok(acc * h / 3.0)
}

fn special_functions(oracles: &Value) -> Check {
    let g = &oracles["marcum_grid"];
    let n = g["n"].as_u64().unwrap() as usize;
    let max = num(&g["max"]);
    let values = g["values"].as_array().unwrap();
    let at = |i: usize| max * i as f64 / (n - 1) as f64;
    let mut worst_q = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let err = (lib(marcum_q1(at(i), at(j)))? - num(&values[i * n + j])).abs();
            worst_q = worst_q.max(err);
        }
    }

    let pairs = [
        (0.0, 1.0),
        (3.0, 2.0),
        (0.5, 0.3),
        (10.0, 1.0),
        (40.0, 3.0),
        (1.0, 10.0),
        (300.0, 20.0),
        (2000.0, 2.0),
        (7.0, 0.5),
        (60.0, 60.0),
    ];
    let mut worst_mass = 0.0f64;
    for (s, sd) in pairs {
        let d = lib(NoncentralChi2::new(s, sd * sd))?;
        worst_mass = worst_mass.max((density_mass(&d, s + 14.0 * sd, 200_000)? - 1.0).abs());
    }

    let h = 1e-5;
    let mut worst_fd = 0.0f64;
    for (s, sd) in [(0.0, 1.0), (1.0, 0.5), (2.0, 1.5), (4.0, 2.0), (3.0, 0.7)] {
        let d = lib(NoncentralChi2::new(s, sd * sd))?;
        for off in [-0.5, 0.0, 0.5, 1.0, 1.5] {
            let r = (s + off * sd).max(0.2).powi(2);
            let fd = (lib(d.cdf(r + h))? - lib(d.cdf(r - h))?) / (2.0 * h);
            worst_fd = worst_fd.max(rel(fd, lib(d.pdf(r))?));
        }
    }
    let detail = format!(
        "marcum {n}x{n} max abs {worst_q:.1e}, pdf mass {worst_mass:.1e}, pdf/cdf {worst_fd:.1e}"
    );
    ensure(
        worst_q < 1e-12 && worst_mass < 1e-9 && worst_fd < 1e-5,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn k_ordering() -> Check {
    let mut bers = Vec::new();
    for k in [0.1, 1.0, 10.0] {
        let lb = lib(LinkBudget::from_ebn0_db(12, k_channel(k), 30.0))?;
        bers.push(lib(ber_from_ser(
            lb.params(),
            lib(ser_numeric_integration(&lb))?,
        ))?);
    }
    let detail = format!(
        "BER at K=0.1, 1, 10: {:.3e}, {:.3e}, {:.3e}",
        bers[0], bers[1], bers[2]
    );
    ensure(bers[0] > bers[1] && bers[1] > bers[2], || detail.clone())?;
    Ok(detail)
}

fn sweep_csv(dir: &Path, workers: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("fig1-{workers}.csv"));
    let o = Command::new(env!("CARGO_BIN_EXE_lora-sweep"))
        .args([
            "--figure",
            "1",
            "--seed",
            "1",
            "--workers",
            workers,
            "--out",
        ])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || {
        String::from_utf8_lossy(&o.stderr).into_owned()
    })?;
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let one = sweep_csv(dir.path(), "1")?;
    let eight = sweep_csv(dir.path(), "8")?;
    let lines = one.iter().filter(|&&b| b == b'\n').count();
    let detail = format!(
        "{} bytes, {lines} lines, {:.1} s for both runs",
        one.len(),
        start.elapsed().as_secs_f64()
    );
    ensure(one == eight, || format!("CSVs differ; {detail}"))?;
    Ok(detail)
}

fn main() {
    let oracles: Value = serde_json::from_str(ORACLES).expect("valid oracle file");
    let criteria: [(&str, &dyn Fn() -> Check); 9] = [
        ("bounds bracket the integral", &bracketing),
        ("exact sum vs oracle and integral", &|| {
            exact_formula(&oracles)
        }),
        ("Monte Carlo agrees with exact sum", &monte_carlo),
        ("upper bound within 0.5 dB at BER 1e-3", &upper_tightness),
        ("lower bound gap 2.5 +/- 0.7 dB", &lower_gap),
        ("AWGN, Rayleigh and zero-SNR reductions", &reductions),
        ("special functions", &|| special_functions(&oracles)),
        ("BER decreases with K at SF=12, 30 dB", &k_ordering),
        ("figure 1 sweep identical for 1 and 8 workers", &determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
