use collider_core::fixtures::{self, AGE, HYPERTENSION, PROTEINURIA, SBP, SODIUM};
use collider_core::stats;

const N: usize = 1_000_000;

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (stats::mean(a), stats::mean(b));
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    s / (a.len() - 1) as f64
}

#[test]
fn sample_moments_match_implied_within_five_se() {
    for sem in [fixtures::confounder(), fixtures::collider(), fixtures::sodium()] {
        let data = sem.generate(N, 2024).unwrap();
        let m = sem.implied_moments();
        let names: Vec<String> = sem.variables().map(String::from).collect();
        for a in &names {
            let xa = data.column(a).unwrap();
            let var_a = m.cov_of(a, a).unwrap();
            let se = (var_a / N as f64).sqrt();
            let mean = stats::mean(xa);
            assert!((mean - m.mean_of(a).unwrap()).abs() < 5.0 * se, "mean {a}: {mean}");
            for b in &names {
                let xb = data.column(b).unwrap();
                let (sab, saa, sbb) = (m.cov_of(a, b).unwrap(), var_a, m.cov_of(b, b).unwrap());
                let se = ((saa * sbb + sab * sab) / N as f64).sqrt();
                let got = sample_cov(xa, xb);
                assert!((got - sab).abs() < 5.0 * se, "cov({a},{b}) = {got}, implied {sab}");
            }
        }
    }
}

#[test]
fn sodium_model_moments() {
    let m = fixtures::sodium().implied_moments();
    assert!((m.mean_of(SBP).unwrap() - (130.0 + 1.05 * 65.0 / 18.0)).abs() < 1e-12);
    assert!((m.mean_of(SODIUM).unwrap() - 65.0 / 18.0).abs() < 1e-12);
    assert!((m.cov_of(SBP, SBP).unwrap() - 108.02090277777778).abs() < 1e-9);
    assert!((m.cov_of(SODIUM, SBP).unwrap() - 3.908796296296296).abs() < 1e-12);
    let data = fixtures::sodium().generate(N, 99).unwrap();
    let share = stats::mean(data.column(HYPERTENSION).unwrap());
    let sd = m.cov_of(SBP, SBP).unwrap().sqrt();
    let p = 1.0 - stats::normal_cdf((140.0 - m.mean_of(SBP).unwrap()) / sd);
    assert!((p - 0.2751).abs() < 5e-5);
    assert!((share - p).abs() < 5.0 * (p * (1.0 - p) / N as f64).sqrt());
}

#[test]
fn intervention_cuts_incoming_edges() {
    let sem = fixtures::sodium();
    let data = sem.generate_do(&[(SODIUM, 5.0)], 200_000, 3).unwrap();
    assert!(data.column(SODIUM).unwrap().iter().all(|&v| v == 5.0));
    let sbp = stats::mean(data.column(SBP).unwrap());
    // SBP = 1.05·5 + 2·Age + e with Age ~ N(65, 25): sd of the mean is sqrt(101 / n).
    assert!((sbp - (5.25 + 130.0)).abs() < 5.0 * (101.0f64 / 200_000.0).sqrt());
    let age = data.column(AGE).unwrap();
    assert!(stats::pearson(age, data.column(PROTEINURIA).unwrap()).unwrap() > 0.9);
}

#[test]
fn prefixes_agree_across_sizes() {
    let sem = fixtures::sodium();
    let long = sem.generate(5000, 11).unwrap();
    let short = sem.generate(1500, 11).unwrap();
    for name in short.names() {
        assert_eq!(short.column(name).unwrap(), &long.column(name).unwrap()[..1500]);
    }
}

#[test]
fn generation_is_deterministic() {
    let sem = fixtures::collider();
    assert_eq!(sem.generate(3000, 5).unwrap(), sem.generate(3000, 5).unwrap());
    assert_ne!(sem.generate(3000, 5).unwrap(), sem.generate(3000, 6).unwrap());
}
