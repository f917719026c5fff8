//! Acceptance suite: criteria 1 to 9, one line each on stdout.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sbelab::{execute, ExperimentKind, Outcome};
use sbelab_core::drift::{generator_apply, h_poisson, i_sum, i_sum_2d, i_sum_ddt, i_sum_diff};
use sbelab_core::gaussian::{MeasureSpec, Purpose, RngStream, StreamId};
use sbelab_core::spectral::{
    burgers_nonlinearity, ddt_nonlinearity, ns_nonlinearity, ss_nonlinearity, Field1d, Field2d, Lattice,
    QuadraticForm,
};
use sbelab_core::statistics::log_log_slope;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn stream(p: u64) -> RngStream {
    RngStream::new(2024, StreamId::new("acceptance", p, Purpose::Initial))
}

fn white(n: usize, p: u64) -> Field1d {
    MeasureSpec::white_noise(n).sample(&stream(p))
}

fn gibbs(n: usize, p: u64) -> Field2d {
    MeasureSpec::ns_gibbs(n).sample(&stream(p))
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Verdict {
    let mut worst_pairing = 0.0f64;
    for n in [1usize, 2, 5, 16, 32, 64] {
        for p in 0..20 {
            let x = white(n, p);
            for f in [burgers_nonlinearity(&x, n), ss_nonlinearity(&x, n)] {
                let scale: f64 = x.coeffs().iter().zip(f.coeffs()).map(|(a, b)| (a * b).norm()).sum::<f64>().max(1.0);
                worst_pairing = worst_pairing.max(x.dot(&f).abs() / scale);
            }
        }
    }
    for n in [1usize, 3, 8, 12] {
        for p in 0..10 {
            let x = gibbs(n, p);
            let b = ns_nonlinearity(&x, n);
            let lat = x.lattice();
            let (mut e, mut scale) = (0.0, 1.0f64);
            for i in 0..lat.len() {
                let z = x.coeffs()[i].conj() * b.coeffs()[i];
                e += 2.0 * lat.norm_sq(i) * z.re;
                scale += lat.norm_sq(i) * z.norm();
            }
            worst_pairing = worst_pairing.max(e.abs() / scale);
        }
    }
    let mut worst_generator = 0.0f64;
    for n in [2usize, 4, 8, 16, 32] {
        for theta in [0.6, 1.0, 1.5] {
            let form = QuadraticForm::poisson(n, theta);
            for p in 0..100 {
                let x = white(n, 500 + p);
                let l = generator_apply(&form, &x, theta);
                let f = burgers_nonlinearity(&x, n);
                worst_generator = worst_generator.max(max_diff(l.coeffs(), f.coeffs()) / f.max_abs().max(1e-300));
            }
        }
    }
    verdict(
        worst_pairing < 1e-12 && worst_generator <= 1e-10,
        format!("max relative pairing {worst_pairing:.1e}, max relative |L0 H_N - F_N| {worst_generator:.1e}"),
    )
}

/// `sum over k1 + k2 = k` of `q(k, k1, k2) x_k1 x_k2`, all three indices in `0 < |.| <= n`.
fn triple_loop_1d(x: &Field1d, n: i64, q: impl Fn(i64, i64, i64) -> Complex64) -> Vec<Complex64> {
    let mut out = Vec::new();
    for k in 1..=x.cutoff() as i64 {
        let mut acc = c(0.0, 0.0);
        for k1 in -n..=n {
            for k2 in -n..=n {
                if k1 + k2 == k && k1 != 0 && k2 != 0 && k <= n {
                    acc += q(k, k1, k2) * x.get(k1) * x.get(k2);
                }
            }
        }
        out.push(acc);
    }
    out
}

fn triple_loop_ns(x: &Field2d, n: i32) -> Vec<Complex64> {
    let inside = |k: [i32; 2]| k != [0, 0] && k[0] * k[0] + k[1] * k[1] <= n * n;
    let lat = x.lattice();
    (0..lat.len())
        .map(|i| {
            let k = lat.mode(i);
            let mut acc = c(0.0, 0.0);
            for ax in -n..=n {
                for ay in -n..=n {
                    let (k1, k2) = ([ax, ay], [k[0] - ax, k[1] - ay]);
                    if inside(k1) && inside(k2) {
                        let cross = (k[1] * k1[0] - k[0] * k1[1]) as f64;
                        let dot = (k[0] * k2[0] + k[1] * k2[1]) as f64;
                        acc += cross * dot / (k[0] * k[0] + k[1] * k[1]) as f64 * x.get(k1) * x.get(k2);
                    }
                }
            }
            acc
        })
        .collect()
}

fn brute_pair_sum(k: i64, n: i64, coef: impl Fn(i64, i64) -> f64) -> f64 {
    let mut s = 0.0;
    for kk in -n..=n {
        for k1 in -n..=n {
            for k2 in -n..=n {
                if kk == k && kk != 0 && k1 != 0 && k2 != 0 && k1 + k2 == kk {
                    s += coef(k1, k2);
                }
            }
        }
    }
    s
}

fn criterion_2() -> Verdict {
    let mut worst = 0.0f64;
    let mut track = |fast: &[Complex64], slow: &[Complex64]| {
        let scale = slow.iter().map(|z| z.norm()).fold(1.0, f64::max);
        worst = worst.max(max_diff(fast, slow) / scale);
    };
    for n in 1..=4usize {
        let ni = n as i64;
        for p in 0..10 {
            let x = white(n, 900 + p);
            track(burgers_nonlinearity(&x, n).coeffs(), &triple_loop_1d(&x, ni, |k, _, _| c(0.0, k as f64)));
            for sigma in [0.25, 0.5, 1.0] {
                let w = |k: i64| ((k * k) as f64).powf(-sigma);
                let slow = triple_loop_1d(&x, ni, |k, a, b| c(0.0, k as f64 * w(k) * w(a) * w(b)));
                track(ddt_nonlinearity(&x, n, sigma).coeffs(), &slow);
            }
            let h = 2.0 * std::f64::consts::PI / (2 * n + 1) as f64;
            let g = |k: i64| c((k as f64 * h).cos() - 1.0, (k as f64 * h).sin()) / h;
            let slow = triple_loop_1d(&x, ni, |k, a, b| g(k) - g(k).conj() + g(a) - g(b).conj());
            track(ss_nonlinearity(&x, n).coeffs(), &slow);
            for theta in [0.6, 1.0, 1.5] {
                let lam = |k: i64| ((k * k) as f64).powf(theta);
                let slow = triple_loop_1d(&x, ni, |k, a, b| c(0.0, -(k as f64) / (lam(a) + lam(b))));
                track(h_poisson(&x, n, theta).coeffs(), &slow);
            }
            let y = gibbs(n, 900 + p);
            track(ns_nonlinearity(&y, n).coeffs(), &triple_loop_ns(&y, n as i32));
        }
    }
    let mut worst_sum = 0.0f64;
    let mut track_sum = |fast: f64, slow: f64| worst_sum = worst_sum.max((fast - slow).abs() / slow.abs().max(1.0));
    for n in 1..=4i64 {
        for k in -n..=n {
            for theta in [0.6, 1.0, 1.5] {
                let lam = |j: i64| ((j * j) as f64).powf(theta);
                let coef = |a: i64, b: i64| (k * k) as f64 / (lam(a) + lam(b));
                track_sum(i_sum(k, n as usize, theta), brute_pair_sum(k, n, coef));
                for m in 1..n {
                    let outside = |a: i64, b: i64| if k.abs() <= m && a.abs() <= m && b.abs() <= m { 0.0 } else { coef(a, b) };
                    track_sum(i_sum_diff(k, n as usize, m as usize, theta), brute_pair_sum(k, n, outside));
                }
            }
            for sigma in [0.1, 0.3] {
                let s = |j: i64| (j * j) as f64;
                let coef = |a: i64, b: i64| s(k).powf(1.0 - 2.0 * sigma) / (s(a).powf(2.0 * sigma) * s(b).powf(2.0 * sigma) * (s(a) + s(b)));
                track_sum(i_sum_ddt(k, n as usize, sigma), brute_pair_sum(k, n, coef));
            }
        }
        let ni = n as i32;
        for sigma in [0.25, 0.5] {
            let p = 1.0 + sigma;
            for kx in -ni..=ni {
                for ky in -ni..=ni {
                    let k = [kx, ky];
                    if k == [0, 0] || kx * kx + ky * ky > ni * ni {
                        continue;
                    }
                    let mut slow = 0.0;
                    for ax in -ni..=ni {
                        for ay in -ni..=ni {
                            let (a, b) = (ax * ax + ay * ay, (kx - ax).pow(2) + (ky - ay).pow(2));
                            if a > 0 && b > 0 && a <= ni * ni && b <= ni * ni {
                                let (la, lb) = ((a as f64).powf(p), (b as f64).powf(p));
                                slow += la / (la + lb).powi(2);
                            }
                        }
                    }
                    track_sum(i_sum_2d(k, n as usize, sigma), slow);
                }
            }
        }
    }
    verdict(
        worst < 1e-13 && worst_sum < 1e-13,
        format!("max relative deviation: kernels {worst:.1e}, I sums {worst_sum:.1e}"),
    )
}

fn criterion_4() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for theta in [0.75, 1.0, 1.25] {
        let pts: Vec<(f64, f64)> = (2..=64).map(|k| (k as f64, i_sum(k, 512, theta))).collect();
        let slope = log_log_slope(&pts).expect("positive sums");
        ok &= (slope - (3.0 - 2.0 * theta)).abs() <= 0.15;
        parts.push(format!("theta {theta}: {slope:.3}"));
    }
    for sigma in [0.25, 0.5] {
        let pts: Vec<(f64, f64)> = [2, 3, 4, 6, 8, 12, 16].iter().map(|&k| (k as f64, i_sum_2d([k, 0], 128, sigma))).collect();
        let slope = log_log_slope(&pts).expect("positive sums");
        ok &= (slope + 2.0 * sigma).abs() <= 0.15;
        parts.push(format!("2d sigma {sigma}: {slope:.3}"));
    }
    verdict(ok, format!("slopes {}", parts.join(", ")))
}

struct Runner {
    root: PathBuf,
}

impl Runner {
    fn config(&self, name: &str, body: &str) -> PathBuf {
        let path = self.root.join(format!("{name}.cfg"));
        fs::write(&path, body).expect("write config");
        path
    }

    fn run(&self, name: &str, kind: ExperimentKind, body: &str) -> (Result<Outcome, String>, PathBuf) {
        let cfg = self.config(name, body);
        let out = self.root.join(name);
        let r = execute(kind, &cfg, None, Some(out.clone())).map(|(o, _)| o).map_err(|e| e.to_string());
        (r, out)
    }

    /// Runs each experiment and joins the gate values into one summary.
    fn suite(&self, runs: &[(&str, ExperimentKind, &str)]) -> Verdict {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, kind, body) in runs {
            match self.run(name, *kind, body).0 {
                Ok(o) => {
                    ok &= o.passed();
                    let gates: Vec<String> = o
                        .gates
                        .iter()
                        .filter(|g| g.gated)
                        .map(|g| format!("{} {:.3}{}", g.name, g.value, if g.passed { "" } else { " (fail)" }))
                        .collect();
                    parts.push(format!("{name}: {}", gates.join("; ")));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("{name}: error {e}"));
                }
            }
        }
        verdict(ok, parts.join(" | "))
    }
}

const INV_OU: &str = "model = ou\ntheta = 1\nN = 32\ndt = 1e-3\nT = 0.5\npaths = 256\nseed = 1\n";
const INV_SBE: &str = "model = sbe\ntheta = 1\nN = 32\ndt = 1e-4\nT = 0.5\npaths = 256\nseed = 1\n";
const INV_SS: &str = "model = ss_lattice\nN = 16\ndt = 1e-4\nT = 0.5\npaths = 256\nseed = 1\n";
const INV_NS: &str = "model = ns2d\nsigma = 0.5\nN = 8\ndt = 2.5e-4\nT = 0.25\npaths = 256\nseed = 1\n";
const SCALING: &str =
    "model = ou\ntheta = 1\nN = 32\ndt = 1e-4\nT = 1\nstride = 10\nmodes = 2,3,4,5,6,8,10,12,14,16\npaths = 256\nseed = 1\n";
const CAUCHY: &str =
    "model = ou\ntheta = 1\nN = 128\ndt = 2.5e-5\nT = 0.25\nstride = 10\nmodes = 1,2\nM_list = 3,4,6,8,12,16,24,32\npaths = 256\nseed = 1\n";
const MOLLIFIER: &str = "model = ou\ntheta = 1\nN = 128\ndt = 2.5e-5\nT = 0.25\nstride = 10\nmodes = 1,2\n\
eps_list = 0.5,0.35,0.25,0.18,0.125,0.09,0.0625,0.045\npaths = 256\nseed = 1\n";
const T_EXPONENT: &str = "model = ou\ntheta = 0.75\nN = 512\ndt = 0.00006103515625\nT = 0.25\nmodes = 1\n\
M_list = 8,16,32,64,128,256,512\npaths = 256\nseed = 1\n";
const ITO: &str = "model = ou\ntheta = 1\nN = 8\ndt = 1e-5\nT = 0.5\nmodes = 2\ndt_list = 1e-3, 1e-4, 1e-5\npaths = 256\nseed = 1\n";
const ZERO_QV: &str = "model = ou\ntheta = 1\nN = 64\ndt = 0.000244140625\nT = 1\nmodes = 2\npaths = 64\nseed = 1\n";
const UNIQUENESS: &str =
    "model = sbe\ntheta = 1.5\nN = 256\ndt = 1e-4\nT = 0.25\nM_list = 16,32,64,128\nepsilon = 0.05\npaths = 64\nseed = 1\n";
const UNIQUENESS_LOW: &str =
    "model = sbe\ntheta = 0.75\nN = 256\ndt = 8e-6\nT = 0.25\nM_list = 16,32,64,128\nepsilon = 0.05\npaths = 4\nseed = 1\n";

fn criterion_8(r: &Runner) -> Verdict {
    let gated = r.suite(&[("uniqueness", ExperimentKind::Uniqueness, UNIQUENESS)]);
    let contrast = match r.run("uniqueness-low", ExperimentKind::Uniqueness, UNIQUENESS_LOW).0 {
        Ok(o) => o.gates.iter().map(|g| format!("{} {:.3}", g.name, g.value)).collect::<Vec<_>>().join("; "),
        Err(e) => format!("error {e}"),
    };
    verdict(gated.passed, format!("{} | theta 0.75 (reported): {contrast}", gated.detail))
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).expect("read csv")))
        .collect();
    files.sort();
    files
}

fn criterion_9(r: &Runner) -> Verdict {
    let reruns = [
        ("invariance-ou", ExperimentKind::Invariance, INV_OU),
        ("zero-qv", ExperimentKind::DriftScaling, ZERO_QV),
        ("ito", ExperimentKind::ItoCheck, ITO),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kind, body) in reruns {
        let first = r.root.join(name);
        let (res, again) = r.run(&format!("{name}-again"), kind, body);
        let (a, b) = (csv_bytes(&first), csv_bytes(&again));
        let same = res.is_ok() && !a.is_empty() && a == b;
        ok &= same;
        parts.push(format!("{name}: {} csv files {}", a.len(), if same { "identical" } else { "differ" }));
    }
    verdict(ok, parts.join(", "))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().expect("tempdir");
    let r = Runner { root: dir.path().to_path_buf() };
    let mut out = std::io::stdout();
    let mut all = true;
    let mut report = |n: usize, v: Verdict| {
        all &= v.passed;
        writeln!(out, "[{}] criterion {n}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail).expect("stdout");
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(
        3,
        r.suite(&[
            ("invariance-ou", ExperimentKind::Invariance, INV_OU),
            ("invariance-sbe", ExperimentKind::Invariance, INV_SBE),
            ("invariance-ss", ExperimentKind::Invariance, INV_SS),
            ("invariance-ns2d", ExperimentKind::Ns2dInvariance, INV_NS),
        ]),
    );
    report(4, criterion_4());
    report(
        5,
        r.suite(&[
            ("drift-scaling", ExperimentKind::DriftScaling, SCALING),
            ("cauchy", ExperimentKind::Cauchy, CAUCHY),
            ("mollifier-cauchy", ExperimentKind::MollifierCauchy, MOLLIFIER),
            ("t-exponent", ExperimentKind::DriftScaling, T_EXPONENT),
        ]),
    );
    report(6, r.suite(&[("ito", ExperimentKind::ItoCheck, ITO)]));
    report(7, r.suite(&[("zero-qv", ExperimentKind::DriftScaling, ZERO_QV)]));
    report(8, criterion_8(&r));
    report(9, criterion_9(&r));
    assert!(all, "one or more acceptance criteria failed");
}
