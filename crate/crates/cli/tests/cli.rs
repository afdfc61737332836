use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn prototype() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/prototype.toml")
}

fn flatwire(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatwire"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("FLATWIRE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows of a CSV file keyed by header.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (h, rows)
}

fn col(h: &[String], name: &str) -> usize {
    h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn dcr_reports_the_three_models() {
    let dir = tempfile::tempdir().unwrap();
    let proto = prototype();
    let o = flatwire(dir.path(), &["dcr", proto.to_str().unwrap(), "--csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = table(&dir.path().join("dcr.csv"));
    let closed = col(&h, "closed_form_mohm");
    let quad = col(&h, "quadrature_mohm");
    let by_model = |m: &str| rows.iter().find(|r| r[0] == m).unwrap();

    // independent rectangle-sum oracle for the planar and average lengths
    let (n, rw, dw, tw): (f64, f64, f64, f64) = (41.0, 9.0e-3, 8.0e-3, 0.58e-3);
    let rho = 1.0 / 5.8e7;
    let planar = rho / tw * 2.0 * PI * n / f64::ln(1.0 + dw / rw);
    let average = rho * n * 2.0 * PI * (rw + dw / 2.0) / (tw * dw);
    for (m, want) in [("planar", planar), ("average", average)] {
        let r = by_model(m);
        let c: f64 = r[closed].parse().unwrap();
        let q: f64 = r[quad].parse().unwrap();
        assert!((c * 1e-3 / want - 1.0).abs() < 1e-6, "{m}: {c} vs {}", want * 1e3);
        assert!((q / c - 1.0).abs() < 1e-6, "{m}: quadrature {q} vs {c}");
    }
    // stdout carries the same table
    assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(dir.path().join("dcr.csv")).unwrap());
}

#[test]
fn schema_is_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatwire(dir.path(), &["schema"]);
    assert_eq!(code(&o), 0);
    let cfg = dir.path().join("schema.toml");
    std::fs::write(&cfg, &o.stdout).unwrap();
    let o = flatwire(dir.path(), &["dcr", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn missing_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatwire(dir.path(), &["dcr"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn unreadable_config_is_an_io_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatwire(dir.path(), &["dcr", "/nonexistent/design.toml"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("/nonexistent/design.toml"), "{}", stderr(&o));
}

#[test]
fn invalid_geometry_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(prototype()).unwrap().replace("\"0.58 mm\"", "\"-0.58 mm\"");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = flatwire(dir.path(), &["dcr", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("thickness"), "{}", stderr(&o));
}

#[test]
fn resistance_table_outside_its_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let resp = dir.path().join("resp.csv");
    std::fs::write(&resp, "frequency_hz,rac_mohm,l_abs_uh\n50000,245,88\n100000,362,87.8\n").unwrap();
    let o = flatwire(
        dir.path(),
        &["ripple", "--vo", "50", "--fs", "100k", "--from", resp.to_str().unwrap()],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn solve_is_reproducible_byte_for_byte() {
    let proto = prototype();
    let args = ["solve", proto.to_str().unwrap(), "--freq", "0,20k", "--cells-per-skin-depth", "1"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = flatwire(d.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["response.csv", "turn_losses.csv", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["parameters"]["frequencies_hz"], "0,20000");
    assert!(m["outputs"].as_array().unwrap().iter().any(|o| o == "response.csv"));

    let (h, rows) = table(&a.path().join("response.csv"));
    let rac: Vec<f64> = rows.iter().map(|r| r[col(&h, "rac_mohm")].parse().unwrap()).collect();
    assert!((rac[0] - 12.04).abs() < 0.01, "{rac:?}");
    assert!(rac[1] > rac[0]);
}

#[test]
fn sweep_keeps_going_past_a_bad_point() {
    let dir = tempfile::tempdir().unwrap();
    let proto = prototype();
    let o = flatwire(
        dir.path(),
        &[
            "sweep",
            proto.to_str().unwrap(),
            "--param",
            "left-clearance",
            "--values",
            "1.55mm,12mm",
            "--freq",
            "10k",
            "--cells-per-skin-depth",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = table(&dir.path().join("sweep.csv"));
    assert_eq!(h[0], "left_clearance_mm");
    let status = col(&h, "status");
    assert_eq!(rows[0][status], "ok");
    assert_eq!(rows[1][status], "failed");
    assert!(!rows[1][col(&h, "error")].is_empty());
    let dcr: f64 = rows[0][col(&h, "dcr_mohm")].parse().unwrap();
    assert!((dcr - 12.04).abs() < 0.01);
}

#[test]
fn ripple_spectrum_matches_the_triangle_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatwire(
        dir.path(),
        &["ripple", "--vo", "50", "--fs", "100k", "--inductance", "82.8u", "--rac", "0.425", "--h-max", "25"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = table(&dir.path().join("spectrum.csv"));
    let loss = col(&h, "loss_w");
    let total: f64 = rows.iter().map(|r| r[loss].parse::<f64>().unwrap()).sum();

    // Fourier series of a triangle of peak-to-peak swing V/(2 L f)
    let ipp = 50.0 / (2.0 * 82.8e-6 * 1e5);
    let want: f64 = (1..=25)
        .step_by(2)
        .map(|k| {
            let hk = f64::from(k);
            let amp = 4.0 * ipp / (PI * PI * hk * hk);
            0.5 * 0.425 * hk.sqrt() * amp * amp
        })
        .sum();
    assert_eq!(rows.len(), 13);
    assert!((total / want - 1.0).abs() < 1e-6, "{total} vs {want}");
}

#[test]
fn mec_reads_q_from_a_solve_table() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    std::fs::write(&q, "frequency_hz,q_re,q_im\n0,0,0\n10000,0.01,0.001\n100000,0.1,0.01\n").unwrap();
    let proto = prototype();
    let o = flatwire(
        dir.path(),
        &["mec", proto.to_str().unwrap(), "--freq", "0,100k", "--q-table", q.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (h, rows) = table(&dir.path().join("mec.csv"));
    let l: Vec<f64> = rows.iter().map(|r| r[col(&h, "l_abs_uh")].parse().unwrap()).collect();
    assert!((l[0] - 98.97).abs() < 0.01, "{l:?}");
    // |1 + Q| scales the reluctance, so |L| drops by about that factor
    let ratio = l[1] / l[0];
    assert!((ratio - 1.0 / (1.1f64.powi(2) + 0.01f64.powi(2)).sqrt()).abs() < 0.02, "{ratio}");
}
