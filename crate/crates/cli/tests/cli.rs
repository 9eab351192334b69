use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use edge_spectra::degennes::{DeGennes, RobinParameter};
use edge_spectra::effective::{lowlying_spectrum, weyl_count, BoundaryModel, SemiclassicalConfig};
use edge_spectra::geometry::DomainGeometry;
use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edge-spectra"))
        .args(args)
        .env("EDGE_SPECTRA_OUT", dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV, skipping `#` lines and the header.
fn rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn dispersion_files_and_extrema() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["dispersion", "--gamma", "-1", "--n", "1..4", "--sigma", "-2:6", "--samples", "21"]);
    for n in 1..=4 {
        let r = rows(d.path().join(format!("branch_n{n}.csv")));
        assert_eq!(r.len(), 21);
    }
    let e = json(d.path().join("extrema.json"));
    let ex = e["extrema"].as_array().unwrap();
    assert_eq!(ex.len(), 4);
    let lib = DeGennes::default().find_minimum(-1.0, 1).unwrap();
    assert_eq!(ex[0]["theta"].as_f64().unwrap(), lib.theta);
    for b in e["branches"].as_array().unwrap() {
        assert_eq!(b["monotonicity"]["kind"], "single_minimum");
    }
    let m = json(d.path().join("dispersion.manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn dirichlet_branch_has_no_extremum() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["dispersion", "--gamma", "dirichlet", "--n", "1", "--samples", "21"]);
    let e = json(d.path().join("extrema.json"));
    assert!(e["extrema"].as_array().unwrap().is_empty());
    assert_eq!(e["branches"][0]["monotonicity"]["kind"], "decreasing");
    let mu: Vec<f64> = rows(d.path().join("branch_n1.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    // the tail meets the Landau level to solver accuracy
    assert!(mu.windows(2).all(|w| w[1] < w[0] + 1e-9));
    assert!(mu[0] > 10.0 && (mu[20] - 1.0).abs() < 1e-6);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["dispersion", "--gamma", "0.5", "--n", "1,2", "--samples", "11"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap());
    }
}

#[test]
fn config_file_supplies_defaults() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "# branch sweep\ngamma = 0\nn = 1..2\nsamples = 9\n").unwrap();
    let out = d.path().join("out");
    let c = cfg.to_str().unwrap();
    ok(&out, &["--config", c, "dispersion", "--samples", "7"]);
    assert_eq!(rows(out.join("branch_n2.csv")).len(), 7);
    let m = json(out.join("dispersion.manifest.json"));
    assert_eq!(m["config"]["entries"].as_array().unwrap().len(), 3);
    assert_eq!(m["arguments"]["dispersion"]["samples"], 7);
    assert_eq!(m["arguments"]["dispersion"]["gamma"], 0.0);
}

#[test]
fn usage_errors_exit_with_two() {
    let d = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["spectrum", "--ellipse", "2:1", "--gamma", "0", "--h", "0.05", "--window", "0.7:0.9", "--method", "disk"],
        &["weyl", "--disk", "1", "--gamma", "soft", "--h", "0.05", "--window", "0.7:0.9"],
        &["weyl", "--disk", "1", "--gamma", "0", "--h", "0.05", "--window", "0.9"],
        &["weyl", "--disk", "1", "--ellipse", "2:1", "--gamma", "0", "--h", "0.05", "--window", "0.7:0.9"],
    ];
    for args in cases {
        let o = run(d.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn library_errors_are_reported() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["weyl", "--disk", "1", "--gamma", "0", "--h", "0.5", "--window", "0.7:0.9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("h must lie in"));
    let m = json(d.path().join("weyl.manifest.json"));
    assert_eq!(m["status"], "partial");
    assert_eq!(m["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn leading_and_disk_spectra_compare() {
    let d = TempDir::new().unwrap();
    let (lead, disk) = (d.path().join("lead"), d.path().join("disk"));
    let p = ["--disk", "1", "--gamma", "0", "--h", "0.05", "--window", "0.7:0.9"];
    ok(&lead, &[&["spectrum"], &p[..], &["--method", "leading"]].concat());
    ok(&disk, &[&["spectrum"], &p[..], &["--method", "disk", "--margin", "0.1"]].concat());
    let l = lead.join("spectrum.csv");
    let x = disk.join("spectrum.csv");
    ok(d.path(), &["compare", "--reference", x.to_str().unwrap(), "--candidate", l.to_str().unwrap()]);
    let c = json(d.path().join("compare.json"));
    assert_eq!(c["count_reference"], c["count_candidate"]);
    let ratio = c["windowed_hausdorff_over_h2"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio < 1.0, "{ratio}");
    let s = json(lead.join("spectrum.json"));
    let flagged = rows(&l).iter().filter(|r| r[5] == "true").count();
    assert_eq!(s["entries"].as_array().unwrap().len(), flagged);
}

#[test]
fn weyl_matches_library() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["weyl", "--disk", "1", "--gamma", "0", "--h", "0.05", "--window", "0.7:0.9"]);
    let w = json(d.path().join("weyl.json"));
    let cfg = SemiclassicalConfig::new(0.05, RobinParameter::Robin(0.0), 0.7, 0.9, DomainGeometry::disk(1.0).unwrap())
        .unwrap();
    let lib = weyl_count(&BoundaryModel::for_config(&cfg).unwrap(), &cfg).unwrap();
    assert_eq!(w["weyl"]["count"].as_i64().unwrap(), lib.count);
    assert_eq!(w["weyl"]["first_term"].as_f64().unwrap(), lib.first_term);
    assert!(out.starts_with(&lib.count.to_string()));
}

#[test]
fn lowlying_ladder_on_the_ellipse() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["lowlying", "--ellipse", "2:1", "--gamma", "0", "--h", "0.01", "--jmax", "3"]);
    let ladder: Vec<f64> = rows(d.path().join("ladder.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    // two congruent curvature maxima, each level doubled
    assert_eq!(ladder.len(), 6);
    let g = DomainGeometry::ellipse(2.0, 1.0, 1024).unwrap();
    let lib = lowlying_spectrum(&DeGennes::default(), 0.01, RobinParameter::Robin(0.0), &g, 3).unwrap();
    assert_eq!(ladder, lib.ladder);
    assert!((ladder[2] - ladder[0] - lib.spacing()).abs() < 1e-15);
}

#[test]
fn agmon_states_live_at_the_edge() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["agmon", "--gamma", "0", "--h", "0.04", "--window", "0.7:0.9"]);
    let r = rows(d.path().join("agmon.csv"));
    assert!(!r.is_empty());
    for row in r {
        let within10: f64 = row[4].parse().unwrap();
        let rate: f64 = row[5].parse().unwrap();
        assert!(within10 >= 0.99 && rate > 0.0);
    }
}

#[test]
fn oscillate_lists_crossings() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["oscillate", "--disk", "1", "--gamma", "-1", "--h-range", "0.025:0.0275", "--window", "theta+0.05:0.95", "--samples", "21"],
    );
    let x = rows(d.path().join("crossings.csv"));
    assert!(!x.is_empty());
    let diagram = json(d.path().join("diagram.json"));
    assert_eq!(diagram["crossings"].as_array().unwrap().len(), x.len());
    let theta = DeGennes::default().find_minimum(-1.0, 1).unwrap().theta;
    assert_eq!(diagram["a"].as_f64().unwrap(), theta + 0.05);
}
