use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use edge_spectra::degennes::{DeGennes, DispersionBranch, ModeSample, RobinParameter};
use edge_spectra::diskmode::{localization_profile, radial_eigs, refinement_check, window_spectrum, Disk};
use edge_spectra::effective::*;
use edge_spectra::geometry::{DomainGeometry, GeometryKind};
use serde_json::json;

use crate::args::*;
use crate::cells;
use crate::output::{Run, Table};

/// Bad combination of otherwise valid flags; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn run(cmd: &Command, out: &mut Run) -> anyhow::Result<()> {
    let dg = DeGennes::default();
    match cmd {
        Command::Dispersion(a) => dispersion(&dg, a, out),
        Command::Minima(a) => minima(&dg, a, out),
        Command::Ck(a) => ck(&dg, a, out),
        Command::Gamma0(a) => gamma0(&dg, a, out),
        Command::Spectrum(a) => spectrum(&dg, a, out),
        Command::Compare(a) => compare(a, out),
        Command::Weyl(a) => weyl(&dg, a, out),
        Command::Oscillate(a) => oscillate(&dg, a, out),
        Command::Lowlying(a) => lowlying(&dg, a, out),
        Command::DiskValidate(a) => disk_validate(&dg, a, out),
        Command::Agmon(a) => agmon(&dg, a, out),
    }
}

fn dispersion(dg: &DeGennes, a: &DispersionArgs, out: &mut Run) -> anyhow::Result<()> {
    let gamma = a.gamma.0;
    let n_max = *a.n.0.iter().max().unwrap_or(&1);
    let sigmas = a.sigma.grid(a.samples)?;
    let mut per_branch: Vec<Vec<ModeSample>> = vec![Vec::with_capacity(sigmas.len()); n_max];
    for &s in &sigmas {
        for (i, m) in dg.modes(gamma, s, n_max)?.into_iter().enumerate() {
            per_branch[i].push(m);
        }
    }
    let mut branches = Vec::new();
    let mut extrema = Vec::new();
    for &n in &a.n.0 {
        let b = DispersionBranch::from_samples(gamma, n, per_branch[n - 1].clone())?;
        let mut t = Table::new(&["sigma", "mu", "dmu", "boundary_sq", "c"])
            .meta("gamma", gamma)
            .meta("n", n)
            .meta("monotonicity", serde_json::to_string(&b.monotonicity)?);
        for m in &b.samples {
            t.row(cells![m.sigma, m.mu, m.dmu, m.boundary_sq, m.c]);
        }
        out.csv(&format!("branch_n{n}.csv"), &t)?;
        branches.push(json!({ "n": n, "monotonicity": b.monotonicity, "warnings": b.warnings }));
        if let RobinParameter::Robin(g) = gamma {
            match dg.find_minimum(g, n) {
                Ok(e) => extrema.push(e),
                Err(e) => out.fail(format_args!("minimum of branch {n}"), e),
            }
        }
    }
    out.json("extrema.json", &json!({ "gamma": gamma, "branches": branches, "extrema": extrema }))
}

fn minima(dg: &DeGennes, a: &MinimaArgs, out: &mut Run) -> anyhow::Result<()> {
    let mut t = Table::new(&[
        "gamma",
        "n",
        "xi",
        "theta",
        "mu2",
        "c",
        "c_closed_form",
        "identity_residual",
        "dauge_helffer_residual",
    ]);
    for &n in &a.n.0 {
        for g in a.gamma_range.grid(a.points)? {
            match dg.find_minimum(g, n) {
                Ok(e) => t.row(cells![
                    g,
                    n,
                    e.xi,
                    e.theta,
                    e.mu2,
                    e.c,
                    e.c_closed_form(),
                    e.identity_residual,
                    e.dauge_helffer_residual()
                ]),
                Err(e) => out.fail(format_args!("n = {n}, gamma = {g}"), e),
            }
        }
    }
    out.csv("minima.csv", &t)
}

fn ck(dg: &DeGennes, a: &CkArgs, out: &mut Run) -> anyhow::Result<()> {
    let gamma = RobinParameter::Robin(a.gamma);
    let sigmas = a.sigma.grid(a.samples)?;
    let mut t = Table::new(&["k", "sigma", "mu", "c"]).meta("gamma", a.gamma);
    let mut checks = Vec::new();
    for &k in &a.k.0 {
        for &s in &sigmas {
            let m = dg.mode(gamma, s, k)?;
            t.row(cells![k, s, m.mu, m.c]);
        }
        match dg.find_minimum(a.gamma, k).and_then(|e| Ok((e, dg.moment_check(a.gamma, k)?))) {
            Ok((e, mc)) => checks.push(json!({
                "k": k,
                "xi": e.xi,
                "c_at_minimum": e.c,
                "c_closed_form": e.c_closed_form(),
                "moments": mc,
            })),
            Err(e) => out.fail(format_args!("minimum of branch {k}"), e),
        }
    }
    out.csv("ck.csv", &t)?;
    out.json("ck.json", &json!({ "gamma": a.gamma, "minima": checks }))
}

fn gamma0(dg: &DeGennes, a: &Gamma0Args, out: &mut Run) -> anyhow::Result<()> {
    let mut found = Vec::new();
    for &k in &a.k.0 {
        match dg.find_gamma0(k) {
            Ok(g) => {
                println!("k = {k}: gamma0 = {} (C_k zero at {})", g.gamma0, g.gamma0_from_c);
                found.push(json!({ "result": g, "agreement": g.agreement() }));
            }
            Err(e) => out.fail(format_args!("k = {k}"), e),
        }
    }
    out.json("gamma0.json", &found)
}

fn setup(dg: &DeGennes, p: &Problem) -> anyhow::Result<SemiclassicalConfig> {
    let geometry = p.geometry.build(p.boundary_samples)?;
    let (a, b) = p.window.resolve(dg, p.gamma.0)?;
    Ok(SemiclassicalConfig::new(p.h, p.gamma.0, a, b, geometry)?)
}

fn geometry_label(g: &DomainGeometry) -> String {
    match g.kind {
        GeometryKind::Disk { radius } => format!("disk {radius}"),
        GeometryKind::Ellipse { a, b } => format!("ellipse {a}:{b}"),
        GeometryKind::Custom => "custom".into(),
    }
}

fn spectrum_table(method: &str, cfg: &SemiclassicalConfig, header: &[&str]) -> Table {
    Table::new(header)
        .meta("method", method)
        .meta("geometry", geometry_label(&cfg.geometry))
        .meta("gamma", cfg.gamma)
        .meta("h", cfg.h)
        .meta("a", cfg.a)
        .meta("b", cfg.b)
}

fn inside(lambda: f64, cfg: &SemiclassicalConfig) -> bool {
    cfg.h * cfg.a <= lambda && lambda <= cfg.h * cfg.b
}

fn spectrum(dg: &DeGennes, a: &SpectrumArgs, out: &mut Run) -> anyhow::Result<()> {
    if a.method == Method::Disk && a.problem.geometry.disk.is_none() {
        return Err(usage("--method disk needs --disk"));
    }
    let cfg = setup(dg, &a.problem)?;
    match a.method {
        Method::Leading => {
            let model = BoundaryModel::for_config(&cfg)?;
            let dec = model.decomposition_for(cfg.a, cfg.b)?;
            let levels = grid_levels(&model, &cfg, &dec)?;
            let mut t = spectrum_table("leading", &cfg, &["k", "q", "ell", "sigma", "lambda", "in_window"]);
            for e in &levels {
                t.row(cells![e.k, e.q, e.ell, e.sigma, e.lambda, inside(e.lambda, &cfg)]);
            }
            out.csv("spectrum.csv", &t)?;
            let spec = leading_spectrum(&model, &cfg)?;
            println!("{} levels in the window", spec.len());
            out.json("spectrum.json", &spec)
        }
        Method::Matrix => {
            let model = BoundaryModel::for_config(&cfg)?;
            let dec = model.decomposition_for(cfg.a, cfg.b)?;
            let mut all = Vec::new();
            for k in 1..=dec.n {
                if dec.window_is_empty_for(k) {
                    continue;
                }
                let spec = match pdo_spectrum(&model, &cfg, k) {
                    Ok(s) => s,
                    Err(e) => {
                        out.fail(format_args!("matrix k = {k}"), e);
                        continue;
                    }
                };
                let mut t = spectrum_table("matrix", &cfg, &["k", "index", "peak_ell", "lambda", "in_window"])
                    .meta("edge_mass", spec.edge_mass);
                for (i, v) in spec.values.iter().enumerate() {
                    let lambda = v * cfg.h;
                    t.row(cells![k, i + 1, spec.peak_ells[i], lambda, inside(lambda, &cfg)]);
                }
                println!("k = {k}: {} eigenvalues in the window", spec.in_window(cfg.a, cfg.b).len());
                out.csv(&format!("spectrum_k{k}.csv"), &t)?;
                all.push(spec);
            }
            out.json("spectrum.json", &all)
        }
        Method::Disk => {
            let radius = a.problem.geometry.disk.unwrap_or(1.0);
            let disk = Disk::new(radius, cfg.h, cfg.gamma);
            let spec = window_spectrum(dg, &disk, cfg.a, cfg.b, a.margin)?;
            let mut t = spectrum_table("disk", &cfg, &["m", "j", "lambda", "in_window"]).meta("margin", a.margin);
            for e in &spec.entries {
                t.row(cells![e.m, e.j, e.lambda, inside(e.lambda, &cfg)]);
            }
            println!("{} eigenvalues in the window", spec.count());
            out.csv("spectrum.csv", &t)?;
            out.json("spectrum.json", &spec)
        }
    }
}

struct SpectrumFile {
    meta: BTreeMap<String, String>,
    lambdas: Vec<f64>,
}

fn read_spectrum(path: &Path) -> anyhow::Result<SpectrumFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let meta = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let col = r
        .headers()?
        .iter()
        .position(|h| h == "lambda")
        .with_context(|| format!("{} has no lambda column", path.display()))?;
    let mut lambdas = Vec::new();
    for rec in r.records() {
        lambdas.push(rec?[col].parse::<f64>()?);
    }
    Ok(SpectrumFile { meta, lambdas })
}

fn meta_f64(f: &SpectrumFile, key: &str) -> anyhow::Result<f64> {
    let v = f.meta.get(key).with_context(|| format!("metadata line `# {key} = ...` missing"))?;
    Ok(v.parse()?)
}

fn compare(a: &CompareArgs, out: &mut Run) -> anyhow::Result<()> {
    let x = read_spectrum(&a.reference)?;
    let y = read_spectrum(&a.candidate)?;
    let h = meta_f64(&x, "h")?;
    if let Ok(hy) = meta_f64(&y, "h") {
        if hy != h {
            return Err(usage(format!("files were computed at different h ({h} and {hy})")));
        }
    }
    let (lo, hi) = match a.window {
        Some(w) => (w.lo, w.hi),
        None => (meta_f64(&x, "a")?, meta_f64(&x, "b")?),
    };
    let count = |v: &[f64]| v.iter().filter(|l| h * lo <= **l && **l <= h * hi).count();
    let d = windowed_hausdorff(&x.lambdas, &y.lambdas, h * lo, h * hi);
    println!(
        "windowed Hausdorff distance {d:e} = {} h^2; counts {} (reference) and {} (candidate)",
        d / (h * h),
        count(&x.lambdas),
        count(&y.lambdas)
    );
    out.json(
        "compare.json",
        &json!({
            "reference": a.reference,
            "candidate": a.candidate,
            "h": h,
            "window": [lo, hi],
            "windowed_hausdorff": d,
            "windowed_hausdorff_over_h2": d / (h * h),
            "hausdorff": hausdorff(&x.lambdas, &y.lambdas),
            "count_reference": count(&x.lambdas),
            "count_candidate": count(&y.lambdas),
        }),
    )
}

fn weyl(dg: &DeGennes, a: &WeylArgs, out: &mut Run) -> anyhow::Result<()> {
    let cfg = setup(dg, &a.problem)?;
    let model = BoundaryModel::for_config(&cfg)?;
    let w = weyl_count(&model, &cfg)?;
    println!("{} (first term {}, second term {})", w.count, w.first_term, w.second_term);
    out.json("weyl.json", &json!({ "h": cfg.h, "a": cfg.a, "b": cfg.b, "gamma": cfg.gamma, "weyl": w }))
}

fn oscillate(dg: &DeGennes, a: &OscillateArgs, out: &mut Run) -> anyhow::Result<()> {
    let g = a.geometry.build(a.boundary_samples)?;
    let gamma = RobinParameter::Robin(a.gamma);
    let (wa, wb) = a.window.resolve(dg, gamma)?;
    let top = 0.5 * (wb + 1.0);
    let model = BoundaryModel::new(*dg, gamma, f64::NEG_INFINITY, top, default_pad(a.h_range.lo, &g))?;
    let diagram = trace_branches(&model, &g, (a.h_range.lo, a.h_range.hi), (wa, wb), a.samples)?;
    let mut t = Table::new(&["h", "q", "ell", "lambda"])
        .meta("gamma", a.gamma)
        .meta("a", wa)
        .meta("b", wb)
        .meta("c_hat", diagram.c_hat);
    for c in &diagram.curves {
        for (h, v) in diagram.hs.iter().zip(&c.values) {
            if let Some(v) = v {
                t.row(cells![h, c.q, c.ell, v]);
            }
        }
    }
    out.csv("branches.csv", &t)?;
    let mut x = Table::new(&["h", "ell1", "ell2", "lambda"]).meta("gamma", a.gamma);
    for c in &diagram.crossings {
        x.row(cells![c.h, c.ell1, c.ell2, c.lambda]);
    }
    println!("{} branch points, {} crossings, c_hat = {}", t.len(), x.len(), diagram.c_hat);
    out.csv("crossings.csv", &x)?;
    out.json("diagram.json", &diagram)?;
    if let Some(m) = a.track {
        match diagram.oscillation(&model, &g, a.h_range.lo, m, 2 * a.samples - 1) {
            Ok(o) => {
                println!("level {}: rise {} fall {}", o.j, o.rise, o.fall);
                out.json("oscillation.json", &o)?;
            }
            Err(e) => out.fail("tracked level", e),
        }
    }
    Ok(())
}

fn lowlying(dg: &DeGennes, a: &LowlyingArgs, out: &mut Run) -> anyhow::Result<()> {
    let g = a.geometry.build(a.boundary_samples)?;
    let ll = lowlying_spectrum(dg, a.h, a.gamma.0, &g, a.jmax)?;
    let mut t = Table::new(&["index", "lambda"]).meta("h", a.h).meta("gamma", a.gamma.0);
    for (i, v) in ll.ladder.iter().enumerate() {
        t.row(cells![i + 1, v]);
    }
    for (j, v) in ll.levels.iter().enumerate() {
        println!("j = {}: {v}", j + 1);
    }
    out.csv("ladder.csv", &t)?;
    out.json("lowlying.json", &ll)?;
    if a.crosscheck {
        let top = lowlying_window_top(&ll, &g);
        let cfg = SemiclassicalConfig::new(a.h, a.gamma.0, f64::NEG_INFINITY, top, g.clone())?;
        let model = BoundaryModel::for_config(&cfg)?;
        match harmonic_crosscheck(&model, &cfg, &ll) {
            Ok(r) => {
                println!("max |matrix - ladder| / h^(7/4) = {}", r.scaled_max);
                out.json("crosscheck.json", &r)?;
            }
            Err(e) => out.fail("crosscheck", e),
        }
    }
    Ok(())
}

fn disk_setup(dg: &DeGennes, a: &DiskArgs) -> anyhow::Result<(Disk, f64, f64)> {
    let (wa, wb) = a.window.resolve(dg, a.gamma.0)?;
    if !(a.radius > 0.0 && a.h > 0.0) {
        bail!("radius and h must be positive");
    }
    Ok((Disk::new(a.radius, a.h, a.gamma.0), wa, wb))
}

fn disk_validate(dg: &DeGennes, a: &DiskArgs, out: &mut Run) -> anyhow::Result<()> {
    let (disk, wa, wb) = disk_setup(dg, a)?;
    let spec = window_spectrum(dg, &disk, wa, wb, 0.1)?;
    let (lo, hi) = (disk.h * wa, disk.h * wb);
    let mut t = Table::new(&["m", "j", "lambda", "refinement_change_over_h"])
        .meta("radius", disk.radius)
        .meta("h", disk.h)
        .meta("gamma", disk.gamma)
        .meta("points", disk.points);
    let mut sectors: BTreeMap<i64, Vec<(usize, f64)>> = BTreeMap::new();
    for e in spec.in_window() {
        sectors.entry(e.m).or_default().push((e.j, e.lambda));
    }
    let mut worst = 0.0f64;
    for (m, entries) in &sectors {
        let change = disk.problem(*m).map_err(anyhow::Error::from).and_then(|p| Ok(refinement_check(&p, lo, hi)?));
        match change {
            Ok(c) => {
                worst = worst.max(c / disk.h);
                for (j, l) in entries {
                    t.row(cells![m, j, l, c / disk.h]);
                }
            }
            Err(e) => out.fail(format_args!("sector m = {m}"), e),
        }
    }
    out.csv("disk_validate.csv", &t)?;
    let geometry = DomainGeometry::disk(disk.radius)?;
    let cfg = SemiclassicalConfig::new(disk.h, disk.gamma, wa, wb, geometry)?;
    let model = BoundaryModel::for_config(&cfg)?;
    let levels: Vec<f64> = grid_levels(&model, &cfg, &model.decomposition_for(wa, wb)?)?
        .iter()
        .map(|e| e.lambda)
        .collect();
    let d = windowed_hausdorff(&spec.lambdas(), &levels, lo, hi);
    let lead = leading_spectrum(&model, &cfg)?.len();
    println!(
        "{} eigenvalues (model {lead}); max refinement change {worst:e} h; distance to model {} h^2",
        spec.count(),
        d / (disk.h * disk.h)
    );
    out.json(
        "disk_validate.json",
        &json!({
            "count": spec.count(),
            "model_count": lead,
            "max_refinement_change_over_h": worst,
            "windowed_hausdorff_over_h2": d / (disk.h * disk.h),
            "m_range": spec.m_range,
            "doublings": spec.doublings,
        }),
    )
}

fn agmon(dg: &DeGennes, a: &DiskArgs, out: &mut Run) -> anyhow::Result<()> {
    let (disk, wa, wb) = disk_setup(dg, a)?;
    let spec = window_spectrum(dg, &disk, wa, wb, 0.0)?;
    let sh = disk.h.sqrt();
    let mut t = Table::new(&["m", "j", "lambda", "mass_within_3", "mass_within_10", "rate"])
        .meta("h", disk.h)
        .meta("gamma", disk.gamma)
        .meta("distances", "in units of sqrt(h) from the boundary");
    let mut p = Table::new(&["m", "j", "distance", "fraction"]).meta("h", disk.h);
    for e in spec.in_window() {
        let res = disk.problem(e.m).and_then(|pr| {
            let r = radial_eigs(&pr, e.lambda.next_down(), e.lambda.next_up(), true)?;
            Ok(localization_profile(&pr, &r.functions[0]))
        });
        match res {
            Ok(loc) => {
                t.row(cells![
                    e.m,
                    e.j,
                    e.lambda,
                    loc.fraction_within(3.0 * sh),
                    loc.fraction_within(10.0 * sh),
                    loc.rate
                ]);
                for (d, f) in loc.distances.iter().zip(&loc.fractions) {
                    p.row(cells![e.m, e.j, d / sh, f]);
                }
            }
            Err(err) => out.fail(format_args!("state m = {}, j = {}", e.m, e.j), err),
        }
    }
    println!("{} edge states", t.len());
    out.csv("agmon.csv", &t)?;
    out.csv("agmon_profiles.csv", &p)
}
