use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use edge_spectra::degennes::{DeGennes, RobinParameter};
use edge_spectra::geometry::{DomainGeometry, RadialFourier, DEFAULT_SAMPLES};
use serde::{Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(name = "edge-spectra", version, about = "Edge-state spectra of the magnetic Robin Laplacian")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "EDGE_SPECTRA_OUT", default_value = "edge-spectra-out")]
    pub out: PathBuf,

    /// Flat `key = value` file supplying defaults for the subcommand flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample dispersion curves μ_n(γ, σ) and locate their minima.
    #[command(args_override_self = true)]
    Dispersion(DispersionArgs),
    /// Minima Θ^[n−1](γ) over a grid of Robin parameters.
    #[command(args_override_self = true)]
    Minima(MinimaArgs),
    /// Curvature coefficients C_k(σ) with closed-form and moment checks.
    #[command(args_override_self = true)]
    Ck(CkArgs),
    /// The threshold γ₀ where C_k vanishes at the minimum.
    #[command(args_override_self = true)]
    Gamma0(Gamma0Args),
    /// Eigenvalues in a window: effective model, full matrix, or exact disk.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Hausdorff distance between two spectrum files.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Two-term Weyl count in a window.
    #[command(args_override_self = true)]
    Weyl(WeylArgs),
    /// Branch diagram and crossings as h varies.
    #[command(args_override_self = true)]
    Oscillate(OscillateArgs),
    /// Harmonic ladder at the bottom of the spectrum.
    #[command(args_override_self = true)]
    Lowlying(LowlyingArgs),
    /// Mesh refinement and model comparison for the exact disk spectrum.
    #[command(args_override_self = true)]
    DiskValidate(DiskArgs),
    /// Boundary localization of the exact disk eigenfunctions.
    #[command(args_override_self = true)]
    Agmon(DiskArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion(_) => "dispersion",
            Command::Minima(_) => "minima",
            Command::Ck(_) => "ck",
            Command::Gamma0(_) => "gamma0",
            Command::Spectrum(_) => "spectrum",
            Command::Compare(_) => "compare",
            Command::Weyl(_) => "weyl",
            Command::Oscillate(_) => "oscillate",
            Command::Lowlying(_) => "lowlying",
            Command::DiskValidate(_) => "disk-validate",
            Command::Agmon(_) => "agmon",
        }
    }
}

pub const SUBCOMMANDS: &[&str] = &[
    "dispersion",
    "minima",
    "ck",
    "gamma0",
    "spectrum",
    "compare",
    "weyl",
    "oscillate",
    "lowlying",
    "disk-validate",
    "agmon",
];

#[derive(Debug, Args, Serialize)]
pub struct DispersionArgs {
    /// Robin parameter, or `dirichlet`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Gamma,
    /// Branch indices, `1..4` or `1,3`.
    #[arg(long, default_value = "1")]
    pub n: IndexList,
    /// σ interval `lo:hi`.
    #[arg(long, default_value = "-2:6", allow_hyphen_values = true)]
    pub sigma: Interval,
    #[arg(long, default_value_t = 161)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MinimaArgs {
    /// γ interval `lo:hi`.
    #[arg(long, default_value = "-2:3", allow_hyphen_values = true)]
    pub gamma_range: Interval,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    #[arg(long, default_value = "1..3")]
    pub n: IndexList,
}

#[derive(Debug, Args, Serialize)]
pub struct CkArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value = "1")]
    pub k: IndexList,
    #[arg(long, default_value = "-1:4", allow_hyphen_values = true)]
    pub sigma: Interval,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Gamma0Args {
    #[arg(long, default_value = "1")]
    pub k: IndexList,
}

/// Domain selection, exactly one of the three.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct GeometryArgs {
    /// Disk of the given radius.
    #[arg(long)]
    pub disk: Option<f64>,
    /// Ellipse with semi-axes `a:b`.
    #[arg(long)]
    pub ellipse: Option<Axes>,
    /// Star-shaped domain r(φ) = c₀ + Σ c_j cos jφ, given as `c0,c1,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub fourier: Option<Vec<f64>>,
}

impl GeometryArgs {
    pub fn build(&self, samples: usize) -> anyhow::Result<DomainGeometry> {
        let g = match (self.disk, self.ellipse, &self.fourier) {
            (Some(r), _, _) => DomainGeometry::disk_with(r, samples)?,
            (_, Some(e), _) => DomainGeometry::ellipse(e.a, e.b, samples)?,
            (_, _, Some(c)) => DomainGeometry::custom_from_radius(
                &RadialFourier { cos: c.clone(), sin: vec![] },
                samples,
            )?,
            _ => bail!("choose a domain with --disk, --ellipse or --fourier"),
        };
        Ok(g)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Problem {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Boundary sampling points.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub boundary_samples: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Gamma,
    /// Semiclassical parameter h.
    #[arg(long)]
    pub h: f64,
    /// Window `a:b` in units of h; `a` may be `-inf` or `theta+d`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Leading,
    Matrix,
    Disk,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: Problem,
    #[arg(long, value_enum, default_value_t = Method::Leading)]
    pub method: Method,
    /// Extra width (units of h) around the window kept by `--method disk`.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Spectrum CSV used for the window metadata.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Override the window (units of h).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<Interval>,
}

#[derive(Debug, Args, Serialize)]
pub struct WeylArgs {
    #[command(flatten)]
    pub problem: Problem,
}

#[derive(Debug, Args, Serialize)]
pub struct OscillateArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub boundary_samples: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    /// h interval `lo:hi`.
    #[arg(long)]
    pub h_range: Interval,
    /// Window `a:b` with Θ^[0](γ) < a < b < 1; `a` may be `theta+d`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Window,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Also track one level over [h_lo, h_lo + M·h_lo²].
    #[arg(long)]
    pub track: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct LowlyingArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub boundary_samples: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Gamma,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 3)]
    pub jmax: usize,
    /// Compare with the full k = 1 matrix below the ladder window top.
    #[arg(long)]
    pub crosscheck: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DiskArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Gamma,
    #[arg(long)]
    pub h: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub window: Window,
}

/// `γ` as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma(pub RobinParameter);

impl FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Gamma).map_err(|e: edge_spectra::Error| e.to_string())
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// `lo:hi` with `lo ≤ hi`; either end may be `-inf`/`inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn parse_bound(s: &str) -> Result<f64, String> {
    match s.trim() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| format!("not a number: {t:?}")),
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let (lo, hi) = (parse_bound(a)?, parse_bound(b)?);
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(format!("empty interval {s:?}"));
        }
        Ok(Self { lo, hi })
    }
}

impl Interval {
    /// `points` equispaced values, both ends included.
    pub fn grid(&self, points: usize) -> anyhow::Result<Vec<f64>> {
        if points < 2 || !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            bail!("need a finite interval and at least two points");
        }
        let step = (self.hi - self.lo) / (points - 1) as f64;
        Ok((0..points).map(|i| self.lo + step * i as f64).collect())
    }
}

/// Semi-axes `a:b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axes {
    pub a: f64,
    pub b: f64,
}

impl FromStr for Axes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
        Ok(Self { a: num(a)?, b: num(b)? })
    }
}

/// Lower window end: a number, `-inf`, or `theta±d` relative to Θ^[0](γ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lower {
    Value(f64),
    Theta(f64),
}

impl fmt::Display for Lower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lower::Value(v) => write!(f, "{v}"),
            Lower::Theta(d) if *d == 0.0 => f.write_str("theta"),
            Lower::Theta(d) => write!(f, "theta{d:+}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: Lower,
    pub hi: f64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let a = a.trim();
        let lo = match a.strip_prefix("theta").or_else(|| a.strip_prefix("θ")) {
            Some("") => Lower::Theta(0.0),
            Some(rest) => Lower::Theta(rest.parse().map_err(|_| format!("bad offset in {a:?}"))?),
            None => Lower::Value(parse_bound(a)?),
        };
        let hi = parse_bound(b)?;
        if !hi.is_finite() {
            return Err(format!("upper window end must be finite, got {b:?}"));
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Window {
    /// Numeric `(a, b)`, evaluating `theta` as Θ^[0](γ).
    pub fn resolve(&self, dg: &DeGennes, gamma: RobinParameter) -> anyhow::Result<(f64, f64)> {
        let a = match self.lo {
            Lower::Value(v) => v,
            Lower::Theta(d) => {
                let g = gamma.real().context("`theta` needs a real Robin parameter")?;
                dg.find_minimum(g, 1)?.theta + d
            }
        };
        Ok((a, self.hi))
    }
}

/// Branch indices: `n`, `lo..hi` (inclusive) or a comma list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

impl FromStr for IndexList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected n, lo..hi or a,b,c; got {s:?}");
        let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
            let lo: usize = a.trim().parse().map_err(|_| bad())?;
            let hi: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            (lo..=hi).collect()
        } else {
            s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        if v.is_empty() || v.contains(&0) {
            return Err(format!("indices start at 1: {s:?}"));
        }
        Ok(Self(v))
    }
}

impl Serialize for IndexList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_windows() {
        let w: Window = "-inf:0.9".parse().unwrap();
        assert_eq!(w.lo, Lower::Value(f64::NEG_INFINITY));
        let w: Window = "theta+0.05:0.95".parse().unwrap();
        assert_eq!(w.lo, Lower::Theta(0.05));
        assert_eq!(w.to_string(), "theta+0.05:0.95");
        assert!("0.9".parse::<Window>().is_err());
        assert!("0.5:inf".parse::<Window>().is_err());
    }

    #[test]
    fn parses_indices() {
        assert_eq!("1..4".parse::<IndexList>().unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!("2,5".parse::<IndexList>().unwrap().0, vec![2, 5]);
        assert!("0..2".parse::<IndexList>().is_err());
    }

    #[test]
    fn interval_order() {
        assert!("1:0".parse::<Interval>().is_err());
        let i: Interval = "-2:6".parse().unwrap();
        assert_eq!(i.grid(5).unwrap(), vec![-2.0, 0.0, 2.0, 4.0, 6.0]);
    }
}
