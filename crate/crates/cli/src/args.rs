//! Flag definitions, config-file splicing and small value parsers.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spectra::bie::NodeCount;
use spectra::fem::{BoundaryCondition, SpaceKind};
use spectra::mps::CornerSelection;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "spectra", version, about = "Planar Laplace eigenvalues by FEM, boundary integrals and particular solutions")]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of one domain.
    #[command(args_override_self = true)]
    Solve(Opts),
    /// Steklov sweep over eccentric annuli.
    #[command(args_override_self = true)]
    Sweep(Opts),
    /// Index-by-index comparison of two domains.
    #[command(args_override_self = true)]
    Compare(Opts),
    /// CR/P1/P2 bracket of one eigenvalue over a level schedule.
    #[command(args_override_self = true)]
    Bounds(Opts),
    /// Analytic-oracle self checks.
    #[command(args_override_self = true)]
    Validate(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Compare(_) => "compare",
            Command::Bounds(_) => "bounds",
            Command::Validate(_) => "validate",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Solve(o) | Command::Sweep(o) | Command::Compare(o) | Command::Bounds(o) | Command::Validate(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    #[value(name = "fem-p1")]
    FemP1,
    #[value(name = "fem-p2")]
    FemP2,
    #[value(name = "fem-cr")]
    FemCr,
    Bie,
    Mps,
}

impl Method {
    pub fn space(self) -> Option<SpaceKind> {
        match self {
            Method::FemP1 => Some(SpaceKind::P1),
            Method::FemP2 => Some(SpaceKind::P2),
            Method::FemCr => Some(SpaceKind::CR),
            Method::Bie | Method::Mps => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Built-in name (optionally `name:scale=s`) or domain file.
    #[arg(long)]
    pub domain: Option<String>,
    /// Second domain for `compare`.
    #[arg(long)]
    pub domain_b: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// dirichlet, neumann, mixed or steklov.
    #[arg(long)]
    pub bc: Option<BoundaryCondition>,
    /// Number of eigenvalues (nonzero ones for Neumann and Steklov).
    #[arg(long)]
    pub count: Option<usize>,
    /// Refinement levels: `K` for 1..=K or `a:b`.
    #[arg(long)]
    pub levels: Option<String>,
    /// BIE node counts, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    /// Read `--n` per boundary curve instead of in total.
    #[arg(long)]
    pub per_curve: bool,
    /// Edge-midpoint boundary mass for CR Steklov.
    #[arg(long)]
    pub cr_midpoint: bool,
    /// Relative multiplicity clustering radius.
    #[arg(long)]
    pub cluster_radius: Option<f64>,
    /// MPS search interval `lo:hi`.
    #[arg(long)]
    pub bracket: Option<String>,
    /// MPS sweep grid `lo:hi:step`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Corner expansion terms per corner.
    #[arg(long)]
    pub basis_size: Option<usize>,
    /// single, reentrant or all.
    #[arg(long)]
    pub corners: Option<CornerSelection>,
    /// Offsets `start:end:count` for `sweep`.
    #[arg(long)]
    pub eps: Option<String>,
    /// Eigenvalue indices for `sweep`, comma separated.
    #[arg(long)]
    pub k: Option<String>,
    /// 1-based eigenvalue index for `bounds`.
    #[arg(long)]
    pub index: Option<usize>,
    /// Output directory.
    #[arg(long, env = "SPECTRA_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// File of extra flags; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write `modes.svg` with nodal lines.
    #[arg(long)]
    pub svg: bool,
    /// Eigenvalue indices to plot, comma separated.
    #[arg(long)]
    pub modes: Option<String>,
    /// Only run validation checks whose name contains this.
    #[arg(long)]
    pub filter: Option<String>,
}

impl Opts {
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn node_schedule(&self, default: &str) -> anyhow::Result<Vec<NodeCount>> {
        let raw = self.n.as_deref().unwrap_or(default);
        parse_list::<usize>(raw, "--n")?
            .into_iter()
            .map(|n| {
                if n == 0 {
                    bail!("--n entries must be positive");
                }
                Ok(if self.per_curve { NodeCount::PerCurve(n) } else { NodeCount::Total(n) })
            })
            .collect()
    }
}

/// Extracts `--config FILE` from the raw arguments and splices the file's
/// flags in right after the subcommand, ahead of the user's own flags.
pub fn splice_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let Some(s) = a.to_str() else { continue };
        if s == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let extra = config_tokens(&text);
    let sub = args.iter().skip(1).position(|a| a.to_str().is_some_and(|s| !s.starts_with('-'))).map(|p| p + 2);
    let Some(at) = sub else { return Ok(args) };
    let mut out = args[..at].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

/// Whitespace-separated flags; `#` starts a comment.
pub fn config_tokens(text: &str) -> Vec<String> {
    text.lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .collect()
}

pub fn parse_list<T: std::str::FromStr>(raw: &str, flag: &str) -> anyhow::Result<Vec<T>> {
    let items: Result<Vec<T>, _> = raw.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => bail!("{flag}: cannot parse '{raw}' as a comma-separated list"),
    }
}

/// `K` means `1..=K`; `a:b` means `a..=b`.
pub fn parse_levels(raw: &str) -> anyhow::Result<Vec<u32>> {
    let (a, b) = match raw.split_once(':') {
        Some((a, b)) => (a.trim().parse::<u32>(), b.trim().parse::<u32>()),
        None => (Ok(1), raw.trim().parse::<u32>()),
    };
    match (a, b) {
        (Ok(a), Ok(b)) if a <= b && b <= 12 => Ok((a..=b).collect()),
        _ => bail!("--levels: expected K or a:b with a <= b <= 12, got '{raw}'"),
    }
}

pub fn parse_interval(raw: &str, flag: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = raw.split(':').collect();
    if let [a, b] = parts[..] {
        if let (Ok(a), Ok(b)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            if a < b && a.is_finite() && b.is_finite() {
                return Ok((a, b));
            }
        }
    }
    bail!("{flag}: expected lo:hi with lo < hi, got '{raw}'")
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_grid(raw: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = raw.split(':').filter_map(|s| s.trim().parse().ok()).collect();
    if let [lo, hi, step] = parts[..] {
        if step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite() {
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            return Ok((0..=n).map(|i| lo + step * i as f64).collect());
        }
    }
    bail!("--grid: expected lo:hi:step with step > 0, got '{raw}'")
}

/// `start:end:count` evenly spaced points, both ends included.
pub fn parse_linspace(raw: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').collect();
    if let [a, b, n] = parts[..] {
        if let (Ok(a), Ok(b), Ok(n)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>(), n.trim().parse::<usize>()) {
            if n == 1 {
                return Ok(vec![a]);
            }
            if n > 1 {
                let step = (b - a) / (n - 1) as f64;
                return Ok((0..n).map(|i| if i == n - 1 { b } else { a + step * i as f64 }).collect());
            }
        }
    }
    bail!("--eps: expected start:end:count, got '{raw}'")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels() {
        assert_eq!(parse_levels("3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("2:4").unwrap(), vec![2, 3, 4]);
        assert!(parse_levels("4:2").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let e = parse_linspace("0:0.88:45").unwrap();
        assert_eq!(e.len(), 45);
        assert_eq!(e[0], 0.0);
        assert_eq!(e[44], 0.88);
        assert!((e[1] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn grid_and_interval() {
        assert_eq!(parse_grid("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_interval("25:27", "--bracket").unwrap(), (25.0, 27.0));
        assert!(parse_interval("27:25", "--bracket").is_err());
    }

    #[test]
    fn config_goes_before_user_flags() {
        let dir = std::env::temp_dir().join(format!("spectra-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.cfg");
        std::fs::write(&file, "--count 3  # three\n--bc neumann\n").unwrap();
        let args: Vec<OsString> = ["spectra", "solve", "--config", file.to_str().unwrap(), "--count", "5"]
            .iter()
            .map(OsString::from)
            .collect();
        let spliced = splice_config(args).unwrap();
        let cli = Cli::try_parse_from(spliced).unwrap();
        let o = cli.command.opts();
        assert_eq!(o.count, Some(5));
        assert_eq!(o.bc, Some(BoundaryCondition::Neumann));
    }
}
