//! Flags, the flat `key = value` config file, and the merged run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Anything left unset falls back to the config file,
/// then to the subcommand default.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags given on the command line win
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Catalog function, e.g. `power:beta=0.5` or `piecewise_linear_random:k=8,seed=7`
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Number of grid cells
    #[arg(long)]
    pub n: Option<usize>,
    /// Fractional order; repeat or separate with commas for several
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    /// Growth ratio that marks a level as diverging
    #[arg(long)]
    pub rho: Option<f64>,
    /// Number of trailing levels the growth rule looks at
    #[arg(long)]
    pub m: Option<usize>,
    /// Final variation must exceed this multiple of the sup norm to call a point unbounded
    #[arg(long)]
    pub floor: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jmin: Option<u32>,
    #[arg(long)]
    pub jmax: Option<u32>,
    /// Every stride-th grid node is a detection candidate
    #[arg(long)]
    pub stride: Option<usize>,
    /// Refinement levels per variation profile
    #[arg(long)]
    pub levels: Option<usize>,
    /// Cells across the widest profile window
    #[arg(long)]
    pub n_per_level: Option<usize>,
    /// Cells of the grid fractional-integral images are computed on
    #[arg(long)]
    pub image_n: Option<usize>,
}

const KEYS: [&str; 17] = [
    "function", "a", "b", "n", "alpha", "rho", "m", "floor", "output", "format", "seed", "jmin", "jmax", "stride",
    "levels", "n_per_level", "image_n",
];

/// Parse the flat config format: one `key = value` per line, `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key `{}`", lineno + 1, k.trim())));
        }
        if out.insert(key, v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: key `{}` given twice", lineno + 1, k.trim())));
        }
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
}

impl CommonArgs {
    /// Fill unset fields from `file`.
    pub fn merge_file(&mut self, file: &BTreeMap<String, String>) -> Result<(), CliError> {
        fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, file: &BTreeMap<String, String>) -> Result<(), CliError> {
            if slot.is_none() {
                if let Some(v) = file.get(key) {
                    *slot = Some(parse_value(key, v)?);
                }
            }
            Ok(())
        }
        fill(&mut self.function, "function", file)?;
        fill(&mut self.a, "a", file)?;
        fill(&mut self.b, "b", file)?;
        fill(&mut self.n, "n", file)?;
        fill(&mut self.rho, "rho", file)?;
        fill(&mut self.m, "m", file)?;
        fill(&mut self.floor, "floor", file)?;
        fill(&mut self.output, "output", file)?;
        fill(&mut self.seed, "seed", file)?;
        fill(&mut self.jmin, "jmin", file)?;
        fill(&mut self.jmax, "jmax", file)?;
        fill(&mut self.stride, "stride", file)?;
        fill(&mut self.levels, "levels", file)?;
        fill(&mut self.n_per_level, "n_per_level", file)?;
        fill(&mut self.image_n, "image_n", file)?;
        if self.format.is_none() {
            if let Some(v) = file.get("format") {
                self.format = Some(Format::from_str(v, true).map_err(|_| CliError::Config(format!("`format`: `{v}` is not csv or json")))?);
            }
        }
        if self.alpha.is_empty() {
            if let Some(v) = file.get("alpha") {
                self.alpha = v.split(',').map(|s| parse_value("alpha", s.trim())).collect::<Result<_, _>>()?;
            }
        }
        Ok(())
    }

    pub fn load(mut self) -> Result<Self, CliError> {
        if let Some(path) = self.config.clone() {
            let text = read_config(&path)?;
            self.merge_file(&parse_config_file(&text)?)?;
        }
        Ok(self)
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Fully resolved settings of one invocation, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub function: String,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub m: usize,
    pub floor: f64,
    pub format: Format,
    pub seed: u64,
    pub jmin: u32,
    pub jmax: u32,
    pub stride: usize,
    pub levels: usize,
    pub n_per_level: usize,
    pub image_n: usize,
    /// Kept out of the JSON so the same run written to two places is byte-identical.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Per-subcommand defaults for the grid size and output format.
pub struct Defaults {
    pub n: usize,
    pub format: Format,
    pub alpha: Vec<f64>,
}

/// Largest level with at least 4 samples per column and whole columns, capped at 12.
fn default_jmax(n: usize) -> u32 {
    let mut j = 0;
    while j < 12 && n >= 1usize << (j + 3) && n % (1usize << (j + 1)) == 0 {
        j += 1;
    }
    j
}

impl RunConfig {
    pub fn resolve(command: &str, args: CommonArgs, d: Defaults) -> Result<Self, CliError> {
        let n = args.n.unwrap_or(d.n);
        let cfg = Self {
            command: command.to_string(),
            function: args.function.unwrap_or_else(|| "constant".into()),
            a: args.a.unwrap_or(f64::NAN),
            b: args.b.unwrap_or(f64::NAN),
            n,
            alpha: if args.alpha.is_empty() { d.alpha } else { args.alpha },
            rho: args.rho.unwrap_or(1.5),
            m: args.m.unwrap_or(3),
            floor: args.floor.unwrap_or(10.0),
            format: args.format.unwrap_or(d.format),
            seed: args.seed.unwrap_or(42),
            jmin: args.jmin.unwrap_or(2),
            jmax: args.jmax.unwrap_or_else(|| default_jmax(n)),
            stride: args.stride.unwrap_or(1),
            levels: args.levels.unwrap_or(6),
            n_per_level: args.n_per_level.unwrap_or(8192),
            image_n: args.image_n.unwrap_or(1 << 14),
            output: args.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(a) = self.alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return bad(format!("alpha must be positive and finite, got {a}"));
        }
        if self.n == 0 || self.image_n == 0 {
            return bad("n and image_n must be at least 1".into());
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if v.is_infinite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.a.is_finite() && self.b.is_finite() && self.a >= self.b {
            return bad(format!("need a < b, got a = {}, b = {}", self.a, self.b));
        }
        if self.command == "boxdim" && self.jmin > self.jmax {
            return bad(format!("jmin = {} exceeds jmax = {}", self.jmin, self.jmax));
        }
        if self.stride == 0 || self.levels < 2 || self.n_per_level == 0 {
            return bad("need stride >= 1, levels >= 2 and n_per_level >= 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let m = parse_config_file("# run\nfunction = power:beta=0.5\n\nn=256 # cells\nn-per-level = 64\n").unwrap();
        assert_eq!(m["function"], "power:beta=0.5");
        assert_eq!(m["n"], "256");
        assert_eq!(m["n_per_level"], "64");
        assert!(parse_config_file("bogus = 1").is_err());
        assert!(parse_config_file("n = 1\nn = 2").is_err());
        assert!(parse_config_file("just text").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut args = CommonArgs { n: Some(64), ..CommonArgs::default() };
        let file = parse_config_file("n = 128\nalpha = 0.25, 0.5\nformat = json").unwrap();
        args.merge_file(&file).unwrap();
        assert_eq!(args.n, Some(64));
        assert_eq!(args.alpha, vec![0.25, 0.5]);
        assert_eq!(args.format, Some(Format::Json));
    }

    #[test]
    fn default_levels_follow_grid() {
        assert_eq!(default_jmax(1024), 8);
        assert_eq!(default_jmax(1 << 14), 12);
        assert_eq!(default_jmax(1 << 20), 12);
        assert_eq!(default_jmax(12), 1);
    }
}
