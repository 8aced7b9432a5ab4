//! Run configuration: defaults, then a `key=value` config file, then flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use eigenmap::sweep::grid_range;
use eigenmap::{GraphRule, ValueDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Binary,
    Ternary,
}

impl From<DomainArg> for ValueDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Binary => ValueDomain::Binary,
            DomainArg::Ternary => ValueDomain::Ternary,
        }
    }
}

/// Which entity becomes a graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    /// Parameters (columns of the input file) are vertices.
    Params,
    /// Languages (rows of the input file) are vertices.
    Languages,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Eps,
    Knn,
    Far,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value config file; keys are flag names without the leading dashes
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, value_enum)]
    pub orientation: Option<OrientationArg>,
    #[arg(long)]
    pub min_coverage: Option<f64>,
    #[arg(long)]
    pub fill: Option<f64>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub m_dims: Option<usize>,
    /// a:b:step
    #[arg(long)]
    pub eps_grid: Option<String>,
    /// a:b:step
    #[arg(long)]
    pub t_grid: Option<String>,
    /// a:b:step, neighbor counts for the nearest-neighbor curve
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Comma-separated vertex counts for the random baseline
    #[arg(long)]
    pub baseline: Option<String>,
    /// Coordinates per random baseline vector
    #[arg(long)]
    pub coords: Option<usize>,
    /// Tukey fence multiplier
    #[arg(long)]
    pub tukey: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// synth: number of points
    #[arg(long)]
    pub points: Option<usize>,
    /// synth: number of planted clusters
    #[arg(long)]
    pub clusters: Option<usize>,
    /// synth: per-coordinate flip probability
    #[arg(long)]
    pub flip_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub domain: ValueDomain,
    pub vertices_are_params: bool,
    pub min_coverage: f64,
    pub fill: Option<f64>,
    pub rule: RuleArg,
    pub eps: f64,
    pub n: usize,
    pub t: Option<f64>,
    pub m_dims: usize,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub n_grid: Option<Vec<f64>>,
    pub baseline: Option<Vec<usize>>,
    pub coords: usize,
    pub tukey: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub points: usize,
    pub clusters: usize,
    pub flip_prob: f64,
}

pub const DEFAULT_T: f64 = 10.0;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            domain: ValueDomain::Binary,
            vertices_are_params: true,
            min_coverage: 0.0,
            fill: None,
            rule: RuleArg::Eps,
            eps: 8.0,
            n: 1,
            t: None,
            m_dims: 2,
            eps_grid: grid_range(1.0, 80.0, 1.0).unwrap(),
            t_grid: grid_range(1.0, 100.0, 11.0).unwrap(),
            n_grid: None,
            baseline: None,
            coords: 260,
            tukey: 1.5,
            seed: 0,
            out: PathBuf::from("out"),
            points: 60,
            clusters: 3,
            flip_prob: 0.05,
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(format!("grid '{s}' is not a:b:step"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number '{x}' in grid '{s}'"));
    grid_range(num(a)?, num(b)?, num(step)?).map_err(|e| e.to_string())
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().trim_start_matches("n=").parse().map_err(|_| format!("bad size '{x}'")))
        .collect()
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_owned());
    }
    Ok(out)
}

impl RunConfig {
    /// Applies a config-file map, then the explicit flags.
    pub fn resolve(file: &BTreeMap<String, String>, flags: &CommonArgs) -> Result<RunConfig, String> {
        let mut c = RunConfig::default();
        for (key, value) in file {
            c.apply(key, value)?;
        }
        c.apply_flags(flags);
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("config key '{key}': bad value '{v}'"))
        }
        fn choice<T: ValueEnum>(key: &str, v: &str) -> Result<T, String> {
            T::from_str(v, true).map_err(|_| format!("config key '{key}': bad value '{v}'"))
        }
        match key {
            "input" => self.input = Some(PathBuf::from(value)),
            "domain" => self.domain = choice::<DomainArg>(key, value)?.into(),
            "orientation" => self.vertices_are_params = choice::<OrientationArg>(key, value)? == OrientationArg::Params,
            "min-coverage" => self.min_coverage = num(key, value)?,
            "fill" => self.fill = Some(num(key, value)?),
            "rule" => self.rule = choice(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "t" => self.t = Some(num(key, value)?),
            "m-dims" => self.m_dims = num(key, value)?,
            "eps-grid" => self.eps_grid = parse_grid(value)?,
            "t-grid" => self.t_grid = parse_grid(value)?,
            "n-grid" => self.n_grid = Some(parse_grid(value)?),
            "baseline" => self.baseline = Some(parse_sizes(value)?),
            "coords" => self.coords = num(key, value)?,
            "tukey" => self.tukey = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "points" => self.points = num(key, value)?,
            "clusters" => self.clusters = num(key, value)?,
            "flip-prob" => self.flip_prob = num(key, value)?,
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: &CommonArgs) {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &f.$field { self.$field = v.clone(); }
            )*};
        }
        take!(min_coverage, rule, eps, n, m_dims, coords, tukey, seed, out, points, clusters, flip_prob);
        if let Some(v) = &f.input {
            self.input = Some(v.clone());
        }
        if let Some(v) = f.domain {
            self.domain = v.into();
        }
        if let Some(v) = f.orientation {
            self.vertices_are_params = v == OrientationArg::Params;
        }
        if f.fill.is_some() {
            self.fill = f.fill;
        }
        if f.t.is_some() {
            self.t = f.t;
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(format!("min-coverage {} outside [0, 1]", self.min_coverage));
        }
        if !(self.eps > 0.0) {
            return Err("eps must be positive".into());
        }
        if matches!(self.t, Some(t) if !(t > 0.0)) {
            return Err("t must be positive".into());
        }
        if self.m_dims == 0 {
            return Err("m-dims must be at least 1".into());
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0)) {
            return Err("t-grid values must be positive".into());
        }
        if self.eps_grid.iter().any(|&e| !(e > 0.0)) {
            return Err("eps-grid values must be positive".into());
        }
        Ok(())
    }

    pub fn graph_rule(&self) -> GraphRule {
        match self.rule {
            RuleArg::Eps => GraphRule::Epsilon(self.eps),
            RuleArg::Knn => GraphRule::Nearest(self.n),
            RuleArg::Far => GraphRule::Farthest(self.n),
        }
    }

    pub fn fill_value(&self) -> f64 {
        self.fill.unwrap_or_else(|| self.domain.default_fill())
    }

    /// ε grid for the random baseline: the configured one if given,
    /// otherwise every integer Hamming distance `1..=coords`.
    pub fn baseline_eps_grid(&self, explicit: bool) -> Vec<f64> {
        if explicit {
            self.eps_grid.clone()
        } else {
            grid_range(1.0, self.coords as f64, 1.0).unwrap_or_else(|_| vec![1.0])
        }
    }
}

/// Loads the config file named by `--config` (if any) and merges flags.
pub fn load(flags: &CommonArgs) -> Result<(RunConfig, bool), String> {
    let file = match &flags.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let explicit_eps_grid = flags.eps_grid.is_some() || file.contains_key("eps-grid");
    let mut flags = flags.clone();
    // grids and lists are parsed here so that parse errors are usage errors
    let mut file = file;
    for (key, value) in [
        ("eps-grid", flags.eps_grid.take()),
        ("t-grid", flags.t_grid.take()),
        ("n-grid", flags.n_grid.take()),
        ("baseline", flags.baseline.take()),
    ] {
        if let Some(v) = value {
            file.insert(key.to_owned(), v);
        }
    }
    Ok((RunConfig::resolve(&file, &flags)?, explicit_eps_grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("1:3:1").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_grid("1:3").is_err());
        assert!(parse_grid("a:3:1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text("# sswl\nmin-coverage = 0.55\nfill=0.5\nt=4\nbaseline=n=25,50\n").unwrap();
        let flags = CommonArgs { t: Some(7.0), ..Default::default() };
        let c = RunConfig::resolve(&file, &flags).unwrap();
        assert_eq!(c.min_coverage, 0.55);
        assert_eq!(c.fill, Some(0.5));
        assert_eq!(c.t, Some(7.0));
        assert_eq!(c.baseline, Some(vec![25, 50]));
    }

    #[test]
    fn bad_config() {
        assert!(parse_config_text("novalue\n").is_err());
        let file = parse_config_text("colour=blue\n").unwrap();
        assert!(RunConfig::resolve(&file, &CommonArgs::default()).is_err());
        let file = parse_config_text("min-coverage=1.5\n").unwrap();
        assert!(RunConfig::resolve(&file, &CommonArgs::default()).is_err());
    }

    #[test]
    fn ternary_default_fill_is_zero() {
        let file = parse_config_text("domain=ternary\n").unwrap();
        let c = RunConfig::resolve(&file, &CommonArgs::default()).unwrap();
        assert_eq!(c.fill_value(), 0.0);
    }
}
