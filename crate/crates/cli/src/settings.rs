//! Flag and config-file merging, grid specs and game resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use gda_core::games::{
    gen_bilinear, gen_scaling_instance, gen_scsc, gen_scsc_rotated, gen_strong_concave_only,
};
use gda_core::spectral::{lin_space, log_space};
use gda_core::{Algorithm, QuadraticGame};

use crate::args::Opts;

/// Flat `key = value` file. `#` starts a comment line.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

const KEYS: &[&str] = &[
    "seed",
    "out",
    "game_file",
    "a",
    "b",
    "c",
    "generator",
    "dim",
    "p",
    "coupling_std",
    "n_max",
    "algo",
    "eta",
    "beta",
    "eta_grid",
    "beta_grid",
    "theorem",
    "steps",
    "init",
    "stop",
    "ceiling",
    "n_values",
    "seeds",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                anyhow!("config line {}: expected key = value, got {line:?}", i + 1)
            })?;
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key {:?}", i + 1, k.trim());
            }
            entries.insert(key, (i + 1, v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config line {line}: bad value for {key}: {e}")),
        }
    }
}

/// Fills every unset flag from the config file.
pub fn merge(opts: &Opts, cfg: &ConfigFile) -> Result<Opts> {
    let mut o = opts.clone();
    macro_rules! fill {
        ($($field:ident),*) => {
            $(if o.$field.is_none() {
                o.$field = cfg.get(stringify!($field))?;
            })*
        };
    }
    fill!(
        seed,
        out,
        game_file,
        a,
        b,
        c,
        generator,
        dim,
        p,
        coupling_std,
        n_max,
        eta,
        beta,
        eta_grid,
        beta_grid,
        theorem,
        steps,
        init,
        stop,
        ceiling,
        n_values,
        seeds
    );
    if o.algo.is_empty() {
        if let Some(list) = cfg.get::<String>("algo")? {
            o.algo = list
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        }
    }
    Ok(o)
}

pub fn resolve(opts: &Opts) -> Result<Opts> {
    match &opts.config {
        Some(path) => merge(opts, &ConfigFile::load(path)?),
        None => Ok(opts.clone()),
    }
}

/// `log:lo:hi:n`, `lin:lo:hi:n`, or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let ranged = |rest: &str, kind: &str| -> Result<Vec<f64>> {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("grid {spec:?}: expected {kind}:lo:hi:n");
        }
        let lo: f64 = parts[0]
            .parse()
            .with_context(|| format!("grid {spec:?}: bad lower end"))?;
        let hi: f64 = parts[1]
            .parse()
            .with_context(|| format!("grid {spec:?}: bad upper end"))?;
        let n: usize = parts[2]
            .parse()
            .with_context(|| format!("grid {spec:?}: bad count"))?;
        if n == 0 {
            bail!("grid {spec:?} is empty");
        }
        if kind == "log" && !(lo > 0.0 && hi > 0.0) {
            bail!("grid {spec:?}: log grids need positive ends");
        }
        Ok(if kind == "log" {
            log_space(lo, hi, n)
        } else {
            lin_space(lo, hi, n)
        })
    };
    let grid = if let Some(rest) = spec.strip_prefix("log:") {
        ranged(rest, "log")?
    } else if let Some(rest) = spec.strip_prefix("lin:") {
        ranged(rest, "lin")?
    } else {
        spec.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("grid {spec:?}: bad value {v:?}"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        bail!("grid {spec:?} is empty");
    }
    Ok(grid)
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {v:?} in {spec:?}"))
        })
        .collect()
}

pub fn algorithms(opts: &Opts, default: &[Algorithm]) -> Result<Vec<Algorithm>> {
    if opts.algo.is_empty() {
        return Ok(default.to_vec());
    }
    opts.algo
        .iter()
        .map(|s| s.parse::<Algorithm>().map_err(|e| anyhow!("--algo: {e}")))
        .collect()
}

/// The game named by `--game-file`, the inline `--a/--b/--c`
/// coefficients, or `--generator`. Exactly one source is allowed.
pub fn game(opts: &Opts) -> Result<QuadraticGame> {
    let inline = opts.a.is_some() || opts.b.is_some() || opts.c.is_some();
    let sources = [opts.game_file.is_some(), inline, opts.generator.is_some()];
    match sources.iter().filter(|s| **s).count() {
        0 => bail!("no game given: use --game-file, --a/--b/--c or --generator"),
        1 => {}
        _ => bail!("give only one of --game-file, --a/--b/--c and --generator"),
    }
    if let Some(path) = &opts.game_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading game {}", path.display()))?;
        return QuadraticGame::from_text(&text).with_context(|| format!("in {}", path.display()));
    }
    if inline {
        let g = QuadraticGame::scalar(
            opts.a.unwrap_or(0.0),
            opts.b.unwrap_or(0.0),
            opts.c.unwrap_or(0.0),
        )?;
        return Ok(g);
    }
    let name = opts.generator.as_deref().expect("checked above");
    let seed = opts.seed.unwrap_or(0);
    let dim = opts
        .dim
        .ok_or_else(|| anyhow!("--generator {name} needs --dim"))?;
    let g = match name.replace('_', "-").as_str() {
        "scsc" => gen_scsc(dim, seed, opts.coupling_std.unwrap_or(0.1))?,
        "scsc-rotated" => gen_scsc_rotated(dim, seed, opts.coupling_std.unwrap_or(0.1))?,
        "scaling" => gen_scaling_instance(
            dim,
            opts.n_max
                .ok_or_else(|| anyhow!("--generator scaling needs --n-max"))?,
            seed,
        )?,
        "bilinear" => gen_bilinear(dim, opts.p.unwrap_or(dim), seed)?,
        "strong-concave-only" => gen_strong_concave_only(dim, opts.p.unwrap_or(dim), seed)?,
        other => bail!("unknown generator {other:?}"),
    };
    Ok(g)
}
