//! Run configuration: a flat `key = value` text format.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected.
//! `problem`, `n_cells` and `t_end` are required; every other key has a
//! default, listed in [`KEYS`]. Overrides (from the command line) replace
//! file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::{DtPolicy, MasConfig};
use crate::flux::{Problem, SchemeChoice};
use crate::mesh::{AdaptParams, Mesh1D};
use crate::scenario::InitialCondition;

/// Every accepted key with its default (`None` for required keys or keys
/// whose default depends on other keys).
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("problem", None),
    ("n_cells", None),
    ("t_end", None),
    ("advection_speed", Some("1")),
    ("initial", Some("sine")),
    ("sine_amplitude", Some("1")),
    ("sine_offset", Some("0")),
    ("riemann_ul", Some("1")),
    ("riemann_ur", Some("0")),
    // default: domain midpoint
    ("riemann_position", None),
    ("hat_height", Some("1")),
    // default: a quarter of the domain length
    ("hat_half_width", None),
    // default: domain midpoint
    ("hat_center", None),
    ("domain_left", Some("0")),
    ("domain_right", Some("1")),
    ("cfl_target", Some("0.4")),
    ("scheme", Some("rusanov")),
    // required when scheme = fixed-d
    ("fixed_d", None),
    ("adapt", Some("on")),
    ("enforce_maincond", Some("off")),
    ("alpha", Some("0.05")),
    ("smoothing_passes", Some("2")),
    ("equidist_iters", Some("3")),
    ("beta", Some("0.4")),
    ("k_const", Some("1")),
    ("max_bisect", Some("30")),
    ("q_min", Some("1e-12")),
    // auto: on exactly when enforce_maincond is on
    ("entropy_dt_bound", Some("auto")),
    ("max_steps", Some("1000000")),
    ("snapshot_every", Some("10")),
    // default: <output root>/<config file stem>
    ("output_dir", None),
    ("seed", Some("0")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemName {
    Burgers,
    Advection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toggle {
    Auto,
    On,
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemName,
    pub advection_speed: f64,
    pub initial: InitialCondition,
    pub domain_left: f64,
    pub domain_right: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl_target: f64,
    pub scheme: SchemeChoice,
    pub adapt: bool,
    pub enforce_maincond: bool,
    pub adapt_params: AdaptParams,
    pub k_const: f64,
    pub max_bisect: usize,
    pub q_min: f64,
    pub entropy_dt_bound: Toggle,
    pub max_steps: usize,
    /// Write a snapshot every this many steps (0: initial and final only).
    pub snapshot_every: usize,
    pub output_dir: Option<String>,
    pub seed: u64,
}

struct Entry {
    value: String,
    line: Option<usize>,
}

struct Raw(BTreeMap<String, Entry>);

impl Raw {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn text(&self, key: &str) -> Option<(&str, Option<usize>)> {
        if let Some(e) = self.get(key) {
            return Some((e.value.as_str(), e.line));
        }
        KEYS.iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| d.map(|d| (d, None)))
    }

    fn require(&self, key: &str) -> Result<(&str, Option<usize>)> {
        self.text(key)
            .ok_or_else(|| Error::config(None, Some(key), "missing required key"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T> {
        let (v, line) = self.require(key)?;
        v.parse()
            .map_err(|_| Error::config(line, Some(key), format!("expected {what}, got {v:?}")))
    }

    fn parse_opt<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.parse(key, what).map(Some),
        }
    }

    fn float(&self, key: &str) -> Result<f64> {
        let x: f64 = self.parse(key, "a number")?;
        if !x.is_finite() {
            let line = self.get(key).and_then(|e| e.line);
            return Err(Error::config(line, Some(key), "must be finite"));
        }
        Ok(x)
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.float(key),
        }
    }

    fn toggle(&self, key: &str) -> Result<Toggle> {
        let (v, line) = self.require(key)?;
        match v {
            "on" | "true" | "yes" => Ok(Toggle::On),
            "off" | "false" | "no" => Ok(Toggle::Off),
            "auto" => Ok(Toggle::Auto),
            _ => Err(Error::config(
                line,
                Some(key),
                format!("expected on or off, got {v:?}"),
            )),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.toggle(key)? {
            Toggle::On => Ok(true),
            Toggle::Off => Ok(false),
            Toggle::Auto => {
                let line = self.get(key).and_then(|e| e.line);
                Err(Error::config(
                    line,
                    Some(key),
                    "expected on or off, got \"auto\"",
                ))
            }
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|e| e.line)
    }
}

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

fn parse_text(text: &str) -> Result<Raw> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                Some(line_no),
                None,
                format!("expected `key = value`, got {line:?}"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if !is_known(key) {
            return Err(Error::config(Some(line_no), Some(key), "unknown key"));
        }
        if value.is_empty() {
            return Err(Error::config(Some(line_no), Some(key), "empty value"));
        }
        let entry = Entry {
            value: value.to_string(),
            line: Some(line_no),
        };
        if map.insert(key.to_string(), entry).is_some() {
            return Err(Error::config(Some(line_no), Some(key), "duplicate key"));
        }
    }
    Ok(Raw(map))
}

impl RunConfig {
    /// Parses and validates configuration text, then applies `overrides`.
    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut raw = parse_text(text)?;
        for (key, value) in overrides {
            if !is_known(key) {
                return Err(Error::config(None, Some(key), "unknown key"));
            }
            raw.0.insert(
                key.clone(),
                Entry {
                    value: value.clone(),
                    line: None,
                },
            );
        }
        Self::resolve(&raw)
    }

    fn resolve(raw: &Raw) -> Result<Self> {
        let problem = match raw.require("problem")? {
            ("burgers", _) => ProblemName::Burgers,
            ("advection", _) => ProblemName::Advection,
            (v, line) => {
                return Err(Error::config(
                    line,
                    Some("problem"),
                    format!("expected burgers or advection, got {v:?}"),
                ))
            }
        };
        let n_cells: usize = raw.parse("n_cells", "a non-negative integer")?;
        let t_end = raw.float("t_end")?;
        let domain_left = raw.float("domain_left")?;
        let domain_right = raw.float("domain_right")?;
        let mid = 0.5 * (domain_left + domain_right);
        let length = domain_right - domain_left;

        let initial = match raw.require("initial")? {
            ("sine", _) => InitialCondition::Sine {
                amplitude: raw.float("sine_amplitude")?,
                offset: raw.float("sine_offset")?,
            },
            ("riemann", _) => InitialCondition::Riemann {
                ul: raw.float("riemann_ul")?,
                ur: raw.float("riemann_ur")?,
                position: raw.float_or("riemann_position", mid)?,
            },
            ("hat", _) => InitialCondition::Hat {
                height: raw.float("hat_height")?,
                half_width: raw.float_or("hat_half_width", 0.25 * length)?,
                center: raw.float_or("hat_center", mid)?,
            },
            (v, line) => {
                return Err(Error::config(
                    line,
                    Some("initial"),
                    format!("expected sine, riemann or hat, got {v:?}"),
                ))
            }
        };

        let scheme = match raw.require("scheme")? {
            ("fixed-d", line) => {
                if raw.get("fixed_d").is_none() {
                    return Err(Error::config(
                        line,
                        Some("fixed_d"),
                        "required when scheme = fixed-d",
                    ));
                }
                SchemeChoice::FixedD(raw.float("fixed_d")?)
            }
            (v, line) => v
                .parse()
                .map_err(|e: String| Error::config(line, Some("scheme"), e))?,
        };

        let cfg = Self {
            problem,
            advection_speed: raw.float("advection_speed")?,
            initial,
            domain_left,
            domain_right,
            n_cells,
            t_end,
            cfl_target: raw.float("cfl_target")?,
            scheme,
            adapt: raw.flag("adapt")?,
            enforce_maincond: raw.flag("enforce_maincond")?,
            adapt_params: AdaptParams {
                alpha: raw.float("alpha")?,
                smoothing_passes: raw.parse("smoothing_passes", "a non-negative integer")?,
                equidist_iters: raw.parse("equidist_iters", "a positive integer")?,
                beta: raw.float("beta")?,
            },
            k_const: raw.float("k_const")?,
            max_bisect: raw.parse("max_bisect", "a non-negative integer")?,
            q_min: raw.float("q_min")?,
            entropy_dt_bound: raw.toggle("entropy_dt_bound")?,
            max_steps: raw.parse("max_steps", "a non-negative integer")?,
            snapshot_every: raw.parse("snapshot_every", "a non-negative integer")?,
            output_dir: raw.parse_opt("output_dir", "a path")?,
            seed: raw.parse("seed", "a non-negative integer")?,
        };
        cfg.validate(raw)?;
        Ok(cfg)
    }

    fn validate(&self, raw: &Raw) -> Result<()> {
        let fail = |key: &str, msg: String| Err(Error::config(raw.line(key), Some(key), msg));
        if self.n_cells < 3 {
            return fail(
                "n_cells",
                format!("must be at least 3, got {}", self.n_cells),
            );
        }
        if self.t_end < 0.0 {
            return fail("t_end", format!("must be >= 0, got {}", self.t_end));
        }
        if self.domain_right <= self.domain_left {
            return fail("domain_right", "must exceed domain_left".into());
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return fail(
                "cfl_target",
                format!("must lie in (0, 1], got {}", self.cfl_target),
            );
        }
        if let SchemeChoice::FixedD(d) = self.scheme {
            if d < 0.0 {
                return fail("fixed_d", format!("must be >= 0, got {d}"));
            }
        }
        if self.k_const <= 0.0 {
            return fail("k_const", format!("must be positive, got {}", self.k_const));
        }
        if self.q_min <= 0.0 {
            return fail("q_min", format!("must be positive, got {}", self.q_min));
        }
        if let Err(Error::InvalidParam { name, reason }) = self.adapt_params.validate() {
            return fail(name, reason);
        }
        if let Err(Error::InvalidParam { name, reason }) =
            self.initial.validate(self.domain_left, self.domain_right)
        {
            let key = match name {
                "sine" => "sine_amplitude",
                "riemann" => "riemann_ul",
                other => other,
            };
            return fail(key, reason);
        }
        Ok(())
    }

    pub fn problem(&self) -> Problem {
        let p = match self.problem {
            ProblemName::Burgers => Problem::burgers(),
            ProblemName::Advection => Problem::advection(self.advection_speed),
        };
        p.with_k(self.k_const)
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::uniform(self.domain_left, self.domain_right, self.n_cells)
    }

    pub fn entropy_dt_bound(&self) -> bool {
        match self.entropy_dt_bound {
            Toggle::On => true,
            Toggle::Off => false,
            Toggle::Auto => self.enforce_maincond,
        }
    }

    pub fn mas_config(&self) -> MasConfig {
        MasConfig {
            problem: self.problem(),
            scheme: self.scheme,
            adapt: self.adapt.then_some(self.adapt_params),
            enforce_maincond: self.enforce_maincond,
            max_bisect: self.max_bisect,
            dt_policy: DtPolicy {
                cfl_target: self.cfl_target,
                entropy_bound: self.entropy_dt_bound(),
                q_min: self.q_min,
            },
        }
    }

    /// The fully resolved configuration in the input format; parsing it back
    /// yields an equal `RunConfig`.
    pub fn to_text(&self) -> String {
        let onoff = |b: bool| if b { "on" } else { "off" };
        let mut lines: Vec<(&str, String)> = vec![
            (
                "problem",
                match self.problem {
                    ProblemName::Burgers => "burgers",
                    ProblemName::Advection => "advection",
                }
                .into(),
            ),
            ("advection_speed", self.advection_speed.to_string()),
            ("n_cells", self.n_cells.to_string()),
            ("t_end", self.t_end.to_string()),
            ("domain_left", self.domain_left.to_string()),
            ("domain_right", self.domain_right.to_string()),
            ("initial", self.initial.name().into()),
        ];
        match self.initial {
            InitialCondition::Sine { amplitude, offset } => {
                lines.push(("sine_amplitude", amplitude.to_string()));
                lines.push(("sine_offset", offset.to_string()));
            }
            InitialCondition::Riemann { ul, ur, position } => {
                lines.push(("riemann_ul", ul.to_string()));
                lines.push(("riemann_ur", ur.to_string()));
                lines.push(("riemann_position", position.to_string()));
            }
            InitialCondition::Hat {
                height,
                half_width,
                center,
            } => {
                lines.push(("hat_height", height.to_string()));
                lines.push(("hat_half_width", half_width.to_string()));
                lines.push(("hat_center", center.to_string()));
            }
        }
        lines.push(("scheme", self.scheme.name().into()));
        if let SchemeChoice::FixedD(d) = self.scheme {
            lines.push(("fixed_d", d.to_string()));
        }
        lines.extend([
            ("cfl_target", self.cfl_target.to_string()),
            ("adapt", onoff(self.adapt).into()),
            ("enforce_maincond", onoff(self.enforce_maincond).into()),
            ("alpha", self.adapt_params.alpha.to_string()),
            (
                "smoothing_passes",
                self.adapt_params.smoothing_passes.to_string(),
            ),
            (
                "equidist_iters",
                self.adapt_params.equidist_iters.to_string(),
            ),
            ("beta", self.adapt_params.beta.to_string()),
            ("k_const", self.k_const.to_string()),
            ("max_bisect", self.max_bisect.to_string()),
            ("q_min", self.q_min.to_string()),
            (
                "entropy_dt_bound",
                match self.entropy_dt_bound {
                    Toggle::Auto => "auto",
                    Toggle::On => "on",
                    Toggle::Off => "off",
                }
                .into(),
            ),
            ("max_steps", self.max_steps.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
        ]);
        if let Some(dir) = &self.output_dir {
            lines.push(("output_dir", dir.clone()));
        }
        lines.push(("seed", self.seed.to_string()));
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_text(&text, overrides)
}

/// Splits `key=value` into its parts.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let arg = arg.trim_start_matches("--");
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::config(
            None,
            None,
            format!("expected --key=value, got {arg:?}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "problem = burgers\nn_cells = 50\nt_end = 0.5\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let c = RunConfig::from_text(MINIMAL, &[]).unwrap();
        assert_eq!(c.problem, ProblemName::Burgers);
        assert_eq!(c.n_cells, 50);
        assert_eq!(c.cfl_target, 0.4);
        assert_eq!(c.scheme, SchemeChoice::Rusanov);
        assert!(c.adapt);
        assert!(!c.enforce_maincond);
        assert!(!c.entropy_dt_bound());
        assert_eq!(c.adapt_params, AdaptParams::default());
        assert_eq!(
            c.initial,
            InitialCondition::Sine {
                amplitude: 1.0,
                offset: 0.0
            }
        );
        assert_eq!(c.output_dir, None);
    }

    #[test]
    fn comments_and_overrides() {
        let text = "# a run\nproblem = advection  # linear\nadvection_speed = 2\nn_cells = 10\nt_end = 1\n\nscheme = econs\n";
        let c = RunConfig::from_text(
            text,
            &[
                ("n_cells".into(), "20".into()),
                ("enforce_maincond".into(), "on".into()),
            ],
        )
        .unwrap();
        assert_eq!(c.n_cells, 20);
        assert_eq!(c.advection_speed, 2.0);
        assert_eq!(c.scheme, SchemeChoice::EntropyConservative);
        assert!(c.entropy_dt_bound());
    }

    fn config_err(text: &str) -> (Option<usize>, Option<String>) {
        match RunConfig::from_text(text, &[]) {
            Err(Error::Config { line, key, .. }) => (line, key),
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_key_and_line() {
        assert_eq!(
            config_err("problem = burgers\nn_cells = 2\nt_end = 1\n"),
            (Some(2), Some("n_cells".into()))
        );
        assert_eq!(
            config_err("problem = burgers\nt_end = 1\n"),
            (None, Some("n_cells".into()))
        );
        assert_eq!(
            config_err("problem = burgers\nn_cells = 5\nt_end = 1\nspeed = 3\n"),
            (Some(4), Some("speed".into()))
        );
        assert_eq!(
            config_err("problem = burgers\nn_cells = x\nt_end = 1\n"),
            (Some(2), Some("n_cells".into()))
        );
        assert_eq!(
            config_err("problem = heat\nn_cells = 5\nt_end = 1\n"),
            (Some(1), Some("problem".into()))
        );
        assert_eq!(
            config_err(&format!("{MINIMAL}cfl_target = 1.5\n")),
            (Some(4), Some("cfl_target".into()))
        );
        assert_eq!(
            config_err(&format!("{MINIMAL}beta = 0.7\n")),
            (Some(4), Some("beta".into()))
        );
        assert_eq!(
            config_err(&format!("{MINIMAL}scheme = fixed-d\n")),
            (Some(4), Some("fixed_d".into()))
        );
        assert_eq!(
            config_err(&format!("{MINIMAL}adapt = maybe\n")),
            (Some(4), Some("adapt".into()))
        );
        assert_eq!(
            config_err(&format!("{MINIMAL}n_cells = 7\n")),
            (Some(4), Some("n_cells".into()))
        );
        assert_eq!(config_err("problem burgers\n"), (Some(1), None));
        assert!(RunConfig::from_text(MINIMAL, &[("bogus".into(), "1".into())]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = format!(
            "{MINIMAL}initial = hat\nhat_height = 3\nscheme = fixed-d\nfixed_d = 0.25\noutput_dir = out/x\nalpha = 2.5\n"
        );
        let c = RunConfig::from_text(&text, &[]).unwrap();
        let back = RunConfig::from_text(&c.to_text(), &[]).unwrap();
        assert_eq!(c, back);
        let r = RunConfig::from_text(&format!("{MINIMAL}initial = riemann\n"), &[]).unwrap();
        assert_eq!(RunConfig::from_text(&r.to_text(), &[]).unwrap(), r);
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override("--t_end=2").unwrap(),
            ("t_end".into(), "2".into())
        );
        assert!(parse_override("--t_end").is_err());
    }
}
