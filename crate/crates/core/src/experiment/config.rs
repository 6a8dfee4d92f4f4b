use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::assembly::{FluxPreset, SolveStrategy};
use crate::mesh::DomainId;
use crate::methods::WaveFamily;

use super::presets::preset_text;

/// A configuration problem, always tied to the key it concerns.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config key `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Fem,
    NodalExact,
    Pum,
    LeastSquares,
    Pwdg,
    Infsup,
    Approx,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fem => "fem",
            Method::NodalExact => "nodal_exact",
            Method::Pum => "pum",
            Method::LeastSquares => "least_squares",
            Method::Pwdg => "pwdg",
            Method::Infsup => "infsup",
            Method::Approx => "approx",
        }
    }

    fn is_trefftz(self) -> bool {
        matches!(self, Method::LeastSquares | Method::Pwdg | Method::Approx)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "fem" => Method::Fem,
            "nodal_exact" => Method::NodalExact,
            "pum" => Method::Pum,
            "least_squares" | "ls" => Method::LeastSquares,
            "pwdg" | "dg" => Method::Pwdg,
            "infsup" => Method::Infsup,
            "approx" => Method::Approx,
            other => return Err(format!("unknown method `{other}`")),
        })
    }
}

/// Exact solution used for data and errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactKind {
    Model1d,
    Pw2d,
    BesselSingular,
    None,
}

impl FromStr for ExactKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "model1d" => ExactKind::Model1d,
            "pw2d" => ExactKind::Pw2d,
            "bessel_singular" => ExactKind::BesselSingular,
            "none" => ExactKind::None,
            other => return Err(format!("unknown exact solution `{other}`")),
        })
    }
}

/// How the mesh size of each run is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSweep {
    /// Target mesh sizes.
    H(Vec<f64>),
    /// Elements per unit length.
    Elements(Vec<usize>),
    /// `h = r p / k` for each ratio `r`.
    KhOverP(Vec<f64>),
}

impl MeshSweep {
    pub fn len(&self) -> usize {
        match self {
            MeshSweep::H(v) | MeshSweep::KhOverP(v) => v.len(),
            MeshSweep::Elements(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub method: Method,
    pub domain: DomainId,
    pub exact: ExactKind,
    pub source: f64,
    pub robin_sign: f64,
    pub neumann_reentrant: bool,
    pub k: Vec<f64>,
    pub p: Vec<usize>,
    pub mesh: MeshSweep,
    pub sigma: f64,
    pub layers: Vec<usize>,
    pub flux: FluxPreset,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub basis: WaveFamily,
    pub strategy: SolveStrategy,
    pub quad_degree: Option<usize>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub timing: bool,
}

const KEYS: &[&str] = &[
    "preset",
    "method",
    "domain",
    "exact",
    "source",
    "robin_sign",
    "neumann_reentrant",
    "k",
    "p",
    "h",
    "n_elements",
    "kh_over_p",
    "sigma",
    "L",
    "flux",
    "flux_a",
    "flux_eps",
    "flux_beta",
    "flux_delta",
    "w1",
    "w2",
    "basis",
    "solver",
    "svd_cutoff",
    "quad_degree",
    "output",
    "seed",
    "threads",
    "timing",
];

const SWEEP_KEYS: [&str; 3] = ["h", "n_elements", "kh_over_p"];

/// Split `key = value` lines; `#` starts a comment.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line, format!("line {} is not `key = value`", lineno + 1)));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(err(key, "unknown key"));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(err(key, "given twice"));
        }
    }
    Ok(out)
}

fn scalar<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| err(key, format!("cannot parse `{v}`: {e}"))),
    }
}

fn list<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<T>>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let Some(v) = map.get(key) else {
        return Ok(None);
    };
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(err(key, "list is empty"));
    }
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| err(key, format!("cannot parse `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn positive(key: &str, values: &[f64]) -> Result<(), ConfigError> {
    match values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        Some(v) => Err(err(key, format!("values must be positive, got {v}"))),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    /// Parse a configuration. A `preset` key loads that preset first; every
    /// other key in `text` overrides it.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let own = parse_pairs(text)?;
        let mut map = match own.get("preset") {
            Some(name) => {
                let base = preset_text(name).ok_or_else(|| err("preset", format!("unknown preset `{name}`")))?;
                parse_pairs(base)?
            }
            None => BTreeMap::new(),
        };
        if SWEEP_KEYS.iter().any(|k| own.contains_key(*k)) {
            map.retain(|k, _| !SWEEP_KEYS.contains(&k.as_str()));
        }
        map.extend(own);
        Self::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let method: Method = scalar(map, "method")?.ok_or_else(|| err("method", "missing"))?;
        let domain: DomainId = match map.get("domain") {
            Some(v) => v.parse().map_err(|e: crate::Error| err("domain", e.to_string()))?,
            None => return Err(err("domain", "missing")),
        };
        let exact = scalar(map, "exact")?.unwrap_or(match domain {
            DomainId::UnitInterval => ExactKind::Model1d,
            DomainId::UnitSquare => ExactKind::Pw2d,
            DomainId::LShape => ExactKind::BesselSingular,
        });
        let k: Vec<f64> = list(map, "k")?.ok_or_else(|| err("k", "missing"))?;
        positive("k", &k)?;
        let p: Vec<usize> = list(map, "p")?.unwrap_or_else(|| vec![1]);
        if p.contains(&0) {
            return Err(err("p", "degrees must be at least 1"));
        }
        let sweeps = SWEEP_KEYS.iter().filter(|s| map.contains_key(**s)).count();
        if sweeps > 1 {
            return Err(err("h", "give only one of `h`, `n_elements`, `kh_over_p`"));
        }
        let mesh = if let Some(h) = list::<f64>(map, "h")? {
            positive("h", &h)?;
            MeshSweep::H(h)
        } else if let Some(n) = list::<usize>(map, "n_elements")? {
            if n.contains(&0) {
                return Err(err("n_elements", "counts must be at least 1"));
            }
            MeshSweep::Elements(n)
        } else if let Some(r) = list::<f64>(map, "kh_over_p")? {
            positive("kh_over_p", &r)?;
            MeshSweep::KhOverP(r)
        } else {
            return Err(err("h", "missing mesh sweep (`h`, `n_elements` or `kh_over_p`)"));
        };
        let sigma = scalar(map, "sigma")?.unwrap_or(0.125);
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(err("sigma", format!("must lie in (0,1), got {sigma}")));
        }
        let layers = list(map, "L")?.unwrap_or_else(|| vec![0]);

        let flux = match map.get("flux").map(String::as_str).unwrap_or("uwvf") {
            "uwvf" => FluxPreset::Uwvf,
            "hmp" => match FluxPreset::HMP_DEFAULT {
                FluxPreset::Hmp { a, eps } => FluxPreset::Hmp {
                    a: scalar(map, "flux_a")?.unwrap_or(a),
                    eps: scalar(map, "flux_eps")?.unwrap_or(eps),
                },
                _ => unreachable!(),
            },
            "h_version" => match FluxPreset::H_VERSION_DEFAULT {
                FluxPreset::HVersion { a, beta, delta } => FluxPreset::HVersion {
                    a: scalar(map, "flux_a")?.unwrap_or(a),
                    beta: scalar(map, "flux_beta")?.unwrap_or(beta),
                    delta: scalar(map, "flux_delta")?.unwrap_or(delta),
                },
                _ => unreachable!(),
            },
            other => return Err(err("flux", format!("unknown flux preset `{other}`"))),
        };
        if let FluxPreset::HVersion { delta, .. } = flux {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(err("flux_delta", format!("must lie in (0,1), got {delta}")));
            }
        }
        let basis = match map.get("basis").map(String::as_str).unwrap_or("plane_waves") {
            "plane_waves" | "pw" => WaveFamily::PlaneWaves,
            "ghp" => WaveFamily::Ghp,
            other => return Err(err("basis", format!("unknown basis `{other}`"))),
        };
        let mut strategy: SolveStrategy = match map.get("solver") {
            Some(v) => v.parse().map_err(|e: crate::Error| err("solver", e.to_string()))?,
            None => SolveStrategy::Auto,
        };
        if let Some(c) = scalar::<f64>(map, "svd_cutoff")? {
            match &mut strategy {
                SolveStrategy::TruncatedSvd { cutoff } => *cutoff = c,
                _ => return Err(err("svd_cutoff", "only valid with `solver = truncated_svd`")),
            }
        }
        let robin_sign = scalar(map, "robin_sign")?.unwrap_or(match domain {
            DomainId::UnitSquare => 1.0,
            _ => -1.0,
        });
        if robin_sign != 1.0 && robin_sign != -1.0 {
            return Err(err("robin_sign", format!("must be 1 or -1, got {robin_sign}")));
        }
        let threads = scalar::<usize>(map, "threads")?;
        if threads == Some(0) {
            return Err(err("threads", "must be at least 1"));
        }
        let config = ExperimentConfig {
            preset: map.get("preset").cloned(),
            method,
            domain,
            exact,
            source: scalar(map, "source")?.unwrap_or(if exact == ExactKind::Model1d { 1.0 } else { 0.0 }),
            robin_sign,
            neumann_reentrant: scalar(map, "neumann_reentrant")?.unwrap_or(domain == DomainId::LShape),
            k,
            p,
            mesh,
            sigma,
            layers,
            flux,
            w1: scalar(map, "w1")?,
            w2: scalar(map, "w2")?,
            basis,
            strategy,
            quad_degree: scalar(map, "quad_degree")?,
            output: map.get("output").map(PathBuf::from),
            seed: scalar(map, "seed")?.unwrap_or(0),
            threads,
            timing: scalar(map, "timing")?.unwrap_or(false),
        };
        config.check_consistency()?;
        Ok(config)
    }

    fn check_consistency(&self) -> Result<(), ConfigError> {
        let one_d = self.domain == DomainId::UnitInterval;
        match self.method {
            Method::NodalExact | Method::Infsup if !one_d => {
                return Err(err(
                    "domain",
                    format!("method {} needs the interval", self.method.name()),
                ))
            }
            Method::Pum if one_d => return Err(err("domain", "method pum needs a 2D domain")),
            m if m.is_trefftz() && one_d => {
                return Err(err("domain", format!("method {} needs a 2D domain", m.name())))
            }
            _ => {}
        }
        if self.method.is_trefftz() {
            if self.exact == ExactKind::Model1d {
                return Err(err(
                    "exact",
                    "Trefftz methods need a solution of the homogeneous equation",
                ));
            }
            if self.method != Method::Approx && self.robin_sign != 1.0 {
                return Err(err("robin_sign", "Trefftz methods use d_n u + i k u = g"));
            }
            if self.source != 0.0 {
                return Err(err("source", "Trefftz methods need f = 0"));
            }
        }
        if self.method == Method::Approx && self.exact == ExactKind::None {
            return Err(err("exact", "approximation studies need a target"));
        }
        if let (Some(w), _) | (_, Some(w)) = (self.w1, self.w2) {
            if !(w > 0.0) {
                return Err(err("w1", format!("weights must be positive, got {w}")));
            }
        }
        if matches!(self.mesh, MeshSweep::Elements(_)) && !one_d && self.layers.iter().any(|&l| l > 0) {
            return Err(err("L", "grading with `n_elements` is only supported in 1D"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "method = fem\ndomain = interval\nk = 1, 10,100\np = 1\nn_elements = 10,20\n";

    #[test]
    fn parses_lists_and_defaults() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.k, vec![1.0, 10.0, 100.0]);
        assert_eq!(c.mesh, MeshSweep::Elements(vec![10, 20]));
        assert_eq!(c.exact, ExactKind::Model1d);
        assert_eq!(c.robin_sign, -1.0);
        assert_eq!(c.source, 1.0);
        assert_eq!(c.layers, vec![0]);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("method = fem\ndomain = interval\nk =\nn_elements = 4\n", "k"),
            ("method = fem\ndomain = interval\nn_elements = 4\n", "k"),
            (
                "method = fem\ndomain = interval\nk = 1\nn_elements = 4\nbogus = 1\n",
                "bogus",
            ),
            ("method = fem\ndomain = circle\nk = 1\nn_elements = 4\n", "domain"),
            ("method = fem\ndomain = interval\nk = 1, x\nn_elements = 4\n", "k"),
            ("method = fem\ndomain = interval\nk = 1\nh = 0.1\nn_elements = 4\n", "h"),
            ("method = pwdg\ndomain = square\nk = 1\nh = 0.5\nflux = hmp2\n", "flux"),
            (
                "method = pwdg\ndomain = square\nk = 1\nh = 0.5\nflux = h_version\nflux_delta = 1.5\n",
                "flux_delta",
            ),
            (
                "method = fem\ndomain = interval\nk = 1\nn_elements = 4\nsvd_cutoff = 1e-10\n",
                "svd_cutoff",
            ),
            ("method = fem\ndomain = interval\nk = 1\nk = 2\nn_elements = 4\n", "k"),
            ("preset = nope\n", "preset"),
            ("method = fem\ndomain = interval\nk = -1\nn_elements = 4\n", "k"),
        ];
        for (text, key) in cases {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(e.key, key, "{text}: {e}");
            assert!(e.to_string().contains(&format!("`{key}`")));
        }
    }

    #[test]
    fn preset_keys_are_overridden() {
        let c = ExperimentConfig::parse("preset = fig1_1d_pollution\nk = 10\np = 2\n").unwrap();
        assert_eq!(c.k, vec![10.0]);
        assert_eq!(c.p, vec![2]);
        assert_eq!(c.method, Method::Fem);
        assert_eq!(c.preset.as_deref(), Some("fig1_1d_pollution"));
        let c = ExperimentConfig::parse("preset = fig3_lshape_pfem\nn_elements = 4\n");
        assert_eq!(c.unwrap_err().key, "L");
        let c = ExperimentConfig::parse("preset = fig2_square\nh = 0.5\n").unwrap();
        assert_eq!(c.mesh, MeshSweep::H(vec![0.5]));
    }

    #[test]
    fn comments_and_solver_options() {
        let text = "# sweep\nmethod = ls # least squares\ndomain = square\nk = 4\np = 5\nh = 0.5\nsolver = truncated_svd\nsvd_cutoff = 1e-10\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.method, Method::LeastSquares);
        assert_eq!(c.strategy, SolveStrategy::TruncatedSvd { cutoff: 1e-10 });
    }

    #[test]
    fn method_domain_mismatch() {
        let e = ExperimentConfig::parse("method = pwdg\ndomain = interval\nk = 1\nn_elements = 4\n").unwrap_err();
        assert_eq!(e.key, "domain");
    }
}
