//! Experiment specifications. Config files and presets resolve to
//! [`ExperimentSpec`], then command-line overrides are applied on top.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;
use singlet_core::linalg::ComplexVector;
use singlet_core::prelude::*;

/// A validation failure tied to the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    Heisenberg,
    Xy,
}

impl CouplingKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Heisenberg => "heisenberg",
            Self::Xy => "xy",
        }
    }
}

impl FromStr for CouplingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heisenberg" | "electron" => Ok(Self::Heisenberg),
            "xy" | "photonic" => Ok(Self::Xy),
            other => Err(format!(
                "unknown coupling `{other}` (expected heisenberg or xy)"
            )),
        }
    }
}

pub fn parse_convention(s: &str) -> Result<SpinConvention, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "spin-half" | "half" => Ok(SpinConvention::SpinHalf),
        "pauli" => Ok(SpinConvention::Pauli),
        other => Err(format!(
            "unknown convention `{other}` (expected spin-half or pauli)"
        )),
    }
}

pub fn convention_name(c: SpinConvention) -> &'static str {
    match c {
        SpinConvention::SpinHalf => "spin-half",
        SpinConvention::Pauli => "pauli",
    }
}

pub fn parse_post_selection(s: &str) -> Result<PostSelection, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "up" => Ok(PostSelection::Up),
        "down" => Ok(PostSelection::Down),
        "none" => Ok(PostSelection::None),
        other => Err(format!(
            "unknown post-selection `{other}` (expected up, down or none)"
        )),
    }
}

/// `ideal` or a comma-separated list of `J_{s,m}/v`, lowest `m` first.
/// Entries may use `sqrt(x)` and a leading integer factor, e.g. `4sqrt(3)`.
pub fn parse_rates(s: &str) -> Result<Option<Vec<f64>>, String> {
    if s.trim().eq_ignore_ascii_case("ideal") {
        return Ok(None);
    }
    s.split(',')
        .map(parse_rate)
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn parse_rate(token: &str) -> Result<f64, String> {
    let t = token.trim();
    if let Some(pos) = t.find("sqrt(") {
        let inner = t[pos + 5..]
            .strip_suffix(')')
            .ok_or_else(|| format!("unterminated sqrt in `{t}`"))?;
        let root: f64 = inner
            .trim()
            .parse()
            .map_err(|_| format!("bad number in `{t}`"))?;
        let prefix = t[..pos].trim().trim_end_matches('*');
        let factor = if prefix.is_empty() {
            1.0
        } else {
            prefix.parse().map_err(|_| format!("bad factor in `{t}`"))?
        };
        return Ok(factor * root.sqrt());
    }
    t.parse().map_err(|_| format!("bad rate `{t}`"))
}

/// A sweep axis: `x`, `a,b,c` or `start:stop:count` (inclusive linspace).
pub fn parse_axis(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{t}` in axis `{s}`"))
    };
    match parts.as_slice() {
        [start, stop, count] => {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("bad count in axis `{s}`"))?;
            Ok(linspace(num(start)?, num(stop)?, count))
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(format!(
            "axis `{s}` must be a value, a list or start:stop:count"
        )),
    }
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Initial impurity state.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Product(HalfInteger, HalfInteger),
    Coupled {
        s12: HalfInteger,
        m12: HalfInteger,
    },
    Singlet,
    /// Amplitudes in the product basis, normalized on use.
    Custom(Vec<Complex64>),
}

impl InitialState {
    pub fn density(&self, spin: Spin) -> singlet_core::Result<DensityMatrix> {
        let psi = match self {
            Self::Product(m1, m2) => product_state(spin, m1.value(), m2.value())?,
            Self::Coupled { s12, m12 } => coupled_basis(spin).state(*s12, *m12)?,
            Self::Singlet => singlet_state(spin),
            Self::Custom(amps) => {
                if amps.len() != spin.pair_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: spin.pair_dim(),
                        found: amps.len(),
                    });
                }
                StateVector::normalized(ComplexVector::from_column_slice(amps))?
            }
        };
        Ok(DensityMatrix::from_pure(&psi))
    }

    /// `|s, −s⟩`.
    pub fn lowest_up(spin: Spin) -> Self {
        Self::Product(spin.half_integer(), HalfInteger::from_twice(-spin.twice()))
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Product(a, b) => write!(f, "product:{a},{b}"),
            Self::Coupled { s12, m12 } => write!(f, "coupled:{s12},{m12}"),
            Self::Singlet => f.write_str("singlet"),
            Self::Custom(amps) => {
                f.write_str("custom:")?;
                for (i, a) in amps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{},{}", a.re, a.im)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let pair = |rest: &str| -> Result<(HalfInteger, HalfInteger), String> {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| format!("`{s}` needs two comma-separated values"))?;
            let parse = |t: &str| t.trim().parse::<HalfInteger>().map_err(|e| e.to_string());
            Ok((parse(a)?, parse(b)?))
        };
        match kind.to_ascii_lowercase().as_str() {
            "product" => pair(rest).map(|(a, b)| Self::Product(a, b)),
            "coupled" => pair(rest).map(|(s12, m12)| Self::Coupled { s12, m12 }),
            "singlet" => Ok(Self::Singlet),
            "custom" => rest
                .split(';')
                .map(|amp| {
                    let (re, im) = amp.split_once(',').unwrap_or((amp, "0"));
                    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad amplitude `{amp}`"));
                    Ok(Complex64::new(num(re)?, num(im)?))
                })
                .collect::<Result<Vec<_>, String>>()
                .map(Self::Custom),
            _ => Err(format!(
                "unknown initial state `{s}` (expected product:m1,m2, coupled:s12,m12, singlet or custom:re,im;...)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSpread {
    pub sigma_over_k: f64,
    pub nodes: usize,
}

/// Everything needed to produce one block of result rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub label: String,
    pub spin: Spin,
    pub coupling: CouplingKind,
    /// Explicit XY rates; `None` selects the ideal pattern.
    pub rates: Option<Vec<f64>>,
    pub convention: SpinConvention,
    pub initial: InitialState,
    pub n_max: usize,
    pub post_select: PostSelection,
    pub k_spread: Option<KSpread>,
    pub jv: Vec<f64>,
    pub kx0_over_pi: Vec<f64>,
}

impl ExperimentSpec {
    /// Single-point Heisenberg experiment starting from `|s, −s⟩`.
    pub fn heisenberg(label: &str, spin: Spin, jv: f64, n_max: usize) -> Self {
        Self {
            label: label.to_owned(),
            spin,
            coupling: CouplingKind::Heisenberg,
            rates: None,
            convention: SpinConvention::SpinHalf,
            initial: InitialState::lowest_up(spin),
            n_max,
            post_select: PostSelection::Up,
            k_spread: None,
            jv: vec![jv],
            kx0_over_pi: vec![1.0],
        }
    }

    pub fn model_at(&self, jv: f64, kx0_over_pi: f64) -> singlet_core::Result<ModelConfig> {
        let config = match self.coupling {
            CouplingKind::Heisenberg => ModelConfig::heisenberg(self.spin, jv, kx0_over_pi)?,
            CouplingKind::Xy => {
                let rates = match &self.rates {
                    Some(r) => RatePattern::Explicit(r.clone()),
                    None => RatePattern::Ideal,
                };
                ModelConfig::photonic(self.spin, rates, jv, kx0_over_pi)?
            }
        };
        Ok(config.with_convention(self.convention))
    }

    /// Grid points in emission order: `J/v` outer, `k x₀/π` inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.jv
            .iter()
            .flat_map(|&g| self.kx0_over_pi.iter().map(move |&k| (g, k)))
            .collect()
    }

    pub fn validate(&self) -> ConfigResult<()> {
        for (name, axis) in [
            ("sweep.jv", &self.jv),
            ("sweep.kx0_over_pi", &self.kx0_over_pi),
        ] {
            if axis.is_empty() {
                return Err(ConfigError::new(name, "axis is empty"));
            }
            if let Some(x) = axis.iter().find(|x| !x.is_finite()) {
                return Err(ConfigError::new(name, format!("non-finite value {x}")));
            }
        }
        if self.rates.is_some() && self.coupling == CouplingKind::Heisenberg {
            return Err(ConfigError::new(
                "model.rates",
                "rates only apply to the xy coupling",
            ));
        }
        for &(g, k) in &self.grid() {
            self.model_at(g, k)
                .map_err(|e| ConfigError::new("model", e))?;
        }
        self.initial
            .density(self.spin)
            .map_err(|e| ConfigError::new("initial", e))?;
        if let Some(spread) = self.k_spread {
            if !(spread.sigma_over_k > 0.0 && spread.sigma_over_k < 0.2) {
                return Err(ConfigError::new(
                    "k_spread.sigma_over_k",
                    "must lie in (0, 0.2)",
                ));
            }
            if spread.nodes < 3 || spread.nodes.is_multiple_of(2) {
                return Err(ConfigError::new("k_spread.nodes", "must be odd and >= 3"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    experiment: Vec<RawExperiment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    label: Option<String>,
    model: RawModel,
    initial: Option<String>,
    #[serde(default)]
    protocol: RawProtocol,
    k_spread: Option<RawSpread>,
    #[serde(default)]
    sweep: RawSweep,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    spin: String,
    coupling: Option<String>,
    rates: Option<RawList>,
    jv: Option<f64>,
    kx0_over_pi: Option<f64>,
    convention: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    n_max: Option<usize>,
    post_select: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpread {
    sigma_over_k: f64,
    nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    jv: Option<RawList>,
    kx0_over_pi: Option<RawList>,
}

/// A list given either inline as numbers or as a string to be parsed.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawList {
    Values(Vec<f64>),
    Text(String),
}

impl RawExperiment {
    fn resolve(self, path: &str) -> ConfigResult<ExperimentSpec> {
        let at = |field: &str| format!("{path}.{field}");
        let spin: Spin = self
            .model
            .spin
            .parse()
            .map_err(|e| ConfigError::new(at("model.spin"), e))?;
        let coupling = match &self.model.coupling {
            Some(c) => c
                .parse()
                .map_err(|e| ConfigError::new(at("model.coupling"), e))?,
            None => CouplingKind::Heisenberg,
        };
        let rates = match self.model.rates {
            None => None,
            Some(RawList::Values(v)) => Some(v),
            Some(RawList::Text(t)) => {
                parse_rates(&t).map_err(|e| ConfigError::new(at("model.rates"), e))?
            }
        };
        let convention = match &self.model.convention {
            Some(c) => {
                parse_convention(c).map_err(|e| ConfigError::new(at("model.convention"), e))?
            }
            None => SpinConvention::SpinHalf,
        };
        let initial = match &self.initial {
            Some(s) => s.parse().map_err(|e| ConfigError::new(at("initial"), e))?,
            None => InitialState::lowest_up(spin),
        };
        let post_select = match &self.protocol.post_select {
            Some(p) => parse_post_selection(p)
                .map_err(|e| ConfigError::new(at("protocol.post_select"), e))?,
            None => PostSelection::Up,
        };
        let axis = |raw: Option<RawList>,
                    single: Option<f64>,
                    default: f64,
                    field: &str|
         -> ConfigResult<Vec<f64>> {
            match raw {
                Some(RawList::Values(v)) => Ok(v),
                Some(RawList::Text(t)) => {
                    parse_axis(&t).map_err(|e| ConfigError::new(at(field), e))
                }
                None => Ok(vec![single.unwrap_or(default)]),
            }
        };
        let spec = ExperimentSpec {
            label: self.label.unwrap_or_else(|| path.to_owned()),
            spin,
            coupling,
            rates,
            convention,
            initial,
            n_max: self.protocol.n_max.unwrap_or(14),
            post_select,
            k_spread: self.k_spread.map(|k| KSpread {
                sigma_over_k: k.sigma_over_k,
                nodes: k.nodes.unwrap_or(DEFAULT_GAUSSIAN_NODES),
            }),
            jv: axis(self.sweep.jv, self.model.jv, 1.5, "sweep.jv")?,
            kx0_over_pi: axis(
                self.sweep.kx0_over_pi,
                self.model.kx0_over_pi,
                1.0,
                "sweep.kx0_over_pi",
            )?,
        };
        spec.validate()
            .map_err(|e| ConfigError::new(format!("{path}.{}", e.path), e.message))?;
        Ok(spec)
    }
}

/// Parses a TOML document holding one or more `[[experiment]]` tables.
pub fn parse_config(text: &str) -> ConfigResult<Vec<ExperimentSpec>> {
    let raw: RawFile =
        toml::from_str(text).map_err(|e| ConfigError::new("<config>", e.message()))?;
    if raw.experiment.is_empty() {
        return Err(ConfigError::new(
            "experiment",
            "no [[experiment]] tables found",
        ));
    }
    raw.experiment
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.resolve(&format!("experiment[{i}]")))
        .collect()
}

pub fn load_config(path: &Path) -> ConfigResult<Vec<ExperimentSpec>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), e))?;
    parse_config(&text)
        .map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.path), e.message))
}

/// Command-line values that replace the corresponding `ExperimentSpec` fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub spin: Option<Spin>,
    pub coupling: Option<CouplingKind>,
    pub rates: Option<Option<Vec<f64>>>,
    pub jv: Option<Vec<f64>>,
    pub kx0_over_pi: Option<Vec<f64>>,
    pub n_max: Option<usize>,
    pub initial: Option<InitialState>,
    pub post_select: Option<PostSelection>,
    pub sigma_over_k: Option<f64>,
    pub nodes: Option<usize>,
    pub convention: Option<SpinConvention>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) -> ConfigResult<()> {
        if let Some(s) = self.spin {
            spec.spin = s;
            if self.initial.is_none() {
                spec.initial = InitialState::lowest_up(s);
            }
        }
        if let Some(c) = self.coupling {
            spec.coupling = c;
        }
        if let Some(r) = &self.rates {
            spec.rates = r.clone();
        }
        if let Some(v) = &self.jv {
            spec.jv = v.clone();
        }
        if let Some(v) = &self.kx0_over_pi {
            spec.kx0_over_pi = v.clone();
        }
        if let Some(n) = self.n_max {
            spec.n_max = n;
        }
        if let Some(i) = &self.initial {
            spec.initial = i.clone();
        }
        if let Some(p) = self.post_select {
            spec.post_select = p;
        }
        if let Some(c) = self.convention {
            spec.convention = c;
        }
        match (self.sigma_over_k, self.nodes, spec.k_spread.as_mut()) {
            (None, None, _) => {}
            (sigma, nodes, Some(existing)) => {
                existing.sigma_over_k = sigma.unwrap_or(existing.sigma_over_k);
                existing.nodes = nodes.unwrap_or(existing.nodes);
            }
            (Some(sigma), nodes, None) => {
                spec.k_spread = Some(KSpread {
                    sigma_over_k: sigma,
                    nodes: nodes.unwrap_or(DEFAULT_GAUSSIAN_NODES),
                })
            }
            (None, Some(_), None) => {
                return Err(ConfigError::new("--nodes", "requires --sigma-over-k"));
            }
        }
        spec.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_parse() {
        assert_eq!(parse_axis("1.5").unwrap(), vec![1.5]);
        assert_eq!(parse_axis("1,2, 3").unwrap(), vec![1.0, 2.0, 3.0]);
        let l = parse_axis("0.2:3.0:29").unwrap();
        assert_eq!(l.len(), 29);
        assert_eq!(l[0], 0.2);
        assert_eq!(l[28], 3.0);
        assert!((l[13] - 1.5).abs() < 1e-12);
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("a").is_err());
    }

    #[test]
    fn rates_parse() {
        let r = parse_rates("sqrt(3), 4sqrt(3), sqrt(3)").unwrap().unwrap();
        assert!((r[1] - 4.0 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(parse_rates("ideal").unwrap(), None);
        assert_eq!(parse_rates("1, 2.5").unwrap(), Some(vec![1.0, 2.5]));
        assert!(parse_rates("sqrt(3").is_err());
    }

    #[test]
    fn initial_states_parse_and_round_trip() {
        for text in [
            "product:1/2,-1/2",
            "coupled:1,0",
            "singlet",
            "custom:1,0;0,1",
        ] {
            let s: InitialState = text.parse().unwrap();
            assert_eq!(s.to_string().parse::<InitialState>().unwrap(), s);
        }
        assert!("product:1/2".parse::<InitialState>().is_err());
        assert!("bogus".parse::<InitialState>().is_err());
        let spin = Spin::from_twice(1).unwrap();
        let custom: InitialState = "custom:1,0;0,0;0,0".parse().unwrap();
        assert!(custom.density(spin).is_err());
        let zero: InitialState = "custom:0,0;0,0;0,0;0,0".parse().unwrap();
        assert!(zero.density(spin).is_err());
    }

    #[test]
    fn toml_round() {
        let text = r#"
            [[experiment]]
            label = "demo"
            initial = "product:1,-1"
            [experiment.model]
            spin = "1"
            jv = 1.2
            [experiment.protocol]
            n_max = 6
            [experiment.sweep]
            kx0_over_pi = "0.9:1.1:3"
        "#;
        let specs = parse_config(text).unwrap();
        assert_eq!(specs.len(), 1);
        let s = &specs[0];
        assert_eq!(s.label, "demo");
        assert_eq!(s.spin.twice(), 2);
        assert_eq!(s.jv, vec![1.2]);
        assert_eq!(s.kx0_over_pi.len(), 3);
        assert_eq!(s.grid().len(), 3);
        assert_eq!(s.n_max, 6);
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad_spin = "[[experiment]]\n[experiment.model]\nspin = \"3/4\"\n";
        assert_eq!(
            parse_config(bad_spin).unwrap_err().path,
            "experiment[0].model.spin"
        );
        let bad_rates = "[[experiment]]\n[experiment.model]\nspin = \"3/2\"\ncoupling = \"xy\"\nrates = [1.0]\n";
        assert_eq!(
            parse_config(bad_rates).unwrap_err().path,
            "experiment[0].model"
        );
        let empty_axis =
            "[[experiment]]\n[experiment.model]\nspin = \"1/2\"\n[experiment.sweep]\njv = []\n";
        assert_eq!(
            parse_config(empty_axis).unwrap_err().path,
            "experiment[0].sweep.jv"
        );
        let bad_spread = "[[experiment]]\n[experiment.model]\nspin = \"1/2\"\n[experiment.k_spread]\nsigma_over_k = 0.3\n";
        assert_eq!(
            parse_config(bad_spread).unwrap_err().path,
            "experiment[0].k_spread.sigma_over_k"
        );
        assert!(
            parse_config("[[experiment]]\n[experiment.model]\nspin = \"1\"\nbogus = 1\n").is_err()
        );
        assert!(parse_config("").is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let mut spec = ExperimentSpec::heisenberg("x", Spin::from_twice(1).unwrap(), 1.5, 10);
        let o = Overrides {
            spin: Some(Spin::from_twice(2).unwrap()),
            jv: Some(vec![1.0, 1.2]),
            sigma_over_k: Some(0.05),
            ..Default::default()
        };
        o.apply(&mut spec).unwrap();
        assert_eq!(spec.spin.twice(), 2);
        assert_eq!(spec.initial, InitialState::lowest_up(spec.spin));
        assert_eq!(spec.jv, vec![1.0, 1.2]);
        assert_eq!(spec.k_spread.unwrap().nodes, DEFAULT_GAUSSIAN_NODES);
        let only_nodes = Overrides {
            nodes: Some(5),
            ..Default::default()
        };
        let mut fresh = ExperimentSpec::heisenberg("y", Spin::from_twice(1).unwrap(), 1.5, 10);
        assert!(only_nodes.apply(&mut fresh).is_err());
    }
}
