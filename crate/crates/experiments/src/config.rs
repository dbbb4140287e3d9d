//! TOML experiment configuration with `--section.key=value` overrides.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{ExpError, ExpResult};
use rlm_core::Domain;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub material: MaterialConfig,
    pub inclusions: InclusionConfig,
    pub mesh: MeshConfig,
    pub bc: BcConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Rect,
    Disc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub radius: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { kind: DomainKind::Rect, xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0, radius: 1.0 }
    }
}

impl DomainConfig {
    pub fn domain(&self) -> Domain<f64> {
        match self.kind {
            DomainKind::Rect => Domain::Rect { xmin: self.xmin, xmax: self.xmax, ymin: self.ymin, ymax: self.ymax },
            DomainKind::Disc => Domain::Disc { radius: self.radius },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig { mu: 1.0, lambda: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    None,
    Single,
    List,
    Structured,
    Semistructured,
    Random,
    TwoDensity,
    File,
}

impl PlacementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlacementKind::None => "none",
            PlacementKind::Single => "single",
            PlacementKind::List => "list",
            PlacementKind::Structured => "structured",
            PlacementKind::Semistructured => "semistructured",
            PlacementKind::Random => "random",
            PlacementKind::TwoDensity => "two_density",
            PlacementKind::File => "file",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InclusionConfig {
    pub placement: PlacementKind,
    /// Inclusion count `m` (grid placements need a factorable count or
    /// explicit `rows`/`cols`).
    pub count: usize,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub radius: f64,
    pub gbar: f64,
    pub modes: usize,
    /// Centre for `single`.
    pub center: [f64; 2],
    /// Centres for `list`.
    pub centers: Vec<[f64; 2]>,
    pub seed: u64,
    /// Number of consecutive seeds for studies that average over placements.
    pub seeds: u64,
    pub max_attempts: usize,
    /// Inner grid size `k` of the two-density layout.
    pub core_grid: usize,
    /// CSV `cx,cy,radius,gbar` for `file`.
    pub file: Option<String>,
}

impl Default for InclusionConfig {
    fn default() -> Self {
        InclusionConfig {
            placement: PlacementKind::None,
            count: 0,
            rows: None,
            cols: None,
            radius: 0.05,
            gbar: 0.1,
            modes: 2,
            center: [0.0, 0.0],
            centers: Vec::new(),
            seed: 1,
            seeds: 1,
            max_attempts: 100_000,
            core_grid: 3,
            file: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    Global,
    Local,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Subdivisions per side (rectangle) or rings (disc).
    pub base: usize,
    /// Sectors of the innermost disc ring.
    pub sectors: usize,
    /// Uniform refinements of the base mesh. Convergence runs read it as the
    /// number of levels in the study.
    pub global_levels: usize,
    /// Band refinements around the circles after the uniform ones.
    pub local_levels: usize,
    /// Band half-width around each circle, in units of the local triangle
    /// diameter.
    pub band_factor: f64,
    /// Refinement used by convergence studies.
    pub refinement: Refinement,
    /// `"resolve"`, `"default"`, or a fixed point count.
    pub quadrature: QuadratureSpec,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            base: 8,
            sectors: 6,
            global_levels: 0,
            local_levels: 0,
            band_factor: 1.0,
            refinement: Refinement::Global,
            quadrature: QuadratureSpec::Name("resolve".into()),
        }
    }
}

/// Trapezoid point count per circle: a name or an explicit number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadratureSpec {
    Count(usize),
    Name(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcCase {
    Zero,
    Compression,
    Shear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcConfig {
    pub case: BcCase,
    /// Compression strain: boundary displacement `−α x`.
    pub alpha: f64,
    /// Compression strains of a sweep.
    pub alphas: Vec<f64>,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig { case: BcCase::Zero, alpha: 0.1, alphas: vec![0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// Also write the nodal displacement CSV and a legacy VTK file.
    pub fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into(), fields: false }
    }
}

impl ExperimentConfig {
    /// Parses TOML text and applies `section.key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> ExpResult<Self> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| ExpError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| ExpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> ExpResult<()> {
        let finite = [
            self.domain.xmin,
            self.domain.xmax,
            self.domain.ymin,
            self.domain.ymax,
            self.domain.radius,
            self.material.mu,
            self.material.lambda,
            self.inclusions.radius,
            self.inclusions.gbar,
            self.mesh.band_factor,
            self.bc.alpha,
            self.solver.tol,
        ];
        if finite.iter().any(|v| !v.is_finite()) || self.bc.alphas.iter().any(|v| !v.is_finite()) {
            return Err(ExpError::Config("all physical parameters must be finite".into()));
        }
        if !(self.material.mu > 0.0 && self.material.lambda >= 0.0) {
            return Err(ExpError::Config("need mu > 0 and lambda >= 0".into()));
        }
        if self.mesh.base == 0 {
            return Err(ExpError::Config("mesh.base must be positive".into()));
        }
        self.quadrature()?;
        Ok(())
    }

    pub fn quadrature(&self) -> ExpResult<rlm_core::Quadrature> {
        match &self.mesh.quadrature {
            QuadratureSpec::Count(m) => Ok(rlm_core::Quadrature::Fixed(*m)),
            QuadratureSpec::Name(s) if s == "resolve" => Ok(rlm_core::Quadrature::Resolve),
            QuadratureSpec::Name(s) if s == "default" => Ok(rlm_core::Quadrature::Default),
            QuadratureSpec::Name(s) => Err(ExpError::Config(format!("mesh.quadrature must be `resolve`, `default` or a count, got `{s}`"))),
        }
    }

    /// Canonical TOML of the effective configuration. The output directory
    /// is left out so that the same run hashes alike wherever it is written.
    pub fn canonical(&self) -> String {
        let mut cfg = self.clone();
        cfg.output.dir.clear();
        toml::to_string(&cfg).expect("configuration serializes")
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical`].
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// First line of every CSV this configuration produces.
    pub fn csv_header_comment(&self) -> String {
        format!("# config-sha256={} seed={}", self.sha256(), self.inclusions.seed)
    }
}

/// Applies one `section.key=value` (leading dashes optional). The value is
/// read as a TOML value, falling back to a plain string.
pub fn apply_override(table: &mut Table, spec: &str) -> ExpResult<()> {
    let spec = spec.trim_start_matches('-');
    let (path, raw) = spec.split_once('=').ok_or_else(|| ExpError::Config(format!("override `{spec}` must be key=value")))?;
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => Value::String(raw.to_string()),
    };
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ExpError::Config(format!("bad override key `{path}`")));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| ExpError::Config(format!("`{k}` is not a section")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_text() {
        let c = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.solver.tol, 1e-10);
        assert_eq!(c.solver.max_iter, 500);
    }

    #[test]
    fn overrides_take_precedence() {
        let text = "[material]\nmu = 2.0\n[inclusions]\nplacement = \"structured\"\ncount = 25\n";
        let o = vec!["--material.mu=3".to_string(), "--inclusions.placement=random".to_string(), "--mesh.quadrature=64".to_string()];
        let c = ExperimentConfig::from_toml(text, &o).unwrap();
        assert_eq!(c.material.mu, 3.0);
        assert_eq!(c.inclusions.placement, PlacementKind::Random);
        assert_eq!(c.inclusions.count, 25);
        assert_eq!(c.quadrature().unwrap(), rlm_core::Quadrature::Fixed(64));
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(ExperimentConfig::from_toml("[material]\nnu = 1\n", &[]).is_err());
        assert!(ExperimentConfig::from_toml("", &["material.mu=-1".into()]).is_err());
        assert!(ExperimentConfig::from_toml("", &["mesh.quadrature=lots".into()]).is_err());
        assert!(ExperimentConfig::from_toml("", &["nonsense".into()]).is_err());
    }

    #[test]
    fn hash_depends_on_content_only() {
        let a = ExperimentConfig::from_toml("[material]\nmu = 1.0\n", &[]).unwrap();
        let b = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(a.sha256(), b.sha256());
        let c = ExperimentConfig::from_toml("", &["material.mu=2".into()]).unwrap();
        assert_ne!(a.sha256(), c.sha256());
        assert!(a.csv_header_comment().starts_with("# config-sha256="));
        assert!(a.csv_header_comment().ends_with(" seed=1"));
    }
}
