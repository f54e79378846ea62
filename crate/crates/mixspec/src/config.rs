//! JSON run configuration.
//!
//! Parse errors carry the JSON pointer of the offending value. Semantic
//! errors found while building core inputs carry the pointer of the
//! fragment they came from.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use mixspec_core::experiments::{
    AnchorParams, BoundaryParams, ClassicalParams, DichotomyParams, LocalizationParams,
    MinusFamily, OperatorLimitParams, OracleParams, SeminormParams, SignChangeParams,
    SimplicityParams, UnionParams,
};
use mixspec_core::{from_density, Domain, MeasureAtom, Part, SignedMeasure};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() {
            "/"
        } else {
            &self.pointer
        };
        write!(f, "config error at {at}: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn at(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", escape(key))),
            Segment::Enum { variant } => out.push_str(&format!("/{}", escape(variant))),
            Segment::Unknown => {}
        }
    }
    out
}

/// Deserializes `value`, reporting failures relative to `base`.
pub fn from_value<T: DeserializeOwned>(value: &Value, base: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.inner().to_string();
        ConfigError::at(format!("{base}{}", pointer_of(e.path())), inner)
    })
}

pub fn parse_json(text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::at("", format!("malformed JSON: {e}")))
}

/// Top-level config shared by all subcommands.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub checks: Vec<Value>,
}

fn default_k() -> usize {
    2
}

fn default_tol() -> f64 {
    mixspec_core::eigensolver::DEFAULT_TOL
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub intervals: Vec<(f64, f64)>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub n_per_unit: Option<u32>,
}

fn spacing(h: Option<f64>, n_per_unit: Option<u32>, at: &str) -> Result<f64, ConfigError> {
    match (h, n_per_unit) {
        (Some(h), None) => Ok(h),
        (None, Some(n)) if n > 0 => Ok(1.0 / n as f64),
        (None, Some(_)) => Err(ConfigError::at(
            format!("{at}/n_per_unit"),
            "must be positive",
        )),
        (None, None) => Err(ConfigError::at(
            at,
            "one of `h` or `n_per_unit` is required",
        )),
        (Some(_), Some(_)) => Err(ConfigError::at(
            at,
            "give either `h` or `n_per_unit`, not both",
        )),
    }
}

fn domain(intervals: &[(f64, f64)], at: &str) -> Result<Domain, ConfigError> {
    Domain::new(intervals).map_err(|e| ConfigError::at(at, e))
}

impl GridSpec {
    pub fn resolve(&self, at: &str) -> Result<(Domain, f64), ConfigError> {
        Ok((
            domain(&self.intervals, &format!("{at}/intervals"))?,
            spacing(self.h, self.n_per_unit, at)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `w` on the support.
    Const,
    /// `w · s` on the support.
    Linear,
}

/// One entry of a measure part: an atom, or a density expanded by
/// Gauss–Legendre quadrature at load time.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AtomSpec {
    Atom {
        s: f64,
        w: f64,
    },
    Density {
        density: DensityKind,
        support: (f64, f64),
        n_quad: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
}

fn unit_weight() -> f64 {
    1.0
}

pub fn expand_atoms(
    specs: &[AtomSpec],
    part: Part,
    at: &str,
) -> Result<Vec<MeasureAtom>, ConfigError> {
    let mut atoms = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        match *spec {
            AtomSpec::Atom { s, w } => atoms.push(MeasureAtom::new(s, w)),
            AtomSpec::Density {
                density,
                support,
                n_quad,
                w,
            } => {
                let m = match density {
                    DensityKind::Const => from_density(|_| w, support, n_quad, part),
                    DensityKind::Linear => from_density(|s| w * s, support, n_quad, part),
                }
                .map_err(|e| ConfigError::at(format!("{at}/{i}"), e))?;
                let expanded = match part {
                    Part::Plus => m.plus(),
                    Part::Minus => m.minus(),
                };
                atoms.extend_from_slice(expanded);
            }
        }
    }
    Ok(atoms)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub plus: Vec<AtomSpec>,
    #[serde(default)]
    pub minus: Vec<AtomSpec>,
    pub s_bar: f64,
}

impl MeasureSpec {
    pub fn plus_atoms(&self, at: &str) -> Result<Vec<MeasureAtom>, ConfigError> {
        expand_atoms(&self.plus, Part::Plus, &format!("{at}/plus"))
    }

    pub fn resolve(&self, at: &str) -> Result<SignedMeasure, ConfigError> {
        let plus = self.plus_atoms(at)?;
        let minus = expand_atoms(&self.minus, Part::Minus, &format!("{at}/minus"))?;
        SignedMeasure::new(&plus, &minus, self.s_bar).map_err(|e| ConfigError::at(at, e))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `mu- = delta_eps` with the configured `mu+`.
    Eps,
    /// Same family, named for order scans.
    SMinus,
    /// Lattice spacing with the configured measure.
    H,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// checks

macro_rules! defaults {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        $(fn $name() -> $ty { $val })*
    };
}

defaults! {
    d_rel: f64 = mixspec_core::eigensolver::DEFAULT_REL_THRESHOLD;
    d_gap: f64 = mixspec_core::eigensolver::DEFAULT_GAP_THRESHOLD;
    d_small_s: f64 = 0.25;
    d_tol_loc: f64 = 0.05;
    d_ineq: f64 = 100.0;
    d_rq: f64 = 10.0;
    d_scan: usize = 91;
    d_contrast: f64 = 1e-12;
    d_eq: f64 = 1e-12;
    d_cluster: f64 = 1e-10;
    d_angle: f64 = 1e-6;
    d_probes: usize = 200;
    d_modes: usize = 8;
    d_band: (f64, f64) = (0.8, 1.25);
    d_defect: f64 = 1e-2;
    d_layer: f64 = 0.1;
    d_xi: f64 = 1.0;
    d_order: f64 = 1.9;
    d_quad: usize = 64;
    d_skip: usize = 2;
    d_oracle_tol: f64 = 0.05;
    d_anchor_discrete: f64 = 1e-4;
    d_anchor_continuum: f64 = 1e-3;
}

fn d_family() -> MinusFamily {
    MinusFamily::Dirac
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    ClassicalAnchor {
        grid: GridSpec,
        #[serde(default = "d_anchor_discrete")]
        discrete_tol: f64,
        #[serde(default = "d_anchor_continuum")]
        continuum_tol: f64,
    },
    OperatorLimits {
        grid: GridSpec,
        s_list: Vec<f64>,
        symbol_h_list: Vec<f64>,
        #[serde(default = "d_xi")]
        xi: f64,
        #[serde(default = "d_order")]
        min_order: f64,
    },
    OracleCrosscheck {
        grid: GridSpec,
        s_list: Vec<f64>,
        #[serde(default = "d_quad")]
        quad_points: usize,
        #[serde(default = "d_skip")]
        skip: usize,
        #[serde(default = "d_oracle_tol")]
        rel_tol: f64,
    },
    Localization {
        grid: GridSpec,
        plus: Vec<AtomSpec>,
        #[serde(default = "d_family")]
        family: MinusFamily,
        eps_list: Vec<f64>,
        #[serde(default = "d_tol_loc")]
        tol_conv: f64,
        #[serde(default = "d_tol_loc")]
        tol_vec: f64,
    },
    SimplicityPositivity {
        grid: GridSpec,
        s_minus: f64,
        #[serde(default = "d_rel")]
        rel_threshold: f64,
        #[serde(default = "d_gap")]
        gap_threshold: f64,
        #[serde(default = "d_small_s")]
        small_s_max: f64,
    },
    SignChange {
        grid: GridSpec,
        s_list: Vec<f64>,
        #[serde(default = "d_rel")]
        rel_threshold: f64,
    },
    UnionInequality {
        omega1: Vec<(f64, f64)>,
        omega2: Vec<(f64, f64)>,
        #[serde(default)]
        h: Option<f64>,
        #[serde(default)]
        n_per_unit: Option<u32>,
        s_minus: f64,
        #[serde(default = "d_ineq")]
        inequality_factor: f64,
        #[serde(default = "d_rq")]
        rayleigh_factor: f64,
        #[serde(default = "d_scan")]
        scan_points: usize,
        #[serde(default = "d_contrast")]
        contrast_tol: f64,
    },
    SimplicityScan {
        symmetric: Vec<(f64, f64)>,
        asymmetric: Vec<(f64, f64)>,
        #[serde(default)]
        h: Option<f64>,
        #[serde(default)]
        n_per_unit: Option<u32>,
        s_list: Vec<f64>,
        gap_threshold: f64,
        gap_floor: f64,
    },
    ClassicalLimit {
        grid: GridSpec,
        #[serde(default = "d_eq")]
        equality_tol: f64,
        #[serde(default = "d_cluster")]
        cluster_tol: f64,
        #[serde(default = "d_angle")]
        angle_tol: f64,
        #[serde(default = "d_gap")]
        gap_threshold: f64,
    },
    SeminormLemmas {
        intervals: Vec<(f64, f64)>,
        h_list: Vec<f64>,
        s_pairs: Vec<(f64, f64)>,
        eps_list: Vec<f64>,
        #[serde(default = "d_probes")]
        probes: usize,
        #[serde(default = "d_modes")]
        modes: usize,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "d_band")]
        ratio_band: (f64, f64),
        #[serde(default = "d_defect")]
        defect_tol: f64,
    },
    BoundaryGrowth {
        grid: GridSpec,
        s_minus: f64,
        #[serde(default = "d_rel")]
        rel_threshold: f64,
        #[serde(default = "d_layer")]
        layer_fraction: f64,
    },
}

/// A check with every input resolved to core types.
#[derive(Debug, Clone)]
pub enum Check {
    ClassicalAnchor(AnchorParams),
    OperatorLimits(OperatorLimitParams),
    OracleCrosscheck(OracleParams),
    Localization(LocalizationParams),
    SimplicityPositivity(SimplicityParams),
    SignChange(SignChangeParams),
    UnionInequality(UnionParams),
    SimplicityScan(DichotomyParams),
    ClassicalLimit(ClassicalParams),
    SeminormLemmas(SeminormParams),
    BoundaryGrowth(BoundaryParams),
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::ClassicalAnchor { .. } => "classical_anchor",
            CheckSpec::OperatorLimits { .. } => "operator_limits",
            CheckSpec::OracleCrosscheck { .. } => "oracle_crosscheck",
            CheckSpec::Localization { .. } => "localization",
            CheckSpec::SimplicityPositivity { .. } => "simplicity_positivity",
            CheckSpec::SignChange { .. } => "sign_change",
            CheckSpec::UnionInequality { .. } => "union_inequality",
            CheckSpec::SimplicityScan { .. } => "simplicity_scan",
            CheckSpec::ClassicalLimit { .. } => "classical_limit",
            CheckSpec::SeminormLemmas { .. } => "seminorm_lemmas",
            CheckSpec::BoundaryGrowth { .. } => "boundary_growth",
        }
    }

    /// `seed` applies to checks that draw random probes and do not fix
    /// their own seed, unless `force` is set.
    pub fn resolve(&self, at: &str, seed: u64, force: bool) -> Result<Check, ConfigError> {
        let g = |spec: &GridSpec| spec.resolve(&format!("{at}/grid"));
        Ok(match self {
            CheckSpec::ClassicalAnchor {
                grid,
                discrete_tol,
                continuum_tol,
            } => {
                let (domain, h) = g(grid)?;
                Check::ClassicalAnchor(AnchorParams {
                    domain,
                    h,
                    discrete_tol: *discrete_tol,
                    continuum_tol: *continuum_tol,
                })
            }
            CheckSpec::OperatorLimits {
                grid,
                s_list,
                symbol_h_list,
                xi,
                min_order,
            } => {
                let (domain, h) = g(grid)?;
                Check::OperatorLimits(OperatorLimitParams {
                    domain,
                    h,
                    s_list: s_list.clone(),
                    symbol_h_list: symbol_h_list.clone(),
                    xi: *xi,
                    min_order: *min_order,
                })
            }
            CheckSpec::OracleCrosscheck {
                grid,
                s_list,
                quad_points,
                skip,
                rel_tol,
            } => {
                let (domain, h) = g(grid)?;
                Check::OracleCrosscheck(OracleParams {
                    domain,
                    h,
                    s_list: s_list.clone(),
                    quad_points: *quad_points,
                    skip: *skip,
                    rel_tol: *rel_tol,
                })
            }
            CheckSpec::Localization {
                grid,
                plus,
                family,
                eps_list,
                tol_conv,
                tol_vec,
            } => {
                let (domain, h) = g(grid)?;
                let plus = expand_atoms(plus, Part::Plus, &format!("{at}/plus"))?;
                Check::Localization(LocalizationParams {
                    domain,
                    h,
                    plus,
                    family: *family,
                    eps_list: eps_list.clone(),
                    tol_conv: *tol_conv,
                    tol_vec: *tol_vec,
                })
            }
            CheckSpec::SimplicityPositivity {
                grid,
                s_minus,
                rel_threshold,
                gap_threshold,
                small_s_max,
            } => {
                let (domain, h) = g(grid)?;
                Check::SimplicityPositivity(SimplicityParams {
                    domain,
                    h,
                    s_minus: *s_minus,
                    rel_threshold: *rel_threshold,
                    gap_threshold: *gap_threshold,
                    small_s_max: *small_s_max,
                })
            }
            CheckSpec::SignChange {
                grid,
                s_list,
                rel_threshold,
            } => {
                let (domain, h) = g(grid)?;
                Check::SignChange(SignChangeParams {
                    domain,
                    h,
                    s_list: s_list.clone(),
                    rel_threshold: *rel_threshold,
                })
            }
            CheckSpec::UnionInequality {
                omega1,
                omega2,
                h,
                n_per_unit,
                s_minus,
                inequality_factor,
                rayleigh_factor,
                scan_points,
                contrast_tol,
            } => Check::UnionInequality(UnionParams {
                omega1: domain(omega1, &format!("{at}/omega1"))?,
                omega2: domain(omega2, &format!("{at}/omega2"))?,
                h: spacing(*h, *n_per_unit, at)?,
                s_minus: *s_minus,
                inequality_factor: *inequality_factor,
                rayleigh_factor: *rayleigh_factor,
                scan_points: *scan_points,
                contrast_tol: *contrast_tol,
            }),
            CheckSpec::SimplicityScan {
                symmetric,
                asymmetric,
                h,
                n_per_unit,
                s_list,
                gap_threshold,
                gap_floor,
            } => Check::SimplicityScan(DichotomyParams {
                symmetric: domain(symmetric, &format!("{at}/symmetric"))?,
                asymmetric: domain(asymmetric, &format!("{at}/asymmetric"))?,
                s_list: s_list.clone(),
                h: spacing(*h, *n_per_unit, at)?,
                gap_threshold: *gap_threshold,
                gap_floor: *gap_floor,
            }),
            CheckSpec::ClassicalLimit {
                grid,
                equality_tol,
                cluster_tol,
                angle_tol,
                gap_threshold,
            } => {
                let (domain, h) = g(grid)?;
                Check::ClassicalLimit(ClassicalParams {
                    domain,
                    h,
                    equality_tol: *equality_tol,
                    cluster_tol: *cluster_tol,
                    angle_tol: *angle_tol,
                    gap_threshold: *gap_threshold,
                })
            }
            CheckSpec::SeminormLemmas {
                intervals,
                h_list,
                s_pairs,
                eps_list,
                probes,
                modes,
                seed: own,
                ratio_band,
                defect_tol,
            } => Check::SeminormLemmas(SeminormParams {
                domain: domain(intervals, &format!("{at}/intervals"))?,
                h_list: h_list.clone(),
                s_pairs: s_pairs.clone(),
                eps_list: eps_list.clone(),
                probes: *probes,
                modes: *modes,
                seed: if force { seed } else { own.unwrap_or(seed) },
                ratio_band: *ratio_band,
                defect_tol: *defect_tol,
            }),
            CheckSpec::BoundaryGrowth {
                grid,
                s_minus,
                rel_threshold,
                layer_fraction,
            } => {
                let (domain, h) = g(grid)?;
                Check::BoundaryGrowth(BoundaryParams {
                    domain,
                    h,
                    s_minus: *s_minus,
                    rel_threshold: *rel_threshold,
                    layer_fraction: *layer_fraction,
                })
            }
        })
    }
}

/// One entry of `checks`: the parsed spec, its report name and its raw JSON.
#[derive(Debug, Clone)]
pub struct CheckEntry {
    pub name: String,
    pub pointer: String,
    pub spec: CheckSpec,
    pub raw: Value,
}

/// Splits the optional `name` key off each entry and parses the rest.
pub fn parse_checks(values: &[Value], base: &str) -> Result<Vec<CheckEntry>, ConfigError> {
    let mut out = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let at = format!("{base}/{i}");
        let mut body = v.clone();
        let name = match body.as_object_mut().and_then(|m| m.remove("name")) {
            Some(Value::String(s)) if !s.is_empty() && !s.contains(['/', '\\']) => Some(s),
            Some(_) => {
                return Err(ConfigError::at(
                    format!("{at}/name"),
                    "name must be a plain nonempty string",
                ))
            }
            None => None,
        };
        let kind = match body.as_object_mut().and_then(|m| m.remove("check")) {
            Some(Value::String(s)) => s,
            Some(_) => {
                return Err(ConfigError::at(
                    format!("{at}/check"),
                    "check must be a string",
                ))
            }
            None => return Err(ConfigError::at(format!("{at}/check"), "missing check kind")),
        };
        // externally tagged, so that error paths survive; the tag segment
        // is synthetic and dropped from the pointer
        let wrapped = Value::Object([(kind.clone(), body)].into_iter().collect());
        let spec: CheckSpec = from_value(&wrapped, "").map_err(|e| {
            let prefix = format!("/{}", escape(&kind));
            let rest = e.pointer.strip_prefix(&prefix).unwrap_or(&e.pointer);
            ConfigError::at(format!("{at}{rest}"), e.message)
        })?;
        out.push(CheckEntry {
            name: name.unwrap_or_else(|| spec.kind().to_string()),
            pointer: at,
            spec,
            raw: v.clone(),
        });
    }
    Ok(out)
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, ConfigError> {
    from_value(&parse_json(text)?, "")
}
