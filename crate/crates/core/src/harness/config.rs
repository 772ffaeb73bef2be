//! Flat `key = value` experiment configuration with `surface.*`, `run.*`
//! and `out.*` sections. Unknown or repeated keys are rejected.

use crate::surfaces::{ChartPoint, Profile, ProfileKind, SurfaceModel};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
    #[error("cannot read config {path}: {msg}")]
    Read { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    ScanFocal,
    ReturnMap,
    Transfer,
    Spectrum,
    WindowNorm,
    Quasimode,
    SupnormScaling,
    OmegaCheck,
    TheoremReport,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::ScanFocal,
        Kind::ReturnMap,
        Kind::Transfer,
        Kind::Spectrum,
        Kind::WindowNorm,
        Kind::Quasimode,
        Kind::SupnormScaling,
        Kind::OmegaCheck,
        Kind::TheoremReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::ScanFocal => "scan-focal",
            Kind::ReturnMap => "return-map",
            Kind::Transfer => "transfer",
            Kind::Spectrum => "spectrum",
            Kind::WindowNorm => "window-norm",
            Kind::Quasimode => "quasimode",
            Kind::SupnormScaling => "supnorm-scaling",
            Kind::OmegaCheck => "omega-check",
            Kind::TheoremReport => "theorem-report",
        }
    }
}

impl FromStr for Kind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError::Invalid {
                key: "run.kind".into(),
                msg: format!("unknown experiment kind `{s}`"),
            })
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A base point before it is resolved against a surface.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSpec {
    Pole,
    SouthPole,
    Umbilic,
    Generic,
    Coords(Vec<f64>),
}

impl PointSpec {
    fn parse(key: &str, s: &str) -> Result<Self> {
        match s.trim() {
            "pole" => Ok(PointSpec::Pole),
            "south-pole" => Ok(PointSpec::SouthPole),
            "umbilic" => Ok(PointSpec::Umbilic),
            "generic" => Ok(PointSpec::Generic),
            other => parse_list(key, other).map(PointSpec::Coords),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PointSpec::Pole => "pole".into(),
            PointSpec::SouthPole => "south-pole".into(),
            PointSpec::Umbilic => "umbilic".into(),
            PointSpec::Generic => "generic".into(),
            PointSpec::Coords(c) => c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
        }
    }

    /// Chart point on `surface`; two coordinates on an ambient surface are
    /// colatitude and longitude.
    pub fn resolve(&self, surface: &SurfaceModel) -> Result<ChartPoint> {
        let bad = |msg: &str| ConfigError::Invalid {
            key: "run.point".into(),
            msg: format!("{} on {}: {msg}", self.label(), surface_name(surface)),
        };
        let p = match (self, surface) {
            (PointSpec::Generic, SurfaceModel::FlatTorus { l1, l2 }) => ChartPoint::planar(0.1963 * l1, 0.0902 * l2),
            (PointSpec::Coords(c), SurfaceModel::FlatTorus { .. }) if c.len() == 2 => ChartPoint::planar(c[0], c[1]),
            (PointSpec::Pole, SurfaceModel::Revolution { .. }) => ChartPoint::polar(0.0, 0.0),
            (PointSpec::SouthPole, SurfaceModel::Revolution { profile }) => ChartPoint::polar(profile.length(), 0.0),
            (PointSpec::Generic, SurfaceModel::Revolution { .. }) => ChartPoint::polar(1.1, 0.7),
            (PointSpec::Coords(c), SurfaceModel::Revolution { .. }) if c.len() == 2 => ChartPoint::polar(c[0], c[1]),
            (PointSpec::Pole, SurfaceModel::RoundSphere { radius }) => ChartPoint::ambient([0.0, 0.0, *radius]),
            (PointSpec::SouthPole, SurfaceModel::RoundSphere { radius }) => ChartPoint::ambient([0.0, 0.0, -*radius]),
            (PointSpec::Umbilic, SurfaceModel::TriaxialEllipsoid { .. }) => surface.umbilic_points().map_err(|e| bad(&e.to_string()))?[0],
            (PointSpec::Generic, s) if s.is_ambient() => s.ambient_point(1.1, 0.7).map_err(|e| bad(&e.to_string()))?,
            (PointSpec::Coords(c), s) if s.is_ambient() && c.len() == 2 => s.ambient_point(c[0], c[1]).map_err(|e| bad(&e.to_string()))?,
            (PointSpec::Coords(c), s) if s.is_ambient() && c.len() == 3 => ChartPoint::ambient([c[0], c[1], c[2]]),
            _ => return Err(bad("not available")),
        };
        surface.validate(&p).map_err(|e| bad(&e.to_string()))?;
        Ok(p)
    }
}

pub fn surface_name(s: &SurfaceModel) -> &'static str {
    match s {
        SurfaceModel::FlatTorus { .. } => "torus",
        SurfaceModel::RoundSphere { .. } => "sphere",
        SurfaceModel::Revolution { .. } => "revolution",
        SurfaceModel::TriaxialEllipsoid { .. } => "ellipsoid",
    }
}

/// Closed-form circle maps usable in place of an extracted one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticMap {
    /// `ω + ε sin ω`.
    Test(f64),
    Identity,
    Rotation(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub point: Option<PointSpec>,
    pub points: Vec<PointSpec>,
    pub map: Option<AnalyticMap>,
    pub directions: usize,
    pub tol: f64,
    pub horizon: f64,
    pub step: f64,
    pub drift_tol: f64,
    pub dispersion: f64,
    pub t_max: usize,
    pub decay: f64,
    pub presence: f64,
    pub lambda_max: f64,
    pub m_max: Option<u32>,
    pub radial_cells: usize,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub t_values: Vec<f64>,
    pub k_min: u32,
    pub k_max: u32,
    pub beta: Option<u32>,
    pub ell: Option<f64>,
    pub mesh_spacing: f64,
    pub zonal_only: bool,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            point: None,
            points: Vec::new(),
            map: None,
            directions: 256,
            tol: 1e-4,
            horizon: 20.0,
            step: 1e-3,
            drift_tol: 1e-7,
            dispersion: 1e-3,
            t_max: 40,
            decay: 0.05,
            presence: 0.5,
            lambda_max: 60.0,
            m_max: None,
            radial_cells: 4000,
            lambdas: vec![30.0],
            deltas: vec![0.2],
            t_values: vec![4.0],
            k_min: 10,
            k_max: 30,
            beta: None,
            ell: None,
            mesh_spacing: 0.05,
            zonal_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub surface: Option<SurfaceModel>,
    pub params: Params,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub dump_trajectories: bool,
}

const KEYS: &[&str] = &[
    "surface.type",
    "surface.l1",
    "surface.l2",
    "surface.radius",
    "surface.profile",
    "surface.amplitude",
    "surface.a",
    "surface.b",
    "surface.c",
    "run.kind",
    "run.point",
    "run.points",
    "run.map",
    "run.directions",
    "run.tol",
    "run.horizon",
    "run.step",
    "run.drift_tol",
    "run.dispersion",
    "run.t_max",
    "run.decay",
    "run.presence",
    "run.lambda_max",
    "run.m_max",
    "run.radial_cells",
    "run.lambda",
    "run.delta",
    "run.t",
    "run.k_min",
    "run.k_max",
    "run.beta",
    "run.ell",
    "run.mesh_spacing",
    "run.zonal_only",
    "out.dir",
    "out.cache",
    "out.dump_trajectories",
];

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| ConfigError::Invalid {
        key: key.into(),
        msg: format!("cannot parse `{s}`"),
    })
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| parse_num(key, x)).collect()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Invalid {
            key: key.into(),
            msg: format!("{v} must be strictly positive"),
        })
    }
}

struct Table(BTreeMap<String, String>);

impl Table {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn num<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key).map(|v| parse_num(key, &v)).transpose()
    }

    fn pos(&mut self, key: &str) -> Result<Option<f64>> {
        self.num::<f64>(key)?.map(|v| positive(key, v)).transpose()
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|v| parse_list(key, &v).and_then(|l| l.into_iter().map(|x| positive(key, x)).collect()))
            .transpose()
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError::Invalid {
                    key: key.into(),
                    msg: format!("expected true or false, got `{v}`"),
                }),
            })
            .transpose()
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.into()));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(k.into()));
            }
        }
        let mut t = Table(map);
        let surface = parse_surface(&mut t)?;
        let kind = t.take("run.kind").map(|s| s.parse()).transpose()?;
        let d = Params::default();
        let point = t.take("run.point").map(|s| PointSpec::parse("run.point", &s)).transpose()?;
        let points = t
            .take("run.points")
            .map(|s| s.split(';').map(|p| PointSpec::parse("run.points", p)).collect::<Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default();
        let map = t.take("run.map").map(|s| parse_map(&s)).transpose()?;
        let params = Params {
            point,
            points,
            map,
            directions: t.num("run.directions")?.unwrap_or(d.directions),
            tol: t.pos("run.tol")?.unwrap_or(d.tol),
            horizon: t.pos("run.horizon")?.unwrap_or(d.horizon),
            step: t.pos("run.step")?.unwrap_or(d.step),
            drift_tol: t.pos("run.drift_tol")?.unwrap_or(d.drift_tol),
            dispersion: t.pos("run.dispersion")?.unwrap_or(d.dispersion),
            t_max: t.num("run.t_max")?.unwrap_or(d.t_max),
            decay: t.pos("run.decay")?.unwrap_or(d.decay),
            presence: t.pos("run.presence")?.unwrap_or(d.presence),
            lambda_max: t.pos("run.lambda_max")?.unwrap_or(d.lambda_max),
            m_max: t.num("run.m_max")?,
            radial_cells: t.num("run.radial_cells")?.unwrap_or(d.radial_cells),
            lambdas: t.list("run.lambda")?.unwrap_or(d.lambdas),
            deltas: t.list("run.delta")?.unwrap_or(d.deltas),
            t_values: t.list("run.t")?.unwrap_or(d.t_values),
            k_min: t.num("run.k_min")?.unwrap_or(d.k_min),
            k_max: t.num("run.k_max")?.unwrap_or(d.k_max),
            beta: t.num("run.beta")?,
            ell: t.pos("run.ell")?,
            mesh_spacing: t.pos("run.mesh_spacing")?.unwrap_or(d.mesh_spacing),
            zonal_only: t.flag("run.zonal_only")?.unwrap_or(d.zonal_only),
        };
        let cfg = ExperimentConfig {
            kind,
            surface,
            params,
            out_dir: t.take("out.dir").map(PathBuf::from),
            cache_dir: t.take("out.cache").map(PathBuf::from),
            dump_trajectories: t.flag("out.dump_trajectories")?.unwrap_or(false),
        };
        if let Some(k) = t.0.keys().next() {
            return Err(ConfigError::UnknownKey(format!("{k} (not valid for this surface type)")));
        }
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn check_ranges(&self) -> Result<()> {
        let p = &self.params;
        let invalid = |key: &str, msg: String| Err(ConfigError::Invalid { key: key.into(), msg });
        if p.directions < 64 {
            return invalid("run.directions", format!("{} < 64", p.directions));
        }
        if p.t_max == 0 {
            return invalid("run.t_max", "must be at least 1".into());
        }
        if p.k_min > p.k_max {
            return invalid("run.k_min", format!("{} exceeds run.k_max = {}", p.k_min, p.k_max));
        }
        if p.radial_cells < 64 {
            return invalid("run.radial_cells", format!("{} < 64", p.radial_cells));
        }
        let limit = match self.surface {
            Some(SurfaceModel::Revolution { .. }) => crate::spectral::RADIAL_LAMBDA_LIMIT,
            _ => crate::spectral::EXACT_LAMBDA_LIMIT,
        };
        if p.lambda_max > limit {
            return invalid("run.lambda_max", format!("{} exceeds the solver limit {limit}", p.lambda_max));
        }
        if p.lambdas.iter().any(|l| *l > p.lambda_max) {
            return invalid("run.lambda", format!("values must not exceed run.lambda_max = {}", p.lambda_max));
        }
        if self.params.presence <= self.params.decay {
            return invalid("run.presence", "must exceed run.decay".into());
        }
        Ok(())
    }

    pub fn require_surface(&self) -> Result<&SurfaceModel> {
        self.surface.as_ref().ok_or_else(|| ConfigError::Missing("surface.type".into()))
    }

    /// The single base point, defaulting per surface.
    pub fn base_point(&self) -> Result<ChartPoint> {
        let s = self.require_surface()?;
        let spec = self.params.point.clone().unwrap_or(match s {
            SurfaceModel::FlatTorus { .. } => PointSpec::Generic,
            SurfaceModel::TriaxialEllipsoid { .. } => PointSpec::Umbilic,
            _ => PointSpec::Pole,
        });
        spec.resolve(s)
    }

    /// Points scanned by the theorem report, defaulting per surface.
    pub fn report_points(&self) -> Result<Vec<(String, ChartPoint)>> {
        let s = self.require_surface()?;
        let specs = if !self.params.points.is_empty() {
            self.params.points.clone()
        } else {
            match s {
                SurfaceModel::FlatTorus { .. } => vec![
                    PointSpec::Generic,
                    PointSpec::Coords(vec![0.0, 0.0]),
                    PointSpec::Coords(vec![2.5, 4.0]),
                ],
                SurfaceModel::TriaxialEllipsoid { .. } => vec![PointSpec::Umbilic, PointSpec::Generic],
                _ => vec![PointSpec::Pole, PointSpec::SouthPole, PointSpec::Generic],
            }
        };
        specs.iter().map(|p| Ok((p.label(), p.resolve(s)?))).collect()
    }
}

fn parse_map(s: &str) -> Result<AnalyticMap> {
    let bad = || ConfigError::Invalid {
        key: "run.map".into(),
        msg: format!("expected test, test:<eps>, identity or rotation:<alpha>, got `{s}`"),
    };
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s.trim(), None),
    };
    let num = |a: Option<&str>| -> Result<Option<f64>> { a.map(|a| parse_num("run.map", a)).transpose() };
    match name {
        "test" => {
            let eps = num(arg)?.unwrap_or(0.5);
            if !(eps > 0.0 && eps < 1.0) {
                return Err(bad());
            }
            Ok(AnalyticMap::Test(eps))
        }
        "identity" if arg.is_none() => Ok(AnalyticMap::Identity),
        "rotation" => Ok(AnalyticMap::Rotation(num(arg)?.ok_or_else(bad)?)),
        _ => Err(bad()),
    }
}

fn parse_surface(t: &mut Table) -> Result<Option<SurfaceModel>> {
    let Some(ty) = t.take("surface.type") else {
        return Ok(None);
    };
    let invalid = |key: &str, e: &dyn std::fmt::Display| ConfigError::Invalid {
        key: key.into(),
        msg: e.to_string(),
    };
    let need = |t: &mut Table, key: &str| -> Result<f64> { t.pos(key)?.ok_or_else(|| ConfigError::Missing(key.into())) };
    let s = match ty.as_str() {
        "torus" => {
            let (a, b) = (need(t, "surface.l1")?, need(t, "surface.l2")?);
            SurfaceModel::torus(a, b).map_err(|e| invalid("surface.l1", &e))?
        }
        "sphere" => SurfaceModel::sphere(t.pos("surface.radius")?.unwrap_or(1.0)).map_err(|e| invalid("surface.radius", &e))?,
        "revolution" => {
            let kind = match t.take("surface.profile").as_deref() {
                Some("sine") => ProfileKind::Sine,
                Some("peanut") | None => ProfileKind::Peanut,
                Some("prolate") => ProfileKind::Prolate,
                Some(o) => return Err(invalid("surface.profile", &format!("unknown profile `{o}`"))),
            };
            let amp = t.num::<f64>("surface.amplitude")?.unwrap_or(match kind {
                ProfileKind::Sine => 0.0,
                _ => 0.3,
            });
            SurfaceModel::revolution(Profile::named(kind, amp).map_err(|e| invalid("surface.amplitude", &e))?)
        }
        "ellipsoid" => {
            let (a, b, c) = (need(t, "surface.a")?, need(t, "surface.b")?, need(t, "surface.c")?);
            SurfaceModel::ellipsoid(a, b, c).map_err(|e| invalid("surface.a", &e))?
        }
        other => return Err(invalid("surface.type", &format!("unknown surface `{other}`"))),
    };
    Ok(Some(s))
}
