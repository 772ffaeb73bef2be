//! Portable persistence: a JSON header plus one CSV row per mode. Radial
//! eigenvectors are not stored; they are regenerated from the stored
//! eigenvalues on load.

use super::radial::{RadialMode, RadialProblem};
use super::{Completeness, EigenMode, ModeKind, RevolutionParams, Result, SpectralError, SpectrumTable, Trig};
use crate::surfaces::SurfaceModel;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub format: u32,
    pub surface: SurfaceModel,
    pub surface_hash: String,
    pub lambda_max: f64,
    pub params: Option<RevolutionParams>,
    pub mode_count: usize,
    pub radial_count: usize,
    pub certificate: Completeness,
}

impl SpectrumTable {
    pub fn header(&self) -> TableHeader {
        TableHeader {
            format: FORMAT_VERSION,
            surface: self.surface,
            surface_hash: self.surface_hash(),
            lambda_max: self.lambda_max,
            params: self.params,
            mode_count: self.modes.len(),
            radial_count: self.radial.len(),
            certificate: self.certificate,
        }
    }

    /// CSV rows `index,lambda,family,a,b,trig,radial,norm`. Frequencies are
    /// written in shortest round-trip form so a reload is bit-exact.
    pub fn write_modes_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,lambda,family,a,b,trig,radial,norm")?;
        for (j, m) in self.modes.iter().enumerate() {
            let (family, a, b, trig, radial) = match m.kind {
                ModeKind::Torus { p, q, trig } => ("torus", p, q, trig, -1),
                ModeKind::Sphere { l, m } => ("sphere", l as i64, m as i64, Trig::Const, -1),
                ModeKind::Revolution { m, k, trig, radial } => ("revolution", m as i64, k as i64, trig, radial as i64),
            };
            let trig = match trig {
                Trig::Const => "const",
                Trig::Cos => "cos",
                Trig::Sin => "sin",
            };
            writeln!(out, "{j},{:e},{family},{a},{b},{trig},{radial},{:e}", m.lambda, m.norm)?;
        }
        Ok(())
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, serde_json::to_string_pretty(&self.header()).expect("serializable"))?;
        let mut buf = Vec::new();
        self.write_modes_csv(&mut buf)?;
        std::fs::write(&csv, buf)?;
        Ok((json, csv))
    }

    pub fn load(json: &Path, csv: &Path) -> Result<SpectrumTable> {
        let header: TableHeader = serde_json::from_str(&std::fs::read_to_string(json)?)
            .map_err(|e| SpectralError::Corrupted(format!("{}: {e}", json.display())))?;
        if header.format != FORMAT_VERSION {
            return Err(SpectralError::Corrupted(format!("unknown format {}", header.format)));
        }
        if header.surface_hash != crate::content_hash(&header.surface) {
            return Err(SpectralError::Corrupted("surface hash mismatch".into()));
        }
        let text = std::fs::read_to_string(csv)?;
        let modes = parse_modes(&text)?;
        if modes.len() != header.mode_count {
            return Err(SpectralError::Corrupted(format!(
                "{} mode rows, header says {}",
                modes.len(),
                header.mode_count
            )));
        }
        let radial = match (&header.surface, header.params) {
            (SurfaceModel::Revolution { profile }, Some(params)) => {
                let mut wanted: BTreeMap<u32, (u32, u32, f64)> = BTreeMap::new();
                for m in &modes {
                    if let ModeKind::Revolution { m: am, k, radial, .. } = m.kind {
                        wanted.insert(radial, (am, k, m.lambda));
                    }
                }
                if wanted.len() != header.radial_count || wanted.keys().enumerate().any(|(i, k)| *k as usize != i) {
                    return Err(SpectralError::Corrupted("radial index set incomplete".into()));
                }
                let list: Vec<(u32, u32, f64)> = wanted.into_values().collect();
                regenerate(profile, params, &list)
            }
            _ => Vec::new(),
        };
        Ok(SpectrumTable {
            surface: header.surface,
            lambda_max: header.lambda_max,
            modes,
            radial,
            params: header.params,
            certificate: header.certificate,
        })
    }
}

fn regenerate(profile: &crate::surfaces::Profile, params: RevolutionParams, list: &[(u32, u32, f64)]) -> Vec<RadialMode> {
    let mut by_m: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, (m, _, _)) in list.iter().enumerate() {
        by_m.entry(*m).or_default().push(i);
    }
    let solved: Vec<Vec<(usize, RadialMode)>> = by_m
        .into_par_iter()
        .map(|(m, idx)| {
            let prob = RadialProblem::new(profile, m, params.radial);
            idx.into_iter()
                .map(|i| (i, prob.mode(list[i].1, list[i].2)))
                .collect()
        })
        .collect();
    let mut out: Vec<Option<RadialMode>> = vec![None; list.len()];
    for (i, rm) in solved.into_iter().flatten() {
        out[i] = Some(rm);
    }
    out.into_iter().map(|r| r.expect("every radial index regenerated")).collect()
}

fn parse_modes(text: &str) -> Result<Vec<EigenMode>> {
    let bad = |line: usize, what: &str| SpectralError::Corrupted(format!("mode row {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some("index,lambda,family,a,b,trig,radial,norm") {
        return Err(SpectralError::Corrupted("missing mode CSV header".into()));
    }
    let mut modes = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 || f[0].parse::<usize>().ok() != Some(i) {
            return Err(bad(i, "malformed"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i, "bad number"));
        let int = |s: &str| s.parse::<i64>().map_err(|_| bad(i, "bad integer"));
        let lambda = num(f[1])?;
        let (a, b, radial) = (int(f[3])?, int(f[4])?, int(f[6])?);
        let trig = match f[5] {
            "const" => Trig::Const,
            "cos" => Trig::Cos,
            "sin" => Trig::Sin,
            _ => return Err(bad(i, "bad trig tag")),
        };
        let kind = match f[2] {
            "torus" => ModeKind::Torus { p: a, q: b, trig },
            "sphere" => ModeKind::Sphere { l: a as u32, m: b as i32 },
            "revolution" => ModeKind::Revolution {
                m: a as u32,
                k: b as u32,
                trig,
                radial: radial as u32,
            },
            _ => return Err(bad(i, "bad family")),
        };
        modes.push(EigenMode {
            lambda,
            kind,
            norm: num(f[7])?,
        });
    }
    Ok(modes)
}
