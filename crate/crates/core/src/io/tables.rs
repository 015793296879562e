//! CSV tables. Reals are written with Rust's shortest round-trip formatting,
//! so reading a file back reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{ComponentDiagnostics, DiagnosticsRecord};
use crate::geom::Vec2;
use crate::metrics::AtomicMeasure;
use crate::point_vortex::PvTrajectory;
use crate::vpm::ParticleCloud;

pub const DIAGNOSTICS_HEADER: &str =
    "t,comp,Xx,Xy,Yx,Yy,w2_pv,w2_center,center_gap,vel_gap,m_R,m_2R,mu,w1_total,min_sep_cloud,min_sep_pv";
pub const CLOUD_HEADER: &str = "k,x,y,gamma,tag";
pub const MEASURE_HEADER: &str = "x,y,mass";
pub const TRAJECTORY_HEADER: &str = "t,vortex,x,y";
pub const INVARIANTS_HEADER: &str = "t,hamiltonian,px,py,angular,min_sep";

fn write_rows(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(',')).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let bad = |m: String| Error::Format { path: path.into(), message: m };
    let got = r.headers().map_err(|e| bad(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if got != header {
        return Err(bad(format!("expected header `{header}`, found `{got}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != width {
            return Err(bad(format!("row {} has {} fields, expected {width}", rows.len() + 1, rec.len())));
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

fn num<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Format { path: path.into(), message: format!("cannot parse `{s}`") })
}

fn f(v: f64) -> String {
    v.to_string()
}

/// One row per (record, component); global columns repeat on every row.
pub fn write_diagnostics_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let rows = records.iter().flat_map(|r| {
        r.components.iter().enumerate().map(move |(i, c)| {
            vec![
                f(r.t),
                i.to_string(),
                f(c.x.x),
                f(c.x.y),
                f(c.y.x),
                f(c.y.y),
                f(c.w2_pv),
                f(c.w2_center),
                f(c.center_gap),
                f(c.vel_gap),
                f(c.m_r),
                f(c.m_2r),
                f(c.mu),
                f(r.w1_total),
                f(r.min_sep_cloud),
                f(r.min_sep_pv),
            ]
        })
    });
    write_rows(path, DIAGNOSTICS_HEADER, rows)
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut out: Vec<DiagnosticsRecord> = Vec::new();
    for row in read_rows(path, DIAGNOSTICS_HEADER)? {
        let v: Vec<f64> = row.iter().enumerate().filter(|(k, _)| *k != 1).map(|(_, s)| num(path, s)).collect::<Result<_>>()?;
        let comp: usize = num(path, &row[1])?;
        let c = ComponentDiagnostics {
            x: Vec2::new(v[1], v[2]),
            y: Vec2::new(v[3], v[4]),
            w2_pv: v[5],
            w2_center: v[6],
            center_gap: v[7],
            vel_gap: v[8],
            m_r: v[9],
            m_2r: v[10],
            mu: v[11],
        };
        if comp == 0 {
            out.push(DiagnosticsRecord {
                t: v[0],
                components: Vec::new(),
                w1_total: v[12],
                min_sep_cloud: v[13],
                min_sep_pv: v[14],
            });
        }
        match out.last_mut() {
            Some(r) if r.components.len() == comp => r.components.push(c),
            _ => {
                return Err(Error::Format {
                    path: path.into(),
                    message: format!("component {comp} out of sequence"),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_cloud_csv(cloud: &ParticleCloud, path: &Path) -> Result<()> {
    let rows = (0..cloud.len()).map(|k| {
        let p = cloud.positions[k];
        vec![k.to_string(), f(p.x), f(p.y), f(cloud.circulations()[k]), cloud.tags()[k].to_string()]
    });
    write_rows(path, CLOUD_HEADER, rows)
}

/// Reads a cloud snapshot; pitch and blob radius are not stored and come
/// back unknown and zero.
pub fn read_cloud_csv(path: &Path) -> Result<ParticleCloud> {
    let rows = read_rows(path, CLOUD_HEADER)?;
    let mut pos = Vec::with_capacity(rows.len());
    let mut gam = Vec::with_capacity(rows.len());
    let mut tags = Vec::with_capacity(rows.len());
    for r in &rows {
        pos.push(Vec2::new(num(path, &r[1])?, num(path, &r[2])?));
        gam.push(num(path, &r[3])?);
        tags.push(num(path, &r[4])?);
    }
    ParticleCloud::new(pos, gam, tags, None, 0.0)
}

pub fn write_measure_csv(m: &AtomicMeasure, path: &Path) -> Result<()> {
    write_rows(path, MEASURE_HEADER, m.atoms().iter().map(|(p, w)| vec![f(p.x), f(p.y), f(*w)]))
}

pub fn read_measure_csv(path: &Path) -> Result<AtomicMeasure> {
    let atoms = read_rows(path, MEASURE_HEADER)?
        .iter()
        .map(|r| Ok((Vec2::new(num(path, &r[0])?, num(path, &r[1])?), num(path, &r[2])?)))
        .collect::<Result<Vec<_>>>()?;
    AtomicMeasure::new(atoms)
}

/// Positions per snapshot and the conserved-quantity series.
pub fn write_trajectory_csv(traj: &PvTrajectory, positions: &Path, invariants: &Path) -> Result<()> {
    let rows = traj.states.iter().flat_map(|s| {
        s.positions.iter().enumerate().map(move |(i, p)| vec![f(s.t), i.to_string(), f(p.x), f(p.y)])
    });
    write_rows(positions, TRAJECTORY_HEADER, rows)?;
    let rows = (0..traj.times.len()).map(|k| {
        vec![
            f(traj.times[k]),
            f(traj.hamiltonian[k]),
            f(traj.linear_impulse[k].x),
            f(traj.linear_impulse[k].y),
            f(traj.angular_impulse[k]),
            f(traj.min_separation[k]),
        ]
    });
    write_rows(invariants, INVARIANTS_HEADER, rows)
}
