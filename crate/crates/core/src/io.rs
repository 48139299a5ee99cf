//! Demonstration files and structured config loading.
//!
//! A demonstration file is line-delimited JSON. The first record is a header:
//!
//! ```text
//! {"format":"modal-lift/demo","version":1,"dt":0.01,"interface":"sippuff1d","task_label":"pick-place"}
//! ```
//!
//! and every following line is one timestep with the fields
//! `t, px, py, pz, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz, gripper, mask,
//! obstacle_dist`. `mask` is a 7-character bitstring in `vx vy vz wx wy wz g`
//! order. An infinite `obstacle_dist` (no obstacle in the scene) is written as
//! `null`. Floats are written in shortest round-trip form, so a write/read
//! cycle is bit-exact.
//!
//! Scenes and pipeline configuration use TOML.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3, Vector6};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_demonstration, Demonstration, InterfaceRegistry, ModeMask, Pose, TrajectoryPoint,
};

pub const FORMAT_NAME: &str = "modal-lift/demo";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    dt: f64,
    interface: String,
    task_label: String,
}

/// Flat on-disk form of a [`TrajectoryPoint`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub t: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
    pub gripper: f64,
    pub mask: ModeMask,
    #[serde(with = "distance")]
    pub obstacle_dist: f64,
}

mod distance {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &f64, s: S) -> Result<S::Ok, S::Error> {
        if d.is_infinite() && *d > 0.0 {
            s.serialize_none()
        } else {
            s.serialize_f64(*d)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl From<TrajectoryPoint> for PointRecord {
    fn from(p: TrajectoryPoint) -> Self {
        let q = p.pose.orientation.quaternion();
        Self {
            t: p.t,
            px: p.pose.position.x,
            py: p.pose.position.y,
            pz: p.pose.position.z,
            qw: q.w,
            qx: q.i,
            qy: q.j,
            qz: q.k,
            vx: p.vel[0],
            vy: p.vel[1],
            vz: p.vel[2],
            wx: p.vel[3],
            wy: p.vel[4],
            wz: p.vel[5],
            gripper: p.gripper,
            mask: p.mask,
            obstacle_dist: p.obstacle_dist,
        }
    }
}

impl From<PointRecord> for TrajectoryPoint {
    fn from(r: PointRecord) -> Self {
        // Stored bits are kept as-is; unit norm is checked by validation.
        let orientation = UnitQuaternion::new_unchecked(Quaternion::new(r.qw, r.qx, r.qy, r.qz));
        Self {
            t: r.t,
            pose: Pose::new(Vector3::new(r.px, r.py, r.pz), orientation),
            vel: Vector6::new(r.vx, r.vy, r.vz, r.wx, r.wy, r.wz),
            gripper: r.gripper,
            mask: r.mask,
            obstacle_dist: r.obstacle_dist,
        }
    }
}

pub fn write_demo_to<W: Write>(demo: &Demonstration, mut w: W) -> Result<()> {
    let header = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        dt: demo.dt,
        interface: demo.interface.clone(),
        task_label: demo.task_label.clone(),
    };
    let io_err = |e| Error::io("<writer>", e);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n").map_err(io_err)?;
    for p in &demo.points {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_demo(demo: &Demonstration, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_demo_to(demo, BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses a demonstration without checking interface invariants.
pub fn read_demo_from<R: BufRead>(r: R) -> Result<Demonstration> {
    let mut lines = r.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing header record".into(),
                })
            }
            Some((i, line)) => {
                let line = line.map_err(|e| Error::io("<reader>", e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_header(&line, i + 1)?;
            }
        }
    };

    let mut points = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: TrajectoryPoint = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: strip_position(&e.to_string()),
        })?;
        points.push(p);
    }
    Ok(Demonstration::new(points, header.dt, header.interface, header.task_label))
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: lineno,
        message: strip_position(&e.to_string()),
    })?;
    if value.get("format").and_then(|f| f.as_str()) != Some(FORMAT_NAME) {
        return Err(Error::Parse {
            line: lineno,
            message: format!("header record must have format `{FORMAT_NAME}`"),
        });
    }
    if let Some(v) = value.get("version").and_then(|v| v.as_u64()) {
        if v != u64::from(FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                found: v as u32,
                expected: FORMAT_VERSION,
            });
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Parse {
        line: lineno,
        message: e.to_string(),
    })
}

// serde_json appends "at line 1 column N"; within a single record the
// file line number is the useful one.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn read_demo(path: impl AsRef<Path>) -> Result<Demonstration> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_demo_from(BufReader::new(file))
}

/// Reads a demonstration and validates it against its recorded interface.
pub fn load_demo(path: impl AsRef<Path>, interfaces: &InterfaceRegistry) -> Result<Demonstration> {
    let demo = read_demo(path)?;
    let spec = interfaces.get(&demo.interface)?;
    let report = validate_demonstration(&demo, spec);
    if report.is_empty() {
        Ok(demo)
    } else {
        Err(Error::Invalid(report))
    }
}

pub fn load_toml<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_toml(&text)
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
            .unwrap_or(0);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dim, DimSet, InterfaceSpec};

    fn sample() -> Demonstration {
        let vx = DimSet::single(Dim::Vx);
        let points = (0..4)
            .map(|i| {
                let mut p = TrajectoryPoint::at_rest(
                    i as f64 * 0.01,
                    Pose::from_translation(0.1 * i as f64 / 3.0, 0.0, 0.2),
                    vx,
                );
                p.vel[0] = 1.0 / 3.0;
                p.obstacle_dist = if i == 2 { f64::INFINITY } else { 0.123456789012345678 };
                p
            })
            .collect();
        Demonstration::new(points, 0.01, "sippuff1d", "unit")
    }

    #[test]
    fn write_then_read_is_bit_exact() {
        let demo = sample();
        let mut buf = Vec::new();
        write_demo_to(&demo, &mut buf).unwrap();
        let back = read_demo_from(buf.as_slice()).unwrap();
        assert_eq!(back, demo);
    }

    #[test]
    fn two_hot_mask_is_parsed_then_rejected_by_validation() {
        let mut demo = sample();
        demo.points[1].mask = "1100000".parse().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_demo(&demo, &path).unwrap();
        assert!(read_demo(&path).is_ok());
        match load_demo(&path, &InterfaceRegistry::default()) {
            Err(Error::Invalid(r)) => assert!(r.to_string().contains("point 1: mask exceeds l")),
            other => panic!("expected validation failure, got {other:?}"),
        }
        let _ = InterfaceSpec::sip_puff();
    }

    #[test]
    fn missing_column_names_the_column_and_line() {
        let text = format!(
            "{{\"format\":\"{FORMAT_NAME}\",\"version\":1,\"dt\":0.01,\"interface\":\"sippuff1d\",\"task_label\":\"x\"}}\n\
             {{\"t\":0,\"px\":0,\"py\":0,\"pz\":0,\"qw\":1,\"qx\":0,\"qy\":0,\"qz\":0,\"vx\":0,\"vy\":0,\"vz\":0,\"wx\":0,\"wy\":0,\"wz\":0,\"gripper\":1,\"mask\":\"1000000\"}}\n"
        );
        match read_demo_from(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("obstacle_dist"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_reported() {
        let text = format!(
            "{{\"format\":\"{FORMAT_NAME}\",\"version\":7,\"dt\":0.01,\"interface\":\"x\",\"task_label\":\"x\"}}\n"
        );
        assert!(matches!(
            read_demo_from(text.as_bytes()),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn bad_mask_is_a_parse_error() {
        let mut buf = Vec::new();
        write_demo_to(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\"1000000\"", "\"10x0000\"", 1);
        assert!(matches!(read_demo_from(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
