//! Geometry cache files, the JSON report envelope, and the point-set
//! exchange format.
//!
//! A cache file is a commitment, not a shortcut: loading always rebuilds the
//! geometry from (p, h, r) and then checks the file byte for byte against
//! the rebuild.  Enumeration at the supported scales is cheap enough that
//! trusting stored incidence data would buy nothing and cost integrity.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{Geometry, PointSet};

pub const CACHE_MAGIC: [u8; 4] = *b"PGEO";
pub const CACHE_FORMAT_VERSION: u32 = 1;

pub fn cache_file_name(p: u64, h: u32, r: u32) -> String {
    format!("pg_{p}_{h}_{r}.pgeo")
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Serialize a geometry to the cache encoding.  Fixed-width little-endian
/// integers throughout so the bytes do not depend on the platform.
pub fn geometry_bytes(g: &Geometry) -> Vec<u8> {
    let f = g.field();
    let mut out = Vec::new();
    out.extend_from_slice(&CACHE_MAGIC);
    put_u32(&mut out, CACHE_FORMAT_VERSION);
    put_u64(&mut out, f.p());
    put_u32(&mut out, f.h());
    put_u32(&mut out, g.r());
    let modulus = f.modulus();
    put_u32(&mut out, modulus.len() as u32);
    for &c in modulus {
        put_u64(&mut out, c);
    }
    put_u32(&mut out, g.point_count());
    for id in 0..g.point_count() {
        for &c in g.point_coords(crate::geometry::PointId(id)) {
            put_u32(&mut out, c.index() as u32);
        }
    }
    put_u32(&mut out, g.hyperplane_count());
    for id in 0..g.hyperplane_count() {
        for &c in g.hyperplane_covector(crate::geometry::HyperplaneId(id)) {
            put_u32(&mut out, c.index() as u32);
        }
    }
    out
}

/// Write the cache file for `g` into `dir`, returning the path.
pub fn save_geometry(g: &Geometry, dir: &Path) -> Result<PathBuf> {
    let f = g.field();
    fs::create_dir_all(dir)?;
    let path = dir.join(cache_file_name(f.p(), f.h(), g.r()));
    let mut file = fs::File::create(&path)?;
    file.write_all(&geometry_bytes(g))?;
    Ok(path)
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::Malformed("cache file truncated".into()));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Load a cache file: parse the header, rebuild the geometry from scratch,
/// and fail with an integrity error unless the file matches the rebuild
/// exactly.
pub fn load_geometry(path: &Path) -> Result<Arc<Geometry>> {
    let buf = fs::read(path)?;
    let mut cur = Cursor { buf: &buf, at: 0 };
    if cur.take(4)? != CACHE_MAGIC {
        return Err(Error::Malformed("not a geometry cache file".into()));
    }
    let version = cur.u32()?;
    if version != CACHE_FORMAT_VERSION {
        return Err(Error::Malformed(format!(
            "unsupported cache format version {version}"
        )));
    }
    let p = cur.u64()?;
    let h = cur.u32()?;
    let r = cur.u32()?;
    let field = Arc::new(Field::build(p, h)?);
    let g = Arc::new(Geometry::build(field, r)?);
    let expected = geometry_bytes(&g);
    if buf != expected {
        return Err(Error::Integrity(
            "cache file does not match the rebuilt geometry".into(),
        ));
    }
    Ok(g)
}

/// CLI helper: take the cached geometry when a cache directory holds one,
/// otherwise build, writing the cache back when a directory was given.
pub fn load_or_build(p: u64, h: u32, r: u32, cache_dir: Option<&Path>) -> Result<Arc<Geometry>> {
    if let Some(dir) = cache_dir {
        let path = dir.join(cache_file_name(p, h, r));
        if path.exists() {
            let g = load_geometry(&path)?;
            let f = g.field();
            if f.p() != p || f.h() != h || g.r() != r {
                return Err(Error::Integrity(format!(
                    "cache file {} holds a different geometry",
                    path.display()
                )));
            }
            return Ok(g);
        }
    }
    let field = Arc::new(Field::build(p, h)?);
    let g = Arc::new(Geometry::build(field, r)?);
    if let Some(dir) = cache_dir {
        save_geometry(&g, dir)?;
    }
    Ok(g)
}

/// Envelope every command emits.  Numeric results ride as strings when they
/// can exceed machine width; timing is informational and excluded from any
/// reproducibility comparison.
#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub tool_version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub results: Vec<serde_json::Value>,
    pub timing_ms: BTreeMap<String, u64>,
}

impl ReportDocument {
    pub fn new(command: &str) -> ReportDocument {
        ReportDocument {
            tool_version: env!("CARGO_PKG_VERSION"),
            schema_version: 1,
            command: command.to_string(),
            parameters: BTreeMap::new(),
            results: Vec::new(),
            timing_ms: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn push<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let v = serde_json::to_value(value)
            .map_err(|e| Error::Malformed(format!("report serialization: {e}")))?;
        self.results.push(v);
        Ok(())
    }

    pub fn phase(&mut self, name: &str, ms: u64) {
        self.timing_ms.insert(name.to_string(), ms);
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Malformed(format!("report serialization: {e}")))
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Point-set exchange document: plain JSON, one integer string per point.
/// A point with normalized coordinates (c_0, ..., c_r) encodes as the
/// radix-q integer with c_0 as the most significant digit, each digit the
/// element's integer encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetFile {
    pub p: u64,
    pub h: u32,
    pub r: u32,
    pub points: Vec<String>,
}

fn point_encoding(g: &Geometry, p: crate::geometry::PointId) -> BigUint {
    let q = BigUint::from(g.field().order());
    let mut acc = BigUint::zero();
    for &c in g.point_coords(p) {
        acc = acc * &q + BigUint::from(c.index());
    }
    acc
}

pub fn point_set_to_file(g: &Geometry, s: &PointSet) -> PointSetFile {
    let f = g.field();
    PointSetFile {
        p: f.p(),
        h: f.h(),
        r: g.r(),
        points: s
            .members()
            .map(|p| point_encoding(g, p).to_string())
            .collect(),
    }
}

pub fn point_set_from_file(g: &Geometry, doc: &PointSetFile) -> Result<PointSet> {
    let f = g.field();
    if doc.p != f.p() || doc.h != f.h() || doc.r != g.r() {
        return Err(Error::GeometryMismatch(format!(
            "point set is over PG({}, {}^{}), geometry is PG({}, {}^{})",
            doc.r,
            doc.p,
            doc.h,
            g.r(),
            f.p(),
            f.h()
        )));
    }
    let q = f.order();
    let big_q = BigUint::from(q);
    let width = (g.r() + 1) as usize;
    let mut members = Vec::with_capacity(doc.points.len());
    for text in &doc.points {
        let mut value: BigUint = text
            .parse()
            .map_err(|_| Error::Malformed(format!("bad point encoding {text:?}")))?;
        let mut digits = vec![0u64; width];
        for slot in digits.iter_mut().rev() {
            let rem = (&value % &big_q)
                .to_u64()
                .expect("remainder below field order");
            *slot = rem;
            value /= &big_q;
        }
        if !value.is_zero() {
            return Err(Error::Malformed(format!(
                "point encoding {text:?} too wide for the geometry"
            )));
        }
        let coords: Vec<_> = digits
            .iter()
            .map(|&d| f.el(d))
            .collect::<Result<_>>()?;
        members.push(g.point_from_coords(&coords)?);
    }
    PointSet::from_members(g, &members)
}

pub fn save_point_set(g: &Geometry, s: &PointSet, path: &Path) -> Result<()> {
    let doc = point_set_to_file(g, s);
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Malformed(format!("point set serialization: {e}")))?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn load_point_set(g: &Geometry, path: &Path) -> Result<PointSet> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    let doc: PointSetFile = serde_json::from_str(&text)
        .map_err(|e| Error::Malformed(format!("point set file: {e}")))?;
    point_set_from_file(g, &doc)
}
