//! On-disk formats.
//!
//! A case directory holds `case.json` with the case metadata and a 12-column node table,
//! either `nodes.csv` (header plus comma separated rows) or `nodes.bin`. The binary table
//! is a 16-byte header (magic, version, column count as little-endian `u32`) followed by
//! the columns one after the other as little-endian `f64`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::reynolds_from_speed;
use crate::error::{Error, Result};
use crate::naca::{CaseSpec, Designation};
use crate::post::SimulationCloud;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Text,
    Binary,
}

impl DataFormat {
    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Text => "csv",
            DataFormat::Binary => "bin",
        }
    }
}

impl std::str::FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(DataFormat::Text),
            "binary" => Ok(DataFormat::Binary),
            _ => Err(Error::Parameter(format!("unknown format {s:?}, expected text or binary"))),
        }
    }
}

pub const CASE_FILE: &str = "case.json";
pub const NODES_STEM: &str = "nodes";
pub const NODE_MAGIC: &[u8; 8] = b"AIRFKIT\0";
pub const NODE_VERSION: u32 = 1;
pub const NODE_COLUMNS: [&str; 12] = ["x", "y", "u_in_x", "u_in_y", "sdf", "n_x", "n_y", "u_x", "u_y", "p", "nu_t", "is_surface"];
/// Allowed relative mismatch between the stored Reynolds number and the inlet speed.
pub const REYNOLDS_TOLERANCE: f64 = 1e-3;

/// Contents of `case.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub name: String,
    pub series: u8,
    pub digits: Vec<f64>,
    pub u_inf: f64,
    pub aoa_deg: f64,
    pub reynolds: f64,
}

impl CaseRecord {
    pub fn from_spec(spec: &CaseSpec) -> Self {
        CaseRecord {
            name: spec.name.clone(),
            series: spec.airfoil.series(),
            digits: spec.airfoil.digits(),
            u_inf: spec.u_inf,
            aoa_deg: spec.aoa_deg(),
            reynolds: spec.reynolds,
        }
    }

    pub fn to_spec(&self) -> Result<CaseSpec> {
        let airfoil = Designation::from_digits(self.series, &self.digits)?;
        if !(self.u_inf.is_finite() && self.u_inf > 0.0 && self.aoa_deg.is_finite()) {
            return Err(Error::Data(format!("case {}: invalid inflow", self.name)));
        }
        let expected = reynolds_from_speed(self.u_inf);
        if ((self.reynolds - expected) / expected).abs() > REYNOLDS_TOLERANCE {
            return Err(Error::Data(format!(
                "case {}: Reynolds number {} inconsistent with inlet speed {} (expected {expected})",
                self.name, self.reynolds, self.u_inf
            )));
        }
        let mut spec = CaseSpec::new(self.name.clone(), airfoil, self.u_inf, self.aoa_deg.to_radians());
        spec.reynolds = self.reynolds;
        Ok(spec)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn columns(cloud: &SimulationCloud) -> Vec<Vec<f64>> {
    let n = cloud.len();
    let mut cols = vec![Vec::with_capacity(n); NODE_COLUMNS.len()];
    for i in 0..n {
        let row = [
            cloud.positions[i].x,
            cloud.positions[i].y,
            cloud.inlet_velocity[i].x,
            cloud.inlet_velocity[i].y,
            cloud.sdf[i],
            cloud.normals[i].x,
            cloud.normals[i].y,
            cloud.velocity[i].x,
            cloud.velocity[i].y,
            cloud.pressure[i],
            cloud.nu_t[i],
            if cloud.surface[i] { 1.0 } else { 0.0 },
        ];
        for (c, v) in row.into_iter().enumerate() {
            cols[c].push(v);
        }
    }
    cols
}

fn from_columns(cols: &[Vec<f64>]) -> Result<SimulationCloud> {
    let n = cols[0].len();
    let v2 = |a: usize, b: usize| -> Vec<Vec2> { (0..n).map(|i| Vec2::new(cols[a][i], cols[b][i])).collect() };
    let mut surface = Vec::with_capacity(n);
    for (i, &s) in cols[11].iter().enumerate() {
        surface.push(match s {
            0.0 => false,
            1.0 => true,
            _ => return Err(Error::Data(format!("row {i}, column is_surface: value {s} is not 0 or 1"))),
        });
    }
    for (c, col) in cols.iter().enumerate() {
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {i}, column {}: non-finite value", NODE_COLUMNS[c])));
        }
    }
    Ok(SimulationCloud {
        positions: v2(0, 1),
        inlet_velocity: v2(2, 3),
        sdf: cols[4].clone(),
        normals: v2(5, 6),
        velocity: v2(7, 8),
        pressure: cols[9].clone(),
        nu_t: cols[10].clone(),
        surface,
    })
}

fn nodes_path(dir: &Path, format: DataFormat) -> PathBuf {
    dir.join(format!("{NODES_STEM}.{}", format.extension()))
}

fn write_nodes(path: &Path, cols: &[Vec<f64>], format: DataFormat) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    match format {
        DataFormat::Text => {
            writeln!(w, "{}", NODE_COLUMNS.join(","))?;
            for i in 0..cols[0].len() {
                for (c, col) in cols.iter().enumerate() {
                    if c > 0 {
                        w.write_all(b",")?;
                    }
                    if c == 11 {
                        write!(w, "{}", col[i] as u8)?;
                    } else {
                        // Display prints the shortest representation that parses back exactly.
                        write!(w, "{}", col[i])?;
                    }
                }
                w.write_all(b"\n")?;
            }
        }
        DataFormat::Binary => {
            w.write_all(NODE_MAGIC)?;
            w.write_all(&NODE_VERSION.to_le_bytes())?;
            w.write_all(&(cols.len() as u32).to_le_bytes())?;
            for col in cols {
                for v in col {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()
}

fn parse_text(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let err = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| err("empty file".into()))?.split(',').map(str::trim).collect();
    let mut order = Vec::with_capacity(NODE_COLUMNS.len());
    for name in NODE_COLUMNS {
        let pos = header.iter().position(|h| *h == name).ok_or_else(|| err(format!("missing column {name}")))?;
        order.push(pos);
    }
    if header.len() != NODE_COLUMNS.len() {
        return Err(err(format!("expected {} columns, found {}", NODE_COLUMNS.len(), header.len())));
    }
    let mut cols = vec![Vec::new(); NODE_COLUMNS.len()];
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(err(format!("row {row}: expected {} fields, found {}", header.len(), fields.len())));
        }
        for (c, &pos) in order.iter().enumerate() {
            let v: f64 = fields[pos]
                .trim()
                .parse()
                .map_err(|_| err(format!("row {row}, column {}: cannot parse {:?}", NODE_COLUMNS[c], fields[pos])))?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let err = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    if bytes.len() < 16 || &bytes[..8] != NODE_MAGIC {
        return Err(err("not a node table".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != NODE_VERSION {
        return Err(err(format!("unsupported version {version}, expected {NODE_VERSION}")));
    }
    let ncol = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if ncol != NODE_COLUMNS.len() {
        return Err(err(format!("expected {} columns, found {ncol}", NODE_COLUMNS.len())));
    }
    let body = &bytes[16..];
    if body.len() % (8 * ncol) != 0 {
        return Err(err("payload length is not a whole number of rows".into()));
    }
    let n = body.len() / (8 * ncol);
    let values: Vec<f64> = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    Ok((0..ncol).map(|c| values[c * n..(c + 1) * n].to_vec()).collect())
}

/// Write `case.json` and the node table. Any node table in the other format is removed so
/// the directory stays unambiguous.
pub fn write_case(dir: &Path, cloud: &SimulationCloud, spec: &CaseSpec, format: DataFormat) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::Data("refusing to write a case without nodes".into()));
    }
    cloud.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join(CASE_FILE), &CaseRecord::from_spec(spec))?;
    let path = nodes_path(dir, format);
    write_nodes(&path, &columns(cloud), format).map_err(|e| Error::io(&path, e))?;
    let other = nodes_path(dir, if format == DataFormat::Text { DataFormat::Binary } else { DataFormat::Text });
    if other.exists() {
        fs::remove_file(&other).map_err(|e| Error::io(&other, e))?;
    }
    Ok(())
}

/// Read a node table file, text or binary by extension.
pub fn read_node_table(path: &Path) -> Result<SimulationCloud> {
    let cols = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_text(path, &fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?,
        Some("bin") => parse_binary(path, &fs::read(path).map_err(|e| Error::io(path, e))?)?,
        _ => return Err(Error::Data(format!("{}: node tables end in .csv or .bin", path.display()))),
    };
    if cols[0].is_empty() {
        return Err(Error::Data(format!("{}: node table has no rows", path.display())));
    }
    let cloud = from_columns(&cols)?;
    cloud.validate().map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Ok(cloud)
}

/// Path of the node table inside a case directory.
pub fn find_node_table(dir: &Path) -> Result<PathBuf> {
    let text = nodes_path(dir, DataFormat::Text);
    let bin = nodes_path(dir, DataFormat::Binary);
    match (text.exists(), bin.exists()) {
        (true, true) => Err(Error::Data(format!("{}: both text and binary node tables present", dir.display()))),
        (true, false) => Ok(text),
        (false, true) => Ok(bin),
        (false, false) => Err(Error::Data(format!("{}: no node table", dir.display()))),
    }
}

/// Node table of a case directory without the metadata.
pub fn read_nodes(dir: &Path) -> Result<SimulationCloud> {
    read_node_table(&find_node_table(dir)?)
}

pub fn read_case(dir: &Path) -> Result<(SimulationCloud, CaseSpec)> {
    let record: CaseRecord = read_json(&dir.join(CASE_FILE))?;
    let spec = record.to_spec()?;
    let cloud = read_nodes(dir)?;
    let u_in = spec.inlet_velocity();
    if let Some(i) = cloud.inlet_velocity.iter().position(|v| (*v - u_in).norm() > 1e-9 * spec.u_inf) {
        return Err(Error::Data(format!("{}: row {i}, columns u_in_x/u_in_y disagree with case.json", dir.display())));
    }
    Ok((cloud, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (SimulationCloud, CaseSpec) {
        let spec = CaseSpec::new("t", Designation::Four { m: 2.0, p: 4.0, xx: 12.0 }, 40.0, 0.05);
        let u = spec.inlet_velocity();
        let cloud = SimulationCloud {
            positions: vec![Vec2::new(0.1, 0.2), Vec2::new(1.0, 0.0), Vec2::new(0.3, -1.0 / 3.0)],
            inlet_velocity: vec![u; 3],
            sdf: vec![0.1, 0.0, 0.30000000000000004],
            normals: vec![Vec2::default(), Vec2::new(1.0, 0.0), Vec2::default()],
            velocity: vec![Vec2::new(39.9, 1.0e-7), Vec2::default(), Vec2::new(std::f64::consts::PI, -2.5)],
            pressure: vec![-12.5, 800.0, 1e-300],
            nu_t: vec![1e-4, 0.0, 3e-5],
            surface: vec![false, true, false],
        };
        (cloud, spec)
    }

    #[test]
    fn round_trip_both_formats() {
        let (cloud, spec) = fixture();
        let dir = tempfile::tempdir().unwrap();
        write_case(dir.path(), &cloud, &spec, DataFormat::Text).unwrap();
        let (a, s) = read_case(dir.path()).unwrap();
        assert_eq!(a, cloud);
        assert_eq!(s.name, spec.name);
        write_case(dir.path(), &a, &s, DataFormat::Binary).unwrap();
        assert!(!dir.path().join("nodes.csv").exists());
        let (b, _) = read_case(dir.path()).unwrap();
        assert_eq!(b, cloud);
    }

    #[test]
    fn nan_pressure_names_row() {
        let (cloud, spec) = fixture();
        let dir = tempfile::tempdir().unwrap();
        write_case(dir.path(), &cloud, &spec, DataFormat::Text).unwrap();
        let path = dir.path().join("nodes.csv");
        let text = fs::read_to_string(&path).unwrap().replace("800", "NaN");
        fs::write(&path, text).unwrap();
        let msg = read_case(dir.path()).unwrap_err().to_string();
        assert!(msg.contains("row 1") && msg.contains("column p"), "{msg}");
    }

    #[test]
    fn surface_sdf_rejected() {
        let (cloud, spec) = fixture();
        let dir = tempfile::tempdir().unwrap();
        write_case(dir.path(), &cloud, &spec, DataFormat::Text).unwrap();
        let path = dir.path().join("nodes.csv");
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut f: Vec<String> = lines[2].split(',').map(String::from).collect();
        f[4] = "0.01".into();
        lines[2] = f.join(",");
        fs::write(&path, lines.join("\n")).unwrap();
        let msg = read_case(dir.path()).unwrap_err().to_string();
        assert!(msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn missing_column_and_bad_version() {
        let (cloud, spec) = fixture();
        let dir = tempfile::tempdir().unwrap();
        write_case(dir.path(), &cloud, &spec, DataFormat::Text).unwrap();
        let path = dir.path().join("nodes.csv");
        let text = fs::read_to_string(&path).unwrap().replacen("nu_t", "nut", 1);
        fs::write(&path, text).unwrap();
        assert!(read_case(dir.path()).unwrap_err().to_string().contains("missing column nu_t"));

        write_case(dir.path(), &cloud, &spec, DataFormat::Binary).unwrap();
        let path = dir.path().join("nodes.bin");
        let mut bytes = fs::read(&path).unwrap();
        bytes[8] = 2;
        fs::write(&path, bytes).unwrap();
        assert!(read_case(dir.path()).unwrap_err().to_string().contains("version 2"));
    }

    #[test]
    fn empty_cloud_and_reynolds() {
        let (cloud, spec) = fixture();
        let empty = SimulationCloud { positions: vec![], inlet_velocity: vec![], sdf: vec![], normals: vec![], velocity: vec![], pressure: vec![], nu_t: vec![], surface: vec![] };
        let dir = tempfile::tempdir().unwrap();
        assert!(write_case(dir.path(), &empty, &spec, DataFormat::Text).is_err());
        let mut bad = spec.clone();
        bad.reynolds *= 1.002;
        write_case(dir.path(), &cloud, &bad, DataFormat::Text).unwrap();
        assert!(read_case(dir.path()).unwrap_err().to_string().contains("Reynolds"));
        bad.reynolds = spec.reynolds * 1.0005;
        write_case(dir.path(), &cloud, &bad, DataFormat::Text).unwrap();
        assert!(read_case(dir.path()).is_ok());
    }
}
