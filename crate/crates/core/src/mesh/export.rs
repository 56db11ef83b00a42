//! Writing meshes to disk: node, cell and patch tables plus a hexahedral block dictionary.
//!
//! Text tables are CSV with a header row. Binary tables start with an 8-byte magic, a
//! `u32` version and a `u32` column count, followed by little-endian rows: `f64` for
//! node coordinates and `u64` for indices.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::cgrid::StructuredMesh;
use super::grading::Direction;
use crate::error::{Error, Result};
use crate::io::DataFormat;

pub const MESH_MAGIC: &[u8; 8] = b"AIRFMSH\0";
pub const MESH_VERSION: u32 = 1;

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn binary_header(w: &mut impl Write, columns: u32) -> std::io::Result<()> {
    w.write_all(MESH_MAGIC)?;
    w.write_all(&MESH_VERSION.to_le_bytes())?;
    w.write_all(&columns.to_le_bytes())
}

fn write_table(path: &Path, format: DataFormat, header: &[&str], rows: impl Iterator<Item = Vec<Cell>>) -> Result<()> {
    let mut w = create(path)?;
    let res = (|| -> std::io::Result<()> {
        match format {
            DataFormat::Text => {
                writeln!(w, "{}", header.join(","))?;
                for row in rows {
                    let line: Vec<String> = row.iter().map(Cell::to_text).collect();
                    writeln!(w, "{}", line.join(","))?;
                }
            }
            DataFormat::Binary => {
                binary_header(&mut w, header.len() as u32)?;
                for row in rows {
                    for c in row {
                        match c {
                            Cell::F(v) => w.write_all(&v.to_le_bytes())?,
                            Cell::U(v) => w.write_all(&(v as u64).to_le_bytes())?,
                        }
                    }
                }
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

enum Cell {
    F(f64),
    U(usize),
}

impl Cell {
    fn to_text(&self) -> String {
        match self {
            // `{:e}` round-trips f64 exactly.
            Cell::F(v) => format!("{v:e}"),
            Cell::U(v) => v.to_string(),
        }
    }
}

/// Write `nodes`, `cells` and `patches` tables into `dir`.
pub fn write_mesh(mesh: &StructuredMesh, dir: &Path, format: DataFormat) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = format.extension();
    write_table(
        &dir.join(format!("nodes.{ext}")),
        format,
        &["x", "y"],
        mesh.nodes.iter().map(|p| vec![Cell::F(p.x), Cell::F(p.y)]),
    )?;
    write_table(
        &dir.join(format!("cells.{ext}")),
        format,
        &["n0", "n1", "n2", "n3", "block"],
        mesh.quads.iter().zip(&mesh.block_map).map(|(q, b)| {
            let mut row: Vec<Cell> = q.iter().map(|&i| Cell::U(i)).collect();
            row.push(Cell::U(*b as usize));
            row
        }),
    )?;
    // Patch ids follow the sorted patch names.
    let names: Vec<&String> = mesh.patches.keys().collect();
    write_table(
        &dir.join(format!("patches.{ext}")),
        format,
        &["patch", "a", "b"],
        names.iter().enumerate().flat_map(|(k, name)| {
            mesh.patches[*name].iter().map(move |e| vec![Cell::U(k), Cell::U(e[0]), Cell::U(e[1])])
        }),
    )?;
    let names_path = dir.join("patch_names.txt");
    let list: String = names.iter().map(|n| format!("{n}\n")).collect();
    fs::write(&names_path, list).map_err(|e| Error::io(&names_path, e))
}

/// Total expansion ratio (last cell over first cell) of a template edge when walked in
/// its stated vertex order.
fn edge_expansion(mesh: &StructuredMesh, key: &str) -> f64 {
    let (g, d) = mesh.layout.edges[key];
    let total = g.ratio.powi(g.n_cells as i32 - 1);
    match d {
        Direction::Forward => total,
        Direction::Backward => 1.0 / total,
    }
}

/// Render the block layout in the dictionary syntax of common hexahedral block meshers:
/// vertices extruded over a unit depth, blocks with cell counts and per-edge grading,
/// curved edges and boundary patches. Wall-normal grid lines are written straight.
pub fn block_mesh_dict(mesh: &StructuredMesh) -> String {
    let l = &mesh.layout;
    let mut s = String::new();
    let v = &l.vertices;
    s.push_str("FoamFile\n{\n    version 2.0;\n    format ascii;\n    class dictionary;\n    object blockMeshDict;\n}\n\n");
    s.push_str("convertToMeters 1;\n\nvertices\n(\n");
    for z in [0.0, 1.0] {
        for (k, p) in v.iter().enumerate() {
            let _ = writeln!(s, "    ({:.12e} {:.12e} {z:.1}) // {}", p.x, p.y, k + if z > 0.0 { 12 } else { 0 });
        }
    }
    s.push_str(");\n\nblocks\n(\n");

    let ratio = |k: &str| edge_expansion(mesh, k);
    let radial = ratio("10-3");
    // (id, i-edge vertices a->b, j-edge at i=0 from a, cells i, grading along i, grading along j)
    struct B {
        id: usize,
        quad: [usize; 4],
        ni: usize,
        gi: [f64; 2],
        gj: [f64; 2],
        mirrored: bool,
    }
    let nn = l.n_normal;
    let blocks = [
        B { id: 0, quad: [10, 1, 0, 7], ni: l.n_wake, gi: [ratio("10-1"), ratio("7-0")], gj: [radial, ratio("1-0")], mirrored: true },
        B { id: 1, quad: [10, 1, 2, 3], ni: l.n_wake, gi: [ratio("10-1"), ratio("3-2")], gj: [radial, ratio("1-2")], mirrored: false },
        B { id: 2, quad: [11, 10, 3, 4], ni: l.n_aft, gi: [ratio("11-10"), ratio("4-3")], gj: [radial, radial], mirrored: false },
        B { id: 3, quad: [8, 11, 4, 5], ni: l.n_front_upper, gi: [ratio("8-11"), ratio("5-4")], gj: [radial, radial], mirrored: false },
        B { id: 4, quad: [8, 9, 6, 5], ni: l.n_front_lower, gi: [ratio("8-9"), ratio("5-6")], gj: [radial, radial], mirrored: true },
        B { id: 5, quad: [9, 10, 7, 6], ni: l.n_aft, gi: [ratio("9-10"), ratio("6-7")], gj: [radial, radial], mirrored: true },
    ];
    for b in &blocks {
        // quad = [i0j0, i1j0, i1j1, i0j1]; mirrored blocks put the back face first.
        let [a, bb, c, d] = b.quad;
        let (lo, hi) = if b.mirrored { (12, 0) } else { (0, 12) };
        let _ = writeln!(
            s,
            "    hex ({} {} {} {} {} {} {} {}) ({} {} 1) edgeGrading ({:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} 1 1 1 1) // block {}",
            a + lo, bb + lo, c + lo, d + lo, a + hi, bb + hi, c + hi, d + hi,
            b.ni, nn,
            b.gi[0], b.gi[1], b.gi[1], b.gi[0],
            b.gj[0], b.gj[1], b.gj[1], b.gj[0],
            b.id
        );
    }
    s.push_str(");\n\nedges\n(\n");
    let r = v[5].dist(v[8]);
    for (a, b, sign) in [(5usize, 4usize, 1.0), (5, 6, -1.0)] {
        let mid = v[8] + crate::geom::Vec2::from_angle(std::f64::consts::PI - sign * 0.25 * std::f64::consts::PI) * r;
        for z in [0usize, 12] {
            let _ = writeln!(s, "    arc {} {} ({:.12e} {:.12e} {:.1})", a + z, b + z, mid.x, mid.y, if z > 0 { 1.0 } else { 0.0 });
        }
    }
    // Airfoil sides as polylines through the wall nodes.
    let loop_ids = &mesh.airfoil_loop;
    let (nu, _) = mesh.airfoil_side_node_counts();
    let upper: Vec<usize> = loop_ids[..nu].iter().rev().copied().collect(); // LE -> TE
    let mut lower: Vec<usize> = vec![loop_ids[nu - 1]];
    lower.extend_from_slice(&loop_ids[nu..]);
    lower.push(loop_ids[0]);
    let split_u = l.n_front_upper;
    let split_l = l.n_front_lower;
    let segments = [
        (8usize, 11usize, &upper[..=split_u]),
        (11, 10, &upper[split_u..]),
        (8, 9, &lower[..=split_l]),
        (9, 10, &lower[split_l..]),
    ];
    for (a, b, ids) in segments {
        for z in [0usize, 12] {
            let _ = write!(s, "    polyLine {} {} (", a + z, b + z);
            for &id in &ids[1..ids.len() - 1] {
                let p = mesh.nodes[id];
                let _ = write!(s, " ({:.12e} {:.12e} {:.1})", p.x, p.y, if z > 0 { 1.0 } else { 0.0 });
            }
            s.push_str(" )\n");
        }
    }
    s.push_str(");\n\nboundary\n(\n");
    let face = |a: usize, b: usize| format!("({} {} {} {})", a, b, b + 12, a + 12);
    let _ = writeln!(
        s,
        "    airfoil\n    {{\n        type wall;\n        faces\n        (\n            {}\n            {}\n            {}\n            {}\n        );\n    }}",
        face(8, 11), face(11, 10), face(9, 8), face(10, 9)
    );
    let _ = writeln!(
        s,
        "    freestream\n    {{\n        type patch;\n        faces\n        (\n            {}\n            {}\n            {}\n            {}\n            {}\n            {}\n            {}\n            {}\n        );\n    }}",
        face(0, 1), face(1, 2), face(2, 3), face(3, 4), face(4, 5), face(5, 6), face(6, 7), face(7, 0)
    );
    s.push_str("    frontAndBack\n    {\n        type empty;\n        faces ();\n    }\n);\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble_cgrid, MeshParams};
    use crate::naca::{generate_airfoil, AirfoilParams, Naca4Params, Spacing};

    fn small_mesh() -> StructuredMesh {
        let g = generate_airfoil(&AirfoilParams::Four(Naca4Params::new(0.02, 0.4, 0.12).unwrap()), 128, Spacing::Cosine, true).unwrap();
        let p = MeshParams {
            domain_extent: 10.0,
            wall_first_cell: 1e-3,
            wall_ratio: 1.3,
            le_first_width: 5e-3,
            le_ratio: 1.2,
            aft_cells: 8,
            ..MeshParams::default()
        };
        assemble_cgrid(&g, &p, 0.1).unwrap()
    }

    #[test]
    fn text_and_binary_sizes() {
        let m = small_mesh();
        let dir = tempfile::tempdir().unwrap();
        write_mesh(&m, dir.path(), DataFormat::Text).unwrap();
        write_mesh(&m, dir.path(), DataFormat::Binary).unwrap();
        let nodes = fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
        assert_eq!(nodes.lines().count(), m.nodes.len() + 1);
        let first: Vec<f64> = nodes.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(first, vec![m.nodes[0].x, m.nodes[0].y]);
        let bin = fs::read(dir.path().join("cells.bin")).unwrap();
        assert_eq!(&bin[..8], MESH_MAGIC);
        assert_eq!(bin.len(), 16 + m.quads.len() * 5 * 8);
    }

    #[test]
    fn dictionary_lists_six_blocks() {
        let m = small_mesh();
        let d = block_mesh_dict(&m);
        assert_eq!(d.matches("    hex (").count(), 6);
        assert_eq!(d.matches("arc ").count(), 4);
        assert_eq!(d.matches("polyLine").count(), 8);
        assert!(d.contains("type wall"));
    }
}
