//! Plain-text forest format and legacy VTK export.
//!
//! Text format:
//!
//! ```text
//! nvb-mesh 1 <nv> <nt>
//! <x> <y>                              (nv lines, 17 significant digits)
//! <v0> <v1> <v2> <generation> <alive>  (nt lines, 0-based indices)
//! ```
//!
//! The triangle list is the whole bisection forest in creation order: the
//! initial elements first, then children in pairs. Reading replays the
//! bisections, so a file is accepted only if it is exactly what the bisection
//! history produces.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Mesh, Vertex};
use crate::error::{Error, Result};

const MAGIC: &str = "nvb-mesh";
const VERSION: u32 = 1;

struct RawTriangle {
    v: [usize; 3],
    generation: u32,
    alive: bool,
    line: usize,
}

pub fn write_text<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{MAGIC} {VERSION} {} {}",
        mesh.vertices().len(),
        mesh.triangles().len()
    )?;
    for v in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e}", v.x, v.y)?;
    }
    for t in mesh.triangles() {
        writeln!(
            w,
            "{} {} {} {} {}",
            t.v[0],
            t.v[1],
            t.v[2],
            t.generation,
            u8::from(t.alive)
        )?;
    }
    Ok(())
}

pub fn to_text(mesh: &Mesh) -> String {
    let mut buf = Vec::new();
    write_text(mesh, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("mesh text is ASCII")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (n, header) = next("header")?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(parse_err(n, format!("expected `{MAGIC}` header")));
    }
    let version: u32 = field(tok.next(), n, "version")?;
    if version != VERSION {
        return Err(parse_err(n, format!("unsupported version {version}")));
    }
    let nv: usize = field(tok.next(), n, "vertex count")?;
    let nt: usize = field(tok.next(), n, "triangle count")?;
    if tok.next().is_some() {
        return Err(parse_err(n, "trailing tokens in header"));
    }

    let mut last_line = n;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (n, l) = next(&format!("vertex {i}"))
            .map_err(|e| eof_at(e, last_line + 1))?;
        last_line = n;
        let mut tok = l.split_whitespace();
        let x: f64 = field(tok.next(), n, "x coordinate")?;
        let y: f64 = field(tok.next(), n, "y coordinate")?;
        if tok.next().is_some() {
            return Err(parse_err(n, "trailing tokens after vertex"));
        }
        vertices.push(Vertex::new(x, y));
    }
    let mut raw = Vec::with_capacity(nt);
    for i in 0..nt {
        let (n, l) = next(&format!("triangle {i}"))
            .map_err(|e| eof_at(e, last_line + 1))?;
        last_line = n;
        let mut tok = l.split_whitespace();
        let v = [
            field(tok.next(), n, "vertex index")?,
            field(tok.next(), n, "vertex index")?,
            field(tok.next(), n, "vertex index")?,
        ];
        let generation = field(tok.next(), n, "generation")?;
        let alive = match field::<u8>(tok.next(), n, "alive flag")? {
            0 => false,
            1 => true,
            other => return Err(parse_err(n, format!("alive flag must be 0 or 1, got {other}"))),
        };
        if tok.next().is_some() {
            return Err(parse_err(n, "trailing tokens after triangle"));
        }
        for &k in &v {
            if k >= nv {
                return Err(parse_err(n, format!("vertex index {k} out of range")));
            }
        }
        raw.push(RawTriangle {
            v,
            generation,
            alive,
            line: n,
        });
    }
    rebuild(vertices, raw)
}

fn eof_at(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { line: 0, message } => Error::Parse { line, message },
        other => other,
    }
}

fn rebuild(vertices: Vec<Vertex>, raw: Vec<RawTriangle>) -> Result<Mesh> {
    let roots = raw.iter().take_while(|t| t.generation == 0).count();
    if roots == 0 {
        return Err(parse_err(raw.first().map_or(1, |t| t.line), "no initial triangles"));
    }
    let initial_vertices = raw[..roots]
        .iter()
        .flat_map(|t| t.v)
        .max()
        .map_or(0, |m| m + 1);
    let mut mesh = Mesh::new(
        vertices[..initial_vertices].to_vec(),
        raw[..roots].iter().map(|t| t.v).collect(),
    )
    .map_err(|e| parse_err(raw[0].line, format!("invalid initial mesh: {e}")))?;

    let mut index: HashMap<[usize; 3], usize> =
        raw[..roots].iter().enumerate().map(|(i, t)| (t.v, i)).collect();
    for (i, t) in raw[..roots].iter().enumerate() {
        if mesh.triangles()[i].v != t.v {
            return Err(parse_err(t.line, "initial triangle is not counter-clockwise"));
        }
    }

    let rest = &raw[roots..];
    if !rest.len().is_multiple_of(2) {
        return Err(parse_err(
            rest.last().map_or(1, |t| t.line),
            "children must come in pairs",
        ));
    }
    for pair in rest.chunks(2) {
        let (c1, c2) = (&pair[0], &pair[1]);
        if c1.v[0] != c2.v[1] || c1.v[2] != c2.v[2] {
            return Err(parse_err(c1.line, "triangle pair is not a bisection"));
        }
        let parent_v = [c1.v[1], c2.v[0], c1.v[0]];
        let &parent = index
            .get(&parent_v)
            .ok_or_else(|| parse_err(c1.line, "no parent for this bisection"))?;
        let (a, b) = mesh
            .bisect(parent)
            .map_err(|e| parse_err(c1.line, e.to_string()))?;
        for (id, t) in [(a, c1), (b, c2)] {
            if mesh.triangles()[id].v != t.v {
                return Err(parse_err(t.line, "bisection does not reproduce this triangle"));
            }
            index.insert(t.v, id);
        }
        let m = c1.v[2];
        if m >= mesh.vertices().len() || mesh.vertices()[m] != vertices[m] {
            return Err(parse_err(c1.line, "midpoint vertex does not match the bisection"));
        }
    }
    if mesh.vertices().len() != vertices.len() {
        return Err(parse_err(1, "vertex list has entries not produced by bisection"));
    }
    for (i, t) in raw.iter().enumerate() {
        let got = &mesh.triangles()[i];
        if got.generation != t.generation {
            return Err(parse_err(t.line, "generation does not match the forest"));
        }
        if got.alive != t.alive {
            return Err(parse_err(t.line, "alive flag does not match the forest"));
        }
    }
    Ok(mesh)
}

pub fn from_text(s: &str) -> Result<Mesh> {
    read_text(s.as_bytes())
}

/// Legacy ASCII VTK (UNSTRUCTURED_GRID, cell type 5) of the leaf set, with
/// generation and area as cell data.
pub fn write_vtk<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    let leaves = mesh.leaf_ids();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "gradmesh leaf triangles")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices().len())?;
    for v in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e} 0", v.x, v.y)?;
    }
    writeln!(w, "CELLS {} {}", leaves.len(), 4 * leaves.len())?;
    for &t in &leaves {
        let v = mesh.triangles()[t].v;
        writeln!(w, "3 {} {} {}", v[0], v[1], v[2])?;
    }
    writeln!(w, "CELL_TYPES {}", leaves.len())?;
    for _ in &leaves {
        writeln!(w, "5")?;
    }
    writeln!(w, "CELL_DATA {}", leaves.len())?;
    writeln!(w, "SCALARS generation int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &t in &leaves {
        writeln!(w, "{}", mesh.triangles()[t].generation)?;
    }
    writeln!(w, "SCALARS area double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &t in &leaves {
        writeln!(w, "{:.16e}", mesh.area(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{initial_mesh, DomainPreset, MarkSet};

    fn refined_l_shape() -> Mesh {
        let mut m = initial_mesh(&DomainPreset::LShape).unwrap();
        for _ in 0..6 {
            let marks: MarkSet = m
                .leaves()
                .filter(|&t| m.triangles()[t].v.contains(&0))
                .collect();
            m.refine(&marks).unwrap();
            m.complete().unwrap();
        }
        m
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let m = refined_l_shape();
        let first = to_text(&m);
        let back = from_text(&first).unwrap();
        assert_eq!(back.leaf_count(), m.leaf_count());
        assert_eq!(to_text(&back), first);
    }

    #[test]
    fn truncated_file_names_the_line() {
        let text = to_text(&refined_l_shape());
        let keep: Vec<&str> = text.lines().take(20).collect();
        let err = from_text(&keep.join("\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 21),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_names_the_line() {
        let text = to_text(&initial_mesh(&DomainPreset::Square).unwrap());
        let broken = text.replacen("1.0000000000000000e0", "one", 1);
        match from_text(&broken).unwrap_err() {
            Error::Parse { line, message } => {
                assert!((2..=5).contains(&line), "{line}");
                assert!(message.contains("one"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tampered_forest_is_rejected() {
        let text = to_text(&refined_l_shape());
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let last = lines.len() - 1;
        let mut tok: Vec<String> = lines[last].split(' ').map(str::to_owned).collect();
        tok[3] = "99".into();
        lines[last] = tok.join(" ");
        assert!(matches!(
            from_text(&lines.join("\n")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn vtk_lists_leaves_only() {
        let m = refined_l_shape();
        let mut buf = Vec::new();
        write_vtk(&m, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains(&format!("CELLS {} {}", m.leaf_count(), 4 * m.leaf_count())));
        assert!(s.contains(&format!("CELL_TYPES {}", m.leaf_count())));
        let types: Vec<&str> = s
            .lines()
            .skip_while(|l| !l.starts_with("CELL_TYPES"))
            .skip(1)
            .take_while(|l| !l.starts_with("CELL_DATA"))
            .collect();
        assert_eq!(types.len(), m.leaf_count());
        assert!(types.iter().all(|l| *l == "5"));
    }
}
