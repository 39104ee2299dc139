//! Text and binary dumps shared with the plotting tools.
//!
//! Readers skip leading `#` lines, which carry run metadata.

use std::io::{BufRead, Read, Write};

use fracfem_core::{SymMatrix, TriangleMesh};

use crate::HarnessError;

pub const MESH_MAGIC: &str = "frac-mesh";
pub const MESH_VERSION: &str = "v1";
pub const STIFFNESS_MAGIC: &[u8; 8] = b"FRACSTIF";
pub const CSV_HEADER: &str = "h,ndof,energy_error,iters,wall_seconds";

/// 17 significant digits, enough to round trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_metadata<W: Write>(w: &mut W, pairs: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn write_mesh<W: Write>(w: &mut W, mesh: &TriangleMesh) -> std::io::Result<()> {
    writeln!(
        w,
        "{MESH_MAGIC} {MESH_VERSION} {} {}",
        mesh.num_vertices(),
        mesh.num_triangles()
    )?;
    for (k, p) in mesh.vertices().iter().enumerate() {
        writeln!(
            w,
            "{} {} {}",
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            u8::from(mesh.is_boundary(k))
        )?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Line source that tracks line numbers and skips the metadata block.
struct Lines<R> {
    inner: std::io::Lines<R>,
    n: usize,
    header: bool,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Lines {
            inner: r.lines(),
            n: 0,
            header: true,
        }
    }

    fn err(&self, msg: impl Into<String>) -> HarnessError {
        HarnessError::Parse {
            line: self.n,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<String, HarnessError> {
        loop {
            self.n += 1;
            let line = match self.inner.next() {
                Some(l) => l?,
                None => return Err(self.err("unexpected end of file")),
            };
            if self.header && line.starts_with('#') {
                continue;
            }
            self.header = false;
            return Ok(line);
        }
    }

    fn fields<const N: usize>(&mut self) -> Result<[String; N], HarnessError> {
        let line = self.next_line()?;
        let parts: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        parts
            .try_into()
            .map_err(|_| self.err(format!("expected {N} fields: {line}")))
    }

    fn parse<T: std::str::FromStr>(&self, v: &str) -> Result<T, HarnessError> {
        v.parse()
            .map_err(|_| self.err(format!("cannot parse `{v}`")))
    }

    fn maybe_line(&mut self) -> Result<Option<String>, HarnessError> {
        match self.inner.next() {
            Some(l) => {
                self.n += 1;
                Ok(Some(l?))
            }
            None => Ok(None),
        }
    }

    fn at_end(&mut self) -> Result<bool, HarnessError> {
        for l in self.inner.by_ref() {
            self.n += 1;
            if !l?.trim().is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn read_mesh_from<R: BufRead>(l: &mut Lines<R>) -> Result<TriangleMesh, HarnessError> {
    let [magic, version, nv, nt] = l.fields::<4>()?;
    if magic != MESH_MAGIC || version != MESH_VERSION {
        return Err(l.err(format!("not a {MESH_MAGIC} {MESH_VERSION} file")));
    }
    let (nv, nt): (usize, usize) = (l.parse(&nv)?, l.parse(&nt)?);
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let [x, y, b] = l.fields::<3>()?;
        vertices.push([l.parse(&x)?, l.parse(&y)?]);
        flags.push(match b.as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(l.err(format!("boundary flag `{b}`"))),
        });
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let [i, j, k] = l.fields::<3>()?;
        triangles.push([l.parse(&i)?, l.parse(&j)?, l.parse(&k)?]);
    }
    let mesh = TriangleMesh::from_parts(vertices, triangles)
        .map_err(|e| l.err(format!("invalid mesh: {e}")))?;
    if mesh.boundary_flags() != flags.as_slice() {
        return Err(l.err("boundary flags disagree with the triangulation"));
    }
    Ok(mesh)
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<TriangleMesh, HarnessError> {
    let mut l = Lines::new(r);
    let mesh = read_mesh_from(&mut l)?;
    if !l.at_end()? {
        return Err(l.err("trailing data"));
    }
    Ok(mesh)
}

/// A solution dump: one value and one contact flag per mesh vertex.
#[derive(Clone, Debug)]
pub struct FieldDump {
    pub mesh: TriangleMesh,
    pub values: Vec<f64>,
    pub contact: Vec<bool>,
}

pub fn write_field<W: Write>(
    w: &mut W,
    mesh: &TriangleMesh,
    values: &[f64],
    contact: &[bool],
) -> Result<(), HarnessError> {
    let n = mesh.num_vertices();
    if values.len() != n || contact.len() != n {
        return Err(HarnessError::Format(format!(
            "field of length {}/{} on a mesh with {n} vertices",
            values.len(),
            contact.len()
        )));
    }
    write_mesh(w, mesh)?;
    for v in values {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    for c in contact {
        writeln!(w, "{}", u8::from(*c))?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: R) -> Result<FieldDump, HarnessError> {
    let mut l = Lines::new(r);
    let mesh = read_mesh_from(&mut l)?;
    let n = mesh.num_vertices();
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let [v] = l.fields::<1>()?;
        values.push(l.parse(&v)?);
    }
    let mut contact = Vec::with_capacity(n);
    for _ in 0..n {
        let [c] = l.fields::<1>()?;
        contact.push(match c.as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(l.err(format!("contact flag `{c}`"))),
        });
    }
    if !l.at_end()? {
        return Err(l.err("trailing data"));
    }
    Ok(FieldDump {
        mesh,
        values,
        contact,
    })
}

/// Magic, `u32` dimension, `u32` zero, then the lower triangle row by row,
/// all little endian.
pub fn write_stiffness<W: Write>(w: &mut W, a: &SymMatrix) -> Result<(), HarnessError> {
    let n = u32::try_from(a.dim())
        .map_err(|_| HarnessError::Format(format!("dimension {} exceeds u32", a.dim())))?;
    w.write_all(STIFFNESS_MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * a.dim());
    for i in 0..a.dim() {
        buf.clear();
        for j in 0..=i {
            buf.extend_from_slice(&a.get(i, j).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_stiffness<R: Read>(mut r: R) -> Result<SymMatrix, HarnessError> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..8] != STIFFNESS_MAGIC {
        return Err(HarnessError::Format("bad stiffness magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes([head[k], head[k + 1], head[k + 2], head[k + 3]]);
    let n = word(8) as usize;
    if word(12) != 0 {
        return Err(HarnessError::Format(
            "reserved header word is not zero".into(),
        ));
    }
    let mut a = SymMatrix::zeros(n);
    let mut row = vec![0u8; 8 * n];
    for i in 0..n {
        let bytes = &mut row[..8 * (i + 1)];
        r.read_exact(bytes)?;
        for (j, c) in bytes.chunks_exact(8).enumerate() {
            let mut b = [0u8; 8];
            b.copy_from_slice(c);
            a.set(i, j, f64::from_le_bytes(b));
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(HarnessError::Format(
            "trailing bytes after the matrix".into(),
        ));
    }
    Ok(a)
}

/// One line of `convergence.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub h: f64,
    pub ndof: usize,
    pub energy_error: f64,
    pub iters: usize,
    pub wall_seconds: f64,
}

pub fn write_csv<W: Write>(w: &mut W, rows: &[Row]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.h),
            r.ndof,
            fmt_f64(r.energy_error),
            r.iters,
            fmt_f64(r.wall_seconds)
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<Row>, HarnessError> {
    let mut l = Lines::new(r);
    let head = l.next_line()?;
    if head.trim() != CSV_HEADER {
        return Err(l.err(format!("header `{head}`")));
    }
    let mut rows = Vec::new();
    while let Some(line) = l.maybe_line()? {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(l.err(format!("expected 5 columns: {line}")));
        }
        rows.push(Row {
            h: l.parse(f[0])?,
            ndof: l.parse(f[1])?,
            energy_error: l.parse(f[2])?,
            iters: l.parse(f[3])?,
            wall_seconds: l.parse(f[4])?,
        });
    }
    Ok(rows)
}
