//! ASCII mesh format.
//!
//! ```text
//! V E F
//! x y z            (V lines)
//! i j k            (F lines, 0-based)
//! loop n i1 ... in (one per boundary component, optional)
//! edgelen m        (optional; followed by m lines "i j length")
//! logscale         (optional; followed by V lines, one value each)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::MetricSurface;
use crate::scalar::Real;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t.split_whitespace().collect()));
        }
        None
    }

    fn expect(&mut self, what: &str, last_line: usize) -> Result<(usize, Vec<&'a str>)> {
        self.next_content()
            .ok_or_else(|| parse_err(last_line, format!("unexpected end of input, expected {}", what)))
    }
}

fn num<T: Real>(tok: &str, line: usize) -> Result<T> {
    tok.parse::<f64>()
        .map(T::lit)
        .map_err(|_| parse_err(line, format!("not a number: {:?}", tok)))
}

fn idx(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("not an index: {:?}", tok)))
}

pub fn parse_mesh<T: Real>(text: &str) -> Result<MetricSurface<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (hl, header) = lines.expect("header \"V E F\"", 0)?;
    if header.len() != 3 {
        return Err(parse_err(hl, "header must be \"V E F\""));
    }
    let nv = idx(header[0], hl)?;
    let ne = idx(header[1], hl)?;
    let nf = idx(header[2], hl)?;
    let mut last = hl;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, tok) = lines.expect("vertex coordinates", last)?;
        if tok.len() != 3 {
            return Err(parse_err(l, "vertex line needs three coordinates"));
        }
        vertices.push([num(tok[0], l)?, num(tok[1], l)?, num(tok[2], l)?]);
        last = l;
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, tok) = lines.expect("face indices", last)?;
        if tok.len() != 3 {
            return Err(parse_err(l, "face line needs three indices"));
        }
        let f = [idx(tok[0], l)?, idx(tok[1], l)?, idx(tok[2], l)?];
        if f.iter().any(|&i| i >= nv) {
            return Err(parse_err(l, "face index out of range"));
        }
        faces.push(f);
        last = l;
    }
    let mut loops = Vec::new();
    let mut lengths: Option<HashMap<(usize, usize), T>> = None;
    let mut log_scale: Option<Vec<T>> = None;
    while let Some((l, tok)) = lines.next_content() {
        last = l;
        match tok[0] {
            "loop" => {
                if tok.len() < 2 {
                    return Err(parse_err(l, "loop line needs a count"));
                }
                let n = idx(tok[1], l)?;
                if tok.len() != n + 2 {
                    return Err(parse_err(l, format!("loop declares {} vertices, lists {}", n, tok.len() - 2)));
                }
                let lp = tok[2..].iter().map(|t| idx(t, l)).collect::<Result<Vec<_>>>()?;
                if lp.iter().any(|&i| i >= nv) {
                    return Err(parse_err(l, "loop index out of range"));
                }
                loops.push(lp);
            }
            "edgelen" => {
                if tok.len() != 2 {
                    return Err(parse_err(l, "edgelen line needs a count"));
                }
                let m = idx(tok[1], l)?;
                let mut map = HashMap::with_capacity(m);
                for _ in 0..m {
                    let (l2, t2) = lines.expect("edge length", last)?;
                    if t2.len() != 3 {
                        return Err(parse_err(l2, "edge length line is \"i j length\""));
                    }
                    let (i, j) = (idx(t2[0], l2)?, idx(t2[1], l2)?);
                    map.insert((i.min(j), i.max(j)), num(t2[2], l2)?);
                    last = l2;
                }
                lengths = Some(map);
            }
            "logscale" => {
                let mut u = Vec::with_capacity(nv);
                for _ in 0..nv {
                    let (l2, t2) = lines.expect("log scale value", last)?;
                    if t2.len() != 1 {
                        return Err(parse_err(l2, "log scale line holds one value"));
                    }
                    u.push(num(t2[0], l2)?);
                    last = l2;
                }
                log_scale = Some(u);
            }
            other => return Err(parse_err(l, format!("unknown section {:?}", other))),
        }
    }
    let loops = if loops.is_empty() { None } else { Some(loops) };
    let mut surface = match lengths {
        Some(map) => MetricSurface::with_edge_lengths(vertices, faces, loops, &map)?,
        None => MetricSurface::from_coordinates(vertices, faces, loops)?,
    };
    if surface.edges().len() != ne {
        return Err(parse_err(
            hl,
            format!("header declares {} edges, faces define {}", ne, surface.edges().len()),
        ));
    }
    if let Some(u) = log_scale {
        surface = surface.with_log_scale(&u)?;
    }
    let _ = last;
    Ok(surface)
}

pub fn read_mesh<T: Real>(path: impl AsRef<Path>) -> Result<MetricSurface<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Serializes a surface; edge lengths are always written so intrinsic
/// metrics round-trip, and the log scale is written when nonzero.
pub fn format_mesh<T: Real>(s: &MetricSurface<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", s.vertex_count(), s.edges().len(), s.triangles().len());
    for p in s.vertices() {
        let _ = writeln!(out, "{:e} {:e} {:e}", p[0].to_f(), p[1].to_f(), p[2].to_f());
    }
    for t in s.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for lp in s.boundary_loops() {
        let _ = write!(out, "loop {}", lp.len());
        for v in lp {
            let _ = write!(out, " {}", v);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "edgelen {}", s.edges().len());
    for (e, l) in s.edges().iter().zip(s.edge_lengths()) {
        let _ = writeln!(out, "{} {} {:e}", e[0], e[1], l.to_f());
    }
    if s.log_scale().iter().any(|u| *u != T::zero()) {
        out.push_str("logscale\n");
        for u in s.log_scale() {
            let _ = writeln!(out, "{:e}", u.to_f());
        }
    }
    out
}

pub fn write_mesh<T: Real>(s: &MetricSurface<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_mesh(s))?;
    Ok(())
}
