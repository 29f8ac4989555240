//! On-disk formats.
//!
//! * Binary cache: `PQG1`, u32 version, u64 n, u64 m, (n+1) u64 offsets,
//!   2m u32 neighbors, all little-endian.
//! * Edge list: one `u v` per line, `u < v`, rows sorted, LF endings.
//! * Cover: header `PQCOVER v1`, then one clique per line as sorted ids.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::cover::CliqueCover;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;

pub const CACHE_MAGIC: &[u8; 4] = b"PQG1";
pub const CACHE_VERSION: u32 = 1;
pub const COVER_HEADER: &str = "PQCOVER v1";

pub fn encode_graph(g: &SparseGraph) -> Vec<u8> {
    let n = g.n();
    let adj = g.adjacency();
    let mut out = Vec::with_capacity(24 + 8 * (n + 1) + 4 * adj.len());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(g.m() as u64).to_le_bytes());
    for &o in g.offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &v in adj {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("graph cache is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_graph(bytes: &[u8]) -> Result<SparseGraph> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != CACHE_MAGIC {
        return Err(Error::Format("bad magic: not a graph cache".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Format(format!("unsupported cache version {version}")));
    }
    let n = r.u64()?;
    let m = r.u64()?;
    let expected = n
        .checked_add(1)
        .and_then(|k| k.checked_mul(8))
        .and_then(|a| m.checked_mul(8).and_then(|b| a.checked_add(b)))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if bytes.len() as u64 != 24 + expected {
        return Err(Error::Format(format!(
            "cache holds {} bytes, header implies {}",
            bytes.len(),
            24 + expected
        )));
    }
    let offsets = (0..=n)
        .map(|_| r.u64().map(|o| o as usize))
        .collect::<Result<Vec<_>>>()?;
    let neighbors = (0..2 * m).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    SparseGraph::from_csr(offsets, neighbors)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_graph_cache(g: &SparseGraph, path: &Path) -> Result<()> {
    write_atomic(path, &encode_graph(g))
}

pub fn read_graph_cache(path: &Path) -> Result<SparseGraph> {
    decode_graph(&fs::read(path)?)
}

pub fn edge_list(g: &SparseGraph) -> String {
    let mut s = String::with_capacity(g.m() * 12);
    for (u, v) in g.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

fn parse_id(tok: &str, line: usize) -> Result<u32> {
    tok.parse()
        .map_err(|_| Error::Format(format!("line {line}: {tok:?} is not a vertex id")))
}

/// Parses an edge list. `n` defaults to one more than the largest id.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<SparseGraph> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Format(format!("line {}: expected two ids", i + 1)));
        }
        edges.push((parse_id(toks[0], i + 1)?, parse_id(toks[1], i + 1)?));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) as usize + 1).max().unwrap_or(0));
    SparseGraph::from_edges(n, edges)
}

pub fn cover_text(cover: &CliqueCover) -> String {
    let mut s = String::from(COVER_HEADER);
    s.push('\n');
    for c in cover.cliques() {
        let row: Vec<String> = c.iter().map(u32::to_string).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_cover(text: &str) -> Result<Vec<Vec<u32>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == COVER_HEADER => {}
        _ => return Err(Error::Format(format!("missing {COVER_HEADER:?} header"))),
    }
    let mut cliques = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let c = line
            .split_whitespace()
            .map(|t| parse_id(t, i + 1))
            .collect::<Result<Vec<_>>>()?;
        if c.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(format!("line {}: clique ids must be strictly ascending", i + 1)));
        }
        cliques.push(c);
    }
    Ok(cliques)
}

/// Loads a cover file and validates it: every edge owned once and no
/// triangle formed by three distinct cliques. Any cover passing this check
/// yields a triangle-free G under every sign assignment.
pub fn load_clique_cover(path: &Path, n: Option<usize>) -> Result<CliqueCover> {
    let cliques = parse_cover(&fs::read_to_string(path)?)?;
    let n = n.unwrap_or_else(|| {
        cliques.iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0)
    });
    let cover = CliqueCover::new(n, cliques)?;
    cover.validate()?;
    Ok(cover)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartition::{assign_signs, build_g};
    use crate::cover::build_g1;
    use crate::geometry::Quadrangle;

    fn g_and_cover(q: u64) -> (SparseGraph, CliqueCover) {
        let cover = build_g1(&Quadrangle::new(q).unwrap()).unwrap();
        let g = build_g(&cover, &assign_signs(&cover, 42)).unwrap();
        (g, cover)
    }

    #[test]
    fn cache_round_trip_and_layout() {
        let (g, _) = g_and_cover(2);
        let bytes = encode_graph(&g);
        assert_eq!(&bytes[..4], b"PQG1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 15);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), g.m() as u64);
        assert_eq!(bytes.len(), 24 + 8 * 16 + 8 * g.m());
        let back = decode_graph(&bytes).unwrap();
        assert_eq!(back.offsets(), g.offsets());
        assert_eq!(back.adjacency(), g.adjacency());
        assert_eq!(encode_graph(&back), bytes);
    }

    #[test]
    fn cache_rejects_damage() {
        let (g, _) = g_and_cover(2);
        let bytes = encode_graph(&g);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_graph(&bad).is_err());
        assert!(decode_graph(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode_graph(&bad).is_err());
        // Break symmetry: redirect the first neighbor entry.
        let mut bad = bytes.clone();
        let first = 24 + 8 * 16;
        bad[first] ^= 1;
        assert!(decode_graph(&bad).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let (g, _) = g_and_cover(3);
        let text = edge_list(&g);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let back = parse_edge_list(&text, Some(g.n())).unwrap();
        assert_eq!(back.adjacency(), g.adjacency());
        assert_eq!(edge_list(&back), text);
        assert!(parse_edge_list("0 1 2\n", None).is_err());
        assert!(parse_edge_list("0 x\n", None).is_err());
        assert!(parse_edge_list("0 1\n1 0\n", None).is_err());
    }

    #[test]
    fn cover_round_trip_and_validation() {
        let (_, cover) = g_and_cover(2);
        let text = cover_text(&cover);
        assert!(text.starts_with("PQCOVER v1\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cover.txt");
        write_atomic(&path, text.as_bytes()).unwrap();
        let back = load_clique_cover(&path, None).unwrap();
        assert_eq!(cover_text(&back), text);

        let shared = dir.path().join("shared.txt");
        write_atomic(&shared, b"PQCOVER v1\n0 1 2\n1 2 3\n").unwrap();
        assert!(matches!(load_clique_cover(&shared, None), Err(Error::CoverViolation(_))));
        let tri = dir.path().join("tri.txt");
        write_atomic(&tri, b"PQCOVER v1\n0 1\n1 2\n0 2\n").unwrap();
        assert!(matches!(load_clique_cover(&tri, None), Err(Error::CoverViolation(_))));
        assert!(parse_cover("0 1\n").is_err());
        assert!(parse_cover("PQCOVER v1\n2 1\n").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
