//! Edge-list text ingestion and the binary CSR cache.
//!
//! Cache layout, all little-endian: magic `FSA1`, node count as `u64`,
//! `N + 1` rowptr entries as `u32`, then `rowptr[N]` col entries as `u32`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{build_csr, CsrGraph, MAX_NODES};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"FSA1";

const NODES_HINT: &str = "# nodes:";

/// Load whitespace-separated `u v` pairs. Lines starting with `#` are
/// comments; blank lines are skipped. The node count is `1 + max id`,
/// raised to the value of a `# nodes: N` comment when one is present so
/// trailing isolated nodes survive a round trip.
pub fn load_edge_list(path: impl AsRef<Path>, make_undirected: bool) -> Result<CsrGraph> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut edges = Vec::new();
    let mut max_id: Option<u32> = None;
    let mut hint = 0usize;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(n) = trimmed.strip_prefix(NODES_HINT) {
                hint = n
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("bad node count hint: {e}")))?;
            }
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u32> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {what} node id")))?;
            let id: u64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("`{tok}` is not a node id")))?;
            if id >= MAX_NODES as u64 {
                return Err(parse_err(lineno, format!("node id {id} exceeds 32-bit range")));
            }
            Ok(id as u32)
        };
        let u = next_id("source")?;
        let v = next_id("target")?;
        if let Some(extra) = fields.next() {
            return Err(parse_err(lineno, format!("unexpected trailing field `{extra}`")));
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }

    let Some(max_id) = max_id else {
        return Err(Error::EmptyInput(path.to_path_buf()));
    };
    let n = (max_id as usize + 1).max(hint);
    build_csr(&edges, n, make_undirected)
}

/// Write every stored entry as a `u v` line, preceded by a node-count hint.
pub fn write_edge_list(graph: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{NODES_HINT} {}", graph.num_nodes())?;
    for (u, v) in graph.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csr_cache(graph: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&(graph.num_nodes() as u64).to_le_bytes())?;
    for &x in graph.rowptr().iter().chain(graph.col()) {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csr_cache(path: impl AsRef<Path>) -> Result<CsrGraph> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::BadCache("truncated header".into()))?;
    if &magic != CACHE_MAGIC {
        return Err(Error::BadCache(format!("magic {magic:?} != FSA1")));
    }
    let mut n_bytes = [0u8; 8];
    r.read_exact(&mut n_bytes)
        .map_err(|_| Error::BadCache("truncated header".into()))?;
    let n = u64::from_le_bytes(n_bytes);
    if n == 0 || n > MAX_NODES as u64 {
        return Err(Error::BadCache(format!("node count {n} out of range")));
    }
    let n = n as usize;
    let rowptr = read_u32s(&mut r, n + 1)?;
    let col = read_u32s(&mut r, rowptr[n] as usize)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::BadCache("trailing bytes after col".into()));
    }
    CsrGraph::from_parts(n, rowptr, col).map_err(|e| Error::BadCache(e.to_string()))
}

fn read_u32s(r: &mut impl Read, count: usize) -> Result<Vec<u32>> {
    let mut buf = vec![0u8; count * 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::BadCache(format!("expected {count} u32 values")))?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_power_law, gen_uniform};
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_simple_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_edge_list(write(&dir, "a.txt", "0 1\n1 2\n"), true).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_edge_list(write(&dir, "a.txt", "# comment\n\n0 1\n"), false).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_entries(), 1);
    }

    #[test]
    fn tabs_are_whitespace() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_edge_list(write(&dir, "a.txt", "0\t3\n"), false).unwrap();
        assert_eq!(g.num_nodes(), 4);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_edge_list(write(&dir, "a.txt", "0 1\n# c\n2 x\n"), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = load_edge_list(write(&dir, "b.txt", "0 1\n5\n"), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_edge_list(write(&dir, "c.txt", "0 1 2\n"), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = load_edge_list(write(&dir, "d.txt", "-1 2\n"), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_edge_list(write(&dir, "a.txt", "# only comments\n"), true).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for g in [
            gen_power_law(300, 6.0, 2.1, 3).unwrap(),
            gen_uniform(50, 4, 1).unwrap(),
        ] {
            let p = dir.path().join("g.txt");
            write_edge_list(&g, &p).unwrap();
            assert_eq!(load_edge_list(&p, true).unwrap(), g);
            assert_eq!(load_edge_list(&p, false).unwrap(), g);
        }
    }

    #[test]
    fn cache_round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_csr(&[(0, 1)], 3, true).unwrap();
        let p = dir.path().join("g.csr");
        write_csr_cache(&g, &p).unwrap();
        let bytes = fs::read(&p).unwrap();
        let mut expected = b"FSA1".to_vec();
        expected.extend(3u64.to_le_bytes());
        for x in [0u32, 1, 2, 2, 1, 0] {
            expected.extend(x.to_le_bytes());
        }
        assert_eq!(bytes, expected);
        assert_eq!(read_csr_cache(&p).unwrap(), g);
    }

    #[test]
    fn cache_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let g = gen_uniform(20, 3, 0).unwrap();
        let p = dir.path().join("g.csr");
        write_csr_cache(&g, &p).unwrap();
        let good = fs::read(&p).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        fs::write(&p, &bad).unwrap();
        assert!(matches!(read_csr_cache(&p), Err(Error::BadCache(_))));

        fs::write(&p, &good[..good.len() - 2]).unwrap();
        assert!(matches!(read_csr_cache(&p), Err(Error::BadCache(_))));

        let mut bad = good.clone();
        let last = bad.len() - 4;
        bad[last..].copy_from_slice(&999u32.to_le_bytes());
        fs::write(&p, &bad).unwrap();
        assert!(matches!(read_csr_cache(&p), Err(Error::BadCache(_))));
    }
}
