//! The line-oriented `pgx` text format.
//!
//! ```text
//! pgx 1
//! n 2
//! group 2x2
//! vertices v0 v1 v2
//! law standard
//! ```
//!
//! Explicit-law files additionally carry `fiber`, `proj`, `q`, `iota` and
//! `act` sections; standard-law files omit all tables and regenerate them on
//! load. `#` starts a comment; tokens are whitespace-separated.

use std::collections::BTreeMap;

use crate::core::{CellDecl, ExplicitData, LawKind, Polygroupoid, Vertex};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::perm::Perm;

pub const FORMAT_VERSION: u32 = 1;

/// Serialize a structure into the pgx text form.
pub fn serialize(pg: &Polygroupoid) -> String {
    let mut out = String::new();
    out.push_str(&format!("pgx {FORMAT_VERSION}\n"));
    out.push_str(&format!("n {}\n", pg.n()));
    out.push_str(&format!("group {}\n", pg.group()));
    out.push_str(&format!("vertices {}\n", pg.vertex_names().join(" ")));
    match pg.law_kind() {
        LawKind::Standard => out.push_str("law standard\n"),
        LawKind::Explicit => {
            out.push_str("law explicit\n");
            let t = pg.explicit_tables().expect("explicit law");
            for ((level, spine), ids) in &t.by_fiber {
                let names: Vec<&str> = spine.iter().map(|&v| pg.vertex_name(v)).collect();
                let id_strs: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                out.push_str(&format!(
                    "fiber {level} {} : {}\n",
                    names.join(" "),
                    id_strs.join(" ")
                ));
            }
            for (id, row) in t.proj.iter().enumerate() {
                if let Some(row) = row {
                    let strs: Vec<String> = row.iter().map(|i| i.to_string()).collect();
                    out.push_str(&format!("proj {id} : {}\n", strs.join(" ")));
                }
            }
            for row in &t.q {
                let strs: Vec<String> = row.iter().map(|i| i.to_string()).collect();
                out.push_str(&format!("q {}\n", strs.join(" ")));
            }
            if let Some(iota) = &t.iota {
                for (perm, map) in iota {
                    for (src, dst) in map {
                        out.push_str(&format!("iota {perm} {src} -> {dst}\n"));
                    }
                }
            }
            if let Some(action) = &t.action {
                for (&(g_rank, src), &dst) in action {
                    let g = pg.group().unrank(g_rank);
                    out.push_str(&format!("act {g} {src} -> {dst}\n"));
                }
            }
        }
    }
    out
}

struct Lines<'a> {
    tokens: Vec<(usize, Vec<&'a str>)>,
}

fn tokenize(text: &str) -> Lines<'_> {
    let mut tokens = Vec::new();
    for (ix, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !toks.is_empty() {
            tokens.push((ix + 1, toks));
        }
    }
    Lines { tokens }
}

/// Parse a pgx document.
pub fn parse(text: &str) -> Result<Polygroupoid> {
    let lines = tokenize(text);
    let mut it = lines.tokens.into_iter().peekable();

    let (line, toks) = it.next().ok_or_else(|| Error::parse(0, "empty document"))?;
    if toks.len() != 2 || toks[0] != "pgx" {
        return Err(Error::parse(line, "expected header `pgx 1`"));
    }
    let version: u32 = toks[1]
        .parse()
        .map_err(|_| Error::parse(line, "bad format version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            line,
            format!("unsupported format version {version}, expected {FORMAT_VERSION}"),
        ));
    }

    let (line, toks) = it.next().ok_or_else(|| Error::parse(line, "missing `n`"))?;
    if toks.len() != 2 || toks[0] != "n" {
        return Err(Error::parse(line, "expected `n <arity>`"));
    }
    let n: usize = toks[1]
        .parse()
        .map_err(|_| Error::parse(line, "bad arity"))?;

    let (line, toks) = it
        .next()
        .ok_or_else(|| Error::parse(line, "missing `group`"))?;
    if toks.len() != 2 || toks[0] != "group" {
        return Err(Error::parse(line, "expected `group <spec>`"));
    }
    let group = GroupSpec::parse(toks[1]).map_err(|e| Error::parse(line, e.to_string()))?;

    let (line, toks) = it
        .next()
        .ok_or_else(|| Error::parse(line, "missing `vertices`"))?;
    if toks.len() < 2 || toks[0] != "vertices" {
        return Err(Error::parse(line, "expected `vertices <name>...`"));
    }
    let vertex_names: Vec<String> = toks[1..].iter().map(|s| s.to_string()).collect();
    let vertex_of = |line: usize, name: &str| -> Result<Vertex> {
        vertex_names
            .iter()
            .position(|x| x == name)
            .map(|i| Vertex(i as u32))
            .ok_or_else(|| Error::parse(line, format!("unknown vertex {name:?}")))
    };

    let (line, toks) = it
        .next()
        .ok_or_else(|| Error::parse(line, "missing `law`"))?;
    if toks.len() != 2 || toks[0] != "law" {
        return Err(Error::parse(line, "expected `law standard|explicit`"));
    }
    let law = toks[1];
    match law {
        "standard" => {
            if let Some((line, toks)) = it.next() {
                return Err(Error::parse(
                    line,
                    format!("standard-law files carry no `{}` section", toks[0]),
                ));
            }
            Polygroupoid::new_standard(n, group, vertex_names)
                .map_err(|e| Error::parse(line, e.to_string()))
        }
        "explicit" => {
            let mut decls: Vec<CellDecl> = Vec::new();
            let mut decl_line: Vec<usize> = Vec::new();
            let mut proj_lines: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
            let mut q_rows: Vec<Vec<usize>> = Vec::new();
            let mut iota: BTreeMap<Perm, BTreeMap<usize, usize>> = BTreeMap::new();
            let mut action: BTreeMap<(GroupElement, usize), usize> = BTreeMap::new();
            let mut have_iota = false;
            let mut have_action = false;
            let mut ids: BTreeMap<usize, usize> = BTreeMap::new(); // file id -> decl index

            let parse_id = |line: usize, tok: &str| -> Result<usize> {
                tok.parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("bad cell id {tok:?}")))
            };
            let known = |ids: &BTreeMap<usize, usize>, line: usize, id: usize| -> Result<usize> {
                ids.get(&id)
                    .copied()
                    .ok_or_else(|| Error::parse(line, format!("dangling cell id {id}")))
            };

            for (line, toks) in it {
                match toks[0] {
                    "fiber" => {
                        // fiber <level> <spine...> : <ids...>
                        let sep = toks
                            .iter()
                            .position(|&t| t == ":")
                            .ok_or_else(|| Error::parse(line, "fiber line needs `:`"))?;
                        if sep < 3 || sep + 1 >= toks.len() {
                            return Err(Error::parse(line, "malformed fiber line"));
                        }
                        let level: usize = toks[1]
                            .parse()
                            .map_err(|_| Error::parse(line, "bad fiber level"))?;
                        let spine = toks[2..sep]
                            .iter()
                            .map(|t| vertex_of(line, t))
                            .collect::<Result<Vec<Vertex>>>()?;
                        if spine.len() != level {
                            return Err(Error::parse(
                                line,
                                format!("spine has {} vertices, level is {level}", spine.len()),
                            ));
                        }
                        for tok in &toks[sep + 1..] {
                            let id = parse_id(line, tok)?;
                            if ids.contains_key(&id) {
                                return Err(Error::parse(
                                    line,
                                    format!("cell id {id} declared twice"),
                                ));
                            }
                            ids.insert(id, decls.len());
                            decl_line.push(line);
                            decls.push(CellDecl {
                                level,
                                spine: spine.clone(),
                                proj: None,
                            });
                        }
                    }
                    "proj" => {
                        // proj <id> : <ids...>
                        if toks.len() < 4 || toks[2] != ":" {
                            return Err(Error::parse(line, "expected `proj <id> : <ids...>`"));
                        }
                        let id = known(&ids, line, parse_id(line, toks[1])?)?;
                        let row = toks[3..]
                            .iter()
                            .map(|t| known(&ids, line, parse_id(line, t)?))
                            .collect::<Result<Vec<usize>>>()?;
                        if proj_lines.insert(id, (line, row)).is_some() {
                            return Err(Error::parse(line, "two projection rows for one cell"));
                        }
                    }
                    "q" => {
                        let row = toks[1..]
                            .iter()
                            .map(|t| known(&ids, line, parse_id(line, t)?))
                            .collect::<Result<Vec<usize>>>()?;
                        if row.len() != n + 1 {
                            return Err(Error::parse(
                                line,
                                format!("q row needs {} cells, got {}", n + 1, row.len()),
                            ));
                        }
                        q_rows.push(row);
                    }
                    "iota" => {
                        // iota <perm> <id> -> <id>
                        if toks.len() != 5 || toks[3] != "->" {
                            return Err(Error::parse(line, "expected `iota <perm> <id> -> <id>`"));
                        }
                        let images = toks[1]
                            .split(',')
                            .map(|t| {
                                t.parse::<usize>()
                                    .ok()
                                    .and_then(|x| x.checked_sub(1))
                                    .ok_or_else(|| Error::parse(line, "bad permutation"))
                            })
                            .collect::<Result<Vec<usize>>>()?;
                        let perm =
                            Perm::new(images).map_err(|e| Error::parse(line, e.to_string()))?;
                        if perm.len() != n {
                            return Err(Error::parse(line, "permutation has the wrong size"));
                        }
                        let src = known(&ids, line, parse_id(line, toks[2])?)?;
                        let dst = known(&ids, line, parse_id(line, toks[4])?)?;
                        have_iota = true;
                        if iota.entry(perm).or_default().insert(src, dst).is_some() {
                            return Err(Error::parse(line, "duplicate iota entry"));
                        }
                    }
                    "act" => {
                        if toks.len() != 5 || toks[3] != "->" {
                            return Err(Error::parse(line, "expected `act <g> <id> -> <id>`"));
                        }
                        let g = GroupElement::parse(&group, toks[1])
                            .map_err(|e| Error::parse(line, e.to_string()))?;
                        let src = known(&ids, line, parse_id(line, toks[2])?)?;
                        let dst = known(&ids, line, parse_id(line, toks[4])?)?;
                        have_action = true;
                        if action.insert((g, src), dst).is_some() {
                            return Err(Error::parse(line, "duplicate act entry"));
                        }
                    }
                    other => {
                        return Err(Error::parse(line, format!("unknown section {other:?}")));
                    }
                }
            }
            // attach projection rows, requiring them exactly at levels >= 3
            for (id, (line, row)) in &proj_lines {
                let decl = &mut decls[*id];
                if decl.level < 3 {
                    return Err(Error::parse(
                        *line,
                        "level-2 projections are forced; no row allowed",
                    ));
                }
                if row.len() != decl.level {
                    return Err(Error::parse(
                        *line,
                        format!(
                            "projection row has {} entries, expected {}",
                            row.len(),
                            decl.level
                        ),
                    ));
                }
                decl.proj = Some(row.clone());
            }
            for (ix, decl) in decls.iter().enumerate() {
                if decl.level >= 3 && decl.proj.is_none() {
                    return Err(Error::parse(
                        decl_line[ix],
                        format!("cell at level {} needs a projection row", decl.level),
                    ));
                }
            }
            let data = ExplicitData {
                cells: decls,
                q: q_rows,
                iota: if have_iota { Some(iota) } else { None },
                action: if have_action { Some(action) } else { None },
            };
            // structural validation (spine coherence, compatibility of
            // projection rows, totality of tables); report against line 1 of
            // the document since the library error names the offending cell
            Polygroupoid::new_explicit(n, vertex_names, group, data).map_err(|e| match e {
                Error::Parse { .. } => e,
                other => Error::parse(1, other.to_string()),
            })
        }
        other => Err(Error::parse(line, format!("unknown law {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::twist;
    use crate::standard::build_standard;

    fn z(m: u32) -> GroupSpec {
        GroupSpec::new(vec![m]).unwrap()
    }

    #[test]
    fn standard_round_trip_and_header() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let text = serialize(&pg);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("pgx 1"));
        assert_eq!(lines.next(), Some("n 2"));
        assert_eq!(lines.next(), Some("group 2"));
        assert_eq!(lines.next(), Some("vertices v0 v1 v2"));
        assert_eq!(lines.next(), Some("law standard"));
        let back = parse(&text).unwrap();
        assert_eq!(back, pg);
    }

    #[test]
    fn explicit_round_trip() {
        let pg = build_standard(2, z(3), 4).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let t = twist(&pg, &one).unwrap();
        let text = serialize(&t);
        let back = parse(&text).unwrap();
        assert_eq!(back, t);
        // serializing again is stable
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn version_mismatch_rejected() {
        let err = parse("pgx 2\nn 2\ngroup 2\nvertices a b\nlaw standard\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn dangling_q_id_rejected_with_line() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let ex = pg.to_explicit().unwrap();
        let mut text = serialize(&ex);
        text.push_str("q 0 1 999\n");
        let line_count = text.lines().count();
        match parse(&text).unwrap_err() {
            Error::Parse { line, msg } => {
                assert_eq!(line, line_count);
                assert!(msg.contains("dangling"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn unknown_section_rejected() {
        let text = "pgx 1\nn 2\ngroup 2\nvertices a b c\nlaw explicit\nwhatever 1 2\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, msg } => {
                assert_eq!(line, 6);
                assert!(msg.contains("unknown section"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let text = serialize(&pg);
        let commented = text.replace("law standard", "law standard   # the canonical model");
        let with_blank = format!("# header comment\n\n{commented}");
        assert_eq!(parse(&with_blank).unwrap(), pg);
    }

    #[test]
    fn standard_files_reject_tables() {
        let text = "pgx 1\nn 2\ngroup 2\nvertices a b c\nlaw standard\nq 0 1 2\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other}"),
        }
    }
}
