//! Line-oriented manifest reader.
//!
//! ```text
//! # comment
//! tetrahedra 2
//! glue 0 0 1 3 2 0 1        # face 0 of tet 0 onto face 3 of tet 1
//! ```
//!
//! or, with explicit edge classes in the (e12, e13, e14, e34, e24, e23) order,
//!
//! ```text
//! tetrahedra 1
//! edges 0 0 0 0 0 0 0
//! ```

use super::{Gluing, GluingTable, Triangulation};
use crate::error::{Error, Result};

enum Mode {
    Glue(Vec<Gluing>),
    Edges(Vec<Option<[usize; 6]>>),
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn numbers<const N: usize>(line: usize, keyword: &str, fields: &[&str]) -> Result<[usize; N]> {
    if fields.len() != N {
        return Err(parse_error(line, format!("`{keyword}` takes {N} integers, found {}", fields.len())));
    }
    let mut out = [0; N];
    for (slot, field) in out.iter_mut().zip(fields) {
        *slot = field
            .parse()
            .map_err(|_| parse_error(line, format!("`{field}` is not a non-negative integer")))?;
    }
    Ok(out)
}

/// Parses and validates a manifest.
pub fn parse_manifest(text: &str) -> Result<Triangulation> {
    let mut tet_count: Option<usize> = None;
    let mut mode: Option<Mode> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let keyword = fields.next().unwrap();
        let rest: Vec<&str> = fields.collect();

        let Some(n) = tet_count else {
            if keyword != "tetrahedra" {
                return Err(parse_error(line_no, "expected `tetrahedra <N>` first"));
            }
            let [n] = numbers::<1>(line_no, keyword, &rest)?;
            if n == 0 {
                return Err(parse_error(line_no, "tetrahedron count must be positive"));
            }
            tet_count = Some(n);
            continue;
        };

        match keyword {
            "glue" => {
                let [a, f, b, g, p0, p1, p2] = numbers::<7>(line_no, keyword, &rest)?;
                if a >= n || b >= n {
                    return Err(parse_error(line_no, format!("tetrahedron index out of range 0..{n}")));
                }
                let gluing = Gluing::from_face_images(a, f, b, g, [p0, p1, p2])
                    .map_err(|e| parse_error(line_no, e.to_string()))?;
                match mode.get_or_insert_with(|| Mode::Glue(Vec::new())) {
                    Mode::Glue(list) => list.push(gluing),
                    Mode::Edges(_) => {
                        return Err(parse_error(line_no, "`glue` and `edges` lines cannot be mixed"))
                    }
                }
            }
            "edges" => {
                let [tet, c0, c1, c2, c3, c4, c5] = numbers::<7>(line_no, keyword, &rest)?;
                if tet >= n {
                    return Err(parse_error(line_no, format!("tetrahedron index out of range 0..{n}")));
                }
                match mode.get_or_insert_with(|| Mode::Edges(vec![None; n])) {
                    Mode::Edges(rows) => {
                        if rows[tet].replace([c0, c1, c2, c3, c4, c5]).is_some() {
                            return Err(parse_error(
                                line_no,
                                format!("edges of tetrahedron {tet} listed twice"),
                            ));
                        }
                    }
                    Mode::Glue(_) => {
                        return Err(parse_error(line_no, "`glue` and `edges` lines cannot be mixed"))
                    }
                }
            }
            "tetrahedra" => return Err(parse_error(line_no, "`tetrahedra` given twice")),
            other => return Err(parse_error(line_no, format!("unknown keyword `{other}`"))),
        }
    }

    let n = tet_count.ok_or_else(|| Error::Validation("empty manifest".into()))?;
    match mode {
        None => Err(Error::Validation("manifest has no `glue` or `edges` lines".into())),
        Some(Mode::Glue(list)) => Ok(Triangulation::from_gluings(GluingTable::new(n, list)?)),
        Some(Mode::Edges(rows)) => {
            let mut labels = Vec::with_capacity(n);
            for (tet, row) in rows.into_iter().enumerate() {
                labels.push(row.ok_or_else(|| {
                    Error::Validation(format!("edges of tetrahedron {tet} are not listed"))
                })?);
            }
            Triangulation::from_edge_labels(labels)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tetrahedron_label_mode() {
        let t = parse_manifest("# one tet\ntetrahedra 1\nedges 0 0 0 0 0 0 0\n").unwrap();
        assert_eq!(t.class_count(), 1);
        assert_eq!(t.valences(), &[6]);
        assert_eq!(t.incidence(), &[[0; 6]]);
    }

    #[test]
    fn unglued_face_is_reported() {
        let text = "tetrahedra 2\nglue 0 0 1 0 1 2 3\nglue 0 1 1 1 0 2 3\nglue 0 2 1 2 0 1 3\n";
        let err = parse_manifest(text).unwrap_err();
        assert!(err.to_string().contains("manifest not closed"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_manifest("tetrahedra 1\n\nedges 0 0 0 x 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_manifest("glue 0 0 1 0 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_manifest("tetrahedra 2\nglue 0 0 1 0 1 2 3\nedges 0 0 0 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_manifest("tetrahedra 1\nglue 0 0 0 1 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_manifest("tetrahedra 1\nedges 0 0 0 0 0 0 0\nedges 0 0 0 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn duplicated_face_is_reported() {
        let text = "tetrahedra 2\n\
                    glue 0 0 1 0 1 2 3\nglue 0 0 1 1 0 2 3\n\
                    glue 0 2 1 2 0 1 3\nglue 0 3 1 3 0 1 2\n";
        let err = parse_manifest(text).unwrap_err();
        assert!(err.to_string().contains("duplicated gluing"), "{err}");
    }

    #[test]
    fn missing_tetrahedron_in_label_mode() {
        let err = parse_manifest("tetrahedra 2\nedges 0 0 0 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
