//! Extended-XYZ reader and writer.
//!
//! Supported dialect: `Lattice="9 floats"`, `Properties=species:S:1:pos:R:3[:...]`,
//! `pbc="T T T"` and free `key=value` scalars. Extra per-atom columns declared
//! in `Properties` are checked for presence but not stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Element, Property, Structure};
use crate::error::{Error, Result};
use crate::fmt::format_exact;


#[derive(Debug, Clone)]
struct Column {
    name: String,
    kind: char,
    width: usize,
}

/// Parses a concatenation of extxyz frames.
pub fn parse_extxyz(text: &str) -> Result<Vec<Structure>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut structures = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let count_line = i + 1;
        let n: usize = lines[i]
            .trim()
            .parse()
            .map_err(|_| Error::parse(count_line, format!("malformed atom count '{}'", lines[i].trim())))?;
        if n == 0 {
            return Err(Error::parse(count_line, "frame with zero atoms"));
        }
        if i + 1 >= lines.len() {
            return Err(Error::parse(count_line, "frame is missing its comment line"));
        }
        if i + 2 + n > lines.len() {
            return Err(Error::parse(
                lines.len(),
                format!("short frame: expected {n} atom lines after line {}", count_line + 1),
            ));
        }
        let header = parse_comment(lines[i + 1], count_line + 1)?;
        let structure = parse_frame(&header, &lines[i + 2..i + 2 + n], count_line + 2)?;
        structures.push(structure);
        i += 2 + n;
    }
    Ok(structures)
}

struct Header {
    cell: Option<[[f64; 3]; 3]>,
    pbc: Option<[bool; 3]>,
    columns: Vec<Column>,
    properties: BTreeMap<String, Property>,
}

fn parse_comment(line: &str, lineno: usize) -> Result<Header> {
    let mut header = Header {
        cell: None,
        pbc: None,
        columns: default_columns(),
        properties: BTreeMap::new(),
    };
    for (key, value, quoted) in tokenize_comment(line, lineno)? {
        match key.as_str() {
            "Lattice" => {
                let v = parse_floats(&value, lineno, "Lattice")?;
                if v.len() != 9 {
                    return Err(Error::parse(lineno, format!("Lattice needs 9 numbers, got {}", v.len())));
                }
                header.cell = Some([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]);
            }
            "Properties" => header.columns = parse_columns(&value, lineno)?,
            "pbc" => {
                let flags: Vec<bool> = value
                    .split_whitespace()
                    .map(|t| match t {
                        "T" | "True" | "true" | "1" => Ok(true),
                        "F" | "False" | "false" | "0" => Ok(false),
                        other => Err(Error::parse(lineno, format!("bad pbc flag '{other}'"))),
                    })
                    .collect::<Result<_>>()?;
                if flags.len() != 3 {
                    return Err(Error::parse(lineno, "pbc needs three flags"));
                }
                header.pbc = Some([flags[0], flags[1], flags[2]]);
            }
            _ => {
                let prop = if !quoted && is_numeric(&value) {
                    Property::Number(value.parse().expect("checked numeric"))
                } else {
                    Property::Text(value)
                };
                header.properties.insert(key, prop);
            }
        }
    }
    Ok(header)
}

fn default_columns() -> Vec<Column> {
    vec![
        Column { name: "species".into(), kind: 'S', width: 1 },
        Column { name: "pos".into(), kind: 'R', width: 3 },
    ]
}

fn parse_columns(spec: &str, lineno: usize) -> Result<Vec<Column>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if !parts.len().is_multiple_of(3) {
        return Err(Error::parse(lineno, format!("malformed Properties '{spec}'")));
    }
    let columns: Vec<Column> = parts
        .chunks(3)
        .map(|c| {
            let kind = match c[1] {
                "S" | "R" | "I" | "L" => c[1].chars().next().unwrap(),
                other => return Err(Error::parse(lineno, format!("unknown column type '{other}'"))),
            };
            let width = c[2]
                .parse()
                .ok()
                .filter(|w| *w > 0)
                .ok_or_else(|| Error::parse(lineno, format!("bad column width '{}'", c[2])))?;
            Ok(Column { name: c[0].to_string(), kind, width })
        })
        .collect::<Result<_>>()?;
    let has = |name: &str, kind: char, width: usize| {
        columns.iter().any(|c| c.name == name && c.kind == kind && c.width == width)
    };
    if !has("species", 'S', 1) || !has("pos", 'R', 3) {
        return Err(Error::parse(lineno, "Properties must declare species:S:1 and pos:R:3"));
    }
    Ok(columns)
}

fn parse_frame(header: &Header, atom_lines: &[&str], first_line: usize) -> Result<Structure> {
    let width: usize = header.columns.iter().map(|c| c.width).sum();
    let mut elements = Vec::with_capacity(atom_lines.len());
    let mut positions = Vec::with_capacity(atom_lines.len());
    for (k, line) in atom_lines.iter().enumerate() {
        let lineno = first_line + k;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < width {
            return Err(Error::parse(
                lineno,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        let mut offset = 0;
        for col in &header.columns {
            let cells = &fields[offset..offset + col.width];
            match col.name.as_str() {
                "species" => {
                    let e = Element::from_symbol(cells[0])
                        .ok_or_else(|| Error::parse(lineno, format!("unknown element symbol '{}'", cells[0])))?;
                    elements.push(e);
                }
                "pos" => {
                    let mut p = [0.0; 3];
                    for (d, cell) in cells.iter().enumerate() {
                        p[d] = cell
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| Error::parse(lineno, format!("non-numeric coordinate '{cell}'")))?;
                    }
                    positions.push(p);
                }
                _ if col.kind == 'R' || col.kind == 'I' => {
                    for cell in cells {
                        if !is_numeric(cell) {
                            return Err(Error::parse(
                                lineno,
                                format!("non-numeric value '{cell}' in column '{}'", col.name),
                            ));
                        }
                    }
                }
                _ => {}
            }
            offset += col.width;
        }
    }
    let pbc = header.pbc.unwrap_or(if header.cell.is_some() { [true; 3] } else { [false; 3] });
    let structure = Structure {
        elements,
        positions,
        cell: header.cell,
        pbc,
        properties: header.properties.clone(),
    };
    structure
        .validate()
        .map_err(|e| Error::parse(first_line.saturating_sub(1), e.to_string()))?;
    Ok(structure)
}

/// Splits a comment line into `(key, value, was_quoted)` triples.
fn tokenize_comment(line: &str, lineno: usize) -> Result<Vec<(String, String, bool)>> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            break;
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek() != Some(&'=') {
            // bare flag
            out.push((key, "T".to_string(), false));
            continue;
        }
        chars.next();
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut value = String::new();
        let quoted = chars.peek() == Some(&'"');
        if quoted {
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some(e) => value.push(e),
                        None => break,
                    },
                    '"' => {
                        closed = true;
                        break;
                    }
                    _ => value.push(c),
                }
            }
            if !closed {
                return Err(Error::parse(lineno, format!("unterminated quote in value of '{key}'")));
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                value.push(c);
                chars.next();
            }
        }
        if key.is_empty() {
            return Err(Error::parse(lineno, "empty key in comment line"));
        }
        out.push((key, value, quoted));
    }
    Ok(out)
}

fn parse_floats(s: &str, lineno: usize, what: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("non-numeric entry '{t}' in {what}")))
        })
        .collect()
}

/// True for finite decimal literals such as `-1.5e3`; `nan`/`inf` are text.
pub(crate) fn is_numeric(s: &str) -> bool {
    let starts_ok = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
    starts_ok && s.parse::<f64>().is_ok_and(|x| x.is_finite())
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty() || is_numeric(s) || s.chars().any(|c| c.is_whitespace() || c == '"' || c == '=' || c == '\\')
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn g(x: f64) -> String {
    format_exact(x)
}

/// Writes structures as extxyz frames with exactly round-tripping floats,
/// sorted keys and LF endings.
pub fn write_extxyz(structures: &[Structure]) -> String {
    let mut out = String::new();
    for s in structures {
        let mut fields: BTreeMap<&str, String> = BTreeMap::new();
        let props: Vec<(String, String)> = s
            .properties
            .iter()
            .map(|(k, v)| {
                let value = match v {
                    Property::Number(x) => g(*x),
                    Property::Text(t) if needs_quotes(t) => quote(t),
                    Property::Text(t) => t.clone(),
                };
                (k.clone(), value)
            })
            .collect();
        for (k, v) in &props {
            fields.insert(k.as_str(), v.clone());
        }
        if let Some(cell) = &s.cell {
            let lattice: Vec<String> = cell.iter().flatten().map(|x| g(*x)).collect();
            fields.insert("Lattice", format!("\"{}\"", lattice.join(" ")));
        }
        if s.cell.is_some() || s.is_periodic() {
            let flags: Vec<&str> = s.pbc.iter().map(|&p| if p { "T" } else { "F" }).collect();
            fields.insert("pbc", format!("\"{}\"", flags.join(" ")));
        }
        fields.insert("Properties", "species:S:1:pos:R:3".to_string());

        let _ = writeln!(out, "{}", s.len());
        let comment: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "{}", comment.join(" "));
        for (e, p) in s.elements.iter().zip(&s.positions) {
            let _ = writeln!(out, "{} {} {} {}", e.symbol(), g(p[0]), g(p[1]), g(p[2]));
        }
    }
    out
}
