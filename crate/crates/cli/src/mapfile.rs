//! Line-oriented map description files.
//!
//! ```text
//! # comments run to end of line
//! order=right-to-left
//! disk core cx=0.5 cy=0.5 r=0.2
//! band strip range=0.0,0.1
//! translate a=0.37 b=0.18
//! hshear eps=0.02 band=strip inner=0.3 outer=0.7
//! vshear eps=-0.01 band=0.45,0.55
//! disktwist disk=core t=1.0
//! disktwist cx=0.2 cy=0.8 r=0.1 t=0.5 inner=0.333 outer=0.667
//! ```
//!
//! Stanzas are listed in composition order: the first stanza is applied
//! last. Profiles default to `inner=1/3 outer=2/3`.

use std::collections::BTreeMap;
use std::fmt;

use closing_core::{Band, BumpProfile, Disk, Generator, Point2, TorusMap};

pub const HEADER: &str = "order=right-to-left";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A band given inline or by name.
#[derive(Debug, Clone, PartialEq)]
pub enum BandRef {
    Inline(Band),
    Named(String),
}

/// A disk given inline or by name.
#[derive(Debug, Clone, PartialEq)]
pub enum DiskRef {
    Inline(Disk),
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stanza {
    Translate { a: f64, b: f64 },
    HShear { eps: f64, band: BandRef, profile: BumpProfile },
    VShear { eps: f64, band: BandRef, profile: BumpProfile },
    DiskTwist { disk: DiskRef, t: f64, profile: BumpProfile },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapFile {
    pub disks: BTreeMap<String, Disk>,
    pub bands: BTreeMap<String, Band>,
    pub stanzas: Vec<Stanza>,
}

impl MapFile {
    pub fn from_map(map: &TorusMap) -> Self {
        let stanzas = map
            .chain()
            .iter()
            .map(|g| match g {
                Generator::Translation { a, b } => Stanza::Translate { a: *a, b: *b },
                Generator::HorizontalShear(s) => Stanza::HShear {
                    eps: s.eps,
                    band: BandRef::Inline(s.band),
                    profile: s.profile,
                },
                Generator::VerticalShear(s) => Stanza::VShear {
                    eps: s.eps,
                    band: BandRef::Inline(s.band),
                    profile: s.profile,
                },
                Generator::DiskTwist(d) => Stanza::DiskTwist {
                    disk: DiskRef::Inline(d.disk),
                    t: d.t,
                    profile: d.profile,
                },
            })
            .collect();
        Self {
            stanzas,
            ..Default::default()
        }
    }

    /// Resolve names and build the generator chain.
    pub fn to_map(&self) -> TorusMap {
        let band = |b: &BandRef| match b {
            BandRef::Inline(b) => *b,
            BandRef::Named(n) => self.bands[n],
        };
        self.stanzas
            .iter()
            .map(|s| match s {
                Stanza::Translate { a, b } => Generator::translation(*a, *b),
                Stanza::HShear { eps, band: b, profile } => Generator::horizontal_shear(*eps, *profile, band(b)),
                Stanza::VShear { eps, band: b, profile } => Generator::vertical_shear(*eps, *profile, band(b)),
                Stanza::DiskTwist { disk, t, profile } => {
                    let d = match disk {
                        DiskRef::Inline(d) => *d,
                        DiskRef::Named(n) => self.disks[n],
                    };
                    Generator::disk_twist(d, *t, *profile)
                }
            })
            .collect()
    }

    pub fn disk(&self, name: &str) -> Option<Disk> {
        self.disks.get(name).copied()
    }

    /// Disks of every twist stanza, in stanza order.
    pub fn twist_disks(&self) -> Vec<Disk> {
        self.to_map()
            .chain()
            .iter()
            .filter_map(|g| match g {
                Generator::DiskTwist(d) => Some(d.disk),
                _ => None,
            })
            .collect()
    }
}

/// Shortest decimal text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn profile_keys(p: &BumpProfile) -> String {
    format!("inner={} outer={}", num(p.inner()), num(p.outer()))
}

fn band_value(b: &BandRef) -> String {
    match b {
        BandRef::Inline(b) => format!("{},{}", num(b.lo()), num(b.hi())),
        BandRef::Named(n) => n.clone(),
    }
}

impl fmt::Display for MapFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER}")?;
        for (name, d) in &self.disks {
            let c = d.center();
            writeln!(f, "disk {name} cx={} cy={} r={}", num(c.x), num(c.y), num(d.radius()))?;
        }
        for (name, b) in &self.bands {
            writeln!(f, "band {name} range={},{}", num(b.lo()), num(b.hi()))?;
        }
        for s in &self.stanzas {
            match s {
                Stanza::Translate { a, b } => writeln!(f, "translate a={} b={}", num(*a), num(*b))?,
                Stanza::HShear { eps, band, profile } => writeln!(
                    f,
                    "hshear eps={} band={} {}",
                    num(*eps),
                    band_value(band),
                    profile_keys(profile)
                )?,
                Stanza::VShear { eps, band, profile } => writeln!(
                    f,
                    "vshear eps={} band={} {}",
                    num(*eps),
                    band_value(band),
                    profile_keys(profile)
                )?,
                Stanza::DiskTwist { disk, t, profile } => {
                    let where_ = match disk {
                        DiskRef::Inline(d) => {
                            let c = d.center();
                            format!("cx={} cy={} r={}", num(c.x), num(c.y), num(d.radius()))
                        }
                        DiskRef::Named(n) => format!("disk={n}"),
                    };
                    writeln!(f, "disktwist {where_} t={} {}", num(*t), profile_keys(profile))?
                }
            }
        }
        Ok(())
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

struct Cursor {
    line: usize,
}

impl Cursor {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }
}

/// Key/value pairs of one stanza with the column of each value.
struct Fields<'a> {
    values: BTreeMap<&'a str, (&'a str, usize, usize)>,
    end_column: usize,
}

impl<'a> Fields<'a> {
    fn collect(cur: &Cursor, toks: &[Token<'a>], allowed: &[&str], end_column: usize) -> Result<Self, ParseError> {
        let mut values = BTreeMap::new();
        for tok in toks {
            let Some((key, value)) = tok.text.split_once('=') else {
                return Err(cur.err(tok.column, format!("expected key=value, found `{}`", tok.text)));
            };
            if !allowed.contains(&key) {
                return Err(cur.err(tok.column, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(cur.err(tok.column + key.chars().count() + 1, format!("empty value for `{key}`")));
            }
            let vcol = tok.column + key.chars().count() + 1;
            if values.insert(key, (value, tok.column, vcol)).is_some() {
                return Err(cur.err(tok.column, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { values, end_column })
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn key_column(&self, key: &str) -> usize {
        self.values.get(key).map_or(self.end_column, |v| v.1)
    }

    fn raw(&self, cur: &Cursor, key: &str) -> Result<(&'a str, usize), ParseError> {
        self.values
            .get(key)
            .map(|&(v, _, c)| (v, c))
            .ok_or_else(|| cur.err(self.end_column, format!("missing key `{key}`")))
    }

    fn number(&self, cur: &Cursor, key: &str) -> Result<f64, ParseError> {
        let (v, col) = self.raw(cur, key)?;
        parse_number(cur, v, col)
    }

    fn number_or(&self, cur: &Cursor, key: &str, default: f64) -> Result<f64, ParseError> {
        if self.has(key) {
            self.number(cur, key)
        } else {
            Ok(default)
        }
    }

    fn profile(&self, cur: &Cursor) -> Result<BumpProfile, ParseError> {
        let d = BumpProfile::default();
        let inner = self.number_or(cur, "inner", d.inner())?;
        let outer = self.number_or(cur, "outer", d.outer())?;
        let col = if self.has("inner") { self.key_column("inner") } else { self.key_column("outer") };
        BumpProfile::new(inner, outer).map_err(|e| cur.err(col, e.to_string()))
    }
}

fn parse_number(cur: &Cursor, text: &str, column: usize) -> Result<f64, ParseError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(cur.err(column, format!("invalid number `{text}`"))),
    }
}

fn parse_pair(cur: &Cursor, text: &str, column: usize) -> Result<(f64, f64), ParseError> {
    let Some((a, b)) = text.split_once(',') else {
        return Err(cur.err(column, format!("expected lo,hi, found `{text}`")));
    };
    Ok((parse_number(cur, a, column)?, parse_number(cur, b, column + a.chars().count() + 1)?))
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn inline_disk(cur: &Cursor, fields: &Fields<'_>) -> Result<Disk, ParseError> {
    let cx = fields.number(cur, "cx")?;
    let cy = fields.number(cur, "cy")?;
    let r = fields.number(cur, "r")?;
    Disk::new(Point2::new(cx, cy), r).map_err(|e| cur.err(fields.key_column("r"), e.to_string()))
}

pub fn parse(text: &str) -> Result<MapFile, ParseError> {
    let mut file = MapFile::default();
    let mut seen_header = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let cur = Cursor { line: idx + 1 };
        last_line = idx + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b);
        let toks = tokens(body);
        let Some(head) = toks.first() else { continue };
        let end_column = body.trim_end().chars().count() + 1;

        if !seen_header {
            if head.text.starts_with("order=") {
                if head.text != HEADER {
                    return Err(cur.err(head.column, format!("unsupported order `{}`", &head.text[6..])));
                }
                if let Some(extra) = toks.get(1) {
                    return Err(cur.err(extra.column, "unexpected text after header"));
                }
                seen_header = true;
                continue;
            }
            return Err(cur.err(head.column, format!("expected header `{HEADER}` before any stanza")));
        }

        let rest = &toks[1..];
        match head.text {
            "order=right-to-left" => return Err(cur.err(head.column, "duplicate header")),
            "disk" | "band" => {
                let Some(name) = rest.first() else {
                    return Err(cur.err(end_column, format!("missing {} name", head.text)));
                };
                if !is_name(name.text) {
                    return Err(cur.err(name.column, format!("invalid name `{}`", name.text)));
                }
                if file.disks.contains_key(name.text) || file.bands.contains_key(name.text) {
                    return Err(cur.err(name.column, format!("duplicate name `{}`", name.text)));
                }
                if head.text == "disk" {
                    let fields = Fields::collect(&cur, &rest[1..], &["cx", "cy", "r"], end_column)?;
                    file.disks.insert(name.text.to_string(), inline_disk(&cur, &fields)?);
                } else {
                    let fields = Fields::collect(&cur, &rest[1..], &["range"], end_column)?;
                    let (v, col) = fields.raw(&cur, "range")?;
                    let (lo, hi) = parse_pair(&cur, v, col)?;
                    let band = Band::new(lo, hi).map_err(|e| cur.err(col, e.to_string()))?;
                    file.bands.insert(name.text.to_string(), band);
                }
            }
            "translate" => {
                let fields = Fields::collect(&cur, rest, &["a", "b"], end_column)?;
                file.stanzas.push(Stanza::Translate {
                    a: fields.number(&cur, "a")?,
                    b: fields.number(&cur, "b")?,
                });
            }
            "hshear" | "vshear" => {
                let fields = Fields::collect(&cur, rest, &["eps", "band", "inner", "outer"], end_column)?;
                let eps = fields.number(&cur, "eps")?;
                let (v, col) = fields.raw(&cur, "band")?;
                let band = if is_name(v) {
                    if !file.bands.contains_key(v) {
                        return Err(cur.err(col, format!("undefined band `{v}`")));
                    }
                    BandRef::Named(v.to_string())
                } else {
                    let (lo, hi) = parse_pair(&cur, v, col)?;
                    BandRef::Inline(Band::new(lo, hi).map_err(|e| cur.err(col, e.to_string()))?)
                };
                let profile = fields.profile(&cur)?;
                file.stanzas.push(if head.text == "hshear" {
                    Stanza::HShear { eps, band, profile }
                } else {
                    Stanza::VShear { eps, band, profile }
                });
            }
            "disktwist" => {
                let fields = Fields::collect(
                    &cur,
                    rest,
                    &["disk", "cx", "cy", "r", "t", "inner", "outer"],
                    end_column,
                )?;
                let disk = if fields.has("disk") {
                    for k in ["cx", "cy", "r"] {
                        if fields.has(k) {
                            return Err(cur.err(fields.key_column(k), format!("`{k}` conflicts with `disk`")));
                        }
                    }
                    let (v, col) = fields.raw(&cur, "disk")?;
                    if !file.disks.contains_key(v) {
                        return Err(cur.err(col, format!("undefined disk `{v}`")));
                    }
                    DiskRef::Named(v.to_string())
                } else {
                    DiskRef::Inline(inline_disk(&cur, &fields)?)
                };
                let t = fields.number(&cur, "t")?;
                let profile = fields.profile(&cur)?;
                file.stanzas.push(Stanza::DiskTwist { disk, t, profile });
            }
            other => return Err(cur.err(head.column, format!("unknown stanza `{other}`"))),
        }
    }
    if !seen_header {
        return Err(ParseError {
            line: last_line.max(1),
            column: 1,
            message: format!("missing header `{HEADER}`"),
        });
    }
    Ok(file)
}

/// Parse a `cx,cy,r` disk argument.
pub fn parse_disk_arg(text: &str) -> Result<Disk, ParseError> {
    let cur = Cursor { line: 1 };
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(cur.err(1, format!("expected cx,cy,r, found `{text}`")));
    }
    let mut vals = [0.0; 3];
    let mut col = 1;
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = parse_number(&cur, p.trim(), col)?;
        col += p.chars().count() + 1;
    }
    let r_col = col - parts[2].chars().count() - 1;
    Disk::new(Point2::new(vals[0], vals[1]), vals[2]).map_err(|e| cur.err(r_col, e.to_string()))
}

/// Parse a `lo,hi` band argument.
pub fn parse_band_arg(text: &str) -> Result<Band, ParseError> {
    let cur = Cursor { line: 1 };
    let (lo, hi) = parse_pair(&cur, text.trim(), 1)?;
    Band::new(lo, hi).map_err(|e| cur.err(1, e.to_string()))
}
