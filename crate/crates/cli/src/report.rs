//! JSON reports and CSV orbit dumps.

use std::io::Write;

use closing_core::orbits::OrbitRecord;
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: u64 = 1;

/// A float as a JSON number with 17 significant digits; non-finite values
/// become `null`.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let text = if v == 0.0 { "0.0000000000000000e0".to_string() } else { format!("{v:.16e}") };
    Value::Number(text.parse::<Number>().expect("formatted float is a JSON number"))
}

pub fn pair(a: f64, b: f64) -> Value {
    Value::Array(vec![num(a), num(b)])
}

pub fn int_pair(a: i64, b: i64) -> Value {
    Value::Array(vec![Value::from(a), Value::from(b)])
}

/// Hex SHA-256 of the canonical serialization of a map file.
pub fn map_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn orbit_value(o: &OrbitRecord) -> Value {
    let mut m = Map::new();
    m.insert("point".into(), pair(o.point.x, o.point.y));
    m.insert("period".into(), Value::from(o.period));
    m.insert("lattice".into(), int_pair(o.lattice.x, o.lattice.y));
    m.insert("residual".into(), num(o.residual));
    m.insert(
        "multipliers".into(),
        Value::Array(o.multipliers.iter().map(|z| pair(z.re, z.im)).collect()),
    );
    let prod = o.multiplier_product();
    m.insert("multiplier_product".into(), pair(prod.re, prod.im));
    Value::Object(m)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub map_hash: Option<String>,
    pub parameters: Map<String, Value>,
    pub results: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub timings: Option<Map<String, Value>>,
    pub orbits: Vec<OrbitRecord>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            map_hash: None,
            parameters: Map::new(),
            results: Map::new(),
            residuals: Map::new(),
            timings: None,
            orbits: Vec::new(),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), Value::from(SCHEMA));
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert(
            "map_hash".into(),
            self.map_hash.clone().map_or(Value::Null, Value::from),
        );
        m.insert("parameters".into(), Value::Object(self.parameters.clone()));
        m.insert("results".into(), Value::Object(self.results.clone()));
        m.insert("residuals".into(), Value::Object(self.residuals.clone()));
        if let Some(t) = &self.timings {
            m.insert("timings".into(), Value::Object(t.clone()));
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Orbit table with columns `x, y, period, z1, z2, residual`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "period", "z1", "z2", "residual"])
            .expect("in-memory write");
        for o in &self.orbits {
            w.write_record([
                format!("{:.16e}", o.point.x),
                format!("{:.16e}", o.point.y),
                o.period.to_string(),
                o.lattice.x.to_string(),
                o.lattice.y.to_string(),
                format!("{:.16e}", o.residual),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory flush");
        w.into_inner().expect("in-memory writer")
    }
}

/// Write `bytes` to `path` through a temporary sibling so readers never see
/// a partial file.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
