//! Series table and summary file writers.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub const SERIES_HEADER: &str = "t,F,supZ,wnorm_xC0,lambda0,residual_max,kato_max,kappa_hat";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: Option<f64>,
    pub sup_z: Option<f64>,
    pub wnorm: Option<f64>,
    pub lambda0: Option<f64>,
    pub residual_max: Option<f64>,
    pub kato_max: Option<f64>,
    pub kappa_hat: Option<f64>,
}

impl SeriesRow {
    pub fn at(t: f64) -> Self {
        SeriesRow { t, ..Default::default() }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_default()
}

pub fn render_series(rows: &[SeriesRow]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            cell(Some(r.t)),
            cell(r.energy),
            cell(r.sup_z),
            cell(r.wnorm),
            cell(r.lambda0),
            cell(r.residual_max),
            cell(r.kato_max),
            cell(r.kappa_hat),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a series table back into rows. Only used by tests and tools.
pub fn parse_series(text: &str) -> Option<Vec<SeriesRow>> {
    let mut lines = text.lines();
    if lines.next()? != SERIES_HEADER {
        return None;
    }
    lines
        .map(|l| {
            let c: Vec<Option<f64>> = l
                .split(',')
                .map(|s| if s.is_empty() { Ok(None) } else { s.parse().map(Some) })
                .collect::<Result<_, _>>()
                .ok()?;
            if c.len() != 8 {
                return None;
            }
            Some(SeriesRow {
                t: c[0]?,
                energy: c[1],
                sup_z: c[2],
                wnorm: c[3],
                lambda0: c[4],
                residual_max: c[5],
                kato_max: c[6],
                kappa_hat: c[7],
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Num(f64),
    Int(usize),
    Flag(bool),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Flag(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.into())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Num(x) => format!("{x:.6e}"),
            Value::Int(i) => i.to_string(),
            Value::Flag(b) => b.to_string(),
            Value::Missing => "-".into(),
        }
    }
}

/// Ordered sections of `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    sections: Vec<(String, Vec<(String, Value)>)>,
}

impl Summary {
    pub fn section(&mut self, name: &str) -> &mut Vec<(String, Value)> {
        self.sections.push((name.into(), Vec::new()));
        &mut self.sections.last_mut().expect("just pushed").1
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, kv)| kv)
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, kv) in &self.sections {
            let _ = writeln!(out, "{name}:");
            for (k, v) in kv {
                let _ = writeln!(out, "  {k}: {}", v.render());
            }
        }
        out
    }
}

pub fn put(kv: &mut Vec<(String, Value)>, key: &str, v: impl Into<Value>) {
    kv.push((key.into(), v.into()));
}

/// Writes `contents` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_fields_are_blank() {
        let rows = [SeriesRow { energy: Some(2.0), ..SeriesRow::at(0.5) }];
        let s = render_series(&rows);
        assert_eq!(s, format!("{SERIES_HEADER}\n5.000000000e-1,2.000000000e0,,,,,,\n"));
        assert_eq!(parse_series(&s).unwrap(), rows);
    }

    #[test]
    fn summary_layout() {
        let mut s = Summary::default();
        let r = s.section("result");
        put(r, "status", "pass");
        put(r, "a_L2", 1.5);
        put(r, "lambda0", None::<f64>);
        assert_eq!(s.render(), "result:\n  status: pass\n  a_L2: 1.500000e0\n  lambda0: -\n");
        assert_eq!(s.get("result", "status"), Some(&Value::Text("pass".into())));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
