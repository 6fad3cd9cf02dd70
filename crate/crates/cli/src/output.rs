//! In-memory output files and CSV formatting.

use std::fmt::Write as _;

/// Round-trippable text for a double: 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Builds a CSV body with a header row and LF line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    width: usize,
    text: String,
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    U(usize),
    S(String),
    /// Sentinel for an undefined value.
    Na,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Na, Into::into)
    }
}

fn quoted(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let text = header.iter().map(|h| quoted(h.as_ref())).collect::<Vec<_>>().join(",") + "\n";
        Self { width: header.len(), text }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.width, "csv row width");
        for (k, c) in cells.into_iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&num(x)),
                Cell::I(x) => write!(self.text, "{x}").unwrap(),
                Cell::U(x) => write!(self.text, "{x}").unwrap(),
                Cell::S(s) => self.text.push_str(&quoted(&s)),
                Cell::Na => self.text.push_str("NA"),
            }
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Csv,
    Svg,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Csv => "csv",
            Kind::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutFile {
    pub name: String,
    pub kind: Kind,
    pub contents: String,
}

/// Files produced by one panel, written only after every panel has finished.
#[derive(Debug, Clone, Default)]
pub struct Files {
    pub list: Vec<OutFile>,
    plots: bool,
}

impl Files {
    pub fn new(plots: bool) -> Self {
        Self { list: Vec::new(), plots }
    }

    pub fn plots(&self) -> bool {
        self.plots
    }

    pub fn csv(&mut self, name: impl Into<String>, csv: Csv) {
        self.list.push(OutFile { name: name.into(), kind: Kind::Csv, contents: csv.finish() });
    }

    /// Skipped unless plots were requested; `build` only runs when needed.
    pub fn svg(&mut self, name: impl Into<String>, build: impl FnOnce() -> String) {
        if self.plots {
            self.list.push(OutFile { name: name.into(), kind: Kind::Svg, contents: build() });
        }
    }
}
