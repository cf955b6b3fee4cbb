use std::fmt;
use std::io::Write;
use std::path::Path;

use osnap::matio::write_matrix_market_to;
use osnap::Matrix;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Library(osnap::Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn input(path: &Path, e: osnap::Error) -> Self {
        Failure::Usage(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Library(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Library(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<osnap::Error> for Failure {
    fn from(e: osnap::Error) -> Self {
        Failure::Library(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

pub fn matrix(m: &Matrix) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_matrix_market_to(m, &mut buf)?;
    Ok(String::from_utf8(buf).expect("matrix market output is ASCII"))
}

/// `index,<name>` header, then one zero-based row per value.
pub fn indexed_csv(name: &str, values: &[f64]) -> String {
    let mut out = format!("index,{name}\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v:?}\n"));
    }
    out
}

pub fn json_line<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable output");
    s.push('\n');
    s
}

/// Writes to `path` through a temporary file in the same directory renamed
/// into place, so a failed run never leaves partial output. No path means stdout.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Failure::Io(e.error))?;
    Ok(())
}
