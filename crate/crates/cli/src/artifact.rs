//! Run directory and artifact I/O.
//!
//! JSON artifacts wrap their payload as `{"meta": {...}, "data": ...}` and
//! print every float with 17 significant digits.

use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{io_error, CliError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub artifact: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub meta: Meta,
    pub data: T,
}

/// Compact JSON with `{:.16e}` floats.
struct Fixed17;

impl serde_json::ser::Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17);
    value.serialize(&mut ser).expect("artifact serializes");
    out.push(b'\n');
    out
}

/// CSV cell with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
}

impl RunDir {
    pub fn new(out: &Path, config: &RunConfig) -> Result<Self, CliError> {
        let hash = config.hash();
        let path = out.join(format!("run-{hash}"));
        std::fs::create_dir_all(&path).map_err(|e| io_error(&path, e))?;
        let run = Self { path, hash };
        run.write_json("config.json", config)?;
        Ok(run)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    fn meta(&self, name: &str) -> Meta {
        Meta {
            tool: "pencil-graph".into(),
            version: VERSION.into(),
            config_hash: self.hash.clone(),
            artifact: name.into(),
        }
    }

    pub fn write_json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf, CliError> {
        let env = Envelope {
            meta: self.meta(name),
            data,
        };
        self.write_bytes(name, &to_json(&env))
    }

    /// CSV with a leading comment line carrying the metadata.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf, CliError> {
        let mut text = format!("# pencil-graph {VERSION} config {}\n{header}\n", self.hash);
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write_bytes(name, text.as_bytes())
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.file(name);
        std::fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.file(name).is_file()
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str, producer: &'static str) -> Result<T, CliError> {
        let path = self.file(name);
        if !path.is_file() {
            return Err(CliError::MissingArtifact { path, producer });
        }
        let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| CliError::Artifact {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if env.meta.config_hash != self.hash {
            return Err(CliError::Artifact {
                path,
                reason: format!("config hash {} does not match {}", env.meta.config_hash, self.hash),
            });
        }
        Ok(env.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits_and_round_trip() {
        let v = vec![0.1, -1.0 / 3.0, 2.5e-300, 0.0];
        let text = String::from_utf8(to_json(&v)).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn non_finite_becomes_null() {
        let text = String::from_utf8(to_json(&[f64::NAN])).unwrap();
        assert_eq!(text.trim(), "[null]");
    }
}
