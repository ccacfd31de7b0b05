use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1";

/// `DUL_OUTPUT_DIR`, else `output.dir`, else `runs`.
pub fn output_root(cfg: &RunConfig) -> PathBuf {
    std::env::var_os("DUL_OUTPUT_DIR")
        .map(PathBuf::from)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// A fresh directory `<root>/<command>-<hash>`, suffixed `-1`, `-2`, ... when
/// the name is taken.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
    pub command: String,
    pub config_hash: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'a str,
    command: &'a str,
    config_hash: &'a str,
    pass: bool,
    report: &'a T,
}

impl RunDir {
    pub fn create(command: &str, cfg: &RunConfig) -> io::Result<Self> {
        let root = output_root(cfg);
        fs::create_dir_all(&root)?;
        let hash = cfg.hash();
        let base = format!("{command}-{hash}");
        let mut n = 0usize;
        let path = loop {
            let name = if n == 0 {
                base.clone()
            } else {
                format!("{base}-{n}")
            };
            let p = root.join(name);
            match fs::create_dir(&p) {
                Ok(()) => break p,
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => n += 1,
                Err(e) => return Err(e),
            }
        };
        let dir = Self {
            path,
            command: command.to_string(),
            config_hash: hash,
        };
        fs::write(dir.file("config.json"), pretty(cfg)?)?;
        Ok(dir)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// `report.json`: deterministic, no timestamps.
    pub fn write_report<T: Serialize>(&self, pass: bool, report: &T) -> io::Result<PathBuf> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command: &self.command,
            config_hash: &self.config_hash,
            pass,
            report,
        };
        let p = self.file("report.json");
        fs::write(&p, pretty(&env)?)?;
        Ok(p)
    }

    /// Appends a timestamped line to `run.log`.
    pub fn log(&self, line: &str) -> io::Result<()> {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.file("run.log"))?;
        writeln!(f, "[{secs}] {line}")
    }

    pub fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
    ) -> io::Result<PathBuf> {
        let p = self.file(name);
        let mut w = io::BufWriter::new(fs::File::create(&p)?);
        body(&mut w)?;
        w.flush()?;
        Ok(p)
    }
}

fn pretty<T: Serialize>(v: &T) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn display(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn never_overwrites() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.output.dir = Some(tmp.path().to_path_buf());
        if std::env::var_os("DUL_OUTPUT_DIR").is_some() {
            return;
        }
        let a = RunDir::create("solve", &cfg).unwrap();
        let b = RunDir::create("solve", &cfg).unwrap();
        let c = RunDir::create("solve", &cfg).unwrap();
        assert_ne!(a.path, b.path);
        assert!(b.path.to_string_lossy().ends_with("-1"));
        assert!(c.path.to_string_lossy().ends_with("-2"));
        assert!(a.file("config.json").exists());
    }
}
