use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub type GridFunction = Vec<f64>;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"DUL1";

/// Solution levels on a fixed node set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub levels: Vec<GridFunction>,
}

fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
    let n = xs.len();
    if n == 1 || x <= xs[0] {
        return (0, 0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 1, n - 1, 0.0);
    }
    let hi = xs.partition_point(|&v| v <= x).min(n - 1);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    (lo, hi, w)
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has levels")
    }

    pub fn final_level(&self) -> &GridFunction {
        self.levels.last().expect("trajectory has levels")
    }

    /// Level at time `t` by linear interpolation between stored levels.
    pub fn level_at(&self, t: f64) -> GridFunction {
        let (a, b, w) = bracket(&self.times, t);
        self.levels[a]
            .iter()
            .zip(&self.levels[b])
            .map(|(p, q)| (1.0 - w) * p + w * q)
            .collect()
    }

    /// Piecewise-linear value in space and time, constant beyond the
    /// outermost nodes and stored times.
    pub fn value_at(&self, x: f64, t: f64) -> f64 {
        let (ta, tb, tw) = bracket(&self.times, t);
        let (xa, xb, xw) = bracket(&self.nodes, x);
        let at = |lvl: &GridFunction| (1.0 - xw) * lvl[xa] + xw * lvl[xb];
        (1.0 - tw) * at(&self.levels[ta]) + tw * at(&self.levels[tb])
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// CSV with header `t,x,u`, one row per node and level.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "t,x,u")?;
        for (t, lvl) in self.times.iter().zip(&self.levels) {
            for (x, u) in self.nodes.iter().zip(lvl) {
                writeln!(w, "{t},{x},{u}")?;
            }
        }
        w.flush()
    }

    /// Binary snapshot: magic `DUL1`, node count and level count as `u64`,
    /// then nodes, times and level-major values, all little-endian `f64`.
    pub fn write_snapshot<W: Write>(&self, w: W) -> io::Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&(self.nodes.len() as u64).to_le_bytes())?;
        w.write_all(&(self.levels.len() as u64).to_le_bytes())?;
        for v in self
            .nodes
            .iter()
            .chain(&self.times)
            .chain(self.levels.iter().flatten())
        {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_snapshot<R: Read>(r: R) -> io::Result<Self> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "bad snapshot magic",
            ));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n_nodes = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let n_levels = u64::from_le_bytes(word) as usize;
        const LIMIT: usize = 1 << 32;
        if n_nodes == 0 || n_levels == 0 || n_nodes.saturating_mul(n_levels) > LIMIT {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "bad snapshot header",
            ));
        }
        let mut read_vec = |len: usize| -> io::Result<Vec<f64>> {
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut word)?;
                out.push(f64::from_le_bytes(word));
            }
            Ok(out)
        };
        let nodes = read_vec(n_nodes)?;
        let times = read_vec(n_levels)?;
        let mut levels = Vec::with_capacity(n_levels);
        for _ in 0..n_levels {
            levels.push(read_vec(n_nodes)?);
        }
        Ok(Self {
            nodes,
            times,
            levels,
        })
    }

    pub fn save_snapshot(&self, path: &Path) -> io::Result<()> {
        self.write_snapshot(File::create(path)?)
    }

    pub fn load_snapshot(path: &Path) -> io::Result<Self> {
        Self::read_snapshot(File::open(path)?)
    }
}
