//! Persistence: the BNSF binary field format, trajectory files with a JSON
//! time-grid sidecar, and the run-configuration schema.
//!
//! Fields are stored as physical samples (little-endian `f64`,
//! component-major, x-fastest) so any implementation can ingest them without
//! sharing transform conventions. Byte output is deterministic for identical
//! inputs. Because in-memory fields are coefficient-backed, a disk round trip
//! re-enters through one forward transform and reproduces coefficients to
//! transform round-off (`<= 1e-13` relative), not bit-for-bit.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::trajectory::Trajectory;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"BNSF";
pub const FORMAT_VERSION: u32 = 1;
/// Storage flag: physical samples, little-endian f64, component-major,
/// x-fastest.
pub const STORAGE_PHYSICAL: u32 = 0;

const HEADER_LEN: u64 = 4 + 4 + 4 + 4 + 8 + 4 + 4 + 4;

fn parse_err<T>(offset: u64, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

/// Serialize a field to BNSF bytes.
pub fn field_to_bytes(f: &SpectralField) -> Vec<u8> {
    let grid = f.grid();
    let comps = f.num_components() as u32;
    let mut out = Vec::with_capacity(
        HEADER_LEN as usize + f.num_components() * grid.total_points() * 8,
    );
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.box_len().to_le_bytes());
    out.extend_from_slice(&(f.rank() as u32).to_le_bytes());
    out.extend_from_slice(&comps.to_le_bytes());
    out.extend_from_slice(&STORAGE_PHYSICAL.to_le_bytes());
    for comp in f.to_physical() {
        for v in comp {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() < self.pos as usize + len {
            return parse_err(
                self.pos,
                format!(
                    "truncated while reading {what}: need {len} bytes, have {}",
                    self.bytes.len() - self.pos as usize
                ),
            );
        }
        let slice = &self.bytes[self.pos as usize..self.pos as usize + len];
        self.pos += len as u64;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Parse a field from BNSF bytes.
pub fn field_from_bytes(bytes: &[u8]) -> Result<SpectralField> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return parse_err(0, format!("bad magic {magic:?}, expected BNSF"));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return parse_err(4, format!("unsupported format version {version}"));
    }
    let dim = cur.u32("dim")?;
    if dim != 3 {
        return parse_err(8, format!("dim must be 3, got {dim}"));
    }
    let n = cur.u32("n_per_dim")? as usize;
    let box_len = cur.f64("box_len")?;
    let rank_raw = cur.u32("rank")?;
    let comps = cur.u32("component count")? as usize;
    let storage = cur.u32("storage flag")?;
    if storage != STORAGE_PHYSICAL {
        return parse_err(HEADER_LEN - 4, format!("unknown storage flag {storage}"));
    }
    let rank = match (rank_raw, comps) {
        (0, 1) | (1, 3) | (2, 9) => rank_raw as u8,
        _ => {
            return parse_err(
                HEADER_LEN - 8,
                format!("rank {rank_raw} inconsistent with {comps} components"),
            )
        }
    };
    let grid = GridSpec::new(n, box_len).map_err(|e| Error::Parse {
        offset: 16,
        message: e.to_string(),
    })?;
    let m = grid.total_points();
    let expected = comps * m * 8;
    if bytes.len() != HEADER_LEN as usize + expected {
        return parse_err(
            bytes.len().min(HEADER_LEN as usize + expected) as u64,
            format!(
                "payload length {} does not match components*n^3*8 = {expected}",
                bytes.len() - HEADER_LEN as usize
            ),
        );
    }
    let mut samples = Vec::with_capacity(comps);
    for _ in 0..comps {
        let mut comp = Vec::with_capacity(m);
        for _ in 0..m {
            comp.push(cur.f64("sample")?);
        }
        samples.push(comp);
    }
    let mut f = SpectralField::from_physical(grid, rank, &samples)?;
    if rank == 1 && f.divergence_defect() <= 1e-10 {
        f.set_divergence_free(true);
    }
    Ok(f)
}

pub fn write_field(path: &Path, f: &SpectralField) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&field_to_bytes(f))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    field_from_bytes(&bytes)
}

/// Time-grid sidecar of a trajectory file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySidecar {
    pub times: Vec<f64>,
    pub horizon: f64,
    pub rank: u8,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".times.json");
    std::path::PathBuf::from(os)
}

/// Concatenated BNSF frames plus `<path>.times.json`.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut file = std::fs::File::create(path)?;
    for f in traj.fields() {
        file.write_all(&field_to_bytes(f))?;
    }
    let sidecar = TrajectorySidecar {
        times: traj.times().to_vec(),
        horizon: traj.horizon(),
        rank: traj.rank(),
    };
    let json = serde_json::to_vec_pretty(&sidecar)
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let sidecar_bytes = std::fs::read(sidecar_path(path))?;
    let sidecar: TrajectorySidecar = serde_json::from_slice(&sidecar_bytes)
        .map_err(|e| Error::Config(format!("sidecar: {e}")))?;
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut fields = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        if bytes.len() - offset < HEADER_LEN as usize {
            return parse_err(offset as u64, "truncated frame header");
        }
        let comps = u32::from_le_bytes(bytes[offset + 28..offset + 32].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[offset + 12..offset + 16].try_into().unwrap()) as usize;
        let frame_len = HEADER_LEN as usize + comps as usize * n * n * n * 8;
        if bytes.len() - offset < frame_len {
            return parse_err(bytes.len() as u64, "truncated frame payload");
        }
        let field = field_from_bytes(&bytes[offset..offset + frame_len]).map_err(|e| {
            match e {
                Error::Parse {
                    offset: inner,
                    message,
                } => Error::Parse {
                    offset: offset as u64 + inner,
                    message,
                },
                other => other,
            }
        })?;
        fields.push(field);
        offset += frame_len;
    }
    if fields.len() != sidecar.times.len() {
        return Err(Error::Config(format!(
            "sidecar lists {} times but file holds {} frames",
            sidecar.times.len(),
            fields.len()
        )));
    }
    Trajectory::new(sidecar.times, fields, sidecar.horizon)
}

/// Grid block of the run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub box_len: f64,
}

/// Scenario parameters; unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioParams {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub k: Option<usize>,
    pub t_horizon: Option<f64>,
    pub n_times: Option<usize>,
    pub time_refine: Option<usize>,
    pub tol: Option<f64>,
    pub amplitude: Option<f64>,
    pub n_sweep: Option<Vec<f64>>,
    pub t_sweep: Option<Vec<f64>>,
    pub ensemble: Option<usize>,
    /// Test hook: corrupt one partition-profile entry so the verify suite
    /// must fail.
    pub corrupt_partition: Option<bool>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub scenario: String,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read(path)?)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.box_len)
    }
}
