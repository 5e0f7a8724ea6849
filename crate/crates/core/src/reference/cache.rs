//! On-disk cache of dense reference states keyed by lattice parameters.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QidaError, Result};
use crate::lattice::LatticeSpec;
use crate::state::DenseState;

const MAGIC: &str = "QIDA-STATE v1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CacheHeader {
    pub key: String,
    pub n_qubits: usize,
    pub energy: f64,
    pub backend: String,
}

pub fn cache_path(dir: &Path, spec: &LatticeSpec, backend: &str) -> PathBuf {
    let digest = Sha256::digest(format!("{};backend={backend}", spec.canonical_key()).as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{}.state", &hex[..16]))
}

pub fn save_state(path: &Path, header: &CacheHeader, state: &DenseState) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{MAGIC}")?;
    writeln!(f, "{}", serde_json::to_string(header)?)?;
    for a in state.amplitudes() {
        f.write_all(&a.re.to_le_bytes())?;
        f.write_all(&a.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Returns `None` when the file is missing or was written for another key.
pub fn load_state(path: &Path, key: &str) -> Result<Option<(CacheHeader, DenseState)>> {
    let Ok(file) = fs::File::open(path) else { return Ok(None) };
    let mut r = BufReader::new(file);
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(QidaError::Parse(format!("{}: not a state cache file", path.display())));
    }
    line.clear();
    r.read_line(&mut line)?;
    let header: CacheHeader = serde_json::from_str(line.trim_end())?;
    if header.key != key {
        return Ok(None);
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let dim = 1usize << header.n_qubits;
    if bytes.len() != dim * 16 {
        return Err(QidaError::Parse(format!("{}: truncated amplitudes", path.display())));
    }
    let amps = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(Some((header, DenseState::from_amplitudes(amps)?)))
}
