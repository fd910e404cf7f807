//! Content-addressed on-disk store for precomputed stream entries.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::value::{DataTag, Value};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BPSTRM01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    tag: DataTag,
    shape: Vec<usize>,
    checksum: String,
}

/// Directory of `<digest>.bin` payloads with `<digest>.json` sidecars.
#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    writer: Mutex<()>,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<DiskCache> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("cannot create {}: {e}", dir.display())))?;
        Ok(DiskCache {
            dir,
            writer: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn paths(&self, digest: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{digest}.bin")), self.dir.join(format!("{digest}.json")))
    }

    /// Stores an array entry; objects are not persisted and return `false`.
    pub fn store(&self, digest: &str, tag: DataTag, value: &Value) -> Result<bool> {
        let (shape, data): (Vec<usize>, Vec<f64>) = match value {
            Value::Matrix(m) => (vec![m.nrows(), m.ncols()], m.iter().copied().collect()),
            Value::Vector(v) => (vec![v.len()], v.to_vec()),
            Value::Object(_) => return Ok(false),
        };
        let mut bytes = Vec::with_capacity(8 + 8 * data.len());
        bytes.extend_from_slice(MAGIC);
        for x in &data {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        let sidecar = Sidecar {
            tag,
            shape,
            checksum: hex::encode(Sha256::digest(&bytes)),
        };
        let (bin, json) = self.paths(digest);
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let write = |path: &Path, content: &[u8]| -> Result<()> {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, content)?;
            fs::rename(&tmp, path)?;
            Ok(())
        };
        write(&bin, &bytes)?;
        write(&json, serde_json::to_string(&sidecar)?.as_bytes())?;
        Ok(true)
    }

    /// Loads an entry, verifying magic, shape and checksum. A missing entry is
    /// `Ok(None)`; a corrupt one is an error.
    pub fn load(&self, digest: &str) -> Result<Option<(DataTag, Value)>> {
        let (bin, json) = self.paths(digest);
        if !bin.exists() || !json.exists() {
            return Ok(None);
        }
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(&json)?)
            .map_err(|e| Error::Cache(format!("{}: {e}", json.display())))?;
        let bytes = fs::read(&bin)?;
        if hex::encode(Sha256::digest(&bytes)) != sidecar.checksum {
            return Err(Error::Cache(format!("{}: checksum mismatch", bin.display())));
        }
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(Error::Cache(format!("{}: bad magic", bin.display())));
        }
        let data: Vec<f64> = bytes[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let expected: usize = sidecar.shape.iter().product();
        if data.len() != expected || (bytes.len() - 8) % 8 != 0 {
            return Err(Error::Cache(format!("{}: payload does not match shape", bin.display())));
        }
        let value = match (sidecar.tag, sidecar.shape.as_slice()) {
            (DataTag::Vector, [n]) => Value::vector(Array1::from_shape_vec(*n, data).expect("checked length")),
            (DataTag::DesignMatrix | DataTag::KernelMatrix, [r, c]) => {
                Value::matrix(Array2::from_shape_vec((*r, *c), data).expect("checked length"))
            }
            _ => return Err(Error::Cache(format!("{}: shape inconsistent with tag", json.display()))),
        };
        Ok(Some((sidecar.tag, value)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let m = array![[1.0, -2.5], [f64::MIN_POSITIVE, 3.0]];
        assert!(cache.store("abc", DataTag::DesignMatrix, &Value::matrix(m.clone())).unwrap());
        let raw = fs::read(dir.path().join("abc.bin")).unwrap();
        assert_eq!(&raw[..8], b"BPSTRM01");
        assert_eq!(raw.len(), 8 + 4 * 8);
        assert_eq!(f64::from_le_bytes(raw[16..24].try_into().unwrap()), -2.5);
        let (tag, v) = cache.load("abc").unwrap().unwrap();
        assert_eq!(tag, DataTag::DesignMatrix);
        assert_eq!(v.as_matrix().unwrap(), &m);
        assert!(cache.load("missing").unwrap().is_none());
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        cache.store("v", DataTag::Vector, &Value::vector(array![1.0, 2.0])).unwrap();
        let path = dir.path().join("v.bin");
        let mut raw = fs::read(&path).unwrap();
        raw[9] ^= 0xff;
        fs::write(&path, raw).unwrap();
        assert!(matches!(cache.load("v"), Err(Error::Cache(_))));
    }
}
