//! On-disk cache for reference chains, keyed by a SHA-256 of their full
//! description (target, sampler, seed, stream, length).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jdld::samplers::ChainRecord;
use sha2::{Digest, Sha256};

const MAGIC: &[u8; 8] = b"JDLDREF1";

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// First eight bytes of SHA-256, used to give every run its own RNG stream.
pub fn stream_id(label: &str) -> u64 {
    let digest = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, Default)]
pub struct ReferenceCache {
    dir: Option<PathBuf>,
}

impl ReferenceCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.bin", sha256_hex(key))))
    }

    /// Returns the cached chain for `key`, or builds, stores and returns it.
    /// The flag is true on a cache hit.
    pub fn load_or_build(
        &self,
        key: &str,
        build: impl FnOnce() -> Result<ChainRecord>,
    ) -> Result<(ChainRecord, bool)> {
        let Some(path) = self.path(key) else {
            return Ok((build()?, false));
        };
        if path.exists() {
            if let Ok(chain) = read_chain(&path) {
                return Ok((chain, true));
            }
        }
        let chain = build()?;
        write_chain(&chain, &path)?;
        Ok((chain, false))
    }
}

fn write_chain(chain: &ChainRecord, path: &Path) -> Result<()> {
    let dir = path.parent().expect("cache files live in a directory");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut bytes = Vec::with_capacity(24 + chain.as_flat().len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(chain.dim() as u64).to_le_bytes());
    bytes.extend_from_slice(&(chain.len() as u64).to_le_bytes());
    for v in chain.as_flat() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for count in [chain.accept_jump, chain.accept_langevin] {
        bytes.extend_from_slice(&count.accepted.to_le_bytes());
        bytes.extend_from_slice(&count.proposed.to_le_bytes());
    }
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(&bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn read_chain(path: &Path) -> Result<ChainRecord> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let word = |i: usize| -> Result<[u8; 8]> {
        bytes
            .get(i * 8..i * 8 + 8)
            .map(|b| b.try_into().expect("slice of 8"))
            .with_context(|| format!("{} is truncated", path.display()))
    };
    if word(0)? != *MAGIC {
        bail!("{} is not a reference-chain file", path.display());
    }
    let dim = u64::from_le_bytes(word(1)?) as usize;
    let len = u64::from_le_bytes(word(2)?) as usize;
    let n = dim * len;
    if bytes.len() != (3 + n + 4) * 8 {
        bail!("{} has the wrong size", path.display());
    }
    let values = (0..n).map(|i| Ok(f64::from_le_bytes(word(3 + i)?))).collect::<Result<Vec<_>>>()?;
    let mut chain = ChainRecord::from_samples(dim, values)?;
    let tail = 3 + n;
    chain.accept_jump.accepted = u64::from_le_bytes(word(tail)?);
    chain.accept_jump.proposed = u64::from_le_bytes(word(tail + 1)?);
    chain.accept_langevin.accepted = u64::from_le_bytes(word(tail + 2)?);
    chain.accept_langevin.proposed = u64::from_le_bytes(word(tail + 3)?);
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_chain_round_trips() {
        let dir = std::env::temp_dir().join(format!("jdld-cache-{}", std::process::id()));
        let cache = ReferenceCache::at(&dir);
        let mut chain = ChainRecord::from_samples(2, vec![0.5, -1.0, 1e-300, 3.0]).unwrap();
        chain.accept_jump.accepted = 3;
        chain.accept_jump.proposed = 7;
        let (built, hit) = cache.load_or_build("k", || Ok(chain.clone())).unwrap();
        assert!(!hit);
        let (loaded, hit) = cache.load_or_build("k", || bail!("must not rebuild")).unwrap();
        assert!(hit);
        assert_eq!(built, loaded);
        assert_eq!(loaded, chain);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn stream_ids_differ_by_label() {
        assert_ne!(stream_id("a/jdld"), stream_id("a/mala"));
        assert_eq!(stream_id("x"), stream_id("x"));
        assert_eq!(sha256_hex("").len(), 64);
    }
}
