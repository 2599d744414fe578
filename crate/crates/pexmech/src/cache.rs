//! Compact binary cache for mechanism tables, keyed by mechanism and grid
//! hashes so repeated verification runs skip re-tabulation.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::MechanismTable;
use crate::grid::GridSpec;
use crate::set::ItemSet;

const MAGIC: &[u8; 8] = b"PEXTBL01";

/// Hash of a serializable description (mechanism JSON, grid JSON).
pub fn content_key<T: serde::Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(32);
    for b in digest.iter().take(16) {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Cache file path for a (mechanism, grid) pair under `dir`.
pub fn cache_path<T: serde::Serialize>(dir: &Path, mechanism: &T, grid: &GridSpec) -> PathBuf {
    dir.join(format!(
        "{}_{}.tbl",
        content_key(mechanism),
        content_key(grid)
    ))
}

fn write_u64(w: &mut impl Write, x: u64) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Write a table to the binary cache format: header, grid JSON, then one
/// 16-byte bundle mask per (profile, player).
pub fn save_table(path: &Path, table: &MechanismTable) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    w.write_all(MAGIC)?;
    let grid_json = serde_json::to_vec(&table.grid).expect("grid serializes");
    write_u64(&mut w, grid_json.len() as u64)?;
    w.write_all(&grid_json)?;
    let rule = table.rule_name.as_bytes();
    write_u64(&mut w, rule.len() as u64)?;
    w.write_all(rule)?;
    write_u64(&mut w, table.profile_count())?;
    for index in 0..table.profile_count() {
        for player in 1..=table.grid.players {
            w.write_all(&table.bundle(index, player).bits().to_le_bytes())?;
        }
    }
    w.flush()
}

/// Read a table back; `None` when the file is absent.
pub fn load_table(path: &Path) -> io::Result<Option<MechanismTable>> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut r = io::BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let grid_len = read_u64(&mut r)? as usize;
    let mut grid_json = vec![0u8; grid_len];
    r.read_exact(&mut grid_json)?;
    let grid: GridSpec = serde_json::from_slice(&grid_json)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let rule_len = read_u64(&mut r)? as usize;
    let mut rule = vec![0u8; rule_len];
    r.read_exact(&mut rule)?;
    let rule_name = String::from_utf8(rule)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let count = read_u64(&mut r)?;
    let mut bundles = Vec::with_capacity(count as usize * grid.players);
    let mut buf = [0u8; 16];
    for _ in 0..count * grid.players as u64 {
        r.read_exact(&mut buf)?;
        bundles.push(ItemSet::from_bits(u128::from_le_bytes(buf)));
    }
    Ok(Some(MechanismTable::from_parts(grid, rule_name, bundles)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::tabulate_spec;
    use crate::grid::DEFAULT_BUDGET;
    use crate::presets;
    use crate::rat::qi;

    #[test]
    fn round_trip_through_the_cache() {
        let grid = GridSpec::new(5, vec![qi(1), qi(6)], true, 2).unwrap();
        let spec = presets::exchange_five();
        let table = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        let dir = std::env::temp_dir().join("pexmech-cache-test");
        let path = cache_path(&dir, &spec, &grid);
        save_table(&path, &table).unwrap();
        let back = load_table(&path).unwrap().unwrap();
        assert_eq!(back, table);
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn keys_separate_specs_and_grids() {
        let g1 = GridSpec::new(5, vec![qi(1), qi(6)], true, 2).unwrap();
        let g2 = GridSpec::new(5, vec![qi(1), qi(7)], true, 2).unwrap();
        assert_ne!(content_key(&g1), content_key(&g2));
        assert_ne!(
            content_key(&presets::exchange_five()),
            content_key(&presets::picking_six())
        );
    }
}
