//! Binary checkpoint format.
//!
//! ```text
//! "FASUM1"
//! u32 config length, config text (key = value lines)
//! u32 parameter count
//! per parameter, in sorted-name order:
//!   u32 name length, name, u32 rank, u32 dims..., f32 values (little endian)
//! ```

use crate::error::{Error, Result};

use super::params::ParameterStore;
use super::tensor::Tensor;

pub const MAGIC: &[u8; 6] = b"FASUM1";

pub fn encode(store: &ParameterStore, config: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + store.value_count() * 4);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, config.len());
    out.extend_from_slice(config.as_bytes());
    put_u32(&mut out, store.len());
    for (name, t) in store.iter() {
        put_u32(&mut out, name.len());
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, t.shape().len());
        for &d in t.shape() {
            put_u32(&mut out, d);
        }
        for &v in t.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&u32::try_from(v).expect("fits in u32").to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("non UTF-8 text".into()))
    }
}

/// Parses a checkpoint into its config echo and parameters.
pub fn decode(bytes: &[u8]) -> Result<(String, ParameterStore)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let config = r.string()?;
    let count = r.u32()?;
    let mut store = ParameterStore::new(0);
    let mut previous: Option<String> = None;
    for _ in 0..count {
        let name = r.string()?;
        if previous.as_ref().is_some_and(|p| *p >= name) {
            return Err(Error::Checkpoint(format!("parameter `{name}` out of order")));
        }
        let rank = r.u32()?;
        let shape = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let raw = r.take(n * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        store.insert(&name, Tensor::new(shape, data)?);
        previous = Some(name);
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok((config, store))
}

/// Copies checkpoint values into `template`, requiring identical names
/// and shapes.
pub fn load_into(bytes: &[u8], template: &mut ParameterStore) -> Result<String> {
    let (config, loaded) = decode(bytes)?;
    let want: Vec<(&str, &[usize])> = template.iter().map(|(n, t)| (n, t.shape())).collect();
    let got: Vec<(&str, &[usize])> = loaded.iter().map(|(n, t)| (n, t.shape())).collect();
    if want != got {
        let missing: Vec<_> = want.iter().filter(|w| !got.contains(w)).take(3).collect();
        let extra: Vec<_> = got.iter().filter(|g| !want.contains(g)).take(3).collect();
        return Err(Error::Checkpoint(format!(
            "parameter mismatch; expected but absent: {missing:?}; unexpected: {extra:?}"
        )));
    }
    for (name, t) in loaded.iter() {
        template.set(name, t.data().to_vec());
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParameterStore {
        let mut s = ParameterStore::new(3);
        s.add_xavier("b.weight", 3, 4);
        s.add_zeros("a.bias", vec![4]);
        s
    }

    #[test]
    fn round_trip_at_f32() {
        let s = sample();
        let bytes = encode(&s, "model = test\n");
        assert_eq!(&bytes[..6], MAGIC);
        let (config, back) = decode(&bytes).unwrap();
        assert_eq!(config, "model = test\n");
        assert!(s.max_abs_diff(&back) < 1e-7);
        assert_eq!(back.names().collect::<Vec<_>>(), ["a.bias", "b.weight"]);
    }

    #[test]
    fn shape_disagreement_fails_loudly() {
        let bytes = encode(&sample(), "");
        let mut other = ParameterStore::new(0);
        other.add_xavier("b.weight", 4, 3);
        other.add_zeros("a.bias", vec![4]);
        assert!(matches!(load_into(&bytes, &mut other), Err(Error::Checkpoint(_))));
        let mut same = sample();
        load_into(&bytes, &mut same).unwrap();
    }

    #[test]
    fn corrupt_bytes_are_rejected() {
        let bytes = encode(&sample(), "x");
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(b"FASUM2").is_err());
    }
}
