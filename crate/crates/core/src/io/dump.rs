//! Binary field dumps: a line-oriented text header followed by a little-endian
//! `f64` payload ordered `(time, lattice point, component)`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, SampledField};

const MAGIC: &str = "FRACFLOW-FIELD";
const VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn payload(f: &SampledField) -> Vec<u8> {
    let mut out = Vec::with_capacity(f.values().len() * 8);
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_dump(f: &SampledField) -> Vec<u8> {
    let body = payload(f);
    let g = f.grid();
    let mut head = String::new();
    head.push_str(&format!("{MAGIC} {VERSION}\n"));
    head.push_str(&format!("dim {}\n", g.dim()));
    head.push_str(&format!("n {}\n", g.n()));
    head.push_str(&format!("period {:e}\n", g.period()));
    head.push_str(&format!("components {}\n", f.components()));
    head.push_str(&format!("times {}\n", f.len_times()));
    head.push_str("endianness little\n");
    head.push_str(&format!("elements {}\n", f.values().len()));
    head.push_str(&format!("sha256 {}\n", sha256_hex(&body)));
    for t in f.times() {
        head.push_str(&format!("t {t:e}\n"));
    }
    head.push_str("end\n");
    let mut out = head.into_bytes();
    out.extend_from_slice(&body);
    out
}

pub fn write_dump(path: &Path, f: &SampledField) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_dump(f))?;
    Ok(())
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected `{key}`, found `{line}`")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad {what}: `{s}`")))
}

pub fn decode_dump(mut r: impl BufRead) -> Result<SampledField> {
    let mut next = || -> Result<String> {
        let mut s = String::new();
        if r.read_line(&mut s)? == 0 {
            return Err(Error::Format("truncated header".into()));
        }
        Ok(s.trim_end_matches('\n').to_string())
    };
    let first = next()?;
    let version: u32 = parse(field(&first, MAGIC)?, "version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim: usize = parse(field(&next()?, "dim")?, "dim")?;
    let n: usize = parse(field(&next()?, "n")?, "n")?;
    let period: f64 = parse(field(&next()?, "period")?, "period")?;
    let comps: usize = parse(field(&next()?, "components")?, "components")?;
    let nt: usize = parse(field(&next()?, "times")?, "times")?;
    let endian = next()?;
    if field(&endian, "endianness")? != "little" {
        return Err(Error::Format(format!("unsupported {endian}")));
    }
    let elements: usize = parse(field(&next()?, "elements")?, "elements")?;
    let sha = field(&next()?, "sha256")?.to_string();
    let mut times = Vec::with_capacity(nt);
    for _ in 0..nt {
        times.push(parse(field(&next()?, "t")?, "time")?);
    }
    if next()? != "end" {
        return Err(Error::Format("missing `end` line".into()));
    }
    drop(next);
    let grid = PeriodicGrid::new(dim, n, period).map_err(|e| Error::Format(e.to_string()))?;
    let expected = nt * grid.len() * comps;
    if elements != expected {
        return Err(Error::Format(format!("header declares {elements} elements, shape needs {expected}")));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != elements * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected {}",
            body.len(),
            elements * 8
        )));
    }
    if sha256_hex(&body) != sha {
        return Err(Error::Format("payload checksum mismatch".into()));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    SampledField::new(grid, times, comps, values)
}

pub fn read_dump(path: &Path) -> Result<SampledField> {
    decode_dump(BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;

    fn sample() -> SampledField {
        let g = PeriodicGrid::new(2, 8, 3.0).unwrap();
        let a = ScalarField::from_fn(&g, |x| x[0].sin() + 0.1 * x[1]);
        let b = a.scaled(-0.5);
        SampledField::from_scalar_snapshots(vec![0.0, 0.1], &[a, b]).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = sample();
        let back = decode_dump(&encode_dump(&f)[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn corrupted_payload_is_detected() {
        let mut bytes = encode_dump(&sample());
        let last = bytes.len() - 3;
        bytes[last] ^= 0x40;
        assert!(decode_dump(&bytes[..]).unwrap_err().to_string().contains("checksum"));
        bytes.truncate(bytes.len() - 8);
        assert!(decode_dump(&bytes[..]).is_err());
    }

    #[test]
    fn header_shape_mismatch_is_detected() {
        let bytes = encode_dump(&sample());
        let split = bytes.windows(4).position(|w| w == b"end\n").unwrap() + 4;
        let head = String::from_utf8(bytes[..split].to_vec()).unwrap().replace("elements 128", "elements 64");
        let mut edited = head.into_bytes();
        edited.extend_from_slice(&bytes[split..]);
        let e = decode_dump(&edited[..]).unwrap_err();
        assert!(e.to_string().contains("shape"), "{e}");
    }
}
