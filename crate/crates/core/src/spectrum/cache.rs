//! Binary spectrum cache (`GSPC`) and CSV export.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "GSPC" | version u32 | crc64 u64 | payload
//! payload = name_len u32, name bytes, n_generators u32, 4 x f64 per generator,
//!           max_word_length u32, filter flag u8 + 2 x i32, horizon f64,
//!           skipped u64, record_count u64, records
//! record  = word_length u16, packed letters (2 bits each), length f64,
//!           trace f64, iteration u32, h1 i32, h2 i32, flags u8
//! ```
//!
//! The checksum covers the whole payload, so truncation anywhere after the
//! fixed prefix is reported as a checksum failure.

use std::fs;
use std::io::Write;
use std::path::Path;

use crc::{Crc, CRC_64_ECMA_182};

use super::enumerate::{GeodesicRecord, SpectrumTable};
use super::word::CyclicWord;
use crate::error::{Error, Result};
use crate::hypgeom::MoebiusMatrix;

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"GSPC";
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);
const FLAG_PRIMITIVE: u8 = 1;

fn packed_len(max_word_length: u32) -> usize {
    (max_word_length as usize).div_ceil(4)
}

fn record_width(max_word_length: u32) -> usize {
    2 + packed_len(max_word_length) + 8 + 8 + 4 + 4 + 4 + 1
}

pub fn save_spectrum(table: &SpectrumTable, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(table)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<SpectrumTable> {
    decode(&fs::read(path)?)
}

pub fn encode(table: &SpectrumTable) -> Result<Vec<u8>> {
    if table.rank() > 2 {
        return Err(Error::UnsupportedPresentation(
            "2-bit letter packing supports rank <= 2".into(),
        ));
    }
    let mut p = Vec::new();
    let name = table.group_name.as_bytes();
    p.extend((name.len() as u32).to_le_bytes());
    p.extend(name);
    p.extend((table.generators.len() as u32).to_le_bytes());
    for g in &table.generators {
        for x in g.entries() {
            p.extend(x.to_le_bytes());
        }
    }
    p.extend(table.max_word_length.to_le_bytes());
    let (flag, (h1, h2)) = match table.homology_filter {
        Some(h) => (1u8, h),
        None => (0u8, (0, 0)),
    };
    p.push(flag);
    p.extend(h1.to_le_bytes());
    p.extend(h2.to_le_bytes());
    p.extend(table.horizon.to_le_bytes());
    p.extend(table.skipped_non_hyperbolic.to_le_bytes());
    p.extend((table.records.len() as u64).to_le_bytes());

    let packed = packed_len(table.max_word_length);
    for r in &table.records {
        let letters = r.word.letters();
        if letters.len() > table.max_word_length as usize {
            return Err(Error::CacheMalformed(format!(
                "word {} exceeds max_word_length {}",
                r.word, table.max_word_length
            )));
        }
        p.extend((letters.len() as u16).to_le_bytes());
        let mut buf = vec![0u8; packed];
        for (i, &l) in letters.iter().enumerate() {
            buf[i / 4] |= l << (2 * (i % 4));
        }
        p.extend(buf);
        p.extend(r.length.to_le_bytes());
        p.extend(r.trace.to_le_bytes());
        p.extend(r.iteration.to_le_bytes());
        p.extend(r.homology.0.to_le_bytes());
        p.extend(r.homology.1.to_le_bytes());
        p.push(if r.is_primitive { FLAG_PRIMITIVE } else { 0 });
    }

    let mut out = Vec::with_capacity(16 + p.len());
    out.extend(MAGIC);
    out.extend(CACHE_VERSION.to_le_bytes());
    out.extend(CRC64.checksum(&p).to_le_bytes());
    out.extend(p);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::CacheMalformed(format!("unexpected end of data at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice length"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<SpectrumTable> {
    let mut head = Reader { buf: bytes, pos: 0 };
    if head.take(4)? != MAGIC {
        return Err(Error::CacheMalformed("missing GSPC magic".into()));
    }
    let version = head.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::CacheVersion {
            found: version,
            expected: CACHE_VERSION,
        });
    }
    let stored = head.u64()?;
    let payload = &bytes[head.pos..];
    let computed = CRC64.checksum(payload);
    if stored != computed {
        return Err(Error::CacheChecksum { stored, computed });
    }

    let mut r = Reader { buf: payload, pos: 0 };
    let name_len = r.u32()? as usize;
    let group_name = String::from_utf8(r.take(name_len)?.to_vec())
        .map_err(|_| Error::CacheMalformed("group name is not UTF-8".into()))?;
    let n_gen = r.u32()? as usize;
    if n_gen > 2 {
        return Err(Error::CacheMalformed(format!(
            "{n_gen} generators; at most 2 supported"
        )));
    }
    let mut generators = Vec::with_capacity(n_gen);
    for _ in 0..n_gen {
        let (a, b, c, d) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
        generators.push(MoebiusMatrix { a, b, c, d });
    }
    let max_word_length = r.u32()?;
    let flag = r.u8()?;
    let h = (r.i32()?, r.i32()?);
    let homology_filter = match flag {
        0 => None,
        1 => Some(h),
        f => return Err(Error::CacheMalformed(format!("invalid filter flag {f}"))),
    };
    let horizon = r.f64()?;
    let skipped_non_hyperbolic = r.u64()?;
    let count = r.u64()? as usize;
    let width = record_width(max_word_length);
    if payload.len() - r.pos != count.saturating_mul(width) {
        return Err(Error::CacheMalformed(format!(
            "{count} records of {width} bytes expected, {} bytes present",
            payload.len() - r.pos
        )));
    }
    let packed = packed_len(max_word_length);
    let n_letters = 2 * n_gen as u8;
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let wl = r.u16()? as usize;
        let buf = r.take(packed)?;
        if wl == 0 || wl > max_word_length as usize {
            return Err(Error::CacheMalformed(format!("record {i}: word length {wl}")));
        }
        let letters: Vec<u8> = (0..wl).map(|k| (buf[k / 4] >> (2 * (k % 4))) & 3).collect();
        if letters.iter().any(|&l| l >= n_letters) {
            return Err(Error::CacheMalformed(format!(
                "record {i}: letter outside the presentation"
            )));
        }
        let word = CyclicWord::new(letters.iter().copied());
        if word.letters() != letters.as_slice() {
            return Err(Error::CacheMalformed(format!("record {i}: word is not canonical")));
        }
        let length = r.f64()?;
        let trace = r.f64()?;
        let iteration = r.u32()?;
        let homology = (r.i32()?, r.i32()?);
        let flags = r.u8()?;
        if flags & !FLAG_PRIMITIVE != 0 {
            return Err(Error::CacheMalformed(format!("record {i}: unknown flags {flags:#04x}")));
        }
        records.push(GeodesicRecord {
            word,
            trace,
            length,
            is_primitive: flags & FLAG_PRIMITIVE != 0,
            iteration,
            homology,
            word_length: wl as u32,
        });
    }
    Ok(SpectrumTable {
        group_name,
        generators,
        max_word_length,
        homology_filter,
        horizon,
        skipped_non_hyperbolic,
        records,
    })
}

/// CSV with columns `word,length,trace,primitive,iteration,h1,h2`.
pub fn write_csv<W: std::io::Write>(table: &SpectrumTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["word", "length", "trace", "primitive", "iteration", "h1", "h2"])
        .map_err(io)?;
    for r in &table.records {
        w.write_record([
            r.word.to_string(),
            crate::numfmt::fmt17(r.length),
            crate::numfmt::fmt17(r.trace),
            r.is_primitive.to_string(),
            r.iteration.to_string(),
            r.homology.0.to_string(),
            r.homology.1.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{enumerate_spectrum, EnumerationOptions, GroupPresentation};

    fn table() -> SpectrumTable {
        let g = GroupPresentation::preset("modular-torus").unwrap();
        enumerate_spectrum(&g, 8, None, EnumerationOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = table();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.gspc");
        save_spectrum(&t, &p).unwrap();
        let back = load_spectrum(&p).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.records.iter().zip(&t.records) {
            assert_eq!(a.length.to_bits(), b.length.to_bits());
            assert_eq!(a.trace.to_bits(), b.trace.to_bits());
        }
        assert_eq!(back.horizon.to_bits(), t.horizon.to_bits());
    }

    #[test]
    fn truncation_is_a_checksum_failure() {
        let bytes = encode(&table()).unwrap();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(decode(cut), Err(Error::CacheChecksum { .. })));
    }

    #[test]
    fn older_version_names_both() {
        let mut bytes = encode(&table()).unwrap();
        bytes[4..8].copy_from_slice(&0u32.to_le_bytes());
        let e = decode(&bytes).unwrap_err();
        assert_eq!(
            e,
            Error::CacheVersion {
                found: 0,
                expected: CACHE_VERSION
            }
        );
        let msg = e.to_string();
        assert!(msg.contains('0') && msg.contains(&CACHE_VERSION.to_string()));
    }

    #[test]
    fn bad_magic_is_malformed() {
        let mut bytes = encode(&table()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::CacheMalformed(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = table();
        let mut out = Vec::new();
        write_csv(&t, &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("word,length,trace,primitive,iteration,h1,h2"));
        assert_eq!(lines.count(), t.records.len());
    }
}
