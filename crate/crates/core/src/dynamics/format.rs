//! `VOTR` binary trajectory files and a CSV dump.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "VOTR"  u32 version = 1  u64 n  u64 M  u64 T
//! M times:  u64 T_m  u8 reached_consensus  (T_m + 1) × ceil(n/8) bytes
//! ```
//!
//! Bit `b` of byte `k` in a time slice is vertex `8k + b`, set for `+1`.
//! Padding bits in the last byte are zero.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Ensemble, Trajectory};
use crate::bits;
use crate::error::{Error, Result};

pub const VOTR_MAGIC: &[u8; 4] = b"VOTR";
pub const VOTR_VERSION: u32 = 1;

pub fn write_votr<W: Write>(ensemble: &Ensemble, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let n = ensemble.n();
    let bytes = n.div_ceil(8);
    out.write_all(VOTR_MAGIC)?;
    out.write_all(&VOTR_VERSION.to_le_bytes())?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(ensemble.len() as u64).to_le_bytes())?;
    out.write_all(&ensemble.horizon().to_le_bytes())?;
    let mut buf = Vec::with_capacity(bytes);
    for tr in ensemble.trajectories() {
        out.write_all(&tr.effective_horizon().to_le_bytes())?;
        out.write_all(&[tr.reached_consensus() as u8])?;
        for slice in tr.raw_slices().chunks_exact(tr.words_per_slice()) {
            buf.clear();
            buf.extend(slice.iter().flat_map(|w| w.to_le_bytes()));
            out.write_all(&buf[..bytes])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::data("file ends before the declared content")
    } else {
        Error::Io(e)
    }
}

/// Reads and validates a `VOTR` stream. The master seed is not stored, so
/// the result has none.
pub fn read_votr<R: Read>(input: R) -> Result<Ensemble> {
    let mut input = BufReader::new(input);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != VOTR_MAGIC {
        return Err(Error::data("missing VOTR magic"));
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version).map_err(truncated)?;
    let version = u32::from_le_bytes(version);
    if version != VOTR_VERSION {
        return Err(Error::data(format!("unsupported VOTR version {version}")));
    }
    let n = read_u64(&mut input).map_err(truncated)?;
    let m = read_u64(&mut input).map_err(truncated)?;
    let horizon = read_u64(&mut input).map_err(truncated)?;
    if n == 0 || m == 0 {
        return Err(Error::data(format!("empty ensemble header (n = {n}, M = {m})")));
    }
    let n = usize::try_from(n).map_err(|_| Error::data("vertex count too large"))?;
    let bytes = n.div_ceil(8);
    let words = bits::words_for(n);
    let mut trajectories = Vec::new();
    let mut raw = vec![0u8; bytes];
    for index in 0..m {
        let t_m = read_u64(&mut input).map_err(truncated)?;
        if t_m > horizon {
            return Err(Error::data(format!(
                "trajectory {index}: T_m = {t_m} exceeds horizon {horizon}"
            )));
        }
        let mut flag = [0u8; 1];
        input.read_exact(&mut flag).map_err(truncated)?;
        let reached = match flag[0] {
            0 => false,
            1 => true,
            other => return Err(Error::data(format!("trajectory {index}: bad consensus flag {other}"))),
        };
        let mut slices = Vec::new();
        for _ in 0..=t_m {
            input.read_exact(&mut raw).map_err(truncated)?;
            let start = slices.len();
            slices.resize(start + words, 0u64);
            for (k, &byte) in raw.iter().enumerate() {
                slices[start + k / 8] |= (byte as u64) << (8 * (k % 8));
            }
        }
        let tr = Trajectory::from_slices(n, horizon, slices, reached)
            .map_err(|e| Error::data(format!("trajectory {index}: {e}")))?;
        trajectories.push(tr);
    }
    let mut probe = [0u8; 1];
    if input.read(&mut probe)? != 0 {
        return Err(Error::data("trailing bytes after the last trajectory"));
    }
    Ensemble::new(trajectories, None)
}

pub fn write_votr_file(ensemble: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    write_votr(ensemble, File::create(path.as_ref())?)
}

/// As [`read_votr`], reporting malformed content as [`Error::Format`].
pub fn read_votr_file(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    read_votr(File::open(path)?).map_err(|e| match e {
        Error::InvalidData(message) => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// `t,vertex,opinion` rows for `t ≤ T_m`.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "t,vertex,opinion")?;
    write_rows(trajectory, None, &mut out)?;
    out.flush()?;
    Ok(())
}

/// `m,t,vertex,opinion` rows for every trajectory.
pub fn write_ensemble_csv<W: Write>(ensemble: &Ensemble, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "m,t,vertex,opinion")?;
    for (m, tr) in ensemble.trajectories().iter().enumerate() {
        write_rows(tr, Some(m), &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn write_rows<W: Write>(tr: &Trajectory, m: Option<usize>, out: &mut W) -> io::Result<()> {
    for t in 0..=tr.effective_horizon() {
        for i in 0..tr.n() {
            if let Some(m) = m {
                write!(out, "{m},")?;
            }
            writeln!(out, "{t},{i},{}", tr.opinion(t, i))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dynamics::simulate_ensemble;
    use crate::graph::{gen_fixed_outdegree, DirectedGraph};

    fn encode(e: &Ensemble) -> Vec<u8> {
        let mut buf = Vec::new();
        write_votr(e, &mut buf).unwrap();
        buf
    }

    #[test]
    fn header_and_bit_layout() {
        let tr = Trajectory::from_opinions(&[vec![1, -1, -1, 1, 1, -1, -1, -1, 1, -1]]).unwrap();
        let e = Ensemble::new(vec![tr], None).unwrap();
        let buf = encode(&e);
        assert_eq!(&buf[..4], b"VOTR");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 10);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 0);
        assert_eq!(u64::from_le_bytes(buf[32..40].try_into().unwrap()), 0);
        assert_eq!(buf[40], 0);
        // vertices 0, 3, 4 in byte 0; vertex 8 is bit 0 of byte 1
        assert_eq!(&buf[41..], &[0b0001_1001, 0b0000_0001]);
    }

    #[test]
    fn rejects_corruption() {
        let g = gen_fixed_outdegree(20, &[2, 3], 1).unwrap();
        let e = simulate_ensemble(&g, 3, 50, 2, true).unwrap();
        let good = encode(&e);
        assert_eq!(read_votr(good.as_slice()).unwrap().trajectories(), e.trajectories());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(read_votr(bad.as_slice()), Err(Error::InvalidData(_))));
        assert!(read_votr(&good[..good.len() - 1]).is_err());
        let mut long = good.clone();
        long.push(0);
        assert!(read_votr(long.as_slice()).is_err());
        // set a padding bit (n = 20 leaves 4 spare bits in the third byte)
        let mut pad = good.clone();
        pad[32 + 9 + 2] |= 0x80;
        assert!(read_votr(pad.as_slice()).is_err());
    }

    #[test]
    fn file_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.votr");
        std::fs::write(&path, b"VOTRxxxx").unwrap();
        match read_votr_file(&path) {
            Err(Error::Format { path: p, .. }) => assert_eq!(p, path),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_rows() {
        let g = DirectedGraph::cycle(2);
        let tr = crate::dynamics::simulate_from(&g, &[1, -1], 1, 0, true).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,vertex,opinion\n0,0,1\n0,1,-1\n1,0,-1\n1,1,1\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roundtrip(n in 3usize..140, m in 1usize..4, horizon in 0u64..60, seed: u64) {
            let g = gen_fixed_outdegree(n, &[1, 2], seed).unwrap();
            let e = simulate_ensemble(&g, m, horizon, seed, true).unwrap();
            let back = read_votr(encode(&e).as_slice()).unwrap();
            prop_assert_eq!(back.trajectories(), e.trajectories());
        }
    }
}
