//! Binary replay files: a little-endian header `u32 n, u32 dim, u32 m`
//! followed by `n` records of `dim` `f64` coordinates and a `u32` group.

use std::io::{self, Read, Write};

use super::StreamPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayHeader {
    pub n: u32,
    pub dim: u32,
    pub m: u32,
}

/// Writes a replay file. Fails if a point has the wrong dimension or group,
/// or if the number of points differs from `header.n`.
pub fn write_replay<W, I>(mut w: W, header: ReplayHeader, points: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = StreamPoint<f64>>,
{
    for v in [header.n, header.dim, header.m] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut written = 0u32;
    for p in points {
        if p.coords.len() != header.dim as usize || p.group >= header.m as usize {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "point does not match header",
            ));
        }
        for c in &p.coords {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&(p.group as u32).to_le_bytes())?;
        written += 1;
    }
    if written != header.n {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "point count does not match header",
        ));
    }
    w.flush()
}

/// Iterates the points of a replay file, reading each record once.
#[derive(Debug)]
pub struct ReplayReader<R> {
    inner: R,
    header: ReplayHeader,
    remaining: u32,
}

impl<R: Read> ReplayReader<R> {
    pub fn new(mut inner: R) -> io::Result<Self> {
        let mut word = [0u8; 4];
        let mut next = || -> io::Result<u32> {
            inner.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let header = ReplayHeader {
            n: next()?,
            dim: next()?,
            m: next()?,
        };
        if header.dim == 0 || header.m == 0 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "zero dimension or group count",
            ));
        }
        Ok(Self {
            inner,
            header,
            remaining: header.n,
        })
    }

    pub fn header(&self) -> ReplayHeader {
        self.header
    }

    fn read_point(&mut self) -> io::Result<StreamPoint<f64>> {
        let mut coords = Vec::with_capacity(self.header.dim as usize);
        let mut buf = [0u8; 8];
        for _ in 0..self.header.dim {
            self.inner.read_exact(&mut buf)?;
            coords.push(f64::from_le_bytes(buf));
        }
        let mut word = [0u8; 4];
        self.inner.read_exact(&mut word)?;
        let group = u32::from_le_bytes(word);
        if group >= self.header.m {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("group {group} out of range"),
            ));
        }
        Ok(StreamPoint::new(coords, group as usize))
    }
}

impl<R: Read> Iterator for ReplayReader<R> {
    type Item = io::Result<StreamPoint<f64>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let p = self.read_point();
        if p.is_err() {
            self.remaining = 0;
        }
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, Some(self.remaining as usize))
    }
}
