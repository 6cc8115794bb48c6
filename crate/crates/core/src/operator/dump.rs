//! Matrix dumps: a little-endian binary format and a CSV listing.
//!
//! Binary layout: `N` as `u64`, then `N * N` entries in row-major order, each
//! a pair of `f32` (real, imaginary).

use std::io::{Read, Write};

use num_complex::Complex;

use super::CMat;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn write_binary<T: Real, W: Write>(m: &CMat<T>, mut w: W) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::SizeMismatch {
            left: m.nrows(),
            right: m.ncols(),
        });
    }
    let n = m.nrows();
    let mut buf = Vec::with_capacity(8 + 8 * n * n);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            let c = m[(i, j)];
            buf.extend_from_slice(&(c.re.as_f64() as f32).to_le_bytes());
            buf.extend_from_slice(&(c.im.as_f64() as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<CMat<f64>> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    let n = u64::from_le_bytes(head) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 8 * n * n {
        return Err(Error::Invalid(format!(
            "dump body has {} bytes, expected {}",
            body.len(),
            8 * n * n
        )));
    }
    let f = |o: usize| f32::from_le_bytes(body[o..o + 4].try_into().expect("4 bytes")) as f64;
    Ok(CMat::from_fn(n, n, |i, j| {
        let o = 8 * (i * n + j);
        Complex::new(f(o), f(o + 4))
    }))
}

/// `row,col,re,im` with one line per entry.
pub fn write_csv<T: Real, W: Write>(m: &CMat<T>, mut w: W) -> Result<()> {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let c = m[(i, j)];
            out.push_str(&format!("{i},{j},{:e},{:e}\n", c.re.as_f64(), c.im.as_f64()));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let m = CMat::<f64>::from_fn(3, 3, |i, j| Complex::new(i as f64 + 0.5, j as f64 - 0.25));
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 72);
        assert_eq!(&buf[..8], &3u64.to_le_bytes());
        assert_eq!(read_binary(&buf[..]).unwrap(), m);
        assert!(read_binary(&buf[..20]).is_err());
    }

    #[test]
    fn csv_lists_every_entry() {
        let m = CMat::<f64>::identity(2, 2);
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("1,1,1e0,0e0"));
    }
}
