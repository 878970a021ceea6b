//! The `WLF1` field snapshot format.
//!
//! Layout (little-endian): magic `WLF1`, `u32` version (= 1), `u32` d,
//! `u32` N, `u8` reality flag, then `(2N+1)^d` pairs of `f64` `(re, im)` in
//! lattice order.

use std::fs;
use std::path::Path;

use num_complex::Complex;

use super::field::SpectralField;
use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::Scalar;

pub const MAGIC: &[u8; 4] = b"WLF1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 17;

pub fn serialize_field<T: Scalar>(f: &SpectralField<T>) -> Vec<u8> {
    let lat = f.lattice();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * lat.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(lat.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(lat.cutoff() as u32).to_le_bytes());
    out.push(u8::from(f.is_real()));
    for c in f.coeffs() {
        out.extend_from_slice(&c.re.as_f64().to_le_bytes());
        out.extend_from_slice(&c.im.as_f64().to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize, field: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
        .ok_or(Error::Format {
            field,
            detail: "stream ends inside the header".into(),
        })
}

pub fn deserialize_field<T: Scalar>(bytes: &[u8]) -> Result<SpectralField<T>> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format {
            field: "magic",
            detail: "expected WLF1".into(),
        });
    }
    let version = read_u32(bytes, 4, "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format {
            field: "version",
            detail: format!("unsupported version {version}"),
        });
    }
    let d = read_u32(bytes, 8, "d")? as usize;
    let cutoff = read_u32(bytes, 12, "N")? as usize;
    let flag = *bytes.get(16).ok_or(Error::Format {
        field: "real_flag",
        detail: "stream ends inside the header".into(),
    })?;
    let real = match flag {
        0 => false,
        1 => true,
        other => {
            return Err(Error::Format {
                field: "real_flag",
                detail: format!("flag byte {other} is neither 0 nor 1"),
            })
        }
    };
    let lattice = Lattice::new(d, cutoff).map_err(|e| Error::Format {
        field: "d",
        detail: e.to_string(),
    })?;
    let expected = HEADER_LEN + 16 * lattice.len();
    if bytes.len() != expected {
        return Err(Error::Format {
            field: "coefficients",
            detail: format!("expected {expected} bytes, found {}", bytes.len()),
        });
    }
    let coeffs = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
            Complex::new(T::of(re), T::of(im))
        })
        .collect();
    SpectralField::new(lattice, coeffs, real).map_err(|e| Error::Format {
        field: "coefficients",
        detail: e.to_string(),
    })
}

pub fn write_field<T: Scalar>(path: impl AsRef<Path>, f: &SpectralField<T>) -> Result<()> {
    fs::write(path, serialize_field(f))?;
    Ok(())
}

pub fn read_field<T: Scalar>(path: impl AsRef<Path>) -> Result<SpectralField<T>> {
    deserialize_field(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_stream_is_33_bytes() {
        let lat = Lattice::new(1, 0).unwrap();
        let f = SpectralField::<f64>::zeros(lat, true);
        let bytes = serialize_field(&f);
        assert_eq!(bytes.len(), 33);
        assert_eq!(deserialize_field::<f64>(&bytes).unwrap(), f);
    }

    #[test]
    fn bad_streams_name_the_field() {
        let lat = Lattice::new(2, 1).unwrap();
        let f = SpectralField::<f64>::constant(lat, 2.5);
        let bytes = serialize_field(&f);

        let err = deserialize_field::<f64>(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Format { field: "coefficients", .. }));

        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(deserialize_field::<f64>(&wrong), Err(Error::Format { field: "magic", .. })));

        let mut wrong = bytes.clone();
        wrong[4] = 7;
        assert!(matches!(deserialize_field::<f64>(&wrong), Err(Error::Format { field: "version", .. })));

        assert!(matches!(deserialize_field::<f64>(&bytes[..10]), Err(Error::Format { field: "d", .. })));
        assert!(matches!(deserialize_field::<f64>(&bytes[..14]), Err(Error::Format { field: "N", .. })));
        assert!(matches!(deserialize_field::<f64>(&bytes[..16]), Err(Error::Format { field: "real_flag", .. })));
    }
}
