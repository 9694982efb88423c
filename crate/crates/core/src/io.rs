//! On-disk formats.
//!
//! K-space files: the 8-byte magic `SWCSKSP1`, the trajectory count `M` and
//! samples per trajectory `K` as little-endian `u32`, then `M * K` samples
//! as little-endian `f64` pairs `(re, im)`, trajectory by trajectory.
//! Trajectories are numbered `1..=M` in file order.
//!
//! Images are flat little-endian `f32` rasters, row-major: real images hold
//! `n * n` values, complex ones `n * n` interleaved `(re, im)` pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::operators::KSpaceData;

pub const KSPACE_MAGIC: &[u8; 8] = b"SWCSKSP1";
const KSPACE_HEADER: usize = 16;

pub fn write_kspace<W: Write>(mut w: W, y: &KSpaceData) -> Result<()> {
    if y.trajectory_indices().iter().enumerate().any(|(i, &m)| m != i + 1) {
        return Err(SwcsError::format("k-space file", "trajectories must be numbered 1..=M in order"));
    }
    let m = u32::try_from(y.trajectory_count()).map_err(|_| SwcsError::format("k-space file", "too many trajectories"))?;
    let k = u32::try_from(y.k()).map_err(|_| SwcsError::format("k-space file", "too many samples per trajectory"))?;
    let mut buf = Vec::with_capacity(KSPACE_HEADER + 16 * y.samples().len());
    buf.extend_from_slice(KSPACE_MAGIC);
    buf.extend_from_slice(&m.to_le_bytes());
    buf.extend_from_slice(&k.to_le_bytes());
    for v in y.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Parses a complete k-space file held in memory.
pub fn parse_kspace(bytes: &[u8]) -> Result<KSpaceData> {
    let bad = |reason: String| SwcsError::format("k-space file", reason);
    if bytes.len() < KSPACE_HEADER {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..8] != KSPACE_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let m = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let k = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if m == 0 {
        return Err(bad("no trajectories".into()));
    }
    if k < 2 || k % 2 != 0 {
        return Err(bad(format!("samples per trajectory must be even and >= 2, got {k}")));
    }
    let expected = m.checked_mul(k).and_then(|s| s.checked_mul(16)).and_then(|s| s.checked_add(KSPACE_HEADER));
    if expected != Some(bytes.len()) {
        return Err(bad(format!("header promises {m} x {k} samples but the file holds {} bytes", bytes.len())));
    }
    let samples: Vec<Complex64> = bytes[KSPACE_HEADER..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    if let Some(i) = samples.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(bad(format!("non-finite sample at trajectory {}, index {}", i / k + 1, i % k)));
    }
    KSpaceData::new(k, (1..=m).collect(), samples)
}

pub fn read_kspace<R: Read>(mut r: R) -> Result<KSpaceData> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_kspace(&bytes)
}

fn f32_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|v| (v as f32).to_le_bytes()).collect()
}

pub fn write_real_f32<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    w.write_all(&f32_bytes(values.iter().copied()))?;
    Ok(())
}

pub fn write_complex_f32<W: Write>(mut w: W, img: &Image) -> Result<()> {
    w.write_all(&f32_bytes(img.data().iter().flat_map(|v| [v.re, v.im])))?;
    Ok(())
}

/// Splits a flat `f32` volume into frames of `frame_len` values.
pub fn parse_f32_volume(bytes: &[u8], frame_len: usize) -> Result<Vec<Vec<f32>>> {
    let bad = |reason: String| SwcsError::format("f32 volume", reason);
    if frame_len == 0 {
        return Err(bad("frame length must be positive".into()));
    }
    if bytes.len() % 4 != 0 {
        return Err(bad(format!("{} bytes is not a whole number of f32 values", bytes.len())));
    }
    let values: Vec<f32> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    if values.is_empty() || values.len() % frame_len != 0 {
        return Err(bad(format!("{} values do not form whole frames of {frame_len}", values.len())));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(bad(format!("non-finite value at index {i}")));
    }
    Ok(values.chunks_exact(frame_len).map(<[f32]>::to_vec).collect())
}

/// Reads one real `n x n` image.
pub fn parse_real_image(bytes: &[u8], n: usize) -> Result<Image> {
    let frames = parse_f32_volume(bytes, n * n)?;
    if frames.len() != 1 {
        return Err(SwcsError::format("f32 image", format!("expected one {n}x{n} frame, found {}", frames.len())));
    }
    let data: Vec<f64> = frames[0].iter().map(|&v| v as f64).collect();
    Image::from_real(n, &data)
}

/// Reads one complex `n x n` image.
pub fn parse_complex_image(bytes: &[u8], n: usize) -> Result<Image> {
    let frames = parse_f32_volume(bytes, 2 * n * n)?;
    if frames.len() != 1 {
        return Err(SwcsError::format("c32 image", format!("expected one {n}x{n} frame, found {}", frames.len())));
    }
    let data = frames[0].chunks_exact(2).map(|c| Complex64::new(c[0] as f64, c[1] as f64)).collect();
    Image::from_vec(n, data)
}

/// 8-bit binary PGM with per-image min-max scaling. A constant image maps
/// to black.
pub fn write_pgm<W: Write>(mut w: W, n: usize, values: &[f64]) -> Result<()> {
    if values.len() != n * n {
        return Err(SwcsError::shape(format!("{} pixels", n * n), values.len()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut buf = format!("P5\n{n} {n}\n255\n").into_bytes();
    buf.extend(values.iter().map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 }));
    w.write_all(&buf)?;
    Ok(())
}

/// `iteration,residual` rows.
pub fn write_convergence_csv<W: Write>(mut w: W, residuals: &[f64]) -> Result<()> {
    writeln!(w, "iteration,residual")?;
    for (i, r) in residuals.iter().enumerate() {
        writeln!(w, "{i},{r:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> KSpaceData {
        let samples = (0..12).map(|i| Complex64::new(i as f64 * 0.5, -(i as f64))).collect();
        KSpaceData::new(4, vec![1, 2, 3], samples).unwrap()
    }

    fn encoded() -> Vec<u8> {
        let mut buf = Vec::new();
        write_kspace(&mut buf, &data()).unwrap();
        buf
    }

    #[test]
    fn kspace_roundtrip() {
        let buf = encoded();
        assert_eq!(buf.len(), 16 + 12 * 16);
        assert_eq!(&buf[..8], b"SWCSKSP1");
        assert_eq!(&buf[8..16], &[3, 0, 0, 0, 4, 0, 0, 0]);
        assert_eq!(read_kspace(buf.as_slice()).unwrap(), data());
    }

    #[test]
    fn kspace_rejects_corrupt_input() {
        let buf = encoded();
        let bad = |b: &[u8]| matches!(parse_kspace(b), Err(SwcsError::Format { .. }));
        assert!(bad(&buf[..10]));
        assert!(bad(&buf[..buf.len() - 1]));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(bad(&extra));
        let mut magic = buf.clone();
        magic[0] = b'X';
        assert!(bad(&magic));
        let mut odd = buf.clone();
        odd[12] = 3;
        assert!(bad(&odd));
        let mut zero = buf.clone();
        zero[8] = 0;
        assert!(bad(&zero));
        let mut huge = buf.clone();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(bad(&huge));
        let mut nan = buf;
        nan[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(bad(&nan));
    }

    #[test]
    fn kspace_writer_requires_sequential_trajectories() {
        let y = data().select(&[2, 3]).unwrap();
        assert!(write_kspace(Vec::new(), &y).is_err());
    }

    #[test]
    fn complex_image_roundtrip() {
        let img = Image::from_fn(4, |x, y| Complex64::new(x, 0.25 * y));
        let mut buf = Vec::new();
        write_complex_f32(&mut buf, &img).unwrap();
        assert_eq!(buf.len(), 16 * 8);
        assert_eq!(parse_complex_image(&buf, 4).unwrap().data(), img.data());
        assert!(parse_complex_image(&buf, 2).is_err());
    }

    #[test]
    fn real_volume_parsing() {
        let mut buf = Vec::new();
        write_real_f32(&mut buf, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let frames = parse_f32_volume(&buf, 4).unwrap();
        assert_eq!(frames, vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]]);
        assert!(parse_f32_volume(&buf, 3).is_err());
        assert!(parse_f32_volume(&buf[..7], 1).is_err());
        assert!(parse_f32_volume(&[], 1).is_err());
        assert!(parse_f32_volume(&f32::INFINITY.to_le_bytes(), 1).is_err());
        assert_eq!(parse_real_image(&buf[..16], 2).unwrap().magnitude(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn pgm_scales_min_to_max() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 2, &[-1.0, 0.0, 1.0, 0.5]).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(&buf[header.len()..], &[0, 128, 255, 191]);
        let mut flat = Vec::new();
        write_pgm(&mut flat, 1, &[3.0]).unwrap();
        assert_eq!(*flat.last().unwrap(), 0);
        assert!(write_pgm(Vec::new(), 2, &[0.0]).is_err());
    }

    #[test]
    fn convergence_csv_layout() {
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &[1.0, 0.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,residual\n0,1e0\n1,5e-1\n");
    }
}
