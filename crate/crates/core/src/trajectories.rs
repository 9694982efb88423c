//! Golden-angle radial spokes and sliding-window selection.
//!
//! Trajectories are numbered from 1 in acquisition order and one spoke is
//! acquired per time frame, so the trajectory index doubles as the frame
//! index. Spoke `m` is rotated by `golden_angle(m - 1)`.
//!
//! The increment is 111.246 degrees, i.e. `pi / phi`. Modulo `pi` this is the
//! mirror image of the `pi * (3 - sqrt 5) / 2` (68.75 degree) step, so both
//! produce the same set of spoke directions.

use std::f64::consts::PI;
use std::io::{self, BufRead, Write};

use crate::error::{Result, SwcsError};

/// Angular increment between successive spokes, `pi * (sqrt 5 - 1) / 2`.
pub fn golden_angle_increment() -> f64 {
    PI * (5f64.sqrt() - 1.0) / 2.0
}

/// Angle of the `m`-th spoke (zero-based multiple), reduced to `[0, pi)`.
pub fn golden_angle(m: u64) -> f64 {
    // Reduce in units of half-turns to keep precision for large m.
    let turns = (m as f64) * ((5f64.sqrt() - 1.0) / 2.0);
    let frac = turns - turns.floor();
    let angle = frac * PI;
    if angle >= PI {
        0.0
    } else {
        angle
    }
}

/// One radial spoke through the k-space origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Acquisition index, starting at 1.
    pub index: usize,
    pub angle: f64,
    /// `(kx, ky)` sample coordinates in radians per pixel.
    pub samples: Vec<[f64; 2]>,
    /// Signed frame time; zero at the sequence center.
    pub frame_time: i64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sample coordinates of a full-diameter spoke: `k` radii uniformly spanning
/// `[-k_max, k_max)` along direction `angle`, with the origin at index `k / 2`.
pub fn make_spoke(angle: f64, k: usize, k_max: f64) -> Result<Vec<[f64; 2]>> {
    if k < 2 || k % 2 != 0 {
        return Err(SwcsError::param("k", format!("samples per spoke must be even and >= 2, got {k}")));
    }
    if !(k_max > 0.0 && k_max <= PI) {
        return Err(SwcsError::param("k_max", format!("must lie in (0, pi], got {k_max}")));
    }
    let (s, c) = angle.sin_cos();
    let half = (k / 2) as i64;
    let step = 2.0 * k_max / k as f64;
    Ok((0..k as i64)
        .map(|j| {
            let r = (j - half) as f64 * step;
            if j == half {
                [0.0, 0.0]
            } else {
                [r * c, r * s]
            }
        })
        .collect())
}

/// Geometry of a golden-angle acquisition: `count` spokes of `samples` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialScheme {
    pub count: usize,
    pub samples: usize,
    pub k_max: f64,
}

impl RadialScheme {
    /// Two-fold radial oversampling for an `n`-pixel image: `2n` points over `[-pi, pi)`.
    pub fn for_image(n: usize, count: usize) -> Self {
        RadialScheme { count, samples: 2 * n, k_max: PI }
    }

    /// Frame index of the sequence center; frame times run `1 - center ..= count - center`.
    pub fn center_index(&self) -> usize {
        self.count / 2 + 1
    }

    pub fn frame_time(&self, index: usize) -> i64 {
        index as i64 - self.center_index() as i64
    }

    pub fn trajectory(&self, index: usize) -> Result<Trajectory> {
        if index == 0 || index > self.count {
            return Err(SwcsError::FrameOutOfRange { frame: index as i64, min: 1, max: self.count as i64 });
        }
        let angle = golden_angle(index as u64 - 1);
        Ok(Trajectory {
            index,
            angle,
            samples: make_spoke(angle, self.samples, self.k_max)?,
            frame_time: self.frame_time(index),
        })
    }

    pub fn trajectories(&self) -> Result<Vec<Trajectory>> {
        (1..=self.count).map(|m| self.trajectory(m)).collect()
    }
}

/// Contiguous run of trajectory indices centered (when possible) on `center`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSelection {
    pub center: usize,
    pub half_width: usize,
    pub indices: Vec<usize>,
    /// Set when the window had to be shifted to stay inside the acquisition.
    pub clamped: bool,
}

impl WindowSelection {
    pub fn first(&self) -> usize {
        self.indices[0]
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Selects `[m0 - nu/2, m0 + nu/2]` from `1..=total`, shifting the window
/// inward at the sequence boundaries so it keeps `nu + 1` members.
pub fn sliding_window(m0: usize, nu: usize, total: usize) -> Result<WindowSelection> {
    if m0 == 0 || m0 > total {
        return Err(SwcsError::FrameOutOfRange { frame: m0 as i64, min: 1, max: total as i64 });
    }
    if nu == 0 || nu % 2 != 0 {
        return Err(SwcsError::param("nu", format!("window size must be even and positive, got {nu}")));
    }
    if nu >= total {
        return Err(SwcsError::param("nu", format!("window size {nu} must be smaller than {total} trajectories")));
    }
    let half = nu / 2;
    let count = nu + 1;
    let mut start = m0 as i64 - half as i64;
    let mut clamped = false;
    if start < 1 {
        start = 1;
        clamped = true;
    }
    if start as usize + count - 1 > total {
        start = (total + 1 - count) as i64;
        clamped = true;
    }
    let start = start as usize;
    Ok(WindowSelection { center: m0, half_width: half, indices: (start..start + count).collect(), clamped })
}

/// Writes trajectories as CSV with columns `m,theta,sample_index,kx,ky`.
pub fn write_csv<W: Write>(mut w: W, trajectories: &[Trajectory]) -> io::Result<()> {
    writeln!(w, "m,theta,sample_index,kx,ky")?;
    for t in trajectories {
        for (j, k) in t.samples.iter().enumerate() {
            writeln!(w, "{},{:e},{},{:e},{:e}", t.index, t.angle, j, k[0], k[1])?;
        }
    }
    Ok(())
}

/// Parses the CSV produced by [`write_csv`]. Frame times are taken relative
/// to `center_index`.
pub fn read_csv<R: BufRead>(r: R, center_index: usize) -> Result<Vec<Trajectory>> {
    let mut out: Vec<Trajectory> = Vec::new();
    let mut lines = r.lines();
    let header = lines.next().transpose()?.ok_or_else(|| SwcsError::format("trajectory csv", "empty file"))?;
    if header.trim() != "m,theta,sample_index,kx,ky" {
        return Err(SwcsError::format("trajectory csv", format!("unexpected header `{}`", header.trim())));
    }
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| SwcsError::format("trajectory csv", format!("line {}: {reason}", lineno + 2));
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let m: usize = fields[0].parse().map_err(|_| bad("bad trajectory index"))?;
        let theta: f64 = fields[1].parse().map_err(|_| bad("bad angle"))?;
        let j: usize = fields[2].parse().map_err(|_| bad("bad sample index"))?;
        let kx: f64 = fields[3].parse().map_err(|_| bad("bad kx"))?;
        let ky: f64 = fields[4].parse().map_err(|_| bad("bad ky"))?;
        if m == 0 {
            return Err(bad("trajectory indices start at 1"));
        }
        if ![theta, kx, ky].iter().all(|v| v.is_finite()) || kx.abs() > PI || ky.abs() > PI {
            return Err(bad("coordinates must be finite and within [-pi, pi]"));
        }
        match out.last_mut() {
            Some(t) if t.index == m => {
                if j != t.samples.len() {
                    return Err(bad("sample indices must be consecutive"));
                }
                t.samples.push([kx, ky]);
            }
            _ => {
                if j != 0 {
                    return Err(bad("a trajectory must start at sample 0"));
                }
                out.push(Trajectory {
                    index: m,
                    angle: theta,
                    samples: vec![[kx, ky]],
                    frame_time: m as i64 - center_index as i64,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(SwcsError::format("trajectory csv", "no samples"));
    }
    let k = out[0].samples.len();
    if out.iter().any(|t| t.samples.len() != k) {
        return Err(SwcsError::format("trajectory csv", "all trajectories must have the same sample count"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_angle_values() {
        assert_eq!(golden_angle(0), 0.0);
        let g = golden_angle(1);
        assert!((g - 1.941_611_038_725_466).abs() < 1e-12, "{g}");
        assert!((g.to_degrees() - 111.246_117_974_981).abs() < 1e-9);
        let g2 = golden_angle(2);
        assert!((g2.to_degrees() - 42.492_235_949_962).abs() < 1e-9, "{}", g2.to_degrees());
        assert!((golden_angle_increment() - g).abs() < 1e-12);
    }

    #[test]
    fn spoke_on_axes() {
        let s = make_spoke(0.0, 4, PI).unwrap();
        let radii = [-PI, -PI / 2.0, 0.0, PI / 2.0];
        for (p, r) in s.iter().zip(radii) {
            assert!((p[0] - r).abs() < 1e-15 && p[1].abs() < 1e-15);
        }
        let s = make_spoke(PI / 2.0, 4, PI).unwrap();
        for (p, r) in s.iter().zip(radii) {
            assert!(p[0].abs() < 1e-15 && (p[1] - r).abs() < 1e-15);
        }
    }

    #[test]
    fn spoke_has_single_dc_sample() {
        for m in 0..50 {
            let s = make_spoke(golden_angle(m), 64, PI).unwrap();
            assert_eq!(s.iter().filter(|p| p[0] == 0.0 && p[1] == 0.0).count(), 1);
        }
    }

    #[test]
    fn spoke_rejects_bad_arguments() {
        assert!(make_spoke(0.0, 5, PI).is_err());
        assert!(make_spoke(0.0, 0, PI).is_err());
        assert!(make_spoke(0.0, 4, 0.0).is_err());
        assert!(make_spoke(0.0, 4, 3.2).is_err());
    }

    #[test]
    fn window_examples() {
        let w = sliding_window(100, 72, 1000).unwrap();
        assert_eq!((w.first(), *w.indices.last().unwrap(), w.len(), w.clamped), (64, 136, 73, false));
        let w = sliding_window(1, 72, 1000).unwrap();
        assert_eq!((w.first(), *w.indices.last().unwrap(), w.len(), w.clamped), (1, 73, 73, true));
        let w = sliding_window(500, 304, 1000).unwrap();
        assert_eq!((w.first(), *w.indices.last().unwrap(), w.len()), (348, 652, 305));
        let w = sliding_window(1000, 72, 1000).unwrap();
        assert_eq!((w.first(), *w.indices.last().unwrap()), (928, 1000));
        assert!(sliding_window(10, 1000, 1000).is_err());
        assert!(sliding_window(10, 7, 1000).is_err());
        assert!(sliding_window(0, 8, 1000).is_err());
    }

    #[test]
    fn distinct_spokes_share_only_the_origin() {
        let a = make_spoke(golden_angle(3), 32, PI).unwrap();
        let b = make_spoke(golden_angle(17), 32, PI).unwrap();
        let shared = a.iter().filter(|p| b.iter().any(|q| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12)).count();
        assert_eq!(shared, 1);
    }

    #[test]
    fn angles_pairwise_distinct() {
        let mut angles: Vec<f64> = (0..=10_000).map(golden_angle).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_gap = angles.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        assert!(min_gap > 1e-9, "{min_gap}");
    }

    #[test]
    fn csv_roundtrip() {
        let scheme = RadialScheme { count: 3, samples: 4, k_max: PI };
        let trajs = scheme.trajectories().unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &trajs).unwrap();
        let back = read_csv(&buf[..], scheme.center_index()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in trajs.iter().zip(&back) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.frame_time, b.frame_time);
            for (p, q) in a.samples.iter().zip(&b.samples) {
                assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
            }
        }
        assert!(read_csv(&b"m,theta\n"[..], 1).is_err());
        assert!(read_csv(&b"m,theta,sample_index,kx,ky\n1,0,1,0,0\n"[..], 1).is_err());
        assert!(read_csv(&b"m,theta,sample_index,kx,ky\n1,0,0,9,0\n"[..], 1).is_err());
    }
}
