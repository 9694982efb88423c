//! Exact non-uniform DFT by direct summation.
//!
//! `y(k) = sum_r x(r) exp(-i k.r)` with the phase factorized per axis, so one
//! sample costs `n^2` multiply-adds plus `2n` complex exponentials.

use num_complex::Complex64;

fn phasors(k: f64, n: usize, sign: f64) -> Vec<Complex64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|i| {
            let (s, c) = (sign * k * (i as f64 - half)).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

pub(crate) fn forward(n: usize, coords: &[[f64; 2]], x: &[Complex64], out: &mut [Complex64]) {
    for (k, o) in coords.iter().zip(out.iter_mut()) {
        let ex = phasors(k[0], n, -1.0);
        let ey = phasors(k[1], n, -1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, &py) in x.chunks_exact(n).zip(&ey) {
            let s: Complex64 = row.iter().zip(&ex).map(|(v, p)| v * p).sum();
            acc += s * py;
        }
        *o = acc;
    }
}

pub(crate) fn adjoint(n: usize, coords: &[[f64; 2]], y: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for (k, &v) in coords.iter().zip(y) {
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let ex = phasors(k[0], n, 1.0);
        let ey = phasors(k[1], n, 1.0);
        for (row, &py) in out.chunks_exact_mut(n).zip(&ey) {
            let a = v * py;
            for (o, p) in row.iter_mut().zip(&ex) {
                *o += a * p;
            }
        }
    }
}
