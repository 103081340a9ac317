//! Small dense matrices and a real eigenvalue solver (Householder reduction
//! to Hessenberg form followed by Francis double-shift QR).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{MarError, Result};
use crate::math::sqrt;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self ⊗ other`.
    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        let (n, m) = (self.n, other.n);
        let mut out = Matrix::zeros(n * m);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    for r in 0..m {
                        out.set(i * m + j, l * m + r, a * other.get(j, r));
                    }
                }
            }
        }
        out
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &Matrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Iteration budget per eigenvalue of the QR sweep.
pub const QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Reduces `a` in place to upper Hessenberg form by Householder similarity transforms.
fn hessenberg(a: &mut Matrix) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = sqrt((k + 1..n).map(|i| a.get(i, k) * a.get(i, k)).sum());
        if norm == 0.0 {
            continue;
        }
        let x0 = a.get(k + 1, k);
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a.get(i, k);
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                *a.at(i, j) -= f * v[i];
            }
        }
        // A <- A H
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a.get(i, j) * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                *a.at(i, j) -= f * v[j];
            }
        }
        for i in k + 2..n {
            a.set(i, k, 0.0);
        }
    }
}

#[inline]
fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Parlett-Reinsch balancing: a diagonal similarity by powers of two that
/// equalises row and column norms, so that widely differing magnitudes do
/// not stall the QR iteration.
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= SQRDX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= SQRDX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    *a.at(i, j) *= inv;
                    *a.at(j, i) *= f;
                }
            }
        }
    }
}

/// All eigenvalues of a real square matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    let n = m.n;
    let mut a = m.clone();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(MarError::NonFinite("eigenvalue input".into()));
    }
    balance(&mut a);
    hessenberg(&mut a);
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a.get(i, j).abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let budget = QR_ITERATIONS_PER_EIGENVALUE;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l > 0 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() + s == s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a.get(nu - 1, nu - 1);
            let mut w = a.get(nu, nu - 1) * a.get(nu - 1, nu);
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = sqrt(q.abs());
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == budget {
                return Err(MarError::EigenNoConvergence { dimension: n, iterations: its });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    *a.at(i, i) -= x;
                }
                let s = a.get(nu, nu - 1).abs() + a.get(nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut mm = nu - 2;
            loop {
                let z = a.get(mm, mm);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.get(mm + 1, mm) + a.get(mm, mm + 1);
                q = a.get(mm + 1, mm + 1) - z - rr - ss;
                r = a.get(mm + 2, mm + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = a.get(mm, mm - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.get(mm - 1, mm - 1).abs() + z.abs() + a.get(mm + 1, mm + 1).abs());
                if u + v == v {
                    break;
                }
                mm -= 1;
            }
            for i in mm..nu - 1 {
                a.set(i + 2, i, 0.0);
                if i != mm {
                    a.set(i + 2, i - 1, 0.0);
                }
            }
            let mut k = mm;
            while k < nu {
                if k != mm {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = 0.0;
                    if k + 1 != nu {
                        r = a.get(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign(sqrt(p * p + q * q + r * r), p);
                if s != 0.0 {
                    if k == mm {
                        if l != mm {
                            let v = -a.get(k, k - 1);
                            a.set(k, k - 1, v);
                        }
                    } else {
                        a.set(k, k - 1, -s * x);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                        if k + 1 != nu {
                            pp += r * a.get(k + 2, j);
                            *a.at(k + 2, j) -= pp * z;
                        }
                        *a.at(k + 1, j) -= pp * y;
                        *a.at(k, j) -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a.get(i, k) + y * a.get(i, k + 1);
                        if k + 1 != nu {
                            pp += z * a.get(i, k + 2);
                            *a.at(i, k + 2) -= pp * r;
                        }
                        *a.at(i, k + 1) -= pp * q;
                        *a.at(i, k) -= pp;
                    }
                }
                k += 1;
            }
            if l + 1 >= nu {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| libm::hypot(re, im))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_moduli(m: &Matrix) -> Vec<f64> {
        let mut v: Vec<f64> = eigenvalues(m).unwrap().iter().map(|(r, i)| libm::hypot(*r, *i)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn diagonal_and_triangular() {
        let m = Matrix::from_rows(&[&[3.0, 1.0, 2.0], &[0.0, -5.0, 1.0], &[0.0, 0.0, 0.5]]);
        let mods = sorted_moduli(&m);
        assert!((mods[0] - 0.5).abs() < 1e-12);
        assert!((mods[1] - 3.0).abs() < 1e-12);
        assert!((mods[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let m = Matrix::from_rows(&[&[0.0, -2.0], &[2.0, 0.0]]);
        let ev = eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|(re, im)| re.abs() < 1e-14 && (im.abs() - 2.0).abs() < 1e-14));
    }

    #[test]
    fn companion_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = Matrix::from_rows(&[&[6.0, -11.0, 6.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let mut re: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|e| e.0).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn trace_is_preserved_on_random_matrices() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in 1..=16 {
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, next());
                }
            }
            let ev = eigenvalues(&m).unwrap();
            let tr: f64 = (0..n).map(|i| m.get(i, i)).sum();
            let sum_re: f64 = ev.iter().map(|e| e.0).sum();
            let sum_im: f64 = ev.iter().map(|e| e.1).sum();
            assert!((tr - sum_re).abs() < 1e-9, "n={n}");
            assert!(sum_im.abs() < 1e-9);
        }
    }

    #[test]
    fn kronecker_layout() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::from_rows(&[&[0.0, 5.0], &[6.0, 7.0]]);
        let k = a.kronecker(&b);
        assert_eq!(k.get(0, 1), 5.0);
        assert_eq!(k.get(1, 2), 12.0);
        assert_eq!(k.get(3, 3), 28.0);
        assert_eq!(k.get(2, 0), 0.0);
    }
}
