//! Dense real nonsymmetric eigensolver used by the spectral truncations:
//! Parlett-Reinsch balancing, Householder reduction to Hessenberg form, a
//! Francis double-shift QR sweep for all eigenvalues, and inverse iteration
//! for the eigenvector of an isolated real eigenvalue.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("QR iteration failed to converge after {0} sweeps on one eigenvalue")]
    NoConvergence(usize),
}

const MAX_SWEEPS: usize = 60;

/// Dense square matrix of f64, row-major.
#[derive(Debug, Clone)]
pub struct Mat {
    n: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        Mat { n, a: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Mat::zero(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    fn upd(&mut self, i: usize, j: usize, dv: f64) {
        self.a[i * self.n + j] += dv;
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// All eigenvalues of `a` as (re, im) pairs sorted by descending real part
/// (ties by descending imaginary part). The input is copied; balancing and
/// the Hessenberg reduction are similarity transforms, so the spectrum is
/// that of the original matrix.
pub fn eigenvalues(a: &Mat) -> Result<Vec<(f64, f64)>, EigenError> {
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let mut vals = hqr(&mut h)?;
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(vals)
}

/// Parlett-Reinsch balancing with radix-2 scaling (a similarity transform).
fn balance(a: &mut Mat) {
    let n = a.n;
    let radix: f64 = 2.0;
    let sqrdx = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut f = 1.0;
                let s = c + r;
                let mut g = r / radix;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        let v = a.get(i, j) * g;
                        a.set(i, j, v);
                    }
                    for j in 0..n {
                        let v = a.get(j, i) * f;
                        a.set(j, i, v);
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form, transforms discarded.
fn hessenberg(a: &mut Mat) {
    let n = a.n;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let mut scale = 0.0;
        for i in k + 1..n {
            scale += a.get(i, k).abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut sigma = 0.0;
        for i in k + 1..n {
            v[i] = a.get(i, k) / scale;
            sigma += v[i] * v[i];
        }
        let mut alpha = sigma.sqrt();
        if v[k + 1] > 0.0 {
            alpha = -alpha;
        }
        let beta = sigma - alpha * v[k + 1];
        if beta == 0.0 {
            continue;
        }
        v[k + 1] -= alpha;
        // left: A <- (I - v v^T / beta) A on rows k+1..n
        for j in k..n {
            let mut dot = 0.0;
            for i in k + 1..n {
                dot += v[i] * a.get(i, j);
            }
            dot /= beta;
            for i in k + 1..n {
                a.upd(i, j, -dot * v[i]);
            }
        }
        // right: A <- A (I - v v^T / beta) on cols k+1..n
        for i in 0..n {
            let mut dot = 0.0;
            for j in k + 1..n {
                dot += a.get(i, j) * v[j];
            }
            dot /= beta;
            for j in k + 1..n {
                a.upd(i, j, -dot * v[j]);
            }
        }
        a.set(k + 1, k, alpha * scale);
        for i in k + 2..n {
            a.set(i, k, 0.0);
        }
    }
}

fn sign_of(mag: f64, s: f64) -> f64 {
    if s >= 0.0 {
        mag.abs()
    } else {
        -mag.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; returns all
/// eigenvalues, destroying the matrix.
fn hqr(hm: &mut Mat) -> Result<Vec<(f64, f64)>, EigenError> {
    let n = hm.n as isize;
    let g = |m: &Mat, i: isize, j: isize| m.get(i as usize, j as usize);
    let mut wr = vec![0.0f64; n as usize];
    let mut wi = vec![0.0f64; n as usize];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += g(hm, i, j).abs();
        }
    }
    if anorm == 0.0 {
        return Ok(vec![(0.0, 0.0); n as usize]);
    }
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 1 {
                let s = g(hm, l - 1, l - 1).abs() + g(hm, l, l).abs();
                let s = if s == 0.0 { anorm } else { s };
                if g(hm, l, l - 1).abs() <= f64::EPSILON * s {
                    hm.set(l as usize, (l - 1) as usize, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = g(hm, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = g(hm, nn - 1, nn - 1);
            let mut w = g(hm, nn, nn - 1) * g(hm, nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign_of(z, p);
                    wr[(nn - 1) as usize] = x + z;
                    wr[nn as usize] = wr[(nn - 1) as usize];
                    if z != 0.0 {
                        wr[nn as usize] = x - w / z;
                    }
                    wi[(nn - 1) as usize] = 0.0;
                    wi[nn as usize] = 0.0;
                } else {
                    wr[(nn - 1) as usize] = x + p;
                    wr[nn as usize] = x + p;
                    wi[(nn - 1) as usize] = z;
                    wi[nn as usize] = -z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_SWEEPS {
                return Err(EigenError::NoConvergence(MAX_SWEEPS));
            }
            if its == 10 || its == 20 || its == 40 {
                t += x;
                for i in 0..=nn {
                    let d = g(hm, i, i) - x;
                    hm.set(i as usize, i as usize, d);
                }
                let s = g(hm, nn, nn - 1).abs() + g(hm, nn - 1, nn - 2).abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            let mut p;
            let mut q;
            let mut r;
            loop {
                let z = g(hm, m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / g(hm, m + 1, m) + g(hm, m, m + 1);
                q = g(hm, m + 1, m + 1) - z - rr - ss;
                r = g(hm, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = g(hm, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (g(hm, m - 1, m - 1).abs() + z.abs() + g(hm, m + 1, m + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                hm.set(i as usize, (i - 2) as usize, 0.0);
                if i != m + 2 {
                    hm.set(i as usize, (i - 3) as usize, 0.0);
                }
            }
            for k in m..=nn - 1 {
                if k != m {
                    p = g(hm, k, k - 1);
                    q = g(hm, k + 1, k - 1);
                    r = if k != nn - 1 { g(hm, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        let v = -g(hm, k, k - 1);
                        hm.set(k as usize, (k - 1) as usize, v);
                    }
                } else {
                    hm.set(k as usize, (k - 1) as usize, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = g(hm, k, j) + q * g(hm, k + 1, j);
                    if k != nn - 1 {
                        pp += r * g(hm, k + 2, j);
                        let v = g(hm, k + 2, j) - pp * z;
                        hm.set((k + 2) as usize, j as usize, v);
                    }
                    let v1 = g(hm, k + 1, j) - pp * y;
                    hm.set((k + 1) as usize, j as usize, v1);
                    let v0 = g(hm, k, j) - pp * x;
                    hm.set(k as usize, j as usize, v0);
                }
                let mmin = nn.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * g(hm, i, k) + y * g(hm, i, k + 1);
                    if k != nn - 1 {
                        pp += z * g(hm, i, k + 2);
                        let v = g(hm, i, k + 2) - pp * r;
                        hm.set(i as usize, (k + 2) as usize, v);
                    }
                    let v1 = g(hm, i, k + 1) - pp * q;
                    hm.set(i as usize, (k + 1) as usize, v1);
                    let v0 = g(hm, i, k) - pp;
                    hm.set(i as usize, k as usize, v0);
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// Solve (A - mu I) x = b repeatedly to extract the eigenvector of an
/// isolated real eigenvalue `mu`; returns the vector scaled to unit max norm.
pub fn inverse_iteration(a: &Mat, mu: f64, iters: usize) -> Vec<f64> {
    let n = a.n;
    let shift = mu * (1.0 + 1e-13) + 1e-290;
    let mut b = a.clone();
    for i in 0..n {
        let d = b.get(i, i) - shift;
        b.set(i, i, d);
    }
    let lu = LuFactors::factor(b);
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..iters.max(1) {
        let mut w = lu.solve(&v);
        let m = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if m == 0.0 || !m.is_finite() {
            return v;
        }
        for x in w.iter_mut() {
            *x /= m;
        }
        v = w;
    }
    v
}

struct LuFactors {
    n: usize,
    lu: Mat,
    piv: Vec<usize>,
}

impl LuFactors {
    /// Partial-pivot LU; near-zero pivots are nudged so inverse iteration
    /// with an exact eigenvalue shift stays finite.
    fn factor(mut a: Mat) -> Self {
        let n = a.n;
        let tiny = f64::EPSILON * a.inf_norm().max(f64::MIN_POSITIVE);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut pmax = a.get(k, k).abs();
            let mut prow = k;
            for i in k + 1..n {
                let v = a.get(i, k).abs();
                if v > pmax {
                    pmax = v;
                    prow = i;
                }
            }
            piv[k] = prow;
            if prow != k {
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(prow, j));
                    a.set(prow, j, t);
                }
            }
            if a.get(k, k).abs() < tiny {
                let s = if a.get(k, k) < 0.0 { -tiny } else { tiny };
                a.set(k, k, s);
            }
            let inv = 1.0 / a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) * inv;
                a.set(i, k, f);
                if f != 0.0 {
                    for j in k + 1..n {
                        a.upd(i, j, -f * a.get(k, j));
                    }
                }
            }
        }
        LuFactors { n, lu: a, piv }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in k + 1..n {
                let f = self.lu.get(i, k);
                if f != 0.0 {
                    x[i] -= f * x[k];
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:.16e}, want {want:.16e}, diff {:.3e}",
            (got - want).abs()
        );
    }

    fn companion(coeffs: &[f64]) -> Mat {
        // monic polynomial, ascending coefficients without the leading 1
        let n = coeffs.len();
        let mut m = Mat::zero(n);
        for i in 1..n {
            m.set(i, i - 1, 1.0);
        }
        for (i, &c) in coeffs.iter().enumerate() {
            m.set(i, n - 1, -c);
        }
        m
    }

    #[test]
    fn real_spectrum_of_companion_matrix() {
        // (x-1)(x-2)(x-3)(x-4)(x-5) = x^5 -15x^4 +85x^3 -225x^2 +274x -120
        let m = companion(&[-120.0, 274.0, -225.0, 85.0, -15.0]);
        let vals = eigenvalues(&m).unwrap();
        let want = [5.0, 4.0, 3.0, 2.0, 1.0];
        for (got, want) in vals.iter().zip(want) {
            assert_close(got.0, want, 1e-9);
            assert_close(got.1, 0.0, 1e-9);
        }
    }

    #[test]
    fn complex_pair_detected() {
        // (x^2+1)(x-2) = x^3 - 2x^2 + x - 2
        let m = companion(&[-2.0, 1.0, -2.0]);
        let vals = eigenvalues(&m).unwrap();
        assert_close(vals[0].0, 2.0, 1e-10);
        assert_close(vals[0].1, 0.0, 1e-10);
        assert_close(vals[1].0, 0.0, 1e-10);
        assert_close(vals[1].1.abs(), 1.0, 1e-10);
        assert_close(vals[2].1, -vals[1].1, 1e-12);
    }

    #[test]
    fn two_by_two() {
        let m = Mat::from_rows(&[vec![4.0, 1.0], vec![2.0, 3.0]]);
        let vals = eigenvalues(&m).unwrap();
        assert_close(vals[0].0, 5.0, 1e-12);
        assert_close(vals[1].0, 2.0, 1e-12);
    }

    #[test]
    fn badly_scaled_matrix_is_balanced() {
        let m = Mat::from_rows(&[
            vec![1.0, 1e8, 0.0],
            vec![1e-8, 2.0, 1e8],
            vec![0.0, 1e-8, 3.0],
        ]);
        let vals = eigenvalues(&m).unwrap();
        let sum: f64 = vals.iter().map(|v| v.0).sum();
        assert_close(sum, 6.0, 1e-8);
        for v in &vals {
            assert_close(v.1, 0.0, 1e-8);
        }
    }

    #[test]
    fn nonsymmetric_tridiagonal_spectrum_sums_to_trace() {
        let n = 40;
        let mut m = Mat::zero(n);
        for j in 0..n {
            m.set(j, j, -16.0 * (j as f64) * (j as f64) - 1.3);
            if j + 1 < n {
                m.set(j, j + 1, -2.5 * (j as f64 + 1.0));
                m.set(j + 1, j, -0.7 * (j as f64 - 3.0));
            }
        }
        let trace: f64 = (0..n).map(|j| m.get(j, j)).sum();
        let vals = eigenvalues(&m).unwrap();
        let sum: f64 = vals.iter().map(|v| v.0).sum();
        let imsum: f64 = vals.iter().map(|v| v.1).sum();
        assert_close(sum, trace, 1e-7 * trace.abs());
        assert_close(imsum, 0.0, 1e-8);
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let m = Mat::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 1.0], vec![0.0, 0.0, 7.0]]);
        let v = inverse_iteration(&m, 3.0, 4);
        // eigenvector of 3: (1, 1, 0) direction
        let scale = v[0];
        assert_close(v[1] / scale, 1.0, 1e-10);
        assert_close(v[2] / scale, 0.0, 1e-10);
        let av = m.matvec(&v);
        for i in 0..3 {
            assert_close(av[i], 3.0 * v[i], 1e-9);
        }
    }

    #[test]
    fn singular_shift_still_finite() {
        let m = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let v = inverse_iteration(&m, 1.0, 3);
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
