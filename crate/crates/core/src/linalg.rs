//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Matrices here are tiny (N×N per access point, |M_k|×|M_k| at the CPU), so
//! everything is dense and allocation-per-call is acceptable.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Outcome of a Hermitian solve. `regularized` is set when the plain
/// Cholesky factorization failed and a diagonal load or pseudoinverse was
/// needed.
#[derive(Debug, Clone)]
pub struct Solved<T> {
    pub value: T,
    pub regularized: bool,
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `v vᴴ` scaled by `s`, accumulated into `acc`.
pub fn add_outer(acc: &mut CMat, v: &CVec, s: f64) {
    let n = v.len();
    for c in 0..n {
        let vc = v[c].conj() * s;
        for r in 0..n {
            acc[(r, c)] += v[r] * vc;
        }
    }
}

/// `aᴴ b`.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Real part of `xᴴ M x`.
pub fn quad_form(m: &CMat, x: &CVec) -> f64 {
    inner(x, &(m * x)).re
}

/// Forces exact Hermitian symmetry: `(M + Mᴴ)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Hermitian eigen-decomposition, eigenvalues unsorted.
pub fn eigh(m: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues, eig.eigenvectors)
}

fn reconstruct(vals: &DVector<f64>, vecs: &CMat) -> CMat {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for c in 0..n {
        let s = Complex64::new(vals[c], 0.0);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    hermitian_part(&(scaled * vecs.adjoint()))
}

/// Projects a Hermitian matrix onto the PSD cone by zeroing negative
/// eigenvalues. Returns the input untouched when it is already PSD.
pub fn clip_psd(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    if vals.iter().all(|&v| v >= 0.0) {
        return hermitian_part(m);
    }
    let clipped = vals.map(|v| v.max(0.0));
    reconstruct(&clipped, &vecs)
}

/// A factor `F` with `F Fᴴ = M` for Hermitian PSD `M`. Cholesky when possible,
/// otherwise the eigen square root with negative eigenvalues clipped.
pub fn psd_factor(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if trace_re(m) == 0.0 && m.iter().all(|z| *z == ZERO) {
        return CMat::zeros(n, n);
    }
    if let Some(ch) = Cholesky::new(hermitian_part(m)) {
        return ch.l();
    }
    let (vals, vecs) = eigh(m);
    reconstruct(&vals.map(|v| v.max(0.0).sqrt()), &vecs)
}

/// Moore-Penrose pseudoinverse of a Hermitian matrix; eigenvalues with
/// magnitude below `rel_tol · tr|M|` are treated as zero.
pub fn pinv_hermitian(m: &CMat, rel_tol: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let scale: f64 = vals.iter().map(|v| v.abs()).sum();
    let cutoff = rel_tol * scale;
    let inv = vals.map(|v| {
        if v.abs() > cutoff && v != 0.0 {
            1.0 / v
        } else {
            0.0
        }
    });
    reconstruct(&inv, &vecs)
}

/// Solves `A X = B` for Hermitian positive (semi)definite `A`.
///
/// Tries Cholesky first, then Cholesky after loading the diagonal with
/// `1e-12 · tr(A)/n`, and finally the eigen pseudoinverse.
pub fn solve_hermitian(a: &CMat, b: &CMat) -> Solved<CMat> {
    let n = a.nrows();
    let a = hermitian_part(a);
    if let Some(ch) = Cholesky::new(a.clone()) {
        let x = ch.solve(b);
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Solved {
                value: x,
                regularized: false,
            };
        }
    }
    let load = 1e-12 * trace_re(&a).abs() / n.max(1) as f64;
    if load > 0.0 {
        let loaded = &a + identity(n) * Complex64::new(load, 0.0);
        if let Some(ch) = Cholesky::new(loaded) {
            let x = ch.solve(b);
            if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Solved {
                    value: x,
                    regularized: true,
                };
            }
        }
    }
    Solved {
        value: pinv_hermitian(&a, 1e-12) * b,
        regularized: true,
    }
}

pub fn solve_hermitian_vec(a: &CMat, b: &CVec) -> Solved<CVec> {
    let bm = CMat::from_column_slice(b.len(), 1, b.as_slice());
    let s = solve_hermitian(a, &bm);
    Solved {
        value: CVec::from_column_slice(s.value.as_slice()),
        regularized: s.regularized,
    }
}
