//! Dense real matrix numerics.
//!
//! Everything here is a pure function on immutable values. The [`Matrix`]
//! newtype guarantees finite entries; the heavy lifting for eigenvalues and
//! LU solves is delegated to `nalgebra`, while the exponential and the
//! principal logarithm are implemented locally.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetry tolerance accepted by [`eig_sym`], relative to `max(1, ‖S‖_max)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Target for `‖M − I‖₁` before the logarithm series is summed.
const LOG_SERIES_RADIUS: f64 = 0.25;
/// Maximum number of square roots taken by [`mat_log`].
const LOG_MAX_SQRTS: usize = 60;

/// Dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Wraps an `nalgebra` matrix, rejecting NaN or infinite entries.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.iter().all(|x| x.is_finite()) {
            Ok(Self(inner))
        } else {
            Err(Error::NonFinite("matrix"))
        }
    }

    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        norm1(&self.0)
    }

    /// Solves `self · x = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        solve(&self.0, &rhs.0).map(Self)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        require_square(&self.0, "inverse")?;
        self.0
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|x| x.is_finite()))
            .map(Self)
            .ok_or(Error::Singular("inverse"))
    }
}

impl Deref for Matrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl From<Matrix> for DMatrix<f64> {
    fn from(m: Matrix) -> Self {
        m.0
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'a Matrix) -> Matrix {
        Matrix(&self.0 - &rhs.0)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix(-&self.0)
    }
}

pub(crate) fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn require_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what} needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

pub(crate) fn solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(a, "solve")?;
    if a.nrows() != rhs.nrows() {
        return Err(Error::Dimension(format!("solve: {} rows vs rhs {} rows", a.nrows(), rhs.nrows())));
    }
    let x = a.clone().lu().solve(rhs).ok_or(Error::Singular("solve"))?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::Singular("solve"))
    }
}

// Padé numerator coefficients b_0..b_m for degrees 3, 5, 7, 9, 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm thresholds below which the degree-m approximant is accurate to unit roundoff.
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with diagonal Padé approximants.
pub fn mat_exp(m: &Matrix) -> Result<Matrix> {
    exp_dense(&m.0).map(Matrix)
}

pub(crate) fn exp_dense(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(a, "mat_exp")?;
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(ident);
    }
    if !norm.is_finite() {
        return Err(Error::NonFinite("mat_exp input"));
    }

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs, &ident);
        }
    }

    let s = if norm > THETA13 { (norm / THETA13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scaled = a * 2f64.powi(-s);
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFinite("mat_exp result"))
    }
}

fn pade_low(a: &DMatrix<f64>, b: &[f64], ident: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let a2 = a * a;
    // Even powers A^0, A^2, A^4, ...
    let mut powers = vec![ident.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    let mut v = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    for (k, p) in powers.iter().enumerate() {
        v += p * b[2 * k];
        if 2 * k + 1 < b.len() {
            u_inner += p * b[2 * k + 1];
        }
    }
    let u = a * u_inner;
    solve(&(&v - &u), &(&v + &u))
}

fn pade13(a: &DMatrix<f64>, ident: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + ident * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + ident * b[0];
    solve(&(&v - &u), &(&v + &u))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots (Denman–Beavers) are taken until `‖M − I‖₁ ≤ 0.25`, then
/// `log M = 2 atanh((M − I)(M + I)⁻¹)` is summed as a power series.
pub fn mat_log(m: &Matrix) -> Result<Matrix> {
    require_square(&m.0, "mat_log")?;
    let n = m.nrows();
    for ev in m.0.complex_eigenvalues().iter() {
        let scale = 1.0 + ev.norm();
        if ev.im.abs() <= 1e-12 * scale && ev.re <= 1e-12 * scale {
            return Err(Error::Branch(format!("{:.6e}{:+.6e}i", ev.re, ev.im)));
        }
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let mut x = m.0.clone();
    let mut roots = 0usize;
    while norm1(&(&x - &ident)) > LOG_SERIES_RADIUS {
        if roots == LOG_MAX_SQRTS {
            return Err(Error::Branch("square-root iteration did not converge".into()));
        }
        x = sqrt_db(&x)?;
        roots += 1;
    }
    let z = solve(&(&x + &ident).transpose(), &(&x - &ident).transpose())?.transpose();
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..200 {
        term = &term * &z2;
        let add = &term / (2 * k + 1) as f64;
        let done = add.amax() <= f64::EPSILON * sum.amax().max(1e-300) * 0.01;
        sum += add;
        if done {
            break;
        }
    }
    let out = sum * (2.0 * 2f64.powi(roots as i32));
    Matrix::new(out)
}

/// Principal square root by the scaled Denman–Beavers iteration.
fn sqrt_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or(Error::Singular("sqrt"))?;
        let zi = z.clone().try_inverse().ok_or(Error::Singular("sqrt"))?;
        // Determinant scaling speeds the early iterations.
        let det = (y.determinant() * z.determinant()).abs();
        let g = if det > 0.0 && det.is_finite() { det.powf(-1.0 / (2.0 * n as f64)) } else { 1.0 };
        let y_next = (&y * g + &zi / g) * 0.5;
        let z_next = (&z * g + &yi / g) * 0.5;
        let delta = norm1(&(&y_next - &y)) / norm1(&y_next).max(1e-300);
        y = y_next;
        z = z_next;
        if delta < 1e-15 {
            break;
        }
    }
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(Error::NonFinite("sqrt"))
    }
}

/// Eigen-decomposition of a symmetric matrix.
///
/// Eigenvalues come back in ascending order; column `k` of the returned
/// matrix is a unit eigenvector for eigenvalue `k`.
pub fn eig_sym(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (vals, vecs) = eig_sym_dense(&s.0)?;
    Ok((vals, Matrix(vecs)))
}

pub(crate) fn eig_sym_dense(s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    require_square(s, "eig_sym")?;
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL * s.amax().max(1.0) {
        return Err(Error::Symmetry(asym));
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(s.nrows(), s.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Central difference `(c(t+h) − c(t−h)) / 2h`; truncation error is `O(h²)`.
pub fn fd_derivative<F>(mut curve: F, t: f64, h: f64) -> Result<Matrix>
where
    F: FnMut(f64) -> Result<Matrix>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let plus = curve(t + h)?;
    let minus = curve(t - h)?;
    if plus.shape() != minus.shape() {
        return Err(Error::Dimension("curve changed shape".into()));
    }
    Matrix::new((plus.0 - minus.0) / (2.0 * h))
}

/// Nearest orthogonal matrix `M (MᵀM)^{-1/2}` (the orthogonal polar factor).
pub(crate) fn polar_orthogonal(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.ncols();
    let id = DMatrix::<f64>::identity(n, n);
    let gram = m.transpose() * m;
    if (&gram - &id).amax() <= 1e-6 {
        // Newton-Schulz converges quadratically to the polar factor here.
        let mut x = m.clone();
        let mut g = gram;
        for _ in 0..3 {
            x = &x * (&id * 3.0 - &g) * 0.5;
            g = x.transpose() * &x;
            if (&g - &id).amax() <= 4.0 * f64::EPSILON {
                break;
            }
        }
        return Ok(x);
    }
    let (vals, vecs) = eig_sym_dense(&gram)?;
    if vals.first().is_none_or(|&v| v <= 0.0) {
        return Err(Error::Singular("polar factor"));
    }
    let inv_sqrt = DVector::from_iterator(vals.len(), vals.iter().map(|v| 1.0 / v.sqrt()));
    let root_inv = &vecs * DMatrix::from_diagonal(&inv_sqrt) * vecs.transpose();
    Ok(m * root_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// Brute-force Taylor series, valid as an oracle for small norms only.
    fn exp_series(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e, Matrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal() {
        let d = Matrix::from_diagonal(&[0.7, -2.5]).unwrap();
        let e = mat_exp(&d).unwrap();
        assert!((e[(0, 0)] - 0.7f64.exp()).abs() <= 1e-15 * 0.7f64.exp());
        assert!((e[(1, 1)] - (-2.5f64).exp()).abs() <= 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn exp_of_quarter_turn_generator() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -FRAC_PI_2, FRAC_PI_2, 0.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let series = exp_series(&m, 60);
        assert!((&series - &expected).amax() < 1e-15);
        let e = mat_exp(&m).unwrap();
        assert!((e.inner() - &expected).amax() < 1e-15);
    }

    #[test]
    fn exp_matches_series_for_each_pade_degree() {
        // Norms chosen to land in each approximant's band.
        let base = DMatrix::from_row_slice(3, 3, &[0.3, -0.2, 0.5, 0.1, -0.4, 0.2, -0.3, 0.6, 0.1]);
        for scale in [0.005, 0.2, 0.8, 1.8, 4.0] {
            let a = &base * scale;
            let e = exp_dense(&a).unwrap();
            assert!(rel_err(&e, &exp_series(&a, 80)) < 1e-14, "scale {scale}");
        }
    }

    #[test]
    fn exp_accuracy_at_norm_twenty() {
        // Symmetric: oracle from the eigen-decomposition.
        let s = DMatrix::from_row_slice(3, 3, &[4.0, 3.0, -2.0, 3.0, -6.0, 1.0, -2.0, 1.0, 7.0]);
        let s = &s * (20.0 / norm1(&s));
        let eig = s.clone().symmetric_eigen();
        let oracle =
            &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::exp)) * eig.eigenvectors.transpose();
        assert!(rel_err(&exp_dense(&s).unwrap(), &oracle) < 1e-12);

        // Skew: block rotation conjugated by a fixed orthogonal matrix.
        let (a, b) = (13.0f64, 7.0f64);
        let mut k = DMatrix::zeros(4, 4);
        k[(0, 1)] = -a;
        k[(1, 0)] = a;
        k[(2, 3)] = -b;
        k[(3, 2)] = b;
        let mut r = DMatrix::zeros(4, 4);
        r[(0, 0)] = a.cos();
        r[(0, 1)] = -a.sin();
        r[(1, 0)] = a.sin();
        r[(1, 1)] = a.cos();
        r[(2, 2)] = b.cos();
        r[(2, 3)] = -b.sin();
        r[(3, 2)] = b.sin();
        r[(3, 3)] = b.cos();
        let q = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 2.0, 0.5, -1.0, 0.3, -1.0, 2.0, 0.7, -0.2, 0.4, 1.0, 2.0, 1.5, 0.1, -0.3, 1.0],
        )
        .qr()
        .q();
        let km = &q * &k * q.transpose();
        let oracle = &q * &r * q.transpose();
        assert!(norm1(&km) <= 40.0);
        assert!(rel_err(&exp_dense(&km).unwrap(), &oracle) < 1e-12);
    }

    #[test]
    fn exp_rejects_rectangular() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(mat_exp(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn matrix_rejects_non_finite() {
        assert!(Matrix::from_row_slice(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(Matrix::from_row_slice(1, 2, &[1.0]).is_err());
    }

    #[test]
    fn log_inverts_exp() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -0.5, 0.2, 0.4, 0.0, -0.3, 0.1, 0.2, -0.2]);
        let e = Matrix(exp_dense(&a).unwrap());
        let l = mat_log(&e).unwrap();
        assert!((l.inner() - &a).amax() < 1e-12);
    }

    #[test]
    fn log_of_large_rotation() {
        let t = 2.5f64;
        let m = Matrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]).unwrap();
        let l = mat_log(&m).unwrap();
        assert!((l[(1, 0)] - t).abs() < 1e-12);
        let back = mat_exp(&l).unwrap();
        assert!((back.inner() - m.inner()).amax() < 1e-10);
    }

    #[test]
    fn log_rejects_negative_eigenvalue() {
        let m = Matrix::from_diagonal(&[-1.0, 2.0]).unwrap();
        assert!(matches!(mat_log(&m), Err(Error::Branch(_))));
        let half_turn = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(mat_log(&half_turn), Err(Error::Branch(_))));
    }

    #[test]
    fn eig_sym_identity_and_diagonal() {
        let (vals, _) = eig_sym(&Matrix::identity(3)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0]);
        let (vals, vecs) = eig_sym(&Matrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        // Columns are signed permutations of the unit vectors.
        for (c, row) in [1usize, 2, 0].iter().enumerate() {
            assert!((vecs[(*row, c)].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eig_sym_rejects_asymmetric() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]).unwrap();
        assert!(matches!(eig_sym(&m), Err(Error::Symmetry(_))));
    }

    #[test]
    fn fd_rejects_bad_step() {
        let r = fd_derivative(|_| Ok(Matrix::identity(2)), 0.0, 0.0);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn polar_factor_is_orthogonal() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.01, 0.0, -0.02, 1.0, 0.003, 0.0, 0.0, 0.999]);
        let q = polar_orthogonal(&m).unwrap();
        let err = (q.transpose() * &q - DMatrix::<f64>::identity(3, 3)).amax();
        assert!(err < 1e-14);
    }
}
