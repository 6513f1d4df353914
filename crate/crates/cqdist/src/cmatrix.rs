//! Dense complex linear algebra for small matrices: products, adjoints,
//! traces, commutators, Hermiticity predicates, and operator norms.
//!
//! Everything here is sized for the n ≤ 16 matrices this crate works with;
//! storage is row-major and operations are plain loops.

use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex scalar with f64 components.
pub type C64 = Complex<f64>;

/// Default absolute tolerance for Hermiticity checks (max-entry magnitude).
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Jacobi sweep convergence: off-diagonal Frobenius mass relative to diagonal.
const JACOBI_REL_THRESHOLD: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense n×n complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<C64>,
}

fn check_finite(entries: &[C64]) -> Result<()> {
    for (k, z) in entries.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidState(format!(
                "non-finite entry {z} at flat index {k}"
            )));
        }
    }
    Ok(())
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Entries must all be finite.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("matrix dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidState(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::InvalidState("ragged rows in matrix literal".into()));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i] = C64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Conjugate transpose: result[i][j] = conj(self[j][i]).
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = self.entries[j * n + i].conj();
            }
        }
        out
    }

    /// Standard matrix product. Dimensions must agree.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in mul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim(), "dimension mismatch in mul_vec");
        let n = self.dim;
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v.entries[j]).sum())
            .collect();
        ComplexVector { entries }
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in add");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch in sub");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Squared Frobenius norm, Σ|m_ij|² = Tr(M†M).
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// True iff the max-entry magnitude of M − M† is within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        debug_assert!(tol >= 0.0);
        let n = self.dim;
        for i in 0..n {
            for j in i..n {
                let d = self.entries[i * n + j] - self.entries[j * n + i].conj();
                if d.norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// True iff M† = −M (entrywise within `tol`) and |Tr(M)| ≤ tol.
    pub fn is_antihermitian_traceless(&self, tol: f64) -> bool {
        debug_assert!(tol >= 0.0);
        let n = self.dim;
        for i in 0..n {
            for j in i..n {
                let d = self.entries[i * n + j] + self.entries[j * n + i].conj();
                if d.norm() > tol {
                    return false;
                }
            }
        }
        self.trace().norm() <= tol
    }

    /// Largest singular value of the matrix (max |eigenvalue| for normal M).
    ///
    /// For 2×2 anti-Hermitian traceless input this takes the √(½ Tr(M†M))
    /// shortcut, which equals the singular value exactly in that case and only
    /// in that case; debug builds verify the shortcut against the general
    /// path at 1e−10 relative. Higher dimensions always use the general path.
    pub fn operator_norm(&self) -> f64 {
        if self.dim == 2 && self.is_antihermitian_traceless(HERMITICITY_TOL) {
            let fast = (0.5 * self.frobenius_norm_sq()).sqrt();
            #[cfg(debug_assertions)]
            {
                let general = self.operator_norm_general();
                let scale = fast.max(general);
                if scale > 0.0 {
                    debug_assert!(
                        (fast - general).abs() <= 1e-10 * scale,
                        "2x2 norm shortcut disagrees with general path: {fast} vs {general}"
                    );
                }
            }
            return fast;
        }
        self.operator_norm_general()
    }

    /// General-path operator norm: √λ_max(M†M) by cyclic Jacobi.
    pub fn operator_norm_general(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let eigs = gram.hermitian_eigenvalues();
        eigs.into_iter().fold(0.0_f64, f64::max).max(0.0).sqrt()
    }

    /// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// The input is symmetrized first, so matrices Hermitian only up to
    /// roundoff are handled. Converges when the off-diagonal Frobenius mass
    /// drops below 1e−14 of the diagonal mass (at most 100 sweeps).
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        // work on (M + M†)/2
        let mut a = self.add(&self.adjoint()).scale(C64::new(0.5, 0.0));

        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off_sq = 0.0;
            let mut diag_sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let m = a.entries[i * n + j].norm_sqr();
                    if i == j {
                        diag_sq += m;
                    } else {
                        off_sq += m;
                    }
                }
            }
            if off_sq.sqrt() <= JACOBI_REL_THRESHOLD * diag_sq.sqrt() {
                break;
            }

            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.entries[p * n + q];
                    let r = apq.norm();
                    if r == 0.0 {
                        continue;
                    }
                    let u = apq / r;
                    let app = a.entries[p * n + p].re;
                    let aqq = a.entries[q * n + q].re;
                    let tau = (aqq - app) / (2.0 * r);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let ubar = u.conj();

                    // columns p, q: A <- A * J with J = [[c, s], [-s*ubar, c*ubar]]
                    for k in 0..n {
                        let akp = a.entries[k * n + p];
                        let akq = a.entries[k * n + q];
                        a.entries[k * n + p] = akp * c - akq * (ubar * s);
                        a.entries[k * n + q] = akp * s + akq * (ubar * c);
                    }
                    // rows p, q: A <- J† * A
                    for k in 0..n {
                        let apk = a.entries[p * n + k];
                        let aqk = a.entries[q * n + k];
                        a.entries[p * n + k] = apk * c - aqk * (u * s);
                        a.entries[q * n + k] = apk * s + aqk * (u * c);
                    }
                }
            }
        }

        (0..n).map(|i| a.entries[i * n + i].re).collect()
    }
}

/// Commutator [H, R] = H·R − R·H.
pub fn commutator(h: &ComplexMatrix, r: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(h.dim(), r.dim(), "matrix dimension mismatch in commutator");
    h.mul(r).sub(&r.mul(h))
}

impl ComplexVector {
    /// Builds a vector; entries must be finite.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidState("vector dimension must be >= 1".into()));
        }
        check_finite(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            entries: values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.entries[i]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Euclidean norm √(Σ|vᵢ|²).
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product ⟨self, other⟩ = Σ conj(selfᵢ)·otherᵢ.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Outer product |self⟩⟨other|.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in outer");
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.entries[i] * other.entries[j].conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in add");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in sub");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let entries = (0..n * n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(n, entries).unwrap()
    }

    /// Anti-Hermitian traceless matrix: purely imaginary diagonal summing to
    /// zero, off-diagonal pairs with m[j][i] = −conj(m[i][j]).
    fn random_antihermitian_traceless(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n);
        let mut diag_sum = 0.0;
        for i in 0..n {
            if i < n - 1 {
                let d = rng.gen_range(-1.0..1.0);
                m.set(i, i, c(0.0, d));
                diag_sum += d;
            } else {
                m.set(i, i, c(0.0, -diag_sum));
            }
            for j in (i + 1)..n {
                let re = rng.gen_range(-1.0..1.0);
                let im = rng.gen_range(-1.0..1.0);
                m.set(i, j, c(re, im));
                m.set(j, i, c(-re, im));
            }
        }
        m
    }

    /// Independent singular-value oracle: power iteration on M†M.
    fn power_iteration_norm(m: &ComplexMatrix, rng: &mut impl Rng) -> f64 {
        let gram = m.adjoint().mul(m);
        let n = gram.dim();
        let mut v = ComplexVector::new(
            (0..n)
                .map(|_| c(rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)))
                .collect(),
        )
        .unwrap();
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let w = gram.mul_vec(&v);
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w.scale(c(1.0 / norm, 0.0));
            let next = v.inner(&gram.mul_vec(&v)).re;
            if (next - lambda).abs() <= 1e-14 * next.abs().max(1.0) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.max(0.0).sqrt()
    }

    #[test]
    fn adjoint_conjugates_diagonal() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a.get(0, 0), c(0.0, -1.0));
        assert_eq!(a.get(1, 1), c(0.0, 1.0));
    }

    #[test]
    fn adjoint_transposes_real_matrix() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a.get(0, 1), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(1.0, 0.0));
    }

    #[test]
    fn adjoint_of_symbolic_offdiagonal() {
        // M = [[0, 2iβ+λ], [2iβ−λ, 0]] at β = λ = 1; worked by hand from
        // result[i][j] = conj(M[j][i]).
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 2.0)],
            vec![c(-1.0, 2.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a.get(0, 1), c(-1.0, -2.0)); // conj(2i−1)
        assert_eq!(a.get(1, 0), c(1.0, -2.0)); // conj(2i+1)
        assert_eq!(a.adjoint(), m);
    }

    #[test]
    fn adjoint_is_involutive_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..6);
            let m = random_matrix(&mut rng, n);
            assert_eq!(m.adjoint().adjoint(), m);
        }
    }

    #[test]
    fn mul_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = random_matrix(&mut rng, 3);
        let id = ComplexMatrix::identity(3);
        assert_eq!(id.mul(&m), m);
        assert_eq!(m.mul(&id), m);
    }

    #[test]
    fn mul_by_swap_matrix_swaps_rows() {
        let swap = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let p = swap.mul(&m);
        assert_eq!(p.get(0, 0), c(3.0, 0.0));
        assert_eq!(p.get(0, 1), c(4.0, 0.0));
        assert_eq!(p.get(1, 0), c(1.0, 0.0));
        assert_eq!(p.get(1, 1), c(2.0, 0.0));
    }

    #[test]
    fn diag_involution_gives_identity() {
        let d = ComplexMatrix::diag(&[1.0, -1.0]);
        assert_eq!(d.mul(&d), ComplexMatrix::identity(2));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(ComplexMatrix::identity(2).trace(), c(2.0, 0.0));
        let d = ComplexMatrix::diag(&[0.7, -0.7]);
        assert_eq!(d.trace(), c(0.0, 0.0));
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_matrix(&mut rng, 3);
        let z = commutator(&h, &h);
        assert!(z.max_abs_entry() <= 1e-14);
    }

    #[test]
    fn commutator_matches_worked_two_level_case() {
        // H = λ diag(1,−1), ρ = [[cos²t, β sin2t],[β sin2t, sin²t]]
        // gives λ [[0, 2β sin2t],[−2β sin2t, 0]]; at t=π/4, λ=1, β=½ the
        // corner entries are ±1.
        let lambda = 1.0;
        let beta = 0.5;
        let t = std::f64::consts::FRAC_PI_4;
        let h = ComplexMatrix::diag(&[lambda, -lambda]);
        let rho = ComplexMatrix::from_rows(&[
            vec![c(t.cos() * t.cos(), 0.0), c(beta * (2.0 * t).sin(), 0.0)],
            vec![c(beta * (2.0 * t).sin(), 0.0), c(t.sin() * t.sin(), 0.0)],
        ])
        .unwrap();
        let com = commutator(&h, &rho);
        let expected = 2.0 * lambda * beta * (2.0 * t).sin();
        assert!((com.get(0, 1) - c(expected, 0.0)).norm() < 1e-15);
        assert!((com.get(1, 0) - c(-expected, 0.0)).norm() < 1e-15);
        assert!((com.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(com.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn commutator_is_antisymmetric_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            let ab = commutator(&a, &b);
            let ba = commutator(&b, &a);
            for (x, y) in ab.entries().iter().zip(ba.entries()) {
                assert_eq!(*x, -y);
            }
        }
    }

    #[test]
    fn commutator_trace_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            assert!(commutator(&a, &b).trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn hermiticity_predicates() {
        assert!(ComplexMatrix::diag(&[1.0, -1.0]).is_hermitian(0.0));
        let skew = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(!skew.is_hermitian(1e-12));

        let anti = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        assert!(anti.is_antihermitian_traceless(1e-12));
        assert!(!ComplexMatrix::identity(2).is_antihermitian_traceless(1e-12));
    }

    #[test]
    fn operator_norm_of_imaginary_diag_is_one() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        assert!((m.operator_norm() - 1.0).abs() < 1e-14);
        assert!(ComplexMatrix::zeros(3).operator_norm() == 0.0);
    }

    #[test]
    fn operator_norm_matches_worked_deviation_value() {
        // deviation operator of the first worked example at t=π/4, λ=1,
        // β=½ reduces to [[−i, −1],[1, i]], with norm √2.
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.0, -1.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 1.0)],
        ])
        .unwrap();
        assert!((a.operator_norm() - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_invariant_under_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..30 {
            let n = rng.gen_range(1..6);
            let m = random_matrix(&mut rng, n);
            let a = m.operator_norm();
            let b = m.adjoint().operator_norm();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn operator_norm_scales_homogeneously() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 3);
            let factor = rng.gen_range(-5.0..5.0);
            let scaled = m.scale(c(factor, 0.0)).operator_norm();
            let direct = factor.abs() * m.operator_norm();
            assert!((scaled - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn two_by_two_shortcut_equals_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..200 {
            let m = random_antihermitian_traceless(&mut rng, 2);
            let fast = (0.5 * m.frobenius_norm_sq()).sqrt();
            let general = m.operator_norm_general();
            assert!(
                (fast - general).abs() <= 1e-12 * general.max(1e-30),
                "fast {fast} general {general}"
            );
        }
    }

    #[test]
    fn three_by_three_shortcut_breaks_down() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut violated = false;
        for _ in 0..50 {
            let m = random_antihermitian_traceless(&mut rng, 3);
            assert!(m.is_antihermitian_traceless(1e-12));
            let fast = (0.5 * m.frobenius_norm_sq()).sqrt();
            let general = m.operator_norm_general();
            if (fast - general).abs() > 1e-3 * general.max(1e-30) {
                violated = true;
            }
        }
        assert!(
            violated,
            "shortcut never diverged from the true norm in 3x3"
        );
    }

    #[test]
    fn general_norm_agrees_with_power_iteration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..20 {
            let m = random_antihermitian_traceless(&mut rng, 3);
            let jacobi = m.operator_norm_general();
            let oracle = power_iteration_norm(&m, &mut rng);
            assert!(
                (jacobi - oracle).abs() <= 1e-12 * jacobi.max(1.0),
                "jacobi {jacobi} oracle {oracle}"
            );
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_known_matrix() {
        // [[2, 1],[1, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let mut eigs = m.hermitian_eigenvalues();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] - 1.0).abs() < 1e-13);
        assert!((eigs[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn vector_norms_and_products() {
        assert_eq!(ComplexVector::from_real(&[1.0, 0.0]).norm(), 1.0);
        for k in 0..8 {
            let t = 0.35 + k as f64;
            let v = ComplexVector::from_real(&[t.cos(), t.sin()]);
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }

        // L of the first worked pure case at α̇ = −λcos2t, λ = 1, t = π/4:
        // α̇ vanishes there and ‖L‖ = √2.
        let t = std::f64::consts::FRAC_PI_4;
        let (lambda, adot) = (1.0, -(2.0 * t).cos());
        let l = ComplexVector::new(vec![
            c(-(adot + lambda) * t.cos(), -t.sin()),
            c(-(adot - lambda) * t.sin(), t.cos()),
        ])
        .unwrap();
        assert!((l.norm() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn outer_product_of_basis_vector_is_projector() {
        let e0 = ComplexVector::from_real(&[1.0, 0.0]);
        let p = e0.outer(&e0);
        assert_eq!(p, ComplexMatrix::diag(&[1.0, 0.0]));
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }
}
