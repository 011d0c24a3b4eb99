//! The matrix construction behind the no-increase bound: an RQ decomposition
//! of the vacuum-coupling matrix `U_ij sqrt(1 - p_j)`, an SVD of its kept
//! block, and the resulting output transmissivities `p''_k = 1 - |R'_kk|²`.
//! Also the doubly-stochastic and weak-majorization checks used with it.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::optics::{LossVector, ModeUnitary};

/// Singular values below this are treated as zero.
pub const RANK_TOL: f64 = 1e-12;
/// Slack allowed by [`weak_majorization_holds`].
pub const MAJORIZATION_TOL: f64 = 1e-9;

fn reverse_rows(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, a.ncols(), |i, j| a[(n - 1 - i, j)])
}

/// `A = R Q` with `R` upper triangular with real nonnegative diagonal and `Q`
/// unitary. Built from a Householder QR of `(J A)†`, `J` the row reversal.
pub fn rq_decompose(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidParameter("RQ decomposition needs a square matrix".into()));
    }
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    // (J A)† = Q1 R1  ⇒  A = (J R1† J)(J Q1†)
    let b = reverse_rows(a).adjoint();
    let qr = b.qr();
    let (q1, r1) = (qr.q(), qr.r());
    let jr = reverse_rows(&r1.adjoint());
    let mut r = CMatrix::from_fn(n, n, |i, j| jr[(i, n - 1 - j)]);
    let mut q = reverse_rows(&q1.adjoint());
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = ZERO;
        }
        let d = r[(i, i)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            // R ← R D*, Q ← D Q keeps the product.
            for row in 0..n {
                r[(row, i)] *= phase.conj();
            }
            for col in 0..n {
                q[(i, col)] *= phase;
            }
            r[(i, i)] = Complex64::new(norm, 0.0);
        } else {
            r[(i, i)] = ZERO;
        }
    }
    Ok((r, q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSvd {
    pub x: CMatrix,
    pub r_prime: CMatrix,
    pub q_prime: CMatrix,
}

/// `R = X† R' Q'` where the top-left `m×m` block of `R'` is diagonal,
/// nonnegative and ascending, and `X`, `Q'` are the identity outside that
/// block.
pub fn block_svd(r: &CMatrix, m: usize) -> Result<BlockSvd> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::InvalidParameter("block SVD needs a square matrix".into()));
    }
    if m > n {
        return Err(Error::InvalidParameter("block size exceeds the matrix".into()));
    }
    let mut x = CMatrix::identity(n, n);
    let mut q_prime = CMatrix::identity(n, n);
    let mut sigma = Vec::new();
    if m > 0 {
        let block = r.view((0, 0), (m, m)).into_owned();
        let (u, values, v) = linalg::svd(&block)
            .ok_or(Error::NumericallySingular(linalg::max_abs(&block)))?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        for (k, &src) in order.iter().enumerate() {
            let s = values[src];
            sigma.push(if s < RANK_TOL { 0.0 } else { s });
            for i in 0..m {
                x[(k, i)] = u[(i, src)].conj();
                q_prime[(k, i)] = v[(i, src)].conj();
            }
        }
    }
    let mut r_prime = &x * r * q_prime.adjoint();
    for i in 0..m {
        for j in 0..m {
            r_prime[(i, j)] = if i == j {
                Complex64::new(sigma[i], 0.0)
            } else {
                ZERO
            };
        }
    }
    Ok(BlockSvd { x, r_prime, q_prime })
}

/// Matrices produced by the construction for one merged interferometer
/// `U`, loss vector `p`, `m` kept modes (the first `m`) and `k` counted
/// modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofTrace {
    pub u: ModeUnitary,
    pub p: LossVector,
    pub m: usize,
    pub k: usize,
    pub r: CMatrix,
    pub q: CMatrix,
    pub x: CMatrix,
    pub r_prime: CMatrix,
    pub q_prime: CMatrix,
    pub q_double_prime: CMatrix,
    pub u_prime: CMatrix,
    /// `p''_k = 1 - |R'_kk|²` for the kept modes, non-increasing.
    pub p_out: Vec<f64>,
}

/// Residuals of the identities the construction relies on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceResiduals {
    /// `max |R_il|` below the diagonal.
    pub triangularity: f64,
    /// `max |R Q − U diag(sqrt(1 − p))|`.
    pub rq: f64,
    /// `max |X† R' Q' − R|`.
    pub block_svd: f64,
    pub q_unitarity: f64,
    pub x_unitarity: f64,
    pub q_prime_unitarity: f64,
    /// `max |R'_kl|` for `k > m`, `l ≤ m`.
    pub zero_pattern: f64,
    /// `max |R'_kl − Σ_m U'_km sqrt(1 − p_m) conj(Q''_lm)|`.
    pub r_prime_identity: f64,
    /// Largest entry of `X` or `Q'` outside the kept block that differs
    /// from the identity.
    pub block_identity: f64,
}

impl ProofTrace {
    /// `Σ_{k≤K} p''_k`, the certified bound on the output efficiency.
    pub fn certified_bound(&self) -> f64 {
        linalg::top_k_sum(&self.p_out, self.k)
    }

    /// `Σ_{ℓ≤K} p↓_ℓ` of the input loss vector.
    pub fn input_sum(&self) -> f64 {
        self.p.top_k_sum(self.k)
    }

    pub fn slack(&self) -> f64 {
        self.input_sum() - self.certified_bound()
    }

    /// `q_ℓ = Σ_j p_j |Q''_ℓj|²` for the first `k` rows.
    pub fn mixed_transmissivities(&self) -> Vec<f64> {
        let n = self.p.len();
        (0..n)
            .map(|l| {
                (0..n)
                    .map(|j| self.p.as_slice()[j] * self.q_double_prime[(l, j)].norm_sqr())
                    .sum()
            })
            .collect()
    }

    pub fn residuals(&self) -> TraceResiduals {
        let n = self.p.len();
        let coupling = vacuum_coupling(&self.u, &self.p);
        let mut triangularity = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                triangularity = triangularity.max(self.r[(i, j)].norm());
            }
        }
        let rebuilt = self.x.adjoint() * &self.r_prime * &self.q_prime;
        let mut zero_pattern = 0.0f64;
        for k in self.m..n {
            for l in 0..self.m {
                zero_pattern = zero_pattern.max(self.r_prime[(k, l)].norm());
            }
        }
        let sqrt_loss: Vec<f64> = self.p.as_slice().iter().map(|&p| libm::sqrt(1.0 - p)).collect();
        let via_primes = CMatrix::from_fn(n, n, |k, l| {
            (0..n)
                .map(|m| self.u_prime[(k, m)] * sqrt_loss[m] * self.q_double_prime[(l, m)].conj())
                .sum()
        });
        let mut block_identity = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i < self.m && j < self.m {
                    continue;
                }
                let id = if i == j { ONE } else { ZERO };
                block_identity = block_identity
                    .max((self.x[(i, j)] - id).norm())
                    .max((self.q_prime[(i, j)] - id).norm());
            }
        }
        TraceResiduals {
            triangularity,
            rq: linalg::max_abs_diff(&(&self.r * &self.q), &coupling),
            block_svd: linalg::max_abs_diff(&rebuilt, &self.r),
            q_unitarity: linalg::unitarity_deviation(&self.q),
            x_unitarity: linalg::unitarity_deviation(&self.x),
            q_prime_unitarity: linalg::unitarity_deviation(&self.q_prime),
            zero_pattern,
            r_prime_identity: linalg::max_abs_diff(&via_primes, &self.r_prime),
            block_identity,
        }
    }
}

/// `U_ij sqrt(1 − p_j)`.
pub fn vacuum_coupling(u: &ModeUnitary, p: &LossVector) -> CMatrix {
    let n = u.dim();
    let m = u.matrix();
    CMatrix::from_fn(n, n, |i, j| m[(i, j)] * libm::sqrt(1.0 - p.as_slice()[j]))
}

/// Runs the construction for merged interferometer `u` (kept modes first),
/// loss `p`, `m` kept modes and `k` counted modes.
pub fn output_transmissivities(
    u: &ModeUnitary,
    p: &LossVector,
    m: usize,
    k: usize,
) -> Result<ProofTrace> {
    let n = u.dim();
    if p.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: p.len(),
        });
    }
    if k == 0 || k > m || m > n {
        return Err(Error::InvalidParameter(alloc::format!(
            "need 1 ≤ K ≤ M ≤ N, got K = {k}, M = {m}, N = {n}"
        )));
    }
    let (r, q) = rq_decompose(&vacuum_coupling(u, p))?;
    let BlockSvd { x, r_prime, q_prime } = block_svd(&r, m)?;
    let p_out = (0..m)
        .map(|i| (1.0 - r_prime[(i, i)].norm_sqr()).clamp(0.0, 1.0))
        .collect();
    let u_prime = &x * u.matrix();
    let q_double_prime = &q_prime * &q;
    Ok(ProofTrace {
        u: u.clone(),
        p: p.clone(),
        m,
        k,
        r,
        q,
        x,
        r_prime,
        q_prime,
        q_double_prime,
        u_prime,
        p_out,
    })
}

/// Nonnegative (within `tol`) with unit row and column sums (within `tol`).
pub fn is_doubly_stochastic(b: &DMatrix<f64>, tol: f64) -> bool {
    if b.nrows() != b.ncols() {
        return false;
    }
    let n = b.nrows();
    b.iter().all(|&x| x >= -tol)
        && (0..n).all(|i| (b.row(i).sum() - 1.0).abs() <= tol)
        && (0..n).all(|j| (b.column(j).sum() - 1.0).abs() <= tol)
}

/// `|U_ij|²`, doubly stochastic for unitary `U`.
pub fn unistochastic(u: &CMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)].norm_sqr())
}

/// `min_K (Σ_{≤K} y↓ − Σ_{≤K} x↓)` over `K = 1..=len(x)`; entries missing
/// from the shorter `y` count as zero. Nonnegative iff `x ≺_w y`.
pub fn weak_majorization_slack(x: &[f64], y: &[f64]) -> f64 {
    let xs = linalg::sorted_descending(x);
    let ys = linalg::sorted_descending(y);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut worst = f64::INFINITY;
    for (i, xv) in xs.iter().enumerate() {
        sx += xv;
        sy += ys.get(i).copied().unwrap_or(0.0);
        worst = worst.min(sy - sx);
    }
    worst
}

/// `x ≺_w y`: every partial sum of the largest entries of `x` is bounded by
/// the corresponding partial sum of `y`, up to [`MAJORIZATION_TOL`].
pub fn weak_majorization_holds(x: &[f64], y: &[f64]) -> bool {
    weak_majorization_slack(x, y) >= -MAJORIZATION_TOL
}
