//! Artificial-noise precoders.
//!
//! The first precoder `Q` spans the null space of Bob's post-CP channel, so
//! AN never reaches Bob's data subchannels. Only `L_u = max(L_B, L_E)` of its
//! `N_cp` directions survive Eve's CP removal; the effective AN channel
//! `Q̃ = F R_cp G_time Q` has rank `L_u`.
//!
//! Column ordering of the structured `Q` is fixed: the `N_cp − L_B`
//! canonical directions that land entirely on Bob's CP come first, the `L_B`
//! directions built from Bob's taps come last. Under this ordering the first
//! `N_cp − L_u` columns of `Q̃` are exactly zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::ofdm::{fft_columns, ChannelPair, ChannelTaps, OfdmConfig};

/// Number of AN streams that can hurt Eve, `max(L_B, L_E)`.
pub fn useful_stream_count(l_b: usize, l_e: usize) -> usize {
    l_b.max(l_e)
}

/// Null-space precoder built from the channel structure.
///
/// Returns `Q = [W | Q″]` of size `(N+N_cp) × N_cp` with orthonormal columns
/// and `R_cp H_time Q = 0`.
pub fn null_space_structured(bob: &ChannelTaps, cfg: &OfdmConfig) -> Result<CMatrix> {
    bob.check_fits(cfg)?;
    if !(bob.energy() > 1e-200) {
        return Err(Error::DegenerateChannel);
    }
    let (n, ncp) = (cfg.n(), cfg.n_cp());
    let l_b = bob.memory();
    let free = ncp - l_b;

    let mut q = CMatrix::zeros(n + ncp, ncp);
    for j in 0..free {
        q[(j, j)] = ONE;
    }
    if l_b > 0 {
        let tail = toeplitz_band_null_space(bob.taps(), n);
        q.view_mut((free, free), (n + l_b, l_b)).copy_from(&tail);
    }
    Ok(q)
}

/// Orthonormal basis of the null space of the `N × (N+L)` banded Toeplitz
/// block `H′` whose row `k` holds `h(L), …, h(0)` starting at column `k`.
///
/// Householder QR of `H′*` restricted to the band: every reflector spans
/// `L + 1` rows, so the whole factorization and the extraction of the last
/// `L` columns of the orthogonal factor cost `O(N L²)`.
fn toeplitz_band_null_space(taps: &[Complex64], n: usize) -> CMatrix {
    let l = taps.len() - 1;
    let rows = n + l;
    let width = l + 1;

    // A = H′*, column j nonzero on rows j..=j+L with A[j+L−m, j] = conj(h(m)).
    let mut a = CMatrix::zeros(rows, n);
    for j in 0..n {
        for (m, h) in taps.iter().enumerate() {
            a[(j + l - m, j)] = h.conj();
        }
    }

    // Reflector j is I − 2 v v* / (v* v) acting on rows j..j+L.
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(n);
    for j in 0..n {
        let x: Vec<Complex64> = (0..width).map(|t| a[(j + t, j)]).collect();
        let Some(v) = householder_vector(&x) else {
            reflectors.push(None);
            continue;
        };
        let last_col = (j + l).min(n - 1);
        for c in j..=last_col {
            apply_reflector(&v, &mut a, j, c);
        }
        reflectors.push(Some(v));
    }

    // Columns n..rows of the orthogonal factor: H_0 ⋯ H_{N−1} [0; I_L].
    let mut basis = CMatrix::zeros(rows, l);
    for t in 0..l {
        basis[(n + t, t)] = ONE;
    }
    for j in (0..n).rev() {
        if let Some(v) = &reflectors[j] {
            for c in 0..l {
                apply_reflector(v, &mut basis, j, c);
            }
        }
    }
    basis
}

/// Householder vector `v` with `(I − 2vv*/v*v) x = β e₁`, or `None` when `x = 0`.
fn householder_vector(x: &[Complex64]) -> Option<Vec<Complex64>> {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
    let mut v = x.to_vec();
    // v = x − β e₁ with β = −phase·‖x‖ avoids cancellation.
    v[0] += phase * norm;
    Some(v)
}

fn apply_reflector(v: &[Complex64], m: &mut CMatrix, row0: usize, col: usize) {
    let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * m[(row0 + t, col)]).sum();
    let scale = dot * (2.0 / vv);
    for (t, vt) in v.iter().enumerate() {
        m[(row0 + t, col)] -= vt * scale;
    }
}

/// Generic null-space basis of `H_eff` by singular-value thresholding.
///
/// The result has `cols − rows` orthonormal columns; any other null-space
/// dimension is reported as [`Error::RankDeficient`].
pub fn null_space_svd(h_eff: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = h_eff.shape();
    let expected = cols.saturating_sub(rows);
    let (row_space, sv, _) = linalg::thin_svd(&h_eff.adjoint());
    let rank = linalg::numerical_rank(&sv, rows, cols);
    let found = cols - rank;
    if found != expected {
        return Err(Error::RankDeficient { expected, found });
    }
    let kept = row_space.columns(0, rank).into_owned();
    Ok(linalg::orthogonal_complement(&kept))
}

/// Effective AN channel at Eve, `Q̃ = F R_cp G_time Q` (N × N_cp).
pub fn effective_an_channel(eve: &ChannelTaps, q: &CMatrix, cfg: &OfdmConfig) -> CMatrix {
    let (n, ncp) = (cfg.n(), cfg.n_cp());
    assert_eq!(q.nrows(), n + ncp, "precoder height must be N + N_cp");
    let g = eve.taps();
    let mut out = CMatrix::zeros(n, q.ncols());
    for s in 0..q.ncols() {
        for k in 0..n {
            let row = ncp + k;
            let mut acc = ZERO;
            for (m, gm) in g.iter().enumerate().take(row + 1) {
                acc += gm * q[(row - m, s)];
            }
            out[(k, s)] = acc;
        }
    }
    fft_columns(&mut out);
    out / Complex64::new((n as f64).sqrt(), 0.0)
}

/// SVD of the effective AN channel, `Q̃ = R_z Λ_z V_z*`, singular values
/// descending.
///
/// `left` holds the left singular vectors paired with the nonzero columns of
/// `Q̃`; the full unitary `R_z` is available from [`AnSvd::left_unitary`].
#[derive(Debug, Clone)]
pub struct AnSvd {
    pub left: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_z: CMatrix,
    rows: usize,
}

impl AnSvd {
    /// Full `N × N` unitary `R_z`.
    pub fn left_unitary(&self) -> CMatrix {
        let complement = linalg::orthogonal_complement(&self.left);
        let mut full = CMatrix::zeros(self.rows, self.rows);
        full.columns_mut(0, self.left.ncols()).copy_from(&self.left);
        full.columns_mut(self.left.ncols(), complement.ncols()).copy_from(&complement);
        full
    }

    /// `Λ_z` as the rectangular `N × N_cp` diagonal matrix.
    pub fn lambda(&self) -> CMatrix {
        let cols = self.v_z.nrows();
        let mut lam = CMatrix::zeros(self.rows, cols);
        for (i, &s) in self.singular_values.iter().enumerate() {
            lam[(i, i)] = Complex64::new(s, 0.0);
        }
        lam
    }

    /// Number of singular values above the rank threshold.
    pub fn rank(&self) -> usize {
        linalg::numerical_rank(&self.singular_values, self.rows, self.v_z.nrows())
    }

    /// Ratio `σ_r / σ_{r+1}` across the numerical rank boundary; infinite when
    /// there is no trailing value or it is exactly zero.
    pub fn rank_gap(&self) -> f64 {
        let r = self.rank();
        if r == 0 || r >= self.singular_values.len() {
            return f64::INFINITY;
        }
        self.singular_values[r - 1] / self.singular_values[r]
    }
}

/// Factorizes `Q̃`.
///
/// Columns that are exactly zero (the useless AN directions under the
/// structured precoder) are kept out of the factorization, so their
/// singular values are exactly zero rather than roundoff. Their right
/// singular vectors are the matching canonical directions, placed last.
pub fn svd_an(q_tilde: &CMatrix) -> AnSvd {
    let (rows, cols) = q_tilde.shape();
    let live: Vec<usize> = (0..cols).filter(|&j| q_tilde.column(j).iter().any(|z| *z != ZERO)).collect();
    if live.len() == cols {
        let (left, singular_values, v_z) = linalg::thin_svd(q_tilde);
        return AnSvd { left, singular_values, v_z, rows };
    }

    let (left, mut singular_values, w) = if live.is_empty() {
        (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(0, 0))
    } else {
        linalg::thin_svd(&q_tilde.select_columns(&live))
    };
    let mut v_z = CMatrix::zeros(cols, cols);
    for (r, &j) in live.iter().enumerate() {
        for c in 0..w.ncols() {
            v_z[(j, c)] = w[(r, c)];
        }
    }
    let mut next = w.ncols();
    for j in (0..cols).filter(|j| !live.contains(j)) {
        v_z[(j, next)] = ONE;
        next += 1;
    }
    singular_values.resize(cols.min(rows).max(w.ncols()), 0.0);
    AnSvd { left, singular_values, v_z, rows }
}

/// Second precoder for the known-CSI case: the unitary `U` with `U* V_z = I`,
/// which is `V_z` itself.
pub fn second_precoder(v_z: &CMatrix) -> CMatrix {
    v_z.clone()
}

/// Number of columns of `Q̃` whose norm is negligible next to the largest
/// column. Under structured `Q` this equals `N_cp − L_u`.
pub fn negligible_columns(q_tilde: &CMatrix) -> usize {
    let norms: Vec<f64> = q_tilde.column_iter().map(|c| c.norm()).collect();
    let largest = norms.iter().cloned().fold(0.0, f64::max);
    norms.iter().filter(|&&c| c <= 1e-10 * largest.max(f64::MIN_POSITIVE)).count()
}

/// Everything the transmitter derives from one channel realization.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub q: CMatrix,
    pub q_tilde: CMatrix,
    pub svd: AnSvd,
    /// Present only when Eve's instantaneous CSI is known.
    pub u: Option<CMatrix>,
    pub useful: usize,
}

impl PrecoderSet {
    pub fn build(pair: &ChannelPair, cfg: &OfdmConfig, known_csi: bool) -> Result<Self> {
        let q = null_space_structured(&pair.bob, cfg)?;
        let q_tilde = effective_an_channel(&pair.eve, &q, cfg);
        let svd = svd_an(&q_tilde);
        let u = known_csi.then(|| second_precoder(&svd.v_z));
        let useful = useful_stream_count(pair.bob.memory(), pair.eve.memory());
        Ok(Self { q, q_tilde, svd, u, useful })
    }
}
