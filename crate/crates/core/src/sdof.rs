//! Secure degrees of freedom: closed form, the row-by-row table, and the
//! alignment precoders that achieve it.

use alloc::{format, vec::Vec};

use num_complex::Complex64;

use crate::channel::{AntennaConfig, CovariancePair, WiretapChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    columns, gsvd_transform, hstack, null_space_basis, orthogonal_complement, rank_above, sorted_svd, spectral_norm,
    CMat, GsvdResult,
};

/// Relative tolerance used when checking alignment constraints.
pub const ALIGN_TOL: f64 = 1e-7;

/// The terms of the closed-form s.d.o.f.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdofBreakdown {
    pub d0: usize,
    pub d1: usize,
    pub d2: usize,
    pub s: usize,
    pub d_star: usize,
}

fn pos(x: isize) -> usize {
    x.max(0) as usize
}

/// Closed-form s.d.o.f., evaluated as `d0 -> d1 -> s -> d2 -> d*`.
pub fn sdof_closed_form(config: AntennaConfig) -> SdofBreakdown {
    let AntennaConfig { na, nb, ne, nj } = config;
    let (na, nb, ne, nj) = (na as isize, nb as isize, ne as isize, nj as isize);
    let d0 = pos(na - ne) as isize;
    let d1 = pos(na.min(ne) + pos(nj - nb) as isize - ne) as isize;
    let rest = (na - d0 - d1).max(0);
    let s = rest.min(ne) + nj.min(ne) - (rest + nj).min(ne);
    let d2 = s.min(pos((nb - d0 - d1).div_euclid(2)) as isize);
    let d_star = (d0 + d1 + d2).min(na).min(nb);
    SdofBreakdown { d0: d0 as usize, d1: d1 as usize, d2: d2 as usize, s: s as usize, d_star: d_star as usize }
}

/// Row of the s.d.o.f. summary table that applies to a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRow {
    /// `d* = min(Na, Nb)`.
    FullRank,
    /// `Nb < Nj < Ne+Nb` with `Nb+Ne-Nj < Na < 2Nb+Ne-Nj`.
    HelperNullSpace,
    /// `Ne < Na < Ne+Nb` with `Nj <= Nb`.
    SourceNullSpace,
    /// Pure alignment: `d* = min(s, floor(Nb/2))`.
    AlignmentOnly,
}

/// Result of [`sdof_table_lookup`]. `s` is the row's own `s` term (zero for [`TableRow::FullRank`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableEntry {
    pub row: TableRow,
    pub s: usize,
    pub d_star: usize,
}

/// Row-by-row evaluation of the s.d.o.f. summary table, independent of [`sdof_closed_form`].
///
/// Rows are tried top to bottom and the first match wins.
pub fn sdof_table_lookup(config: AntennaConfig) -> Result<TableEntry> {
    let AntennaConfig { na, nb, ne, nj } = config;
    let (na, nb, ne, nj) = (na as isize, nb as isize, ne as isize, nj as isize);
    let mid_helper = nb < nj && nj < ne + nb;
    let entry = |row, s: isize, d: isize| TableEntry { row, s: s as usize, d_star: d as usize };

    if na >= ne + nb || nj >= ne + nb || (2 * nb + ne - nj <= na && na < ne + nb && mid_helper) {
        return Ok(entry(TableRow::FullRank, 0, na.min(nb)));
    }
    if nb + ne - nj < na && na < 2 * nb + ne - nj && mid_helper {
        let s = (nb + ne - nj).min(ne) + nj.min(ne) - ne;
        let d = na + nj - (nb + ne) + s.min((2 * nb + ne - na - nj).div_euclid(2));
        return Ok(entry(TableRow::HelperNullSpace, s, d));
    }
    if ne < na && na < ne + nb && nj <= nb {
        let s = nj.min(ne);
        let d = na - ne + s.min((nb + ne - na).div_euclid(2));
        return Ok(entry(TableRow::SourceNullSpace, s, d));
    }
    if (na <= nb + ne - nj && mid_helper) || (na <= ne && nj <= nb) {
        let s = na.min(ne) + nj.min(ne) - (na + nj).min(ne);
        return Ok(entry(TableRow::AlignmentOnly, s, s.min(nb / 2)));
    }
    Err(Error::Internal(format!("no s.d.o.f. table row matches {config}")))
}

/// Whether the configuration admits a positive s.d.o.f.
pub fn positive_sdof_condition(config: AntennaConfig) -> bool {
    if config.nb == 1 {
        config.ne + 1 < config.na + config.nj
    } else {
        config.ne < config.na + config.nj
    }
}

/// Source precoder `v` (Na×Ka) and helper precoder `w` (Nj×Kj), unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderPair {
    pub v: CMat,
    pub w: CMat,
}

impl PrecoderPair {
    /// Spread `power` evenly over every column of `v` and `w`.
    pub fn equal_power_covariances(&self, power: f64) -> CovariancePair {
        let streams = self.v.ncols() + self.w.ncols();
        let per = if streams == 0 { 0.0 } else { power / streams as f64 };
        let c = Complex64::new(per, 0.0);
        CovariancePair { qa: &self.v * self.v.adjoint() * c, qj: &self.w * self.w.adjoint() * c }
    }
}

/// Which construction [`alignment_precoders`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentCase {
    /// `Na >= Ne+Nb`: message in the null space of `G1`, no jamming.
    SourceNull,
    /// `Nj >= Nb+Ne`: jamming in the null space of `G2`.
    HelperNull,
    /// `Nb < Nj < Ne+Nb`, two-stage GSVD.
    TwoStage,
    /// `Nj <= Nb`, single GSVD.
    SingleStage,
}

pub fn alignment_case(config: AntennaConfig) -> AlignmentCase {
    let AntennaConfig { na, nb, ne, nj } = config;
    if na >= ne + nb {
        AlignmentCase::SourceNull
    } else if nj >= nb + ne {
        AlignmentCase::HelperNull
    } else if nj > nb {
        AlignmentCase::TwoStage
    } else {
        AlignmentCase::SingleStage
    }
}

/// Columns `start..start+len` of `gsvd`'s `s`-block, mapped back through `left` and `right`.
fn aligned_columns(gsvd: &GsvdResult, left: &CMat, right: &CMat, len: usize) -> (CMat, CMat) {
    let w = left * columns(&gsvd.psi1, gsvd.r, len);
    let v = right * columns(&gsvd.psi2, gsvd.psi2_s_offset(), len);
    (w, v)
}

fn expect_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::DegenerateChannel(format!("{what}: got {got}, generic value is {want}")))
    }
}

/// Precoders achieving the maximal s.d.o.f. by aligning the message under the
/// jamming at the eavesdropper while keeping them separable at the receiver.
///
/// The result always satisfies [`verify_alignment`] and `rank(H1 V) = d*`;
/// channels for which that fails raise [`Error::DegenerateChannel`].
pub fn alignment_precoders(ch: &WiretapChannel) -> Result<PrecoderPair> {
    let config = ch.config;
    let AntennaConfig { na, nb, ne, nj } = config;
    let target = sdof_closed_form(config);

    let pair = match alignment_case(config) {
        AlignmentCase::SourceNull => {
            let v0 = null_space_basis(&ch.g1);
            expect_dim("dim null(G1)", v0.ncols(), na - ne)?;
            PrecoderPair { v: v0, w: CMat::zeros(nj, 0) }
        }
        AlignmentCase::HelperNull => {
            let w = null_space_basis(&ch.g2);
            expect_dim("dim null(G2)", w.ncols(), nj - nb)?;
            let svd = sorted_svd(&ch.h1);
            let v = columns(&svd.v, 0, na.min(nb));
            PrecoderPair { v, w }
        }
        AlignmentCase::TwoStage => {
            let v0 = null_space_basis(&ch.g1);
            expect_dim("dim null(G1)", v0.ncols(), target.d0)?;
            let v0c = orthogonal_complement(&v0);
            let gamma = null_space_basis(&ch.g2);
            expect_dim("dim null(G2)", gamma.ncols(), nj - nb)?;
            let h2_bar = &ch.h2 * &gamma;
            let g1_bar = &ch.g1 * &v0c;
            let first = gsvd_transform(&h2_bar, &g1_bar)?;
            expect_dim("first-stage overlap", first.s, target.d1)?;

            if target.d0 + target.d1 >= nb {
                let (w1, v1) = aligned_columns(&first, &gamma, &v0c, nb - target.d0);
                PrecoderPair { v: hstack(na, &[&v0, &v1]), w: w1 }
            } else {
                let (w1, v1) = aligned_columns(&first, &gamma, &v0c, first.s);
                let v01 = hstack(na, &[&v0, &v1]);
                let v01c = orthogonal_complement(&v01);
                let (w2, v2) = if target.d2 > 0 {
                    let second = gsvd_transform(&ch.h2, &(&ch.g1 * &v01c))?;
                    expect_dim("second-stage overlap", second.s, target.s)?;
                    aligned_columns(&second, &CMat::identity(nj, nj), &v01c, target.d2)
                } else {
                    (CMat::zeros(nj, 0), CMat::zeros(na, 0))
                };
                PrecoderPair { v: hstack(na, &[&v01, &v2]), w: hstack(nj, &[&w1, &w2]) }
            }
        }
        AlignmentCase::SingleStage => {
            let v0 = null_space_basis(&ch.g1);
            expect_dim("dim null(G1)", v0.ncols(), target.d0)?;
            let v0c = orthogonal_complement(&v0);
            let (w2, v2) = if target.d2 > 0 {
                let g = gsvd_transform(&ch.h2, &(&ch.g1 * &v0c))?;
                expect_dim("overlap", g.s, target.s)?;
                aligned_columns(&g, &CMat::identity(nj, nj), &v0c, target.d2)
            } else {
                (CMat::zeros(nj, 0), CMat::zeros(na, 0))
            };
            PrecoderPair { v: hstack(na, &[&v0, &v2]), w: w2 }
        }
    };

    let report = verify_alignment(ch, &pair);
    if !report.holds() {
        return Err(Error::DegenerateChannel(format!("alignment constraints violated for {config}: {report:?}")));
    }
    if report.h1v_rank != target.d_star {
        return Err(Error::DegenerateChannel(format!(
            "rank(H1 V) = {} but d* = {} for {config}",
            report.h1v_rank, target.d_star
        )));
    }
    Ok(pair)
}

/// Per-constraint outcome of [`verify_alignment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentReport {
    /// `span(G1 V) ⊂ span(H2 W)`.
    pub eavesdropper_aligned: bool,
    /// `span(G2 W) ∩ span(H1 V) = {0}`.
    pub receiver_separable: bool,
    pub h1v_rank: usize,
    /// Largest singular value of `H1 V`; for a single-antenna receiver this is `|h1 v|`.
    pub legitimate_gain: f64,
    /// Norm of the part of `G1 V` outside `span(H2 W)`, relative to the channel scale.
    pub leakage: f64,
}

impl AlignmentReport {
    pub fn holds(&self) -> bool {
        self.eavesdropper_aligned && self.receiver_separable
    }

    /// The single-antenna-receiver variant, which additionally needs `|h1 v| > 0`.
    pub fn holds_with_gain(&self) -> bool {
        self.holds() && self.h1v_rank > 0
    }
}

/// Check both alignment constraints at [`ALIGN_TOL`].
pub fn verify_alignment(ch: &WiretapChannel, pair: &PrecoderPair) -> AlignmentReport {
    verify_alignment_tol(ch, pair, ALIGN_TOL)
}

pub fn verify_alignment_tol(ch: &WiretapChannel, pair: &PrecoderPair, tol: f64) -> AlignmentReport {
    let nv = spectral_norm(&pair.v);
    let nw = spectral_norm(&pair.w);

    let g1v = &ch.g1 * &pair.v;
    let h2w = &ch.h2 * &pair.w;
    let eve_scale = (spectral_norm(&ch.g1) * nv).max(spectral_norm(&ch.h2) * nw);
    let eve_thr = tol * eve_scale;
    let rank_h2w = rank_above(&h2w, eve_thr);
    let eavesdropper_aligned = rank_above(&hstack(ch.config.ne, &[&g1v, &h2w]), eve_thr) == rank_h2w;

    let leak_basis = orthogonal_complement(&columns(&sorted_svd(&h2w).u, 0, rank_h2w));
    let leakage = if eve_scale > 0.0 { spectral_norm(&(leak_basis.adjoint() * &g1v)) / eve_scale } else { 0.0 };

    let h1v = &ch.h1 * &pair.v;
    let g2w = &ch.g2 * &pair.w;
    let bob_scale = (spectral_norm(&ch.h1) * nv).max(spectral_norm(&ch.g2) * nw);
    let bob_thr = tol * bob_scale;
    let h1v_rank = rank_above(&h1v, bob_thr);
    let receiver_separable =
        rank_above(&hstack(ch.config.nb, &[&h1v, &g2w]), bob_thr) == h1v_rank + rank_above(&g2w, bob_thr);

    AlignmentReport {
        eavesdropper_aligned,
        receiver_separable,
        h1v_rank,
        legitimate_gain: spectral_norm(&h1v),
        leakage,
    }
}

/// Directions achieving one secure degree of freedom with a single-antenna receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct MisomeDirections {
    /// Unit source direction (Na×1).
    pub v_o: CMat,
    /// Unit helper direction inside the null space of `g2`, in `gamma` coordinates ((Nj-1)×1).
    pub w_o: CMat,
    /// Orthonormal basis of `null(g2)` (Nj×(Nj-1)).
    pub gamma: CMat,
}

impl MisomeDirections {
    /// Helper direction in antenna coordinates, `gamma * w_o`.
    pub fn helper_direction(&self) -> CMat {
        &self.gamma * &self.w_o
    }
}

/// Source and helper directions that hide the message under the jamming at the
/// eavesdropper while the jamming stays invisible to the single-antenna receiver.
///
/// With a single helper antenna the null space of `g2` is empty; if `Ne < Na`
/// the source direction is then taken as the projection of `h1^H` onto `null(G1)`
/// and `w_o` has no rows.
pub fn misome_alignment_directions(ch: &WiretapChannel) -> Result<MisomeDirections> {
    let AntennaConfig { na, nb, ne, nj } = ch.config;
    if nb != 1 {
        return Err(Error::InvalidInput(format!("single-antenna receiver required, got Nb = {nb}")));
    }
    if ne + 1 >= na + nj {
        return Err(Error::Infeasible(format!("Ne = {ne} >= Na + Nj - 1 = {}: no positive s.d.o.f.", na + nj - 1)));
    }
    let gamma = null_space_basis(&ch.g2);
    expect_dim("dim null(g2)", gamma.ncols(), nj - 1)?;

    if nj == 1 {
        let null_g1 = null_space_basis(&ch.g1);
        expect_dim("dim null(G1)", null_g1.ncols(), na - ne)?;
        let proj = &null_g1 * (null_g1.adjoint() * ch.h1.adjoint());
        let norm = proj.norm();
        if norm <= crate::linalg::RANK_TOL * ch.h1.norm() {
            return Err(Error::DegenerateChannel("h1 is orthogonal to null(G1)".into()));
        }
        return Ok(MisomeDirections { v_o: proj / Complex64::new(norm, 0.0), w_o: CMat::zeros(0, 1), gamma });
    }

    let h2_bar = &ch.h2 * &gamma;
    let g = gsvd_transform(&h2_bar, &ch.g1)?;
    if g.s == 0 {
        return Err(Error::DegenerateChannel(format!(
            "no common subspace between H2 null(g2) and G1 (k={}, r={}, p={})",
            g.k, g.r, g.p
        )));
    }
    let w = columns(&g.psi1, g.r, 1);
    let v = columns(&g.psi2, g.psi2_s_offset(), 1);
    let (wn, vn) = (w.norm(), v.norm());
    let v_o = v / Complex64::new(vn, 0.0);
    if (&ch.h1 * &v_o).norm() <= crate::linalg::RANK_TOL * ch.h1.norm() {
        return Err(Error::DegenerateChannel("|h1 v_o| vanishes".into()));
    }
    Ok(MisomeDirections { v_o, w_o: w / Complex64::new(wn, 0.0), gamma })
}

/// All configurations with at most `max` antennas per terminal and their closed-form s.d.o.f.
pub fn sdof_table(max: usize) -> Vec<(AntennaConfig, SdofBreakdown)> {
    AntennaConfig::enumerate(max).map(|c| (c, sdof_closed_form(c))).collect()
}
