use wiretap_core::channel::{sample_channel, AntennaConfig};
use wiretap_core::linalg::{numeric_rank, span_contained, CMat};
use wiretap_core::sdof::{
    alignment_precoders, misome_alignment_directions, positive_sdof_condition, sdof_closed_form, sdof_table_lookup,
    verify_alignment, TableRow,
};

/// Largest `rank(H1 V)` over the feasible region found by exhaustive search over
/// subsets of GSVD-free candidate directions is not cheap; instead check the
/// table against itself at every row boundary and against the closed form everywhere.
#[test]
fn closed_form_matches_table_on_full_enumeration() {
    let mut rows = [0usize; 4];
    for config in AntennaConfig::enumerate(6) {
        let closed = sdof_closed_form(config);
        let table = sdof_table_lookup(config).expect("every configuration matches a row");
        assert_eq!(closed.d_star, table.d_star, "{config}: closed {closed:?} vs table {table:?}");
        assert_eq!(closed.d_star, (closed.d0 + closed.d1 + closed.d2).min(config.na).min(config.nb));
        assert!(closed.d_star <= config.na.min(config.nb));
        assert_eq!(positive_sdof_condition(config), closed.d_star > 0, "{config}");
        rows[match table.row {
            TableRow::FullRank => 0,
            TableRow::HelperNullSpace => 1,
            TableRow::SourceNullSpace => 2,
            TableRow::AlignmentOnly => 3,
        }] += 1;
    }
    assert!(rows.iter().all(|&n| n > 0), "every row exercised: {rows:?}");
}

#[test]
fn table_boundary_rows_agree() {
    // Configurations sitting exactly on Na = 2Nb + Ne - Nj evaluate the same under both adjacent rows.
    for config in AntennaConfig::enumerate(8) {
        let AntennaConfig { na, nb, ne, nj } = config;
        if nb < nj && nj < ne + nb && na + nj == 2 * nb + ne {
            let s = (nb + ne - nj).min(ne) + nj.min(ne) - ne;
            let row_b = na + nj - (nb + ne) + s.min((2 * nb + ne - na - nj) / 2);
            assert_eq!(row_b, na.min(nb), "{config}");
            assert_eq!(sdof_table_lookup(config).unwrap().d_star, row_b);
        }
    }
}

#[test]
fn alignment_precoders_achieve_sdof_on_full_enumeration() {
    let mut built = 0;
    for config in AntennaConfig::enumerate(6) {
        let target = sdof_closed_form(config).d_star;
        if target == 0 {
            continue;
        }
        for seed in 0..20 {
            let ch = sample_channel(config, 1000 * seed + 7);
            let pair = alignment_precoders(&ch).unwrap_or_else(|e| panic!("{config} seed {seed}: {e}"));
            let report = verify_alignment(&ch, &pair);
            assert!(report.holds(), "{config} seed {seed}: {report:?}");
            assert_eq!(numeric_rank(&(&ch.h1 * &pair.v), 1e-7), target, "{config} seed {seed}");
            for m in [&pair.v, &pair.w] {
                for c in m.column_iter() {
                    assert!((c.norm() - 1.0).abs() < 1e-10);
                }
            }
            built += 1;
        }
    }
    assert!(built > 10_000);
}

#[test]
fn two_stage_example() {
    let config = AntennaConfig::new(3, 3, 3, 4).unwrap();
    for seed in 0..100 {
        let ch = sample_channel(config, seed);
        let pair = alignment_precoders(&ch).unwrap();
        let report = verify_alignment(&ch, &pair);
        assert!(report.holds() && report.h1v_rank == 2, "seed {seed}: {report:?}");
        assert!(span_contained(&(&ch.g1 * &pair.v), &(&ch.h2 * &pair.w), 1e-7));
    }
}

#[test]
fn single_stage_example() {
    let config = AntennaConfig::new(2, 3, 4, 3).unwrap();
    for seed in 0..100 {
        let ch = sample_channel(config, seed);
        let pair = alignment_precoders(&ch).unwrap();
        let report = verify_alignment(&ch, &pair);
        assert!(report.holds() && report.h1v_rank == 1, "seed {seed}: {report:?}");
    }
}

fn span_equality_residual(a: &CMat, b: &CMat) -> f64 {
    // a and b are single columns; residual of a after projecting onto b, relative to |a|
    let bn = b.norm();
    let an = a.norm();
    let coef = (b.adjoint() * a)[(0, 0)] / (bn * bn);
    (a - b * coef).norm() / an
}

#[test]
fn misome_directions_align() {
    for config in [AntennaConfig::new(3, 1, 3, 2).unwrap(), AntennaConfig::new(2, 1, 1, 2).unwrap()] {
        for seed in 0..100 {
            let ch = sample_channel(config, seed);
            let d = misome_alignment_directions(&ch).unwrap();
            assert!((d.v_o.norm() - 1.0).abs() < 1e-12);
            assert!((d.w_o.norm() - 1.0).abs() < 1e-12);
            assert!((&ch.g2 * d.helper_direction()).norm() < 1e-10);
            let g1v = &ch.g1 * &d.v_o;
            let h2w = &ch.h2 * d.helper_direction();
            assert!(span_equality_residual(&g1v, &h2w) < 1e-8, "{config} seed {seed}");
            assert!(span_equality_residual(&h2w, &g1v) < 1e-8, "{config} seed {seed}");
            let pair = wiretap_core::sdof::PrecoderPair { v: d.v_o.clone(), w: d.helper_direction() };
            assert!(verify_alignment(&ch, &pair).holds_with_gain());
        }
    }
}
