mod common;

use common::*;
use risbal::beamform::*;
use risbal::metrics::evaluate;
use risbal::sim::{design_all, drop_channels, evaluate_designs, Scheme};
use risbal::{CMatrix, CVector, Complex64, Error};

fn slnr(rows: &CMatrix, k: usize, v: &CVector, reg: f64) -> f64 {
    let gains = rows * v;
    let signal = gains[k].norm_sqr();
    let leak: f64 = gains.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g.norm_sqr()).sum();
    signal / (leak + reg * v.norm_squared())
}

#[test]
fn slnr_beams_beat_random_directions() {
    let mut r = rng(77);
    let (k_users, n) = (4, 6);
    let ch = CompositeChannels {
        rows: gaussian_matrix(&mut r, k_users, n),
    };
    let (power, noise) = (2.0, 0.1);
    let bf = slnr_beamformer(&ch, power, noise).unwrap();
    let reg = k_users as f64 * noise / power;
    for k in 0..k_users {
        let best = slnr(&ch.rows, k, &bf.f.column(k).into_owned(), reg);
        for _ in 0..1000 {
            let probe = gaussian_vector(&mut r, n);
            assert!(slnr(&ch.rows, k, &probe, reg) <= best * (1.0 + 1e-12));
        }
    }
}

#[test]
fn equal_power_split() {
    let mut r = rng(5);
    let ch = CompositeChannels {
        rows: gaussian_matrix(&mut r, 3, 5).scale(1e-4),
    };
    let bf = slnr_beamformer(&ch, 1.0, 4e-14).unwrap();
    assert!(rel_err(bf.total_power(), 1.0) < 1e-12);
    for col in bf.f.column_iter() {
        assert!(rel_err(col.norm_squared(), 1.0 / 3.0) < 1e-12);
    }
}

#[test]
fn joint_rescaling_of_channels_and_noise_changes_nothing() {
    let mut r = rng(9);
    let rows = gaussian_matrix(&mut r, 4, 4);
    let a = CompositeChannels { rows: rows.clone() };
    let b = CompositeChannels { rows: rows.scale(1e-5) };
    let fa = slnr_beamformer(&a, 1.0, 0.3).unwrap();
    let fb = slnr_beamformer(&b, 1.0, 0.3e-10).unwrap();
    assert!((&fa.f - &fb.f).norm() < 1e-9);
    let sa = evaluate(&a, &fa, 0.3).unwrap();
    let sb = evaluate(&b, &fb, 0.3e-10).unwrap();
    for (x, y) in sa.per_user_sinr.iter().zip(&sb.per_user_sinr) {
        assert!(rel_err(*x, *y) < 1e-9);
    }
}

#[test]
fn sinr_matches_a_hand_computation() {
    // h₁ = [1, 0], h₂ = [1, 1]; f₁ = [1, 0], f₂ = [0, j]; σ² = 0.5.
    let ch = CompositeChannels {
        rows: CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
    };
    let bf = Beamformer {
        f: CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
        power_budget: 2.0,
    };
    let rep = evaluate(&ch, &bf, 0.5).unwrap();
    // User 1: signal 1, interference |0|² = 0 → 2. User 2: signal |j|² = 1,
    // interference |1|² = 1 → 1/1.5.
    assert!(rel_err(rep.per_user_sinr[0], 2.0) < 1e-15);
    assert!(rel_err(rep.per_user_sinr[1], 1.0 / 1.5) < 1e-15);
    let expected = 3f64.log2() + (1.0 + 1.0 / 1.5f64).log2();
    assert!(rel_err(rep.sum_rate, expected) < 1e-15);
}

#[test]
fn common_unitary_rotation_preserves_sinr() {
    let mut r = rng(21);
    let rows = gaussian_matrix(&mut r, 3, 4);
    let f = gaussian_matrix(&mut r, 4, 3);
    let q = gaussian_matrix(&mut r, 4, 4).qr().q();
    let base = evaluate(&CompositeChannels { rows: rows.clone() }, &Beamformer { f: f.clone(), power_budget: 1.0 }, 0.2).unwrap();
    let rotated = evaluate(
        &CompositeChannels { rows: rows * &q },
        &Beamformer { f: q.adjoint() * f, power_budget: 1.0 },
        0.2,
    )
    .unwrap();
    for (x, y) in base.per_user_sinr.iter().zip(&rotated.per_user_sinr) {
        assert!(rel_err(*x, *y) < 1e-10);
    }
}

#[test]
fn more_noise_means_lower_sinr() {
    let mut r = rng(2);
    let ch = CompositeChannels {
        rows: gaussian_matrix(&mut r, 3, 3),
    };
    let bf = Beamformer {
        f: gaussian_matrix(&mut r, 3, 3),
        power_budget: 1.0,
    };
    let quiet = evaluate(&ch, &bf, 0.01).unwrap();
    let loud = evaluate(&ch, &bf, 1.0).unwrap();
    for (q, l) in quiet.per_user_sinr.iter().zip(&loud.per_user_sinr) {
        assert!(l < q);
    }
    assert!(loud.sum_rate < quiet.sum_rate);
}

#[test]
fn composite_rows_match_dense_products() {
    let cfg = small_scenario();
    let ch = drop_channels(&cfg, 41).unwrap();
    let phi = random_phases(&mut rng(1), ch.ris_elements());
    let rot = Complex64::from_polar(1.0, ch.theta);
    let c1 = composite_cell1(&phi, &ch).unwrap();
    let c2 = composite_cell2(&phi, &ch).unwrap();
    for k in 0..cfg.users_per_cell {
        let d1 = CMatrix::from_diagonal(&ch.h_r1[k].map(|z| z.conj()));
        let row1 = phi.as_vector().adjoint() * d1 * &ch.g1;
        assert!((c1.rows.row(k) - &row1).norm() < 1e-12 * row1.norm());
        let d2 = CMatrix::from_diagonal(&ch.h_r2[k].map(|z| z.conj()));
        let row2 = ch.h_d2[k].adjoint() + (phi.as_vector().adjoint() * d2 * &ch.g2) * rot;
        assert!((c2.rows.row(k) - &row2).norm() < 1e-12 * row2.norm());
    }
}

#[test]
fn bs2_precoder_ignores_ris_side_channels() {
    let cfg = small_scenario();
    let ch = drop_channels(&cfg, 50).unwrap();
    let mut blind = ch.clone();
    blind.g2.fill(Complex64::new(0.0, 0.0));
    for h in &mut blind.h_r2 {
        h.fill(Complex64::new(0.0, 0.0));
    }
    let power = risbal::channel::dbm_to_watts(cfg.p_t_dbm);
    let f = slnr_beamformer(&direct_cell2(&ch).unwrap(), power, ch.noise_var_2).unwrap();
    let g = slnr_beamformer(&direct_cell2(&blind).unwrap(), power, blind.noise_var_2).unwrap();
    assert_eq!(f, g);
    // With the RIS path gone, every scheme sees the No-RIS cell-2 rate.
    let designs = design_all(&cfg, &ch, 50).unwrap();
    let out = evaluate_designs(&cfg, &blind, &designs).unwrap();
    let no_ris = out.get(Scheme::NoRis).r2;
    for s in [Scheme::Proposed, Scheme::ConvRis, Scheme::RandRis] {
        assert_eq!(out.get(s).r2.to_bits(), no_ris.to_bits());
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let ch = CompositeChannels {
        rows: CMatrix::zeros(2, 2),
    };
    assert!(matches!(slnr_beamformer(&ch, 1.0, 1.0), Err(Error::Numerical(_))));
    let ok = CompositeChannels {
        rows: CMatrix::identity(2, 2),
    };
    assert!(matches!(slnr_beamformer(&ok, 0.0, 1.0), Err(Error::Config(_))));
    assert!(matches!(slnr_beamformer(&ok, 1.0, -1.0), Err(Error::Config(_))));
    let bf = slnr_beamformer(&ok, 1.0, 1.0).unwrap();
    assert!(matches!(evaluate(&ok, &bf, 0.0), Err(Error::Config(_))));
    let wide = CompositeChannels {
        rows: CMatrix::identity(2, 3),
    };
    assert!(matches!(evaluate(&wide, &bf, 1.0), Err(Error::Dimension(_))));
    assert!(matches!(CompositeChannels::from_columns(&[]), Err(Error::EmptyInput(_))));
}
