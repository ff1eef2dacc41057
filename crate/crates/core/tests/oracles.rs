//! Cross-checks between independent constructions.

use charpoly_cubature::charpoly::{det_cofactor, q_via_determinant, CharPencil, IndexSet};
use charpoly_cubature::families::{gen_chebyshev_u, gen_p, gen_q, q_coeffs, ThreeTermCoeffs};
use charpoly_cubature::moments::{gram_closed, gram_from_moments, moment_table};
use charpoly_cubature::{CMatrix, Complex64, GaussRat, Scalar};
use proptest::prelude::*;

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-5i64..6, 1i64..4, -5i64..6, 1i64..4).prop_map(|(a, b, c, d)| GaussRat::from_ratios(a, b, c, d))
}

fn nonzero_gauss() -> impl Strategy<Value = GaussRat> {
    gauss().prop_filter("nonzero", |g| !g.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recurrence_matches_determinant(a in gauss(), c in gauss()) {
        let (fam, _) = gen_q(5, &a, &c);
        for m in 0..=5 {
            for k in 0..=m {
                prop_assert_eq!(&q_via_determinant(m, k, &a, &c).unwrap(), fam.get(m, k));
            }
        }
    }

    #[test]
    fn moment_gram_matches_closed_form(a in nonzero_gauss(), c in nonzero_gauss()) {
        let (fam, _) = gen_q(5, &a, &c);
        let mu = moment_table(10, &q_coeffs(10, &a, &c)).unwrap();
        prop_assert_eq!(mu.symmetry_residual(), 0.0);
        for n in 0..=5 {
            let h = gram_from_moments(n, &fam, &mu).unwrap();
            prop_assert!(h.is_centrohermitian(0.0));
            prop_assert_eq!(h, gram_closed(n, &a, &c));
        }
    }

    #[test]
    fn float_mode_tracks_exact_mode(a in gauss(), c in gauss(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (fe, _) = gen_q(6, &a, &c);
        let (ff, _) = gen_q(6, &a.to_c64(), &c.to_c64());
        let z = Complex64::new(x, y);
        for k in 0..=6 {
            let e = fe.get(6, k).to_complex().eval(&z);
            let f = ff.get(6, k).eval(&z);
            prop_assert!((e - f).norm() <= 1e-9 * (1.0 + e.norm()));
        }
    }
}

#[test]
fn bareiss_agrees_with_cofactor_on_q_pencils() {
    let (a, c) = (GaussRat::from_ratios(2, 3, -1, 2), GaussRat::int(1, 1));
    for m in 1..=4 {
        let pencil = CharPencil::aac(m, &a, &c).unwrap();
        for k in 0..=m {
            let sub = pencil.submatrix(&IndexSet::all_except(m + 1, m - k).unwrap()).unwrap();
            assert_eq!(det_cofactor(&sub), q_via_determinant(m, k, &a, &c).unwrap());
        }
    }
}

#[test]
fn determinant_family_invariants() {
    let (a, c) = (GaussRat::int(2, -1), GaussRat::from_ratios(1, 2, 3, 1));
    for m in 0..=6 {
        for k in 0..=m {
            let p = q_via_determinant(m, k, &a, &c).unwrap();
            assert_eq!(p.degree(), Some(m as u32));
            assert_eq!(p.coeff((m - k) as u32, k as u32), GaussRat::one());
            assert_eq!(p.conj_reflect(), q_via_determinant(m, m - k, &a, &c).unwrap());
        }
    }
}

#[test]
fn chebyshev_family_is_p_at_one_dilated() {
    let u = gen_chebyshev_u::<GaussRat>(10);
    let p = gen_p(10, &GaussRat::one());
    let three = GaussRat::int(3, 0);
    for m in 0..=10 {
        for k in 0..=m {
            assert_eq!(&p.get(m, k).substitute_scaled(&three, &three), u.get(m, k));
            assert_eq!(u.get(m, k).coeff((m - k) as u32, k as u32), three.pow(m as u32));
        }
    }
}

#[test]
fn coefficient_norms_are_bounded() {
    let (a, c) = (GaussRat::real(3, 2), GaussRat::one());
    let max_abs_sq = |m: &CMatrix<GaussRat>| {
        (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|ij| m[ij].norm_sqr())
            .fold(GaussRat::zero(), |acc, v| if v.cmp_re(&acc).is_gt() { v } else { acc })
    };
    let coeffs: Vec<ThreeTermCoeffs<GaussRat>> = q_coeffs(20, &a, &c);
    let (a2, b2) = (max_abs_sq(&coeffs[2].alpha), max_abs_sq(&coeffs[2].beta));
    for co in &coeffs[2..] {
        assert_eq!(max_abs_sq(&co.alpha), a2);
        assert_eq!(max_abs_sq(&co.beta), b2);
    }
}

#[test]
fn reflection_on_self_conjugate_points() {
    let pencil = CharPencil::aac(4, &Complex64::new(1.5, 0.5), &Complex64::new(-0.5, 1.0)).unwrap();
    let set = IndexSet::new(vec![0, 2, 3, 4], 5).unwrap();
    let z = Complex64::new(0.3, -0.8);
    let pts = vec![vec![z, z.conj()]];
    assert!(pencil.check_reflection(&set, &pts).unwrap() <= 1e-12);
    let p = pencil.charpoly(&set).unwrap();
    let q = pencil.charpoly(&set.reflected(5)).unwrap();
    assert!(q.approx_eq(&p.conj_reflect(), 1e-12));
}
