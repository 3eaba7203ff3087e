use std::f64::consts::PI;

use num_complex::Complex64 as Cx;
use proptest::prelude::*;

use z2harm::branch::{continue_branch, from_c2, monodromy, principal_sqrt, BranchState, HalfPower, Polyline, Sign};
use z2harm::catalogue::{family_nodal, family_ramified, DefiningFunction, Z2Form};
use z2harm::descriptor::Descriptor;
use z2harm::morphisms::{gauss_linking, project_pair_to_r3, Fiber};

fn zw() -> Z2Form {
    family_nodal(Cx::new(0.0, 0.0), Cx::new(0.0, 0.0), Cx::new(0.0, 0.0))
}

fn point4() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 4)
}

fn meridian_of_z_axis(w: Cx, radius: f64, turns: usize) -> Polyline {
    let n = 64 * turns;
    let pts = (0..n)
        .map(|i| {
            let t = 2.0 * PI * turns as f64 * i as f64 / n as f64;
            from_c2(Cx::from_polar(radius, t), w)
        })
        .collect();
    Polyline::new(4, pts, true).unwrap()
}

proptest! {
    #[test]
    fn principal_sqrt_squares_back(re in -1e3..1e3f64, im in -1e3..1e3f64) {
        let v = Cx::new(re, im);
        let s = principal_sqrt(v);
        prop_assert!((s * s - v).norm() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!(s.re > 0.0 || (s.re == 0.0 && s.im >= 0.0));
    }

    #[test]
    fn sign_flip_negates_f_and_omega(x in point4()) {
        let form = family_ramified(Cx::new(1.0, 0.0));
        let plus = form.state_with_sign(&x, Sign::Plus);
        prop_assume!(plus.is_ok());
        let minus = form.state_with_sign(&x, Sign::Minus).unwrap();
        let plus = plus.unwrap();
        let (fp, fm) = (form.eval_f(&plus).unwrap(), form.eval_f(&minus).unwrap());
        prop_assert!((fp + fm).abs() <= 1e-12 * (1.0 + fp.abs()));
        let (op, om) = (form.eval_omega(&plus).unwrap(), form.eval_omega(&minus).unwrap());
        for (a, b) in op.components().iter().zip(om.components()) {
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn there_and_back_returns_start(a in point4(), b in point4()) {
        let form = zw();
        let start = BranchState::principal(&form, &a);
        prop_assume!(start.is_ok());
        let start = start.unwrap();
        let path = Polyline::new(4, vec![a.clone(), b, a], false).unwrap();
        match continue_branch(&form, &path, &start) {
            Ok(end) => prop_assert_eq!(end.sign, start.sign),
            Err(_) => prop_assume!(false),
        }
    }

    #[test]
    fn meridian_flips_and_double_meridian_does_not(
        wr in 0.3..1.5f64, wt in 0.0..(2.0 * PI), radius in 0.01..0.25f64,
    ) {
        let h = DefiningFunction::node(Cx::new(0.0, 0.0), Cx::new(0.0, 0.0), Cx::new(0.0, 0.0));
        let w = Cx::from_polar(wr, wt);
        prop_assert_eq!(monodromy(&h, &meridian_of_z_axis(w, radius, 1)).unwrap(), Sign::Minus);
        prop_assert_eq!(monodromy(&h, &meridian_of_z_axis(w, radius, 2)).unwrap(), Sign::Plus);
    }

    #[test]
    fn node_form_is_homogeneous(x in point4(), lambda in 0.1..10.0f64) {
        // h = zw has degree 2, so Re h^{3/2} has degree 3
        let form = Z2Form::re_h_power(
            DefiningFunction::node(Cx::new(0.0, 0.0), Cx::new(0.0, 0.0), Cx::new(0.0, 0.0)),
            HalfPower(1),
        );
        let s = form.principal_state(&x);
        prop_assume!(s.is_ok());
        let y: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let f = form.eval_f(&s.unwrap()).unwrap();
        let g = form.eval_f(&form.principal_state(&y).unwrap()).unwrap();
        prop_assert!((g - lambda.powi(3) * f).abs() <= 1e-10 * (1.0 + g.abs()));
    }

    #[test]
    fn node_descriptor_round_trips(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
        let text = format!(r#"{{"kind":"node","a":{a},"b":{b},"c":{c}}}"#);
        let d = Descriptor::from_json(&text).unwrap();
        prop_assert_eq!(Descriptor::from_json(&d.to_json_pretty()).unwrap(), d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hopf_fibers_link_symmetrically(
        r1 in 0.1..2.0f64, t1 in 0.0..(2.0 * PI), r2 in 0.1..2.0f64, t2 in 0.0..(2.0 * PI),
    ) {
        let (z1, z2) = (Cx::from_polar(r1, t1), Cx::from_polar(r2, t2));
        prop_assume!((z1 - z2).norm() > 0.3);
        let a = Fiber::over(1, 1, z1).unwrap().to_polyline(512).unwrap();
        let b = Fiber::over(1, 1, z2).unwrap().to_polyline(512).unwrap();
        let (_, pa, pb) = project_pair_to_r3(&a, &b).unwrap();
        let ab = gauss_linking(&pa, &pb).unwrap();
        let ba = gauss_linking(&pb, &pa).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((ab.abs() - 1.0).abs() < 0.05, "linking {ab}");
        let rev = gauss_linking(&pa.reversed(), &pb).unwrap();
        prop_assert!((rev + ab).abs() < 1e-9);
    }
}
