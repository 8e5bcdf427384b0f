use ultrakernel::kernel::{
    kernel_integral_adaptive, kernel_integral_with, poisson_printed_form, IntegralOptions,
    IntegrandForm, Scheme,
};
use ultrakernel::{
    eval_w, kernel_integral, kernel_mass, kernel_series, poisson_closed_form, project,
    project_up_to, weight_omega, Error, KernelParams, Method,
};

/// `Σ_{n<=N} ω_n^ν r^n W_n^ν(x)` by direct summation.
fn generating_series(nu: f64, r: f64, x: f64, n_max: usize) -> f64 {
    (0..=n_max)
        .map(|n| weight_omega(n, nu).unwrap() * r.powi(n as i32) * eval_w(n, nu, x).unwrap())
        .sum()
}

#[test]
fn closed_form_examples() {
    assert_eq!(poisson_closed_form(1.0, 0.0, 0.4).unwrap(), 1.0);
    assert!((poisson_closed_form(0.5, 0.5, 1.0).unwrap() - 6.0).abs() < 1e-14);
    assert!((generating_series(0.5, 0.5, 1.0, 200) - 6.0).abs() < 1e-12);
    let v = poisson_closed_form(1.0, 0.3, 0.0).unwrap();
    assert!((v - 0.91 / (1.09 * 1.09)).abs() < 1e-15);
    assert!((v - generating_series(1.0, 0.3, 0.0, 200)).abs() < 1e-14);
    assert!((v - 0.765929).abs() < 1e-6);
}

#[test]
fn printed_generating_function_disagrees() {
    let (nu, r, x) = (1.0, 0.5, 0.2);
    let series = generating_series(nu, r, x, 200);
    assert!((poisson_closed_form(nu, r, x).unwrap() - series).abs() < 1e-12);
    assert!((poisson_printed_form(nu, r, x).unwrap() - series).abs() > 1e-2);
}

#[test]
fn series_examples() {
    let p = KernelParams::new(2.0, 1.0, 0.0, 0.3, -0.6).unwrap();
    let s = kernel_series(&p, 10).unwrap();
    assert_eq!(s.value, 1.0);
    assert_eq!(s.method, Method::Series);

    let p = KernelParams::new(3.0, 0.5, 0.9, 0.2, -0.4).unwrap();
    let s = kernel_series(&p, 400).unwrap();
    let i = kernel_integral(&p, 64, 64).unwrap();
    assert!((s.value - i.value).abs() < 1e-8, "{s:?} {i:?}");
    assert!(s.est_error < 1e-8);
}

#[test]
fn unit_radius_series_is_cauchy() {
    // terms decay like n^{ν-λ} = n^{-2}, so the gaps |S_{2N} - S_N| halve
    let p = KernelParams::new(3.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let sizes = [25, 50, 100, 200, 400, 800];
    let sums: Vec<_> = sizes.iter().map(|&n| kernel_series(&p, n).unwrap()).collect();
    let gaps: Vec<f64> = sums.windows(2).map(|w| (w[1].value - w[0].value).abs()).collect();
    for g in gaps.windows(2) {
        assert!(g[1] < 0.6 * g[0], "{gaps:?}");
    }
    let i = kernel_integral_adaptive(&p, &IntegralOptions::default(), 1e-10).unwrap();
    assert!(i.est_error < 1e-7, "{i:?}");
    for s in &sums {
        assert!((s.value - i.value).abs() <= s.est_error, "{s:?} vs {i:?}");
    }
}

#[test]
fn integral_at_zero_radius_is_one() {
    let p = KernelParams::new(3.0, 0.5, 0.0, 0.2, -0.4).unwrap();
    let e = kernel_integral(&p, 64, 64).unwrap();
    assert_eq!(e.value, 1.0);
    assert_eq!(e.method, Method::Integral);
}

#[test]
fn unit_radius_value_is_stable_under_refinement() {
    let p = KernelParams::new(3.0, 0.5, 1.0, 0.5, 0.5).unwrap();
    let a = kernel_integral(&p, 128, 128).unwrap();
    let b = kernel_integral(&p, 256, 256).unwrap();
    assert!(a.value.is_finite() && a.value > 0.0);
    assert!((a.value - b.value).abs() < 1e-6, "{a:?} {b:?}");
}

#[test]
fn printed_integrand_fails_and_corrected_one_matches() {
    let p = KernelParams::new(3.0, 0.5, 0.9, 0.2, -0.4).unwrap();
    let series = kernel_series(&p, 600).unwrap().value;
    let corrected = kernel_integral_with(&p, &IntegralOptions::with_nodes(96, 96)).unwrap();
    let printed = kernel_integral_with(
        &p,
        &IntegralOptions {
            form: IntegrandForm::Printed,
            ..IntegralOptions::with_nodes(96, 96)
        },
    )
    .unwrap();
    assert!((corrected.value - series).abs() < 1e-8);
    assert!((printed.value - series).abs() > 1e-6);
}

#[test]
fn tensor_and_graded_schemes_agree_away_from_the_peak() {
    let p = KernelParams::new(4.0, 1.0, 0.8, -0.3, 0.5).unwrap();
    let t = kernel_integral_with(
        &p,
        &IntegralOptions {
            scheme: Scheme::Tensor,
            ..IntegralOptions::with_nodes(96, 96)
        },
    )
    .unwrap();
    let g = kernel_integral_with(
        &p,
        &IntegralOptions {
            scheme: Scheme::Graded,
            ..IntegralOptions::with_nodes(96, 96)
        },
    )
    .unwrap();
    assert!((t.value - g.value).abs() < 1e-10, "{t:?} {g:?}");
}

#[test]
fn singular_range_is_rejected() {
    for (lambda, nu) in [(1.2, 0.5), (1.5, 0.5), (2.0, 1.0), (1.0 + 1e-9, 1e-9 + 0.0)] {
        for x in [-0.7, 0.0, 0.3] {
            let p = KernelParams::new(lambda, nu, 1.0, x, x).unwrap();
            assert!(p.diverges());
            assert!(matches!(kernel_integral(&p, 64, 64), Err(Error::SingularRange { .. })));
            assert!(matches!(kernel_series(&p, 100), Err(Error::Convergence { .. })));
        }
    }
    let p = KernelParams::new(1.2, 0.5, 1.0, 0.1, 0.2).unwrap();
    let msg = kernel_integral(&p, 64, 64).unwrap_err().to_string();
    assert!(msg.contains("nu < lambda <= nu + 1"), "{msg}");
}

#[test]
fn just_outside_the_singular_range_evaluates() {
    let p = KernelParams::new(1.5 + 1e-6, 0.5, 1.0, 0.2, 0.6).unwrap();
    let e = kernel_integral_adaptive(&p, &IntegralOptions::default(), 1e-9).unwrap();
    assert!(e.value.is_finite() && e.value > 0.0);
    assert!(e.est_error < 1e-6, "{e:?}");
}

#[test]
fn dirac_cases_are_rejected() {
    assert!(matches!(KernelParams::new(1.0, 1.0, 0.5, 0.2, 0.1), Err(Error::Dirac { .. })));
    assert!(matches!(KernelParams::new(2.0, 1.0, 0.5, 1.0, 0.1), Err(Error::Dirac { .. })));
}

#[test]
fn mass_examples() {
    for (lambda, nu, x) in [(3.0, 0.5, 0.3), (4.0, 1.0, 0.0), (2.6, 0.5, -0.8)] {
        let p = KernelParams::new(lambda, nu, 1.0, x, 0.0).unwrap();
        let m = kernel_mass(&p, 12).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "({lambda}, {nu}, {x}): {m}");
    }
    let p = KernelParams::new(3.0, 0.5, 0.5, 0.3, 0.0).unwrap();
    assert!(kernel_mass(&p, 12).is_err());
}

#[test]
fn projection_examples() {
    let p = KernelParams::new(3.0, 0.5, 1.0, 0.25, 0.0).unwrap();
    assert!((project(0, &p).unwrap() - 1.0).abs() < 1e-6);
    assert!((project(1, &p).unwrap() - 0.25).abs() < 1e-6);
    let p = KernelParams::new(3.0, 0.5, 1.0, 0.6, 0.0).unwrap();
    let want = eval_w(4, 3.0, 0.6).unwrap();
    assert!((project(4, &p).unwrap() - want).abs() < 1e-6);
    let all = project_up_to(8, &p).unwrap();
    for (n, v) in all.iter().enumerate() {
        assert!((v - eval_w(n, 3.0, 0.6).unwrap()).abs() < 1e-6, "n = {n}");
    }
}

#[test]
fn projection_in_singular_range_uses_the_index_reduction_integral() {
    let p = KernelParams::new(1.3, 0.5, 1.0, -0.4, 0.0).unwrap();
    for n in 0..=8 {
        let v = project(n, &p).unwrap();
        assert!((v - eval_w(n, 1.3, -0.4).unwrap()).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn evaluation_serializes() {
    let p = KernelParams::new(3.0, 0.5, 0.5, 0.1, 0.2).unwrap();
    let e = kernel_series(&p, 50).unwrap();
    let json = serde_json::to_string(&e).unwrap();
    assert!(json.contains("\"method\":\"series\""), "{json}");
}
