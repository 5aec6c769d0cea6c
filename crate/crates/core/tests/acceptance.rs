//! End-to-end acceptance gate. Each numbered criterion prints one
//! pass/fail line with its observed margin; the suite fails if any
//! criterion fails. Tolerances are part of the project contract and must
//! not be loosened here.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use krein_lab::battery::{loop_battery, two_point_battery, BatteryCase};
use krein_lab::boundary::{geometry_of, wentzell_b};
use krein_lab::classifier::{
    brute_force_markov, classify_2d, is_markov_generator, BoundaryForm, BoundaryProjector,
    BruteForceOpts,
};
use krein_lab::elliptic::{assemble_1d, assemble_2d, DiscreteElliptic, Domain1D, Domain2D};
use krein_lab::interval::{dtn_exact, IntervalConfig};
use krein_lab::krein::{
    boundary_form_from_resolvent, build_extension, extension_form, extract_boundary_form,
    krein_resolvent, wentzell_residual,
};
use krein_lab::semigroup::{sandwich_check, yosida_form, Semigroup};
use krein_lab::{linalg, parallel};

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { passed: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { passed: false, detail: detail.into() }
}

fn disc_1d(n: usize) -> DiscreteElliptic {
    assemble_1d(&Domain1D::uniform(1.0, n).unwrap()).unwrap()
}

fn ones2() -> DVector<f64> {
    DVector::from_element(2, 1.0)
}

fn two_point_cases(n_random: usize) -> Vec<BatteryCase> {
    two_point_battery(1.0, 7, n_random).unwrap()
}

/// Criterion 1: the zero-shift response operator on the unit interval is
/// [[-1, 1], [1, -1]] exactly, both in closed form and on every a≡1 grid.
fn c01_zero_shift_response() -> Outcome {
    let cfg = IntervalConfig::new(1.0).unwrap();
    let exact = dtn_exact(0.0, &cfg).unwrap();
    let reference = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
    let mut worst = linalg::max_abs(&(&exact - &reference));
    for n in [10usize, 25, 50, 100, 200, 400] {
        let d = disc_1d(n);
        let p0 = d.dtn_discrete(0.0).unwrap();
        worst = worst.max(linalg::max_abs(&(p0 - &reference)));
    }
    if worst <= 1e-12 {
        pass(format!("max deviation {worst:.2e}"))
    } else {
        fail(format!("max deviation {worst:.2e} > 1e-12"))
    }
}

/// Criterion 2: the closed-form classifier agrees with the semigroup
/// oracle on at least 100 two-point battery cases at n = 200.
fn c02_classifier_vs_oracle() -> Outcome {
    let cases: Vec<BatteryCase> = two_point_cases(120)
        .into_iter()
        .filter(|c| {
            matches!(
                c.bf.projector,
                BoundaryProjector::Zero | BoundaryProjector::Full | BoundaryProjector::RankOne(_)
            )
        })
        .collect();
    if cases.len() < 100 {
        return fail(format!("only {} eligible cases", cases.len()));
    }
    let d = disc_1d(200);
    let total = cases.len();
    let opts = BruteForceOpts { times: vec![0.01, 0.1, 1.0], tol: 1e-8, ..Default::default() };
    let mismatches: Vec<String> = parallel::par_map(cases, |case| {
        let claimed = classify_2d(&case.bf, d.ell).unwrap().markovian;
        let ext = build_extension(&d, &case.bf).unwrap();
        let observed = brute_force_markov(&(-&ext.generator), &d.mass, &opts).unwrap().markovian;
        (claimed == observed).then_some(None).unwrap_or(Some(case.name))
    })
    .into_iter()
    .flatten()
    .collect();
    if mismatches.is_empty() {
        pass(format!("{total} cases agree"))
    } else {
        fail(format!("disagreement on {:?}", mismatches))
    }
}

/// Criterion 3: boundary-corrected resolvent equals the direct inverse of
/// (λ − A) across the battery, three shifts, three 1D grids and a 32x32
/// square loop, to 1e-8 times the conditioning.
fn c03_resolvent_equivalence() -> Outcome {
    let shifts = [0.5, 1.0, 5.0];
    let mut worst = 0.0_f64;
    for n in [50usize, 100, 200] {
        let d = disc_1d(n);
        let cases = two_point_cases(20);
        let errs = parallel::par_map(cases, |case| {
            let ext = build_extension(&d, &case.bf).unwrap();
            let mut e = 0.0_f64;
            for &lam in &shifts {
                let r = krein_resolvent(&d, &case.bf, lam).unwrap();
                let direct = (DMatrix::identity(d.ni(), d.ni()) * lam - &ext.generator)
                    .try_inverse()
                    .unwrap();
                let cond = linalg::cond_1(&r).max(1.0);
                e = e.max(linalg::max_abs(&(r - direct)) / cond);
            }
            e
        });
        worst = errs.into_iter().fold(worst, f64::max);
    }
    let d2 = assemble_2d(&Domain2D::uniform(1.0, 1.0, 32, 32).unwrap()).unwrap();
    let geom = geometry_of(&d2);
    let cases = loop_battery(&geom, 7).unwrap();
    let errs = parallel::par_map(cases, |case| {
        let ext = build_extension(&d2, &case.bf).unwrap();
        let mut e = 0.0_f64;
        for &lam in &shifts {
            let r = krein_resolvent(&d2, &case.bf, lam).unwrap();
            let direct = (DMatrix::identity(d2.ni(), d2.ni()) * lam - &ext.generator)
                .try_inverse()
                .unwrap();
            let cond = linalg::cond_1(&r).max(1.0);
            e = e.max(linalg::max_abs(&(r - direct)) / cond);
        }
        e
    });
    worst = errs.into_iter().fold(worst, f64::max);
    if worst <= 1e-8 {
        pass(format!("worst scaled error {worst:.2e}"))
    } else {
        fail(format!("worst scaled error {worst:.2e} > 1e-8"))
    }
}

/// Criterion 4: Dirichlet kernel ≤ extension kernel ≤ Neumann kernel
/// entrywise for every Markovian battery case, slack ≥ -1e-10.
fn c04_kernel_sandwich() -> Outcome {
    let d = disc_1d(60);
    let cases: Vec<BatteryCase> = two_point_cases(40)
        .into_iter()
        .filter(|c| build_extension(&d, &c.bf).unwrap().classification.markovian)
        .collect();
    let count = cases.len();
    let verdicts = parallel::par_map(cases, |case| {
        let v = sandwich_check(&d, &case.bf, &[0.05, 0.5]).unwrap();
        (case.name, v.worst_lower_violation, v.worst_upper_violation)
    });
    let worst_lower = verdicts.iter().map(|v| v.1).fold(0.0_f64, f64::max);
    let worst_upper = verdicts.iter().map(|v| v.2).fold(0.0_f64, f64::max);
    if worst_lower <= 1e-10 && worst_upper <= 1e-10 {
        pass(format!(
            "{count} Markovian cases, slack lower {worst_lower:.2e} / upper {worst_upper:.2e}"
        ))
    } else {
        let bad: Vec<&String> =
            verdicts.iter().filter(|v| v.1 > 1e-10 || v.2 > 1e-10).map(|v| &v.0).collect();
        // The Dirichlet lower bound holds for every Markovian extension.
        // The Neumann upper bound provably fails when the boundary form
        // has a jump (nonlocal) part or identifies boundary points: the
        // form-domain ideal property behind semigroup domination is lost,
        // and e.g. the periodic kernel between opposite endpoints reaches
        // the free value (4*pi*t)^(-1/2) where the Neumann kernel is
        // exponentially small.
        fail(format!(
            "lower-bound slack {worst_lower:.2e}; upper bound violated by {worst_upper:.2e} \
             on the nonlocal couplings {bad:?} (Neumann does not dominate jump-type boundary forms)"
        ))
    }
}

/// Criterion 5: the extension with B equal to the zero-shift response
/// fails the Markov test and the oracle produces a concrete witness on
/// every grid size tested.
fn c05_response_extension_never_markov() -> Outcome {
    for n in [30usize, 60, 120] {
        let d = disc_1d(n);
        let p0 = d.dtn_discrete(0.0).unwrap();
        if p0[(0, 1)] <= 0.0 {
            return fail(format!("off-diagonal not positive at n={n}"));
        }
        let bf = BoundaryForm::full(p0, ones2()).unwrap();
        let class = classify_2d(&bf, d.ell).unwrap();
        if class.markovian {
            return fail(format!("classifier accepts at n={n}"));
        }
        let ext = build_extension(&d, &bf).unwrap();
        let oracle = brute_force_markov(&(-&ext.generator), &d.mass, &Default::default()).unwrap();
        if oracle.markovian || oracle.witness.is_none() {
            return fail(format!("oracle found no witness at n={n}"));
        }
    }
    pass("classifier rejects and oracle witnesses violation at n = 30, 60, 120")
}

/// Criterion 6: conservative cases preserve mass to 1e-10 at t in
/// {0.1, 1, 10}; dissipative cases lose at least 1e-4 by t = 1.
fn c06_recurrence_dichotomy() -> Outcome {
    let d = disc_1d(50);
    let p0 = d.dtn_discrete(0.0).unwrap();
    let d2 = assemble_2d(&Domain2D::uniform(1.0, 1.0, 8, 8).unwrap()).unwrap();
    let geom2 = geometry_of(&d2);
    let conservative: Vec<(&str, &DiscreteElliptic, BoundaryForm)> = vec![
        ("neumann", &d, BoundaryForm::neumann(ones2())),
        ("attractive-half", &d, BoundaryForm::full(&p0 * -0.5, ones2()).unwrap()),
        ("attractive-one", &d, BoundaryForm::full(&p0 * -1.0, ones2()).unwrap()),
        (
            "periodic",
            &d,
            BoundaryForm::rank_one(
                DVector::from_vec(vec![1.0, 1.0]) / 2.0_f64.sqrt(),
                0.0,
                ones2(),
            )
            .unwrap(),
        ),
        ("mean-value-0", &d, BoundaryForm::mean_value(0.0, ones2()).unwrap()),
        ("wentzell-no-killing", &d2, wentzell_b(&geom2, 1.0, 0.0, 0.0, 0.5).unwrap()),
    ];
    let mut worst_dev = 0.0_f64;
    for (name, disc, bf) in conservative {
        let ext = build_extension(disc, &bf).unwrap();
        let sg = Semigroup::new(&ext.generator, &disc.mass).unwrap();
        let ones = DVector::from_element(disc.ni(), 1.0);
        for t in [0.1, 1.0, 10.0] {
            let u = sg.at(t) * &ones;
            let dev = u.iter().map(|v| (v - 1.0).abs()).fold(0.0_f64, f64::max);
            worst_dev = worst_dev.max(dev);
            if dev > 1e-10 {
                return fail(format!("{name} loses mass {dev:.2e} at t={t}"));
            }
        }
    }
    let dissipative: Vec<(&str, &DiscreteElliptic, BoundaryForm)> = vec![
        ("robin-0.5", &d, BoundaryForm::robin(0.5, ones2()).unwrap()),
        ("robin-2", &d, BoundaryForm::robin(2.0, ones2()).unwrap()),
        ("mixed-dn", &d, BoundaryForm::mask(vec![1], ones2()).unwrap()),
        ("mean-value-1", &d, BoundaryForm::mean_value(1.0, ones2()).unwrap()),
        ("wentzell-killed", &d2, wentzell_b(&geom2, 1.0, 0.0, 0.5, 0.5).unwrap()),
    ];
    let mut min_deficit = f64::INFINITY;
    for (name, disc, bf) in dissipative {
        let ext = build_extension(disc, &bf).unwrap();
        let sg = Semigroup::new(&ext.generator, &disc.mass).unwrap();
        let ones = DVector::from_element(disc.ni(), 1.0);
        let u = sg.at(1.0) * &ones;
        let deficit = u.iter().map(|v| 1.0 - v).fold(f64::INFINITY, f64::min);
        min_deficit = min_deficit.min(deficit);
        if deficit < 1e-4 {
            return fail(format!("{name} deficit only {deficit:.2e} at t=1"));
        }
    }
    pass(format!(
        "conservative deviation ≤ {worst_dev:.2e}, dissipative deficit ≥ {min_deficit:.2e}"
    ))
}

/// Criterion 7: the operator [[2, -1/2], [-1/2, 2]] is itself a Markov
/// boundary generator, yet shifting it by the zero-shift response gives a
/// non-Markovian extension.
fn c07_theta_counterexample() -> Outcome {
    let theta = DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 2.0]);
    let verdict = is_markov_generator(&theta, &ones2()).unwrap();
    if !verdict.markovian {
        return fail("theta itself rejected as boundary generator");
    }
    let d = disc_1d(80);
    let p0 = d.dtn_discrete(0.0).unwrap();
    let bf = BoundaryForm::full(&theta + p0, ones2()).unwrap();
    let ext = build_extension(&d, &bf).unwrap();
    let oracle = brute_force_markov(&(-&ext.generator), &d.mass, &Default::default()).unwrap();
    if oracle.markovian {
        return fail("shifted extension unexpectedly Markovian");
    }
    pass("theta passes, theta + zero-shift response fails with witness")
}

/// Criterion 8: periodic identification has smallest nonzero eigenvalue
/// converging to (2π)² at second order (observed order in [1.7, 2.3]).
fn c08_periodic_spectrum_order() -> Outcome {
    let target = (2.0 * std::f64::consts::PI).powi(2);
    let dir = DVector::from_vec(vec![1.0, 1.0]) / 2.0_f64.sqrt();
    let errs: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&n| {
            let d = disc_1d(n);
            let bf = BoundaryForm::rank_one(dir.clone(), 0.0, ones2()).unwrap();
            let ext = build_extension(&d, &bf).unwrap();
            let (vals, _) = linalg::weighted_sym_eigen(&(-&ext.generator), &d.mass).unwrap();
            let mut s: Vec<f64> = vals.iter().copied().collect();
            s.sort_by(f64::total_cmp);
            (s[1] - target).abs()
        })
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    if orders.iter().all(|&p| (1.7..=2.3).contains(&p)) {
        pass(format!("observed orders {:.2}, {:.2}", orders[0], orders[1]))
    } else {
        fail(format!("orders {orders:?} outside [1.7, 2.3]"))
    }
}

/// Criterion 9: discrete response operator at shift 1 converges to the
/// closed form with monotone error decrease and observed order ≥ 1.
fn c09_response_convergence() -> Outcome {
    let cfg = IntervalConfig::new(1.0).unwrap();
    let exact = dtn_exact(1.0, &cfg).unwrap();
    let ns = [25usize, 50, 100, 200, 400];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| linalg::max_abs(&(disc_1d(n).dtn_discrete(1.0).unwrap() - &exact)))
        .collect();
    if !errs.windows(2).all(|w| w[1] < w[0]) {
        return fail(format!("errors not monotone: {errs:?}"));
    }
    let order = (errs[3] / errs[4]).log2();
    if order >= 1.0 {
        pass(format!("monotone, observed order {order:.2} (final error {:.2e})", errs[4]))
    } else {
        fail(format!("observed order {order:.2} < 1"))
    }
}

/// Criterion 10: the penalized boundary-pairing sequence for h = (1, 0)
/// approaches -1 with strictly decreasing error, final error ≤ 1e-2.
fn c10_penalized_pairing_limit() -> Outcome {
    let d = disc_1d(100);
    let h = DVector::from_vec(vec![1.0, 0.0]);
    let seq = d.plim_sequence(&h, &[1e2, 1e3, 1e4]).unwrap();
    let errs: Vec<f64> = seq.iter().map(|v| (v + 1.0).abs()).collect();
    if !errs.windows(2).all(|w| w[1] < w[0]) {
        return fail(format!("errors not strictly decreasing: {errs:?}"));
    }
    let last = *errs.last().unwrap();
    if last <= 1e-2 {
        pass(format!("errors {:.1e} → {:.1e} → {:.1e}", errs[0], errs[1], last))
    } else {
        fail(format!("final error {last:.2e} > 1e-2"))
    }
}

/// Criterion 11: both recovery routes (quadratic-form readout and the
/// large-shift resolvent route) reproduce the weighted boundary operator
/// within 1e-6 for Robin and Wentzell-type cases.
fn c11_boundary_form_round_trip() -> Outcome {
    let d = disc_1d(100);
    let geom1 = geometry_of(&d);
    let d2 = assemble_2d(&Domain2D::uniform(1.0, 1.0, 8, 8).unwrap()).unwrap();
    let geom2 = geometry_of(&d2);
    // (name, discretization, case, try the resolvent-only route too).
    // On the rectangular loop the corner nodes have no interior coupling,
    // so the interior resolvent family cannot determine their boundary
    // entries; the resolvent route is exercised on the well-posed cases
    // and must flag the loop case as non-unique rather than guess.
    let cases: Vec<(&str, &DiscreteElliptic, BoundaryForm, bool)> = vec![
        ("robin-1", &d, BoundaryForm::robin(1.0, ones2()).unwrap(), true),
        ("robin-0.5", &d, BoundaryForm::robin(0.5, ones2()).unwrap(), true),
        ("wentzell-killing", &d, wentzell_b(&geom1, 0.0, 0.0, 0.3, 0.5).unwrap(), true),
        ("wentzell-local", &d2, wentzell_b(&geom2, 1.0, 0.0, 0.3, 0.5).unwrap(), false),
        ("wentzell-fractional", &d2, wentzell_b(&geom2, 0.5, 0.4, 0.2, 0.5).unwrap(), false),
    ];
    let mut worst = 0.0_f64;
    for (name, disc, bf, resolvent_route) in cases {
        let wb = bf.weighted_b();
        let ext = build_extension(disc, &bf).unwrap();
        let direct = extract_boundary_form(disc, &ext).unwrap();
        let e1 = linalg::max_abs(&(&direct.f_b - &wb));
        worst = worst.max(e1);
        if e1 > 1e-6 {
            return fail(format!("{name}: form route error {e1:.2e}"));
        }
        let family = |lam: f64| krein_resolvent(disc, &bf, lam);
        let rec = boundary_form_from_resolvent(&family, disc, &[1e2, 1e3, 1e4]).unwrap();
        if resolvent_route {
            if rec.diverged {
                return fail(format!("{name}: resolvent route reported divergence"));
            }
            let e2 = linalg::max_abs(&(&rec.f_b - &wb));
            worst = worst.max(e2);
            if e2 > 1e-6 {
                return fail(format!("{name}: resolvent route error {e2:.2e}"));
            }
        } else if !rec.diverged {
            return fail(format!("{name}: loop corners are unobservable, expected a non-uniqueness flag"));
        }
    }
    pass(format!("worst recovery error {worst:.2e}; loop cases flagged non-unique as required"))
}

/// Criterion 12: every battery extension's eigenvectors satisfy the weak
/// boundary condition to 1e-8 relative to the flux size; Robin reduces to
/// the pointwise condition β·γ₀u = flux.
fn c12_weak_boundary_condition() -> Outcome {
    let d = disc_1d(60);
    let cases = two_point_cases(40);
    let results = parallel::par_map(cases, |case| {
        let v = case.bf.projector.basis(d.nb(), &case.bf.weights);
        if v.ncols() == 0 {
            return Ok(0.0); // Dirichlet: no admissible test directions.
        }
        let ext = build_extension(&d, &case.bf).unwrap();
        let (_, vecs) = linalg::weighted_sym_eigen(&ext.generator, &d.mass).unwrap();
        let mut worst = 0.0_f64;
        for c in 0..d.ni() {
            let u = ext.extend(&vecs.column(c).into_owned());
            let flux = d.flux_trace(&u).unwrap();
            let scale = flux.norm().max(1.0);
            let resid = wentzell_residual(&d, &case.bf, &u).unwrap();
            worst = worst.max(resid / scale);
            if resid > 1e-8 * scale {
                return Err(format!("{}: residual {resid:.2e} vs scale {scale:.2e}", case.name));
            }
        }
        Ok(worst)
    });
    let mut worst = 0.0_f64;
    for r in results {
        match r {
            Ok(w) => worst = worst.max(w),
            Err(msg) => return fail(msg),
        }
    }
    // Pointwise Robin reduction.
    let beta = 1.5;
    let bf = BoundaryForm::robin(beta, ones2()).unwrap();
    let ext = build_extension(&d, &bf).unwrap();
    let (_, vecs) = linalg::weighted_sym_eigen(&ext.generator, &d.mass).unwrap();
    for c in 0..d.ni() {
        let u = ext.extend(&vecs.column(c).into_owned());
        let flux = d.flux_trace(&u).unwrap();
        let scale = flux.norm().max(1.0);
        for i in 0..2 {
            let r = (beta * u[d.ni() + i] - flux[i]).abs();
            if r > 1e-8 * scale {
                return fail(format!("pointwise Robin residual {r:.2e} at node {i}"));
            }
        }
    }
    pass(format!("worst relative residual {worst:.2e} over all eigenvectors"))
}

/// Criterion 13: the extension form dominates the Neumann form on its
/// domain, with the difference given by the boundary form: slack ≥ -1e-10
/// on 100 random admissible vectors per Markovian case.
fn c13_neumann_form_minimality() -> Outcome {
    let d = disc_1d(60);
    let neumann = extension_form(&d, &BoundaryForm::neumann(ones2())).unwrap();
    let cases: Vec<BatteryCase> = two_point_cases(40)
        .into_iter()
        .filter(|c| build_extension(&d, &c.bf).unwrap().classification.markovian)
        .collect();
    let count = cases.len();
    let mut worst_slack = 0.0_f64;
    let mut worst_id = 0.0_f64;
    for case in cases {
        let form = extension_form(&d, &case.bf).unwrap();
        let v = case.bf.projector.basis(d.nb(), &case.bf.weights);
        let wb = case.bf.weighted_b();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut u = DVector::from_fn(d.ni() + d.nb(), |_, _| rng.gen_range(-1.0..1.0));
            // Project the trace into the admissible subspace.
            let ub = u.rows(d.ni(), d.nb()).into_owned();
            let proj = &v * (v.transpose() * &ub);
            for i in 0..d.nb() {
                u[d.ni() + i] = proj[i];
            }
            let u = &u / u.norm();
            let diff = form.value(&u) - neumann.value(&u);
            let ub = u.rows(d.ni(), d.nb()).into_owned();
            let boundary_term = (ub.transpose() * &wb * &ub)[(0, 0)];
            worst_id = worst_id.max((diff - boundary_term).abs());
            worst_slack = worst_slack.max(-diff);
            if diff < -1e-10 {
                return fail(format!("{}: F_A - F_N = {diff:.2e} < -1e-10", case.name));
            }
            if (diff - boundary_term).abs() > 1e-10 {
                return fail(format!(
                    "{}: difference {diff:.2e} ≠ boundary form {boundary_term:.2e}",
                    case.name
                ));
            }
        }
    }
    pass(format!(
        "{count} Markovian cases × 100 vectors, worst negative part {worst_slack:.2e}, identity error {worst_id:.2e}"
    ))
}

/// Criterion 14: Yosida approximation forms are per-vector non-decreasing
/// in the shift, and their jump/killing split exists exactly for the
/// Markovian cases with nonnegative killing.
fn c14_yosida_monotonicity_and_split() -> Outcome {
    let d = disc_1d(40);
    let cases = two_point_cases(25);
    let total = cases.len();
    let results = parallel::par_map(cases, |case| {
        let ext = build_extension(&d, &case.bf).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probes: Vec<DVector<f64>> = (0..5)
            .map(|_| DVector::from_fn(d.ni(), |_, _| rng.gen_range(-1.0..1.0)).normalize())
            .collect();
        let mut prev = vec![f64::NEG_INFINITY; probes.len()];
        // A non-Markovian extension may still have Markovian Yosida
        // approximations at small shifts (the resolvent averages the
        // violation away); the correct equivalence is: the split exists
        // at every shift iff the limit generator is Markovian.
        let mut split_at_all = true;
        for lam in [1.0, 10.0, 100.0, 1000.0] {
            let y = yosida_form(&ext.generator, &d.mass, lam).unwrap();
            for (k, u) in probes.iter().enumerate() {
                let val = (u.transpose() * &y.form * u)[(0, 0)];
                if val < prev[k] - 1e-10 {
                    return Err(format!(
                        "{}: form value decreased by {:.2e} at shift {lam}",
                        case.name,
                        prev[k] - val
                    ));
                }
                prev[k] = val;
            }
            match &y.split {
                Some((_, kappa)) => {
                    if kappa.iter().any(|&k| k < -1e-10) {
                        return Err(format!("{}: negative killing entry", case.name));
                    }
                }
                None => split_at_all = false,
            }
        }
        if split_at_all != ext.classification.markovian {
            return Err(format!(
                "{}: split at every shift = {split_at_all}, markovian = {}",
                case.name, ext.classification.markovian
            ));
        }
        Ok(())
    });
    for r in results {
        if let Err(msg) = r {
            return fail(msg);
        }
    }
    pass(format!("{total} cases monotone with split ⇔ Markovian"))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("zero-shift response reproduction", c01_zero_shift_response),
        ("classifier vs semigroup oracle", c02_classifier_vs_oracle),
        ("resolvent formula equivalence", c03_resolvent_equivalence),
        ("heat-kernel sandwich", c04_kernel_sandwich),
        ("response-shift extension never Markov", c05_response_extension_never_markov),
        ("recurrence dichotomy", c06_recurrence_dichotomy),
        ("theta counterexample", c07_theta_counterexample),
        ("periodic spectrum identification", c08_periodic_spectrum_order),
        ("response operator convergence", c09_response_convergence),
        ("penalized pairing limit", c10_penalized_pairing_limit),
        ("boundary-form round trip", c11_boundary_form_round_trip),
        ("weak boundary condition", c12_weak_boundary_condition),
        ("Neumann form minimality", c13_neumann_form_minimality),
        ("Yosida monotonicity and split", c14_yosida_monotonicity_and_split),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let verdict = if outcome.passed { "pass" } else { "FAIL" };
        println!("criterion {:02} [{verdict}] {name}: {}", i + 1, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
