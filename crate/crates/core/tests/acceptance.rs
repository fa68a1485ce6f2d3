//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use graphnls::asymptotics::{
    acosh_exp, barrier_edge, decay_fit, find_local_maxima, mass_curve, mass_scaling_curve, BlowupFamily, BranchSeed,
    Scenario,
};
use graphnls::coeff::{Coefficient, EdgeCoefficient, NlsProblem};
use graphnls::graph::{circle, interval, three_bridge, GraphPoint, MetricGraph};
use graphnls::grid::{EdgeGrid, GridFunction};
use graphnls::morse::{default_morse_h, morse_index_study};
use graphnls::nls::{
    bifurcation_guess, build_four_star_family, build_line_soliton, build_tadpole_compact_support,
    build_three_bridge_eigenfunction, continuation_in_lambda, count_nodal_zones, solve_stationary, tadpole_branch,
    tadpole_m0, weak_residual_battery, FourStarVariant, Guess, SolutionCandidate, SolveOptions,
};
use graphnls::nls::FourStarVariant::{Far, Near};
use graphnls::ode::{energy, hartman_threshold, integrate, HartmanQuery, OdeState, Tolerance};
use graphnls::spectral::{eigenvalues, lambda_threshold};
use graphnls::util::weighted_line_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    weighted_line_fit(&x, &y, &vec![1.0; x.len()]).expect("two or more points").0
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let g = three_bridge();
    let s = eigenvalues(&g, &Coefficient::constant(&g, 0.0), 7, 1e-3).map_err(e)?;
    let secs = t0.elapsed().as_secs_f64();
    let v = &s.values;
    let pi2 = PI * PI;
    let first = v[0].abs() <= 1e-6;
    let second = v[1..4].iter().map(|x| rel(*x, pi2)).fold(0.0, f64::max);
    let third = v[4..7].iter().map(|x| rel(*x, 4.0 * pi2)).fold(0.0, f64::max);
    let pass = first && second <= 1e-4 && third <= 4e-4 && secs < 10.0;
    Ok((
        pass,
        format!(
            "lambda_1 = {:.2e} (|.| <= 1e-6), pi^2 triple rel {second:.2e} (<= 1e-4), 4pi^2 triple rel {third:.2e} (<= 4e-4), {secs:.2} s (< 10 s)",
            v[0]
        ),
    ))
}

fn circle_constant(lambda: f64) -> Result<(MetricGraph, SolutionCandidate), String> {
    let g = circle(2.0 * PI).map_err(e)?;
    let prob = NlsProblem::standard(&g, 4.0, lambda).map_err(e)?;
    let grids = [EdgeGrid::with_spacing(2.0 * PI, 0.01).map_err(e)?];
    let c0 = lambda.sqrt();
    let (u, gap) = GridFunction::sample(&g, &grids, vec![None], |_, _| (c0, 0.0)).map_err(e)?;
    let c = SolutionCandidate::new(&g, u, prob, gap).map_err(e)?;
    Ok((g, c))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let soliton = build_line_soliton(4.0, 1.0).map_err(e)?;
    let tb1 = build_three_bridge_eigenfunction(1, [0.0, 1.0, -1.0, 0.0]).map_err(e)?;
    let tb2 = build_three_bridge_eigenfunction(2, [0.0, 1.0, -1.0, 0.0]).map_err(e)?;
    let (cg, cc) = circle_constant(1.01)?;
    let fixtures = [
        ("soliton", &soliton.graph, &soliton.candidate, 1),
        ("three-bridge k=1", &tb1.graph, &tb1.candidate, 1),
        ("three-bridge k=2", &tb2.graph, &tb2.candidate, 4),
        ("circle constant", &cg, &cc, 3),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g, c, want) in fixtures {
        let study = morse_index_study(g, c, default_morse_h(g, c.lambda()), None).map_err(e)?;
        let ok = study.index == want && study.stable;
        pass &= ok;
        parts.push(format!("{name} {} (want {want}, stable {})", study.index, study.stable));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    Ok((pass, format!("{}; {secs:.1} s (< 60 s)", parts.join(", "))))
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let lambdas = log_grid(1e2, 1e4, 7);
    for p in [3.0, 4.0, 8.0] {
        let seed = build_line_soliton(p, lambdas[0]).map_err(e)?;
        let prob = seed.candidate.prob().clone();
        let curve = mass_curve(
            Scenario::Nls,
            &seed.graph,
            p,
            None,
            &lambdas,
            vec![BranchSeed::Continue {
                seed: seed.candidate,
                prob,
                opts: SolveOptions::default(),
            }],
            false,
        )
        .map_err(e)?;
        let predicted = (6.0 - p) / (4.0 * (p - 2.0));
        let complete = curve.envelope.len() == lambdas.len();
        let slope = log_slope(&curve.envelope);
        let ok = complete && (slope - predicted).abs() <= 0.02;
        pass &= ok;
        parts.push(format!("(a) p={p} slope {slope:.4} vs {predicted:.4} (+-0.02)"));
    }

    let grid = [1e2, 1e3, 1e4];
    let families = [
        BlowupFamily::soliton_family(4.0, &grid).map_err(e)?,
        BlowupFamily::four_star_family(4.0, &grid, Near).map_err(e)?,
        BlowupFamily::four_star_family(4.0, &grid, Far).map_err(e)?,
    ];
    let mut worst: f64 = 0.0;
    for f in &families {
        for q in [2.0, 4.0] {
            let rows = mass_scaling_curve(f, q).map_err(e)?;
            let (lo, hi) = rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.scaled), hi.max(r.scaled)));
            worst = worst.max((hi - lo) / lo);
        }
    }
    pass &= worst <= 1e-6;
    parts.push(format!("(b) scaled mass spread {worst:.1e} (<= 1e-6)"));

    let p = 4.0;
    let tl = log_grid(1e-5, 1e-2, 7);
    let branch = tadpole_branch(p, &tl).map_err(e)?;
    let limit = tadpole_m0(p).map_err(e)? / 2f64.sqrt();
    let scaled: Vec<f64> = branch
        .iter()
        .map(|(l, _, ex)| l.powf(0.25) * ex.candidate.u().l2_norm())
        .collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let variation = (hi - lo) / lo;
    let dist: Vec<f64> = scaled.iter().map(|s| rel(*s, limit)).collect();
    let toward = dist.windows(2).all(|w| w[0] < w[1]);
    pass &= variation < 0.05 && toward;
    parts.push(format!(
        "(c) tadpole lambda^(1/4)|U| variation {:.2}% (< 5%), distance to limit {:.2}% at 1e-5 .. {:.2}% at 1e-2, decreasing {toward}",
        100.0 * variation,
        100.0 * dist[0],
        100.0 * dist[dist.len() - 1]
    ));
    Ok((pass, parts.join("; ")))
}

fn centers(g: &MetricGraph, c: &SolutionCandidate) -> Vec<GraphPoint> {
    find_local_maxima(g, c.u()).into_iter().map(|m| m.point).collect()
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut worst_bound = f64::NEG_INFINITY;
    let mut worst_exact: f64 = 0.0;
    let mut fits = 0;
    for lambda in [1e2, 1e3, 1e4] {
        let builds = [
            build_line_soliton(4.0, lambda).map_err(e)?,
            build_four_star_family(4.0, lambda, Near).map_err(e)?,
            build_four_star_family(4.0, lambda, Far).map_err(e)?,
        ];
        for ex in &builds {
            let r = decay_fit(&ex.graph, &ex.candidate, &centers(&ex.graph, &ex.candidate)).map_err(e)?;
            let k = lambda.sqrt();
            worst_bound = worst_bound.max(r.slope + 0.5 * k);
            worst_exact = worst_exact.max(rel(r.slope, -k));
            pass &= r.slope <= -0.5 * k && rel(r.slope, -k) <= 0.02;
            fits += 1;
        }
    }
    Ok((
        pass,
        format!(
            "{fits} fits: max(slope + sqrt(lambda)/2) = {worst_bound:.3} (<= 0), max |slope/sqrt(lambda) + 1| = {worst_exact:.2e} (<= 0.02)"
        ),
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tol = 1e-10;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let ell = 10f64.powf(rng.random_range(-2.0..1.0));
        let phi1 = 10f64.powf(rng.random_range(-3.0..0.0));
        let phi0 = phi1 * 10f64.powf(rng.random_range(0.0..6.0));
        let b = barrier_edge(ell, phi0, phi1).map_err(e)?;
        let alpha = (phi0 / phi1).acosh() / ell;
        let beta = (phi0 / phi1).ln() / ell;
        let mut ok = b.check(200, tol).all();
        let n = 200;
        let mut prev = f64::INFINITY;
        for j in 0..=n {
            let x = ell * j as f64 / n as f64;
            let (v, dv) = b.eval(x);
            let exact = phi1 * (alpha * (ell - x)).cosh();
            let dexact = -alpha * phi1 * (alpha * (ell - x)).sinh();
            let err = (v - exact).abs() / phi0 + (dv - dexact).abs() / (alpha * phi0).max(phi0);
            worst = worst.max(err);
            ok &= err <= tol;
            ok &= v <= prev * (1.0 + tol);
            ok &= v > 0.0 && v <= phi0 * (-beta * x).exp() * (1.0 + tol);
            prev = v;
        }
        let (v0, _) = b.eval(0.0);
        let (v1, d1) = b.eval(ell);
        ok &= rel(v0, phi0) <= tol && rel(v1, phi1) <= tol && d1.abs() <= tol * phi0;
        if !ok {
            failures += 1;
        }
    }
    let mut worst_ratio: f64 = 0.0;
    let mut acosh_err: f64 = 0.0;
    for i in 0..=4800 {
        let xi = 2.0 + 48.0 * i as f64 / 4800.0;
        let a = xi.exp().acosh();
        acosh_err = acosh_err.max(rel(acosh_exp(xi), a));
        worst_ratio = worst_ratio.max(a / xi);
    }
    let pass = failures == 0 && worst_ratio <= 1.4 && acosh_err <= 1e-12;
    Ok((
        pass,
        format!(
            "{failures}/1000 barrier triples fail at 1e-10 (closed-form error {worst:.1e}); max acosh(e^xi)/xi on [2, 50] = {worst_ratio:.4} (<= 1.4)"
        ),
    ))
}

struct Fixture {
    name: String,
    graph: MetricGraph,
    candidate: SolutionCandidate,
}

fn fixture(name: &str, ex: graphnls::nls::BuiltExample) -> Fixture {
    Fixture {
        name: name.to_string(),
        graph: ex.graph,
        candidate: ex.candidate,
    }
}

fn compact_branch(lambdas_gap: &[f64]) -> Result<(f64, MetricGraph, Vec<(f64, SolutionCandidate)>), String> {
    let g = interval(1.0).map_err(e)?;
    let n = 2001;
    let w = Coefficient(vec![EdgeCoefficient::Samples {
        span: 1.0,
        values: (0..n).map(|i| (PI * i as f64 / (n - 1) as f64).cos()).collect(),
    }]);
    let rho = Coefficient::constant(&g, 1.0);
    let h = 1e-3;
    let lambda_1 = -lambda_threshold(&g, &w, 0, h).map_err(e)?.lambda_one;
    let lambdas: Vec<f64> = lambdas_gap.iter().map(|d| -lambda_1 + d).collect();
    let prob = NlsProblem::with_coefficients(&g, 4.0, lambdas[0], w, rho).map_err(e)?;
    let opts = SolveOptions {
        ode_tol: Tolerance::new(1e-12, 1e-14).map_err(e)?,
        ..SolveOptions::default()
    };
    let guess = bifurcation_guess(&g, &prob, h, opts).map_err(e)?;
    let seed = solve_stationary(&g, &prob, Guess::Grid(guess), opts).map_err(e)?;
    if !seed.converged {
        return Err("compact branch seed did not converge".into());
    }
    let branch = continuation_in_lambda(&g, &prob, &seed.candidate, &lambdas, opts).map_err(e)?;
    let points = branch
        .points
        .into_iter()
        .map(|pt| pt.result.map(|c| (pt.lambda, c)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((lambda_1, g, points))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let problems: Vec<(f64, f64, f64, f64, f64)> = (0..1000)
        .map(|_| {
            (
                rng.random_range(2.1..8.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.1..5.0),
            )
        })
        .collect();
    let tol = Tolerance::new(1e-10, 1e-12).map_err(e)?;
    let drifts = problems
        .par_iter()
        .map(|&(p, lambda, u0, du0, len)| -> Result<(f64, f64), String> {
            let traj = integrate(
                |_, u| lambda * u - u.abs().powf(p - 2.0) * u,
                0.0,
                OdeState::new(u0, du0),
                len,
                tol,
            )
            .map_err(e)?;
            let h0 = energy(traj.state(0), p, lambda);
            let (mut d, mut scale) = (0.0f64, 0.0f64);
            for i in 0..traj.len() {
                let s = traj.state(i);
                d = d.max((energy(s, p, lambda) - h0).abs());
                scale = scale.max(0.5 * s.du * s.du + 0.5 * lambda.abs() * s.u * s.u + s.u.abs().powf(p) / p);
            }
            Ok((d / (1.0 + h0.abs()), d / scale.max(1.0)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let drift = drifts.iter().map(|d| d.0).fold(0.0, f64::max);
    let over = drifts.iter().filter(|d| d.0 > 1e-8).count();
    let against_scale = drifts.iter().map(|d| d.1).fold(0.0, f64::max);
    pass &= drift <= 1e-8;
    parts.push(format!(
        "energy drift / (1 + |H|) max {drift:.1e} (<= 1e-8), {over}/1000 above, max drift / trajectory energy scale {against_scale:.1e}"
    ));

    let mut fixtures = vec![
        fixture("soliton", build_line_soliton(4.0, 1.0).map_err(e)?),
        fixture("three-bridge k=1", build_three_bridge_eigenfunction(1, [0.0, 1.0, -1.0, 0.0]).map_err(e)?),
        fixture("three-bridge k=2", build_three_bridge_eigenfunction(2, [0.0, 1.0, -1.0, 0.0]).map_err(e)?),
        fixture("four-star near", build_four_star_family(4.0, 100.0, FourStarVariant::Near).map_err(e)?),
        fixture("four-star far", build_four_star_family(4.0, 100.0, FourStarVariant::Far).map_err(e)?),
        fixture("tadpole compact", build_tadpole_compact_support(4.0, 0.01, 2.0).map_err(e)?),
    ];
    let (cg, cc) = circle_constant(1.01)?;
    fixtures.push(Fixture {
        name: "circle constant".into(),
        graph: cg,
        candidate: cc,
    });
    for (l, _, ex) in tadpole_branch(4.0, &[1e-2]).map_err(e)? {
        fixtures.push(Fixture {
            name: format!("tadpole branch {l}"),
            graph: ex.graph,
            candidate: ex.candidate,
        });
    }
    let (_, ig, points) = compact_branch(&[1e-1])?;
    for (l, c) in points {
        fixtures.push(Fixture {
            name: format!("interval branch {l:.4}"),
            graph: ig.clone(),
            candidate: c,
        });
    }
    let mut weak: f64 = 0.0;
    let mut nodal_fail = Vec::new();
    let mut morse_fail = Vec::new();
    for (i, f) in fixtures.iter().enumerate() {
        let (g, c) = (&f.graph, &f.candidate);
        weak = weak.max(weak_residual_battery(g, c, 50, i as u64).map_err(e)?);
        let study = morse_index_study(g, c, default_morse_h(g, c.lambda()), None).map_err(e)?;
        let nodal = count_nodal_zones(g, c.u(), &c.prob().rho);
        if nodal.outside_g0 > study.index {
            nodal_fail.push(format!("{} ({} > {})", f.name, nodal.outside_g0, study.index));
        }
        if !c.is_trivial() && study.index < 1 {
            morse_fail.push(f.name.clone());
        }
    }
    pass &= weak <= 1e-6 && nodal_fail.is_empty() && morse_fail.is_empty();
    parts.push(format!("weak residual {weak:.1e} (<= 1e-6) on {} fixtures", fixtures.len()));
    parts.push(format!("nodal <= Morse violations {nodal_fail:?}"));
    parts.push(format!("Morse >= 1 violations {morse_fail:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let queries: Vec<HartmanQuery> = (0..6)
        .map(|i| {
            let rho_min = rng.random_range(0.5..1.5);
            HartmanQuery {
                p: [3.0, 4.0, 6.0][i % 3],
                ell: rng.random_range(0.5..2.0),
                w_max: rng.random_range(0.5..3.0),
                rho_min,
                rho_max: rho_min * rng.random_range(1.0..2.0),
                k: 1 + i % 2,
            }
        })
        .collect();
    let radii = queries
        .iter()
        .map(|q| hartman_threshold(q).map(|h| h.radius))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let instances: Vec<(usize, f64, f64, f64, f64)> = (0..10_000)
        .map(|_| {
            let i = rng.random_range(0..queries.len());
            let q = &queries[i];
            (
                i,
                rng.random_range(-q.w_max..=q.w_max),
                rng.random_range(q.rho_min..=q.rho_max),
                rng.random_range(0.0..2.0 * PI),
                radii[i] * rng.random_range(1.0..4.0),
            )
        })
        .collect();
    let bad = instances
        .par_iter()
        .map(|&(i, w, rho, theta, r)| {
            let q = &queries[i];
            q.zeros(w, rho, OdeState::new(r * theta.cos(), r * theta.sin()))
                .map(|z| usize::from(z < q.k))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?
        .into_iter()
        .sum::<usize>();
    pass &= bad == 0;
    parts.push(format!("oscillation threshold violated on {bad}/10000 instances"));
    Ok((pass, parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let g = three_bridge();
    let t = lambda_threshold(&g, &Coefficient::constant(&g, 0.0), 1, 1e-3).map_err(e)?;
    let threshold_err = (t.value + PI * PI).abs();
    let gaps = log_grid(1e-1, 1e-3, 9);
    let (lambda_1, _, points) = compact_branch(&gaps)?;
    let masses: Vec<f64> = points.iter().map(|(_, c)| c.u().l2_norm()).collect();
    let last = &masses[masses.len() - 5..];
    let monotone = last.windows(2).all(|w| w[1] < w[0]);
    let tail: Vec<(f64, f64)> = gaps[gaps.len() - 5..].iter().copied().zip(last.iter().copied()).collect();
    let slope = log_slope(&tail);
    let pass = threshold_err <= 1e-4 && points.len() == gaps.len() && monotone && slope > 0.0;
    Ok((
        pass,
        format!(
            "threshold(three-bridge, m*=1) + pi^2 = {threshold_err:.1e} (<= 1e-4); interval branch from lambda_1 = {lambda_1:.6}: {}/{} points, last 5 masses decreasing {monotone}, mass {:.2e} at gap 1e-3, log-slope in gap {slope:.3}",
            points.len(),
            gaps.len(),
            masses[masses.len() - 1]
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 three-bridge spectrum", criterion_1),
        ("2 Morse index fixtures", criterion_2),
        ("3 scaling exponents", criterion_3),
        ("4 decay rates", criterion_4),
        ("5 barrier", criterion_5),
        ("6 property suites", criterion_6),
        ("7 thresholds", criterion_7),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} [{:.1} s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of 7 criteria failed");
        std::process::exit(1);
    }
}
