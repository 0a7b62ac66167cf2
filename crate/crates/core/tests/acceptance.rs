//! Acceptance gate. One line per criterion; exits nonzero if any fails.
//!
//! cargo test --test acceptance

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{multiset_distance, normal_equations_ls, polynomial_roots, reference_singular_values, sine, vnorm};
use staglab::diagnostics::{
    coincidence_for_vector, gap_identity, residual_difference_identity, Thresholds,
};
use staglab::gmres::GmresState;
use staglab::harmonic::{harmonic_pairs, residual_polynomial, HarmonicPair};
use staglab::instances::{
    cyclic_shift_instance, paper_example, planted_singular_hessenberg, random_instance, step_one_stagnation,
    ProblemInstance,
};
use staglab::numeric::{c64, qr_hessenberg_ls, smallest_singular_triplet, solve_pencil, Complex64, ComplexMatrix};
use staglab::pipeline::{analyze, Analysis};

type Outcome = Result<String, String>;
// name, check, time budget in seconds
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn run_full(inst: &ProblemInstance) -> Result<Analysis, String> {
    analyze(inst.operator(), &inst.rhs, inst.dim(), 0.0, &Thresholds::default()).map_err(err)
}

fn sweep() -> Result<Vec<ProblemInstance>, String> {
    let mut v: Vec<ProblemInstance> = (0..100).map(|s| random_instance(10, s)).collect::<Result<_, _>>().map_err(err)?;
    v.push(paper_example());
    Ok(v)
}

fn planted_patterns() -> Vec<BTreeSet<usize>> {
    vec![[3].into(), [5].into(), [3, 4].into()]
}

fn worked_state() -> Result<(GmresState, Vec<HarmonicPair>), String> {
    let inst = paper_example();
    let mut s = GmresState::new(inst.operator(), &inst.rhs).map_err(err)?;
    s.run(2, 0.0).map_err(err)?;
    let pairs = harmonic_pairs(s.arnoldi(), 2).map_err(err)?;
    Ok((s, pairs))
}

fn close(a: Complex64, re: f64, tol: f64) -> bool {
    (a - c64(re, 0.0)).norm() <= tol
}

fn worked_reproduction() -> Outcome {
    let (s, pairs) = worked_state()?;
    let third = 1.0 / 3.0;
    let y = s.y(2).map_err(err)?;
    ensure(close(y[0], third, 1e-12) && close(y[1], third, 1e-12), || format!("y = {y:?}"))?;
    let r = s.materialize_residual(2).map_err(err)?;
    ensure(
        close(r[0], third, 1e-12) && close(r[1], -third, 1e-12) && close(r[2], -third, 1e-12),
        || format!("r_2 = {r:?}"),
    )?;
    let rn = s.resnorm_history()[2];
    ensure((rn - 1.0 / 3f64.sqrt()).abs() <= 1e-12, || format!("||r_2|| = {rn}"))?;

    let root3 = 3f64.sqrt();
    let plus = pairs
        .iter()
        .find(|p| p.sigma().is_some_and(|z| close(z, root3, 1e-12)))
        .ok_or("+sqrt(3) missing")?;
    ensure(
        pairs.iter().any(|p| p.sigma().is_some_and(|z| close(z, -root3, 1e-12))),
        || "-sqrt(3) missing".into(),
    )?;
    let h = plus.harmonic_residual.as_ref().ok_or("no harmonic residual")?;
    let ang = sine(h, &[c64(-0.5, 0.0), c64(0.5, 0.0), c64(0.5, 0.0)]);
    ensure(ang <= 1e-12, || format!("angle {ang:e}"))?;
    Ok(format!("harmonic residual angle {ang:.1e}"))
}

fn worked_scale() -> Outcome {
    let (s, pairs) = worked_state()?;
    let plus = pairs
        .iter()
        .find(|p| p.sigma().is_some_and(|z| z.re > 0.0))
        .ok_or("+sqrt(3) missing")?;
    // normalize u so that e_2^* u = 1/2
    let u: Vec<Complex64> = plus.u().iter().map(|z| z * c64(0.5, 0.0) / plus.u_last).collect();
    let t = Thresholds::default();
    let c = coincidence_for_vector(&s, 2, plus.sigma().unwrap(), &u, None, &t).map_err(err)?;
    let em_y = s.y(2).map_err(err)?[1];
    ensure(close(c.k_scale, -1.5, 1e-12), || format!("K_scale = {}", c.k_scale))?;
    ensure(c.vector_error <= 1e-10, || format!("vector error {:e}", c.vector_error))?;
    ensure(close(em_y, 1.0 / 3.0, 1e-12), || format!("e_2^* y = {em_y}"))?;
    ensure(close(u[1] / em_y, 1.5, 1e-12), || format!("ratio {}", u[1] / em_y))?;
    Ok(format!("K_scale = {:.15}, vector error {:.1e}", c.k_scale.re, c.vector_error))
}

fn over_sweep(f: impl Fn(&GmresState, usize) -> Result<f64, String>) -> Result<(f64, usize), String> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for inst in sweep()? {
        let mut s = GmresState::new(inst.operator(), &inst.rhs).map_err(err)?;
        s.run(inst.dim(), 0.0).map_err(err)?;
        for m in 1..=s.steps() {
            worst = worst.max(f(&s, m)?);
            count += 1;
        }
    }
    Ok((worst, count))
}

fn gap_sweep() -> Outcome {
    let t = Thresholds::default();
    let (worst, count) = over_sweep(|s, m| {
        let g = gap_identity(s, m, &t).map_err(|e| format!("step {m}: {e}"))?;
        Ok(g.error / s.beta().powi(2))
    })?;
    ensure(worst <= 1e-8, || format!("worst {worst:e}"))?;
    Ok(format!("{count} steps, worst error/beta^2 {worst:.1e}"))
}

fn residual_difference_sweep() -> Outcome {
    let t = Thresholds::default();
    let (worst, count) = over_sweep(|s, m| {
        let e = residual_difference_identity(s, m, &t).map_err(|e| format!("step {m}: {e}"))?;
        Ok(e / s.beta())
    })?;
    ensure(worst <= 1e-8, || format!("worst {worst:e}"))?;
    Ok(format!("{count} steps, worst error/beta {worst:.1e}"))
}

fn four_way() -> Outcome {
    let mut cases: Vec<(String, ProblemInstance, BTreeSet<usize>)> = Vec::new();
    for n in 2..=8 {
        cases.push((format!("cyclic {n}"), cyclic_shift_instance(n).map_err(err)?, (1..n).collect()));
    }
    for steps in planted_patterns() {
        for seed in 0..20 {
            let inst = planted_singular_hessenberg(8, &steps, seed).map_err(err)?;
            cases.push((format!("planted {steps:?} seed {seed}"), inst, steps.clone()));
        }
    }
    for seed in 0..20 {
        cases.push((format!("step one seed {seed}"), step_one_stagnation(6, seed).map_err(err)?, [1].into()));
    }
    let mut steps_checked = 0;
    for (name, inst, expected) in &cases {
        let a = run_full(inst)?;
        for s in &a.steps {
            ensure(s.report.predicates_consistent, || {
                format!("{name} step {}: indicators {:?}", s.record.m, s.report.indicators())
            })?;
            steps_checked += 1;
        }
        let observed = a.stagnated_steps();
        ensure(&observed == expected, || format!("{name}: expected {expected:?}, observed {observed:?}"))?;
    }
    Ok(format!("{} instances, {steps_checked} steps", cases.len()))
}

fn biconditional() -> Outcome {
    let mut pairs_checked = 0;
    for seed in 0..50 {
        let a = run_full(&random_instance(8, seed).map_err(err)?)?;
        ensure(a.stagnated_steps().is_empty(), || format!("seed {seed} stagnates"))?;
        for s in &a.steps {
            ensure(s.coincidence_failures.is_empty(), || format!("seed {seed}: {:?}", s.coincidence_failures))?;
            for c in &s.coincidence {
                let cond = c.condition_error <= 1e-8;
                let vec = c.vector_error <= 1e-8 * c.vector_scale;
                ensure(cond == vec, || {
                    format!("seed {seed} step {} pair {}: {c:?}", s.record.m, c.pair_index)
                })?;
                pairs_checked += 1;
            }
        }
    }

    let t = Thresholds::default();
    let mut min_side = f64::INFINITY;
    for seed in 0..10 {
        let inst = random_instance(8, seed).map_err(err)?;
        let mut s = GmresState::new(inst.operator(), &inst.rhs).map_err(err)?;
        let m = 4;
        s.run(m, 0.0).map_err(err)?;
        let pairs = harmonic_pairs(s.arnoldi(), m).map_err(err)?;
        let p = &pairs[seed as usize % m];
        let sigma = p.sigma().ok_or("infinite pair")?;
        let base = coincidence_for_vector(&s, m, sigma, p.u(), None, &t).map_err(err)?;
        let mut u = p.u().to_vec();
        u[m - 1] += c64(0.1, 0.05);
        let c = coincidence_for_vector(&s, m, sigma, &u, Some(base.k_scale), &t).map_err(err)?;
        ensure(c.condition_error > 1e-3 && c.vector_error > 1e-3, || format!("seed {seed}: {c:?}"))?;
        min_side = min_side.min(c.condition_error).min(c.vector_error);
    }
    Ok(format!("{pairs_checked} pairs agree; 10 perturbed, smallest side {min_side:.1e}"))
}

fn stagnation_coincidence() -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for steps in planted_patterns() {
        for seed in 0..20 {
            let a = run_full(&planted_singular_hessenberg(8, &steps, seed).map_err(err)?)?;
            for &m in &steps {
                let s = a.step(m).ok_or("missing step")?;
                ensure(s.coincidence_failures.is_empty(), || {
                    format!("{steps:?} seed {seed} step {m}: {:?}", s.coincidence_failures)
                })?;
                let finite = s.pairs.iter().filter(|p| !p.is_infinite()).count();
                ensure(s.coincidence.len() == finite, || format!("{steps:?} seed {seed}: pairs skipped"))?;
                for c in &s.coincidence {
                    let rel = c.vector_error / c.vector_scale;
                    ensure(rel <= 1e-7, || format!("{steps:?} seed {seed} step {m}: {rel:e}"))?;
                    worst = worst.max(rel);
                    checked += 1;
                }
            }
        }
    }
    ensure(checked > 0, || "no finite pairs at stagnated steps".into())?;
    Ok(format!("{checked} pairs, worst {worst:.1e}"))
}

fn persistence() -> Outcome {
    let mut matched = 0;
    let mut verdicts = 0;
    for steps in planted_patterns() {
        for seed in 0..20 {
            let a = run_full(&planted_singular_hessenberg(8, &steps, seed).map_err(err)?)?;
            for s in &a.steps {
                let Some(v) = &s.persistence else { continue };
                ensure(v.consistent(), || format!("{steps:?} seed {seed} step {}: converse", s.record.m))?;
                verdicts += 1;
            }
            // consecutive stagnated steps: every pair at m reappears at m-1
            for &m in steps.iter().filter(|&&m| steps.contains(&(m - 1))) {
                let now = &a.step(m).ok_or("missing step")?.pairs;
                let before = &a.step(m - 1).ok_or("missing step")?.pairs;
                for p in now {
                    let Some(sigma) = p.sigma().filter(|z| z.norm() > 0.0) else { continue };
                    let prefix = &p.u()[..m - 1];
                    let hit = before.iter().any(|q| {
                        q.sigma().is_some_and(|z| (z - sigma).norm() <= 1e-7 * (1.0 + sigma.norm()))
                            && vnorm(prefix) > 0.0
                            && sine(prefix, q.u()) <= 1e-6
                    });
                    ensure(hit, || format!("seed {seed} step {m}: sigma {sigma} has no partner"))?;
                    matched += 1;
                }
            }
        }
    }
    ensure(matched > 0, || "nothing to match".into())?;
    Ok(format!("{matched} pairs persisted, {verdicts} converse verdicts agree"))
}

fn polynomial_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for seed in 0..20 {
        let inst = random_instance(8, seed).map_err(err)?;
        let mut s = GmresState::new(inst.operator(), &inst.rhs).map_err(err)?;
        s.run(5, 0.0).map_err(err)?;
        for m in 1..=5 {
            let poly = residual_polynomial(&s, m).map_err(err)?;
            ensure(poly.krylov_condition < 1e6, || format!("seed {seed}: Krylov condition {:e}", poly.krylov_condition))?;
            let roots = polynomial_roots(&poly.coefficients);
            let ritz: Vec<Complex64> =
                harmonic_pairs(s.arnoldi(), m).map_err(err)?.iter().filter_map(|p| p.sigma()).collect();
            let d = multiset_distance(&ritz, &roots);
            ensure(d <= 1e-6, || format!("seed {seed} m {m}: {ritz:?} vs {roots:?}"))?;
            worst = worst.max(d);
            compared += 1;
        }
    }
    Ok(format!("{compared} multisets, worst relative distance {worst:.1e}"))
}

fn nested_ls() -> Outcome {
    let (worst, count) = over_sweep(|s, m| {
        if m < 2 {
            return Ok(0.0);
        }
        let e = s.nested_ls_consistency(m).map_err(err)?;
        let bound = 1e-8 * vnorm(s.y(m - 1).map_err(err)?) + 1e-12;
        Ok(e / bound)
    })?;
    ensure(worst <= 1.0, || format!("worst error/bound {worst:e}"))?;
    Ok(format!("{count} steps, worst error/bound {worst:.1e}"))
}

fn kernels() -> Outcome {
    let mut ls_worst: f64 = 0.0;
    let mut sv_worst: f64 = 0.0;
    for seed in 0..20 {
        let inst = random_instance(10, seed).map_err(err)?;
        let mut s = GmresState::new(inst.operator(), &inst.rhs).map_err(err)?;
        s.run(6, 0.0).map_err(err)?;
        let h = s.arnoldi().hessenberg_ext(6).map_err(err)?;
        let mut rhs = vec![c64(0.0, 0.0); 7];
        rhs[0] = c64(s.beta(), 0.0);
        let (x, _) = qr_hessenberg_ls(&h, &rhs).map_err(err)?;
        let reference = normal_equations_ls(&h, &rhs);
        let diff: Vec<Complex64> = x.iter().zip(&reference).map(|(a, b)| a - b).collect();
        ls_worst = ls_worst.max(vnorm(&diff) / vnorm(&reference));

        let sq = inst.matrix.leading(7, 7);
        let t = smallest_singular_triplet(&sq).map_err(err)?;
        let svs = reference_singular_values(&sq);
        let smin = *svs.last().unwrap();
        sv_worst = sv_worst.max((t.sigma_min - smin).abs() / svs[0]);
    }
    ensure(ls_worst <= 1e-10, || format!("least squares {ls_worst:e}"))?;
    ensure(sv_worst <= 1e-10, || format!("singular value {sv_worst:e}"))?;

    let mut pencil_worst: f64 = 0.0;
    for seed in 0..10 {
        let a = random_instance(6, seed).map_err(err)?.matrix;
        let b = random_instance(6, seed + 100).map_err(err)?.matrix;
        for p in solve_pencil(&a, &b).map_err(err)? {
            let r: Vec<Complex64> = b
                .matvec(&p.vector)
                .iter()
                .zip(a.matvec(&p.vector))
                .map(|(bv, av)| p.beta * av - p.alpha * bv)
                .collect();
            let scale = (p.beta.norm() * a.frobenius_norm() + p.alpha.norm() * b.frobenius_norm()) * vnorm(&p.vector);
            pencil_worst = pencil_worst.max(vnorm(&r) / scale);
        }
    }
    ensure(pencil_worst <= 1e-9, || format!("pencil residual {pencil_worst:e}"))?;

    let mut nil = ComplexMatrix::zeros(4, 4);
    for i in 0..3 {
        nil[(i, i + 1)] = c64(1.0, 0.0);
    }
    let pairs = solve_pencil(&ComplexMatrix::identity(4), &nil).map_err(err)?;
    ensure(pairs.iter().all(|p| p.infinite), || "nilpotent pencil has a finite pair".into())?;
    Ok(format!("ls {ls_worst:.1e}, sigma_min {sv_worst:.1e}, pencil {pencil_worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("worked example reproduction", worked_reproduction, 1),
        ("worked example coincidence scale", worked_scale, 1),
        ("gap identity", gap_sweep, 10),
        ("residual-difference identity", residual_difference_sweep, 10),
        ("four-way stagnation equivalence", four_way, 20),
        ("coincidence biconditional", biconditional, 20),
        ("stagnation coincidence", stagnation_coincidence, 10),
        ("persistence", persistence, 10),
        ("residual-polynomial oracle", polynomial_oracle, 10),
        ("nested least squares", nested_ls, 10),
        ("kernel oracles", kernels, 5),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let slow = took > Duration::from_secs(*limit);
        let (tag, detail) = match (&out, slow) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {limit} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:2} {tag} {name}: {detail} ({:.2} s)", i + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
