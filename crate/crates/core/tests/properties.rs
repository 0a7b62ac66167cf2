mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{normal_equations_ls, reference_singular_values, vnorm};
use proptest::prelude::*;
use staglab::arnoldi::ArnoldiDecomposition;
use staglab::diagnostics::{coincidence_for_vector, Thresholds};
use staglab::gmres::GmresState;
use staglab::harmonic::{harmonic_pairs, harmonic_pencil};
use staglab::instances::{planted_singular_hessenberg, random_instance, random_vector};
use staglab::io::{RunConfig, RunReport};
use staglab::numeric::{
    c64, dot, qr_hessenberg_ls, singular_values, smallest_singular_triplet, solve_pencil, unit, Complex64,
    ComplexMatrix,
};
use staglab::pipeline::analyze;

fn entries(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c64(a, b)), len)
}

fn square(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    entries(n * n).prop_map(move |v| ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

fn ext_hessenberg(m: usize) -> impl Strategy<Value = ComplexMatrix> {
    entries((m + 1) * m).prop_map(move |v| {
        ComplexMatrix::from_fn(m + 1, m, |i, j| if i <= j + 1 { v[i * m + j] } else { c64(0.0, 0.0) })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hessenberg_ls_residual_is_orthogonal(h in (1usize..10).prop_flat_map(ext_hessenberg), scale in 0.1..10.0f64) {
        let m = h.cols();
        let rhs: Vec<Complex64> = (0..=m).map(|i| c64(scale / (1.0 + i as f64), 0.5 - i as f64)).collect();
        let (x, res) = qr_hessenberg_ls(&h, &rhs).unwrap();
        let r: Vec<Complex64> = rhs.iter().zip(h.matvec(&x)).map(|(b, hx)| b - hx).collect();
        let g = h.adjoint().matvec(&r);
        prop_assert!(vnorm(&g) <= 1e-10 * vnorm(&rhs) * h.frobenius_norm().max(1.0));
        prop_assert!((vnorm(&r) - res).abs() <= 1e-10 * vnorm(&rhs));
        if singular_values(&h).last().copied().unwrap() > 1e-3 {
            let reference = normal_equations_ls(&h, &rhs);
            let d: Vec<Complex64> = x.iter().zip(&reference).map(|(a, b)| a - b).collect();
            prop_assert!(vnorm(&d) <= 1e-8 * vnorm(&reference).max(1.0));
        }
    }

    #[test]
    fn smallest_triplet_matches_full_svd(a in (1usize..=12).prop_flat_map(square)) {
        let t = smallest_singular_triplet(&a).unwrap();
        let svs = reference_singular_values(&a);
        prop_assert!((t.sigma_min - svs.last().unwrap()).abs() <= 1e-10 * svs[0]);
        let av = a.matvec(&t.right);
        let d: Vec<Complex64> = av.iter().zip(&t.left).map(|(x, u)| x - u * t.sigma_min).collect();
        prop_assert!(vnorm(&d) <= 1e-10 * svs[0]);
    }

    #[test]
    fn pencil_pairs_satisfy_the_residual_bound(
        (a, b) in (1usize..8).prop_flat_map(|n| (square(n), square(n))),
        rank_drop in 0usize..3,
    ) {
        let mut b = b;
        let n = b.rows();
        // zero some rows so B is singular and infinite pairs appear
        for i in 0..rank_drop.min(n) {
            for j in 0..n {
                b[(i, j)] = c64(0.0, 0.0);
            }
        }
        // a regular pencil: A alone is nonsingular
        prop_assume!(*singular_values(&a).last().unwrap() > 1e-6 * a.frobenius_norm());
        let pairs = solve_pencil(&a, &b).unwrap();
        prop_assert_eq!(pairs.len(), n);
        for p in &pairs {
            prop_assert!(p.alpha.norm() + p.beta.norm() > 0.0);
            prop_assert!((vnorm(&p.vector) - 1.0).abs() <= 1e-12);
            let r: Vec<Complex64> = a.matvec(&p.vector).iter().zip(b.matvec(&p.vector))
                .map(|(av, bv)| p.beta * av - p.alpha * bv).collect();
            let scale = p.beta.norm() * a.frobenius_norm() + p.alpha.norm() * b.frobenius_norm();
            prop_assert!(vnorm(&r) <= 1e-9 * scale);
        }
        if rank_drop > 0 {
            prop_assert!(pairs.iter().any(|p| p.infinite));
        }
    }

    #[test]
    fn kernels_are_deterministic(a in (1usize..7).prop_flat_map(square)) {
        let b = ComplexMatrix::identity(a.rows());
        let first = solve_pencil(&a, &b).unwrap();
        let second = solve_pencil(&a, &b).unwrap();
        for (p, q) in first.iter().zip(&second) {
            prop_assert_eq!(p.alpha.re.to_bits(), q.alpha.re.to_bits());
            prop_assert_eq!(p.alpha.im.to_bits(), q.alpha.im.to_bits());
            prop_assert_eq!(&p.vector, &q.vector);
        }
        prop_assert_eq!(smallest_singular_triplet(&a).unwrap().right, smallest_singular_triplet(&a).unwrap().right);
    }

    #[test]
    fn arnoldi_stays_orthonormal(n in 2usize..=50, seed in any::<u64>()) {
        let inst = random_instance(n, seed).unwrap();
        let mut arn = ArnoldiDecomposition::new(inst.operator(), &inst.rhs).unwrap();
        let steps = n.min(20);
        for k in 1..=steps {
            arn.step().unwrap();
            let done = arn.breakdown();
            let cols = if done { k } else { k + 1 };
            let v = arn.basis_matrix(cols);
            let vv = v.adjoint().matmul(&v).sub(&ComplexMatrix::identity(cols)).frobenius_norm();
            prop_assert!(vv <= 1e-12 * (k as f64).sqrt().max(1.0), "orthogonality {vv:e} at {k}");
            let av = ComplexMatrix::from_columns(n, &(0..k).map(|j| inst.matrix.matvec(v.col(j))).collect::<Vec<_>>());
            let h = arn.hessenberg_ext(k).unwrap().leading(cols, k);
            let fact = av.sub(&v.matmul(&h)).frobenius_norm();
            prop_assert!(fact <= 1e-12 * inst.matrix.frobenius_norm());
            if done {
                break;
            }
            let sub = arn.subdiagonal(k).unwrap();
            prop_assert_eq!(sub.im, 0.0);
            prop_assert!(sub.re > 0.0);
        }
    }

    #[test]
    fn gmres_step_invariants(n in 2usize..12, seed in any::<u64>()) {
        let inst = random_instance(n, seed).unwrap();
        let mut s = GmresState::new(inst.operator(), &inst.rhs).unwrap();
        s.run(n, 0.0).unwrap();
        let beta = s.beta();
        let hist = s.resnorm_history();
        prop_assert!(hist.windows(2).all(|w| w[1] <= w[0] + 1e-14 * beta));
        for m in 1..=s.steps() {
            let r = s.materialize_residual(m).unwrap();
            let y = s.y(m).unwrap();
            let ar = inst.matrix.matvec(&s.solution(m).unwrap());
            let explicit: Vec<Complex64> = inst.rhs.iter().zip(&ar).map(|(b, x)| b - x).collect();
            prop_assert!((vnorm(&explicit) - hist[m]).abs() <= 1e-9 * beta);
            prop_assert!((vnorm(&r) - hist[m]).abs() <= 1e-9 * beta);
            let rr0 = dot(&r, &inst.rhs);
            prop_assert!((rr0 - c64(hist[m] * hist[m], 0.0)).norm() <= 1e-9 * beta * beta);
            let ht = s.arnoldi().hessenberg_ext(m).unwrap();
            let lhs = ht.adjoint().matvec(&ht.matvec(y));
            let rhs = ht.adjoint().matvec(&unit(m + 1, 0));
            let ne: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(l, h)| l - beta * h).collect();
            prop_assert!(vnorm(&ne) <= 1e-9 * beta * ht.frobenius_norm());
        }
    }

    #[test]
    fn harmonic_pair_invariants(n in 3usize..10, seed in any::<u64>()) {
        let inst = random_instance(n, seed).unwrap();
        let mut s = GmresState::new(inst.operator(), &inst.rhs).unwrap();
        let m = n - 1;
        s.run(m, 0.0).unwrap();
        let (a, b) = harmonic_pencil(s.arnoldi(), m).unwrap();
        let pairs = harmonic_pairs(s.arnoldi(), m).unwrap();
        prop_assert_eq!(pairs.len(), m);
        for p in &pairs {
            prop_assert_eq!(p.u_last.norm(), p.u()[m - 1].norm());
            let r: Vec<Complex64> = a.matvec(p.u()).iter().zip(b.matvec(p.u()))
                .map(|(av, bv)| p.pair.beta * av - p.pair.alpha * bv).collect();
            let scale = p.pair.beta.norm() * a.frobenius_norm() + p.pair.alpha.norm() * b.frobenius_norm();
            prop_assert!(vnorm(&r) <= 1e-9 * scale);
        }
    }

    #[test]
    fn necessity_with_unit_scale(n in 3usize..10, seed in any::<u64>(), pick in 0usize..8) {
        let inst = random_instance(n, seed).unwrap();
        let mut s = GmresState::new(inst.operator(), &inst.rhs).unwrap();
        let m = n - 1;
        s.run(m, 0.0).unwrap();
        let pairs = harmonic_pairs(s.arnoldi(), m).unwrap();
        let p = &pairs[pick % m];
        let sigma = p.sigma().unwrap();
        let em_y = s.y(m).unwrap()[m - 1];
        // rescale so that the harmonic residual is exactly r_m
        let u: Vec<Complex64> = p.u().iter().map(|z| z * (-em_y / p.u_last)).collect();
        let c = coincidence_for_vector(&s, m, sigma, &u, Some(c64(1.0, 0.0)), &Thresholds::default()).unwrap();
        if c.vector_error <= 1e-10 {
            prop_assert!((em_y + u[m - 1]).norm() <= 1e-8);
        }
    }

    #[test]
    fn report_booleans_recompute_from_fields(n in 2usize..9, seed in 0u64..1000) {
        let inst = random_instance(n, seed).unwrap();
        let cfg = RunConfig::new("random", n);
        let a = analyze(inst.operator(), &inst.rhs, n, cfg.conv_tol, &cfg.thresholds).unwrap();
        let rep = RunReport::new(&cfg, &a);
        let t = &rep.config.thresholds;
        for it in &rep.iterations {
            prop_assert_eq!(it.stagnated, it.gap.abs() <= t.eps_s * rep.beta * rep.beta);
            let k = c64(it.k.re, it.k.im).norm();
            let em_y = c64(it.em_y.re, it.em_y.im).norm();
            let ind = [
                k <= t.eps_z * it.scale_k,
                em_y <= t.eps_z * it.y_scale,
                it.sigma_min_h <= t.eps_z * it.h_scale,
                it.max_abs_em_u <= t.eps_z,
            ];
            prop_assert_eq!(it.predicates_consistent, ind.iter().all(|&b| b) || ind.iter().all(|&b| !b));
        }
    }

    #[test]
    fn planted_blocks_are_singular_exactly_where_planted(
        n in 6usize..10,
        steps in prop::collection::btree_set(2usize..5, 1..3),
        seed in 0u64..500,
    ) {
        let steps: BTreeSet<usize> = steps;
        let inst = planted_singular_hessenberg(n, &steps, seed).unwrap();
        let h = &inst.matrix;
        let hn = h.frobenius_norm();
        for m in 1..n {
            let smin = *singular_values(&h.leading(m, m)).last().unwrap();
            if steps.contains(&m) {
                prop_assert!(smin <= 1e-14 * hn, "m={m}: {smin:e}");
            } else {
                prop_assert!(smin > 1e-6 * hn, "m={m}: {smin:e}");
            }
        }
        prop_assert_eq!(&planted_singular_hessenberg(n, &steps, seed).unwrap(), &inst);
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(random_instance(7, 3).unwrap(), random_instance(7, 3).unwrap());
    assert_ne!(random_instance(7, 3).unwrap(), random_instance(7, 4).unwrap());
    assert_eq!(random_vector(5, 9), random_vector(5, 9));
}

#[test]
fn arnoldi_is_bitwise_deterministic() {
    let inst = random_instance(9, 1).unwrap();
    let run = || {
        let mut a = ArnoldiDecomposition::new(Arc::clone(&inst.operator()), &inst.rhs).unwrap();
        for _ in 0..6 {
            a.step().unwrap();
        }
        a.hessenberg_ext(6).unwrap()
    };
    assert_eq!(run(), run());
}
