//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use ddz::exact::{smith_rank_oracle, ExactDual, ExactSpectral};
use ddz::fuzz::{fuzz, FuzzOptions};
use ddz::harness::{drazin_test_matrix, gen_instance, rank_instance, Gen, GenConfig, Instance, Target};
use ddz_core::blocks::Theorem;
use ddz_core::digraphs::{support, DLinkedStars, DoubleStar, DutchWindmill};
use ddz_core::drazin::{drazin_complex, drazin_oracle, dual_drazin, dual_exists};
use ddz_core::linalg::frob;
use ddz_core::{DualMatrix, Tolerances};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel_dual(x: &DualMatrix, reference: &DualMatrix) -> f64 {
    (x - reference).norm() / reference.norm().max(1.0)
}

fn defining_equations() -> Verdict {
    let tol = Tolerances::default();
    let start = Instant::now();
    let (mut worst, mut failures) = (0.0f64, 0);
    for trial in 0..200 {
        let mut g = Gen::new(101, trial, 2);
        let n = g.dim(1, 8);
        let x = g.dcz_member(n).a;
        match dual_drazin(&x, &tol) {
            Ok(d) => {
                let r = d.residuals.iter().copied().fold(0.0, f64::max);
                worst = worst.max(r);
                if r > 1e-8 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && secs <= 60.0,
        format!("200 members, {failures} failures, max residual {worst:.2e}, {secs:.2} s"),
    )
}

fn oracle_equivalence() -> Verdict {
    let tol = Tolerances::default();
    let (mut worst, mut failures) = (0.0f64, 0);
    for trial in 0..500 {
        let mut g = Gen::new(202, trial, 2);
        let n = g.dim(1, 8);
        let a = drazin_test_matrix(&mut g, n, trial);
        let (Ok(d), Ok(o)) = (drazin_complex(&a, &tol), drazin_oracle(&a, &tol)) else {
            failures += 1;
            continue;
        };
        let err = frob(&(&d.ad - &o)) / frob(&o).max(1.0);
        worst = worst.max(err);
        if err > 1e-9 {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("500 matrices, {failures} failures, max relative error {worst:.2e}"))
}

fn suite(targets: &[Target], seed: u64) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for &t in targets {
        let report = match fuzz(&GenConfig::new(t, seed, 100), &FuzzOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                lines.push(format!("{t}: {e}"));
                continue;
            }
        };
        let s = &report.summary;
        let good = s.pass_count == 100 && s.max_rel_error <= 1e-8;
        ok &= good;
        lines.push(format!("{t} {}/100 ({:.1e})", s.pass_count, s.max_rel_error));
    }
    verdict(ok, lines.join(", "))
}

fn existence() -> Verdict {
    let tol = Tolerances::default();
    let mut wrong = 0;
    for trial in 0..100 {
        let mut g = Gen::new(505, trial, 2);
        let positive = trial < 50;
        let n = g.dim(if positive { 1 } else { 2 }, 6);
        let x = if positive { g.dcz_member(n).a } else { g.dcz_nonmember(n) };
        let exact = ExactDual::from_dual(&x).map(|e| ExactSpectral::new(&e).exists).ok();
        let float = dual_exists(&x, &tol).map(|e| e.holds).ok();
        if exact != Some(positive) || float != Some(positive) {
            wrong += 1;
        }
    }
    verdict(wrong == 0, format!("50 positive + 50 negative, {wrong} misclassified"))
}

fn rank_and_index() -> Verdict {
    let tol = Tolerances::default();
    let mut rank_mismatch = 0;
    for trial in 0..200 {
        let mut g = Gen::new(606, trial, 2);
        let n = g.dim(1, 6);
        let x = rank_instance(&mut g, n);
        match smith_rank_oracle(&x) {
            Ok((r, s)) if x.rank_std(&tol) == r && x.rank_dual(&tol) == r + s => {}
            _ => rank_mismatch += 1,
        }
    }
    let mut bound_violations = 0;
    for trial in 0..200 {
        let mut g = Gen::new(607, trial, 2);
        let n = g.dim(1, 6);
        let x = match trial % 3 {
            0 => g.dcz_member(n).a,
            1 => g.dcz_nonmember(n),
            _ => rank_instance(&mut g, n),
        };
        match x.indices(&tol) {
            Ok(r) if r.ind_std <= r.ind_phi && r.ind_phi <= 2 * r.ind_std => {}
            _ => bound_violations += 1,
        }
    }
    verdict(
        rank_mismatch == 0 && bound_violations == 0,
        format!("rank mismatches {rank_mismatch}/200, index bound violations {bound_violations}/200"),
    )
}

fn windmill_arcs(m: usize, k: usize) -> BTreeSet<(usize, usize)> {
    let mut arcs = BTreeSet::new();
    for blade in 0..m {
        let cycle: Vec<usize> = std::iter::once(0).chain((0..k).map(|j| 1 + blade * k + j)).collect();
        for w in 0..cycle.len() {
            let (u, v) = (cycle[w], cycle[(w + 1) % cycle.len()]);
            arcs.insert((u, v));
            arcs.insert((v, u));
        }
    }
    arcs
}

fn graph_builders() -> Verdict {
    let tol = Tolerances::default();
    let mut notes = Vec::new();
    let mut ok = true;

    let ds = DoubleStar::unit(3, 2).build(&tol).map(|b| b.matrix);
    let ds_ok = matches!(&ds, Ok(x) if x.shape() == (7, 7) && support(x).len() == 12);
    ok &= ds_ok;
    notes.push(format!("S_4,3 {}", if ds_ok { "7x7/12" } else { "wrong" }));

    let base = DualMatrix::from_real(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.], &[0.0; 9]);
    let x: Vec<DualMatrix> = [2, 3, 2].iter().map(|&r| DualMatrix::from_real(r, 1, &vec![1.0; r], &vec![0.0; r])).collect();
    let gls = DLinkedStars { base, y: x.clone(), x }.build().map(|b| b.matrix.shape());
    let gls_ok = gls.as_ref().ok() == Some(&(10, 10));
    ok &= gls_ok;
    notes.push(format!("gls {}", if gls_ok { "10x10" } else { "wrong" }));

    let dw = DutchWindmill::unit(4, 2);
    let (dw_ok, bip_ok) = match dw.build() {
        Ok(b) => {
            let pattern: BTreeSet<_> = support(&b.matrix).into_iter().collect();
            let shape_ok = b.matrix.shape() == (13, 13) && pattern == windmill_arcs(4, 3);
            let perm = b.permutation_to_bipartite.clone().unwrap_or_default();
            let split = b.bipartite_split.unwrap_or(0);
            let p = b.matrix.permute(&perm);
            let zero = |r0: usize, c0: usize, r: usize, c: usize| p.block(r0, c0, r, c).is_zero();
            (shape_ok, perm.len() == 13 && zero(0, 0, split, split) && zero(split, split, 13 - split, 13 - split))
        }
        Err(_) => (false, false),
    };
    ok &= dw_ok && bip_ok;
    notes.push(format!("D_4^4 pattern {}", if dw_ok { "ok" } else { "wrong" }));
    notes.push(format!("bipartite split {}", if bip_ok { "ok" } else { "wrong" }));
    verdict(ok, notes.join(", "))
}

fn cline_pairs() -> Verdict {
    let tol = Tolerances::default();
    let mut pairs = Vec::new();
    let cfg = GenConfig::new(Target::Block(Theorem::Cline), 808, 50);
    for trial in 0..50 {
        if let Ok(Instance::Block(inst)) = gen_instance(&cfg, trial) {
            pairs.push((inst.block("A").unwrap().clone(), inst.block("B").unwrap().clone()));
        }
    }
    for trial in 0..(100 - pairs.len()) {
        let mut g = Gen::new(809, trial, 2);
        let (p, q) = (g.dim(1, 6), g.dim(1, 6));
        pairs.push((g.dual_float(p, q), g.dual_float(q, p)));
    }
    let (mut worst, mut failures) = (0.0f64, 0);
    for (e, f) in &pairs {
        let (Ok(fe), Ok(ef)) = (dual_drazin(&(f * e), &tol), dual_drazin(&(e * f), &tol)) else {
            failures += 1;
            continue;
        };
        let (fe, ef) = (fe.inverse, ef.inverse);
        let lhs1 = e * &fe;
        let rhs1 = &ef * e;
        let lhs2 = &fe * f;
        let rhs2 = f * &ef;
        let r = rel_dual(&lhs1, &rhs1).max(rel_dual(&lhs2, &rhs2));
        worst = worst.max(r);
        if r > 1e-9 {
            failures += 1;
        }
    }
    verdict(failures == 0 && pairs.len() == 100, format!("{} pairs, {failures} failures, max residual {worst:.2e}", pairs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("defining equations", defining_equations),
        ("Drazin oracle equivalence", oracle_equivalence),
        ("block theorem suite", || suite(&Theorem::ALL.iter().map(|&t| Target::Block(t)).collect::<Vec<_>>(), 303)),
        ("graph formula suite", || suite(&Target::GRAPH, 404)),
        ("existence test", existence),
        ("rank and index suite", rank_and_index),
        ("graph builders", graph_builders),
        ("Cline closing identities", cline_pairs),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        all &= v.pass;
        println!("{} criterion {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    if all { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
