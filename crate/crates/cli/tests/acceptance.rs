//! Acceptance criteria 1-10, one pass/fail line each with its runtime.
//! Runs without the libtest harness so the lines always print.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use hampow_core::absorber::{absorb, assemble_absorbing_path, build_gadget, verify_gadget, AssembleOptions};
use hampow_core::connect::count_connecting_walks;
use hampow_core::graph::{degree_profile, gen_extremal, gen_random, save_graph, GraphFormat};
use hampow_core::oracle::{ham_power_cycle_exists_with, OracleOptions, SearchBudget};
use hampow_core::paths::{decompose, is_properly_terminated_in, is_valid_pair, TypeVector};
use hampow_core::scan::{grid, run_scan};
use hampow_core::sequencing::{
    arithmetic_plan, build_template_matrix, default_floor, sequence, solve_part_sizes, sort_parts_descending,
    verify_plan, SequenceOptions,
};
use hampow_core::tiling::{fractional_tiling, verify_certificate};
use hampow_core::{Config, MultipartiteGraph, Ratio};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// independent checks, written against the definitions directly

fn all_adjacent(g: &MultipartiteGraph, vs: &[usize]) -> bool {
    (0..vs.len()).all(|a| (a + 1..vs.len()).all(|b| g.adjacent(vs[a], vs[b])))
}

fn naive_walk(g: &MultipartiteGraph, s: &[usize], r: usize) -> bool {
    s.len() < r || s.windows(r).all(|w| all_adjacent(g, w))
}

fn naive_path(g: &MultipartiteGraph, s: &[usize], r: usize) -> bool {
    s.iter().collect::<HashSet<_>>().len() == s.len() && naive_walk(g, s, r)
}

fn naive_cycle(g: &MultipartiteGraph, c: &[usize], r: usize) -> bool {
    let n = g.n();
    if c.len() != n || c.iter().collect::<HashSet<_>>().len() != n || c.iter().any(|&v| v >= n) {
        return false;
    }
    (0..n).all(|i| all_adjacent(g, &(0..r).map(|d| c[(i + d) % n]).collect::<Vec<_>>()))
}

fn transversal_cliques(g: &MultipartiteGraph, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for i in 0..r {
        out = out
            .into_iter()
            .flat_map(|acc: Vec<usize>| {
                g.part(i).iter().filter_map(move |&v| {
                    let mut next = acc.clone();
                    next.push(v);
                    all_adjacent(g, &next).then_some(next)
                })
            })
            .collect();
    }
    out
}

fn c1_gadget() -> Outcome {
    let t = build_gadget(3).map_err(|e| e.to_string())?;
    let show = |ls: &[hampow_core::absorber::Label]| ls.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let q1 = "a_1^1 a_2^1 a_3^1 x_1 b_2^1 b_3^1 c_1^1 c_2^1 c_3^1 a_1^2 a_2^2 a_3^2 b_1^2 x_2 b_3^2 c_1^2 c_2^2 c_3^2 \
              a_1^3 a_2^3 a_3^3 b_1^3 b_2^3 x_3 c_1^3 c_2^3 c_3^3";
    let q2 =
        "a_1^1 a_2^1 a_3^1 c_1^1 b_2^1 b_3^1 a_1^2 c_2^1 c_3^1 b_1^2 a_2^2 a_3^2 c_1^2 c_2^2 b_3^2 a_1^3 a_2^3 c_3^2 \
              b_1^3 b_2^3 a_3^3 c_1^3 c_2^3 c_3^3";
    ensure!(
        t.q1.len() == 27 && t.q2.len() == 24,
        "lengths {} and {}",
        t.q1.len(),
        t.q2.len()
    );
    ensure!(show(&t.q1) == q1, "Q1 differs: {}", show(&t.q1));
    ensure!(show(&t.q2) == q2, "Q2 differs: {}", show(&t.q2));
    for r in 2..=6 {
        let v = verify_gadget(&build_gadget(r).map_err(|e| e.to_string())?);
        ensure!(v.ok, "r = {r}: {}", v.reason);
    }
    Ok("Q1/Q2 verbatim, r = 2..6 verified".into())
}

fn c2_valid_pairs() -> Outcome {
    let mut pairs = 0;
    for r in 2..=6 {
        for k in r + 1..2 * r {
            let z0 = TypeVector::template(k, r, 0);
            for j in 1..=r + 1 {
                let zj = TypeVector::template(k, r, j);
                ensure!(is_valid_pair(&z0, &zj, r), "r={r} k={k}: (z0, z{j}) invalid");
                for jp in 1..=r + 1 {
                    let zjp = TypeVector::template(k, r, jp);
                    let expect = j <= jp + 1;
                    ensure!(
                        is_valid_pair(&zj, &zjp, r) == expect,
                        "r={r} k={k}: (z{j}, z{jp}) should be {expect}"
                    );
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} ordered pairs"))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn c3_template_matrix() -> Outcome {
    let mut cases = 0;
    for r in 2..=5 {
        for k in r..2 * r {
            for s in 0..=r {
                let a = build_template_matrix(k, r, s).map_err(|e| e.to_string())?;
                let ell = binomial(k - s, r - s);
                ensure!(a.ell() == ell, "k={k} r={r} s={s}: ell {} != {ell}", a.ell());
                let cols: Vec<Vec<bool>> = a.columns.iter().map(|c| c.bits().to_vec()).collect();
                let distinct: HashSet<&Vec<bool>> = cols.iter().collect();
                ensure!(distinct.len() == ell, "k={k} r={r} s={s}: repeated columns");
                for c in &cols {
                    ensure!(
                        c[..s].iter().all(|&b| b) && c.iter().filter(|&&b| b).count() == r,
                        "column {c:?} outside Z"
                    );
                }
                let first: Vec<bool> = (0..k).map(|i| i < r).collect();
                let last: Vec<bool> = (0..k).map(|i| i < s || i >= k - (r - s)).collect();
                ensure!(cols[0] == first, "k={k} r={r} s={s}: first column {:?}", cols[0]);
                ensure!(
                    cols[ell - 1] == last,
                    "k={k} r={r} s={s}: last column {:?}",
                    cols[ell - 1]
                );
                for j in 0..ell - 1 {
                    let (mut x, mut y) = (0, 0);
                    for i in 0..k {
                        x += cols[j][i] as usize;
                        y += cols[j + 1][i] as usize;
                        ensure!(
                            !(cols[j][i] && cols[j + 1][i]) || x <= y,
                            "k={k} r={r} s={s}: prefix rule fails at column {j}, row {i}"
                        );
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (k, r, s) cases"))
}

fn c4_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..1000 {
        let r = rng.gen_range(2..=5);
        let k = rng.gen_range(r..2 * r);
        let s = rng.gen_range(0..=r);
        let m = rng.gen_range(1..=3);
        let a = build_template_matrix(k, r, s).map_err(|e| e.to_string())?;
        let xstar: Vec<usize> = (0..a.ell()).map(|_| m + rng.gen_range(0..=4)).collect();
        let b: Vec<usize> = (0..k)
            .map(|i| {
                a.columns
                    .iter()
                    .zip(&xstar)
                    .filter(|(c, _)| c.get(i))
                    .map(|(_, &x)| x)
                    .sum()
            })
            .collect();
        let sol = solve_part_sizes(&a, &b, m).map_err(|e| format!("trial {trial}: {e}"))?;
        let ax: Vec<usize> = (0..k)
            .map(|i| {
                a.columns
                    .iter()
                    .zip(&sol.x)
                    .filter(|(c, _)| c.get(i))
                    .map(|(_, &x)| x)
                    .sum()
            })
            .collect();
        ensure!(ax == b, "trial {trial}: A x = {ax:?} but b = {b:?}");
        ensure!(sol.x.iter().all(|&x| x >= m), "trial {trial}: entry below {m}");
        let expect = (b.iter().sum::<usize>() - r * a.ell() * m) / r;
        ensure!(
            sol.iterations == expect,
            "trial {trial}: {} iterations, expected {expect}",
            sol.iterations
        );
    }
    Ok("1000 instances exact".into())
}

fn c5_sequencing() -> Outcome {
    let r = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut done, mut skipped) = (0, 0);
    let mut seed = 0u64;
    while done < 100 {
        seed += 1;
        let n = rng.gen_range(24..=60);
        let mut sizes: Vec<usize> = (0..4).map(|_| rng.gen_range(4..=n / 3)).collect();
        let total: usize = sizes.iter().sum();
        if total > n || total < 24 {
            continue;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let n = total;
        if sizes[0] * r > n {
            continue;
        }
        let cfg = Config::for_r(r).with_seed(seed);
        if arithmetic_plan(&sizes, r, cfg.sigma, default_floor(&cfg, n)).is_err() {
            skipped += 1;
            continue;
        }
        let g = sort_parts_descending(&gen_random(&sizes, Ratio::new(19, 20), seed).map_err(|e| e.to_string())?);
        let opts = SequenceOptions {
            relaxed: true,
            floor_m: None,
        };
        let out = sequence(&g, &cfg, opts).map_err(|e| format!("sizes {sizes:?} seed {seed}: {e}"))?;
        let p0p = &out.plan.p0_prime;
        let vprime = n - p0p.len();
        let res = &out.trim.residual;
        ensure!(vprime % r == 0, "sizes {sizes:?}: |V'| = {vprime} not divisible by r");
        ensure!(
            res[..out.template.s].iter().all(|&x| x * r == vprime),
            "sizes {sizes:?}: T2 fails, residual {res:?}"
        );
        ensure!(
            naive_path(&g, p0p, r),
            "sizes {sizes:?}: trim path is not an (r-1)-path"
        );
        ensure!(
            is_properly_terminated_in(&g, p0p, r).unwrap_or(false),
            "sizes {sizes:?}: trim path not properly terminated"
        );
        let dec = decompose(&g, p0p, r).map_err(|e| format!("sizes {sizes:?}: {e}"))?;
        let types: Vec<TypeVector> = dec.runs(p0p).map(|run| TypeVector::of_run(&g, run)).collect();
        ensure!(
            types == out.template.type_sequence,
            "sizes {sizes:?}: run types differ from the template"
        );
        let report = verify_plan(&g, &out.plan, r, out.floor_m, out.threshold);
        for (name, c) in [
            ("partition", &report.partition),
            ("A1", &report.a1),
            ("A3", &report.a3),
            ("A4", &report.a4),
        ] {
            ensure!(c.pass, "sizes {sizes:?}: {name} fails: {:?}", c.witness);
        }
        ensure!(
            report.a2.pass,
            "sizes {sizes:?}: A2 at measured slack fails: {:?}",
            report.a2.witness
        );
        done += 1;
    }
    Ok(format!(
        "100 instances ({skipped} size vectors skipped as arithmetically infeasible)"
    ))
}

fn naive_walk_count(g: &MultipartiteGraph, pool: &[usize], p1: &[usize], p2: &[usize], ell: usize, r: usize) -> u128 {
    let mut count = 0u128;
    let mut q = vec![0usize; ell];
    let total = pool.len().pow(ell as u32);
    for code in 0..total {
        let mut c = code;
        for slot in q.iter_mut() {
            *slot = pool[c % pool.len()];
            c /= pool.len();
        }
        let seq: Vec<usize> = p1.iter().chain(&q).chain(p2).copied().collect();
        if naive_walk(g, &seq, r) {
            count += 1;
        }
    }
    count
}

fn c6_connect() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    let mut positive = 0;
    let mut seed = 0;
    while done < 200 {
        seed += 1;
        let r = if done % 2 == 0 { 2 } else { 3 };
        let sizes: Vec<usize> = (0..r).map(|_| rng.gen_range(1..=10 / r)).collect();
        let g = gen_random(&sizes, Ratio::new(rng.gen_range(5..=10), 10), seed).map_err(|e| e.to_string())?;
        let cliques = transversal_cliques(&g, r);
        if cliques.is_empty() {
            continue;
        }
        let p1 = cliques.choose(&mut rng).unwrap().clone();
        let p2 = cliques.choose(&mut rng).unwrap().clone();
        let pools: Vec<Vec<usize>> = (0..r)
            .map(|i| g.part(i).iter().copied().filter(|_| rng.gen_bool(0.8)).collect())
            .collect();
        let ell = rng.gen_range(1..=4);
        let dp = count_connecting_walks(&g, &pools, &p1, &p2, ell, r).map_err(|e| e.to_string())?;
        let mut pool: Vec<usize> = pools.concat();
        pool.sort_unstable();
        let naive = if pool.is_empty() {
            0
        } else {
            naive_walk_count(&g, &pool, &p1, &p2, ell, r)
        };
        ensure!(
            dp.total == naive,
            "seed {seed}: dp {} != naive {naive} (r={r}, ell={ell})",
            dp.total
        );
        positive += (naive > 0) as usize;
        done += 1;
    }
    Ok(format!("200 hosts equal, {positive} with walks"))
}

fn c7_tiling() -> Outcome {
    let big = |a: usize, b: usize| BigRational::new(BigInt::from(a), BigInt::from(b));
    let k222 = gen_random(&[2, 2, 2], Ratio::one(), 0).map_err(|e| e.to_string())?;
    let t = fractional_tiling(&k222, 3);
    ensure!(t.value == big(2, 1), "K_2,2,2 optimum {}", t.value);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut done, mut seed) = (0, 0);
    while done < 60 {
        seed += 1;
        let r = if done % 2 == 0 { 2 } else { 3 };
        let m = rng.gen_range(2..=18 / r);
        let g = gen_random(&vec![m; r], Ratio::new(9, 10), seed).map_err(|e| e.to_string())?;
        let delta = degree_profile(&g).map_err(|e| e.to_string())?.delta_p;
        if delta < Ratio::one() - Ratio::new(1, r as i64) {
            continue;
        }
        let n = g.n();
        let t = fractional_tiling(&g, r);
        ensure!(t.value == big(n, r), "seed {seed}: optimum {} != {n}/{r}", t.value);
        ensure!(verify_certificate(&g, r, &t), "seed {seed}: certificate rejected");
        // the dual, checked against every transversal clique
        ensure!(
            t.prices.iter().all(|p| *p >= BigRational::zero()),
            "seed {seed}: negative price"
        );
        let price_sum = t.prices.iter().fold(BigRational::zero(), |a, p| a + p);
        ensure!(price_sum == t.value, "seed {seed}: prices sum to {price_sum}");
        for k in transversal_cliques(&g, r) {
            let s = k.iter().fold(BigRational::zero(), |a, &v| a + &t.prices[v]);
            ensure!(s >= BigRational::one(), "seed {seed}: clique {k:?} priced {s}");
        }
        // and the primal
        let load = t.load(n);
        ensure!(
            load.iter().all(|l| *l <= BigRational::one()),
            "seed {seed}: overloaded vertex"
        );
        let w = t.weights.iter().fold(BigRational::zero(), |a, c| a + &c.weight);
        ensure!(
            w == t.value && t.weights.iter().all(|c| all_adjacent(&g, &c.clique)),
            "seed {seed}: bad primal"
        );
        done += 1;
    }
    Ok("K_2,2,2 = 2; 60 random hosts at n/r with certificates".into())
}

fn c8_extremal() -> Outcome {
    let exhaustive = OracleOptions {
        independence_bound: false,
    };
    for (sizes, r) in [(vec![4, 4, 4], 3), (vec![4, 4], 2)] {
        let g = gen_extremal(&sizes, r).map_err(|e| e.to_string())?;
        let out = ham_power_cycle_exists_with(&g, r, SearchBudget::nodes(u64::MAX), exhaustive);
        ensure!(out.answer.label() == "no", "extremal {sizes:?}: {}", out.answer.label());
    }
    let cells = grid(
        &[
            vec![4, 2, 2],
            vec![5, 3, 3],
            vec![3, 3, 3],
            vec![4, 2],
            vec![3, 3],
            vec![5, 2, 2, 2],
        ],
        &[2, 3],
        &[Ratio::one(), Ratio::new(3, 4)],
    );
    let rows = run_scan(&cells, 5, 2_000_000, 8).map_err(|e| e.to_string())?;
    let failing: Vec<_> = rows.iter().filter(|row| !row.necessity).collect();
    ensure!(!failing.is_empty(), "no scan instance failed the necessity check");
    if let Some(bad) = failing.iter().find(|row| row.answer != "no") {
        return Err(format!(
            "necessity fails but oracle says {} on {:?}",
            bad.answer, bad.sizes
        ));
    }
    Ok(format!(
        "both extremal hosts exhaustively no; {} necessity failures all no",
        failing.len()
    ))
}

fn c9_absorption() -> Outcome {
    let r = 3;
    for run in 0..50u64 {
        let m = 9 + (run as usize % 7);
        let g = gen_random(&[m, m, m], Ratio::one(), run).map_err(|e| e.to_string())?;
        let cfg = Config::for_r(r).with_seed(run);
        let gadgets = (m / (3 * r - 1)).max(1);
        let pabs =
            assemble_absorbing_path(&g, &AssembleOptions::new(gadgets), &cfg).map_err(|e| format!("run {run}: {e}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        let on_path: HashSet<usize> = pabs.path.iter().copied().collect();
        let take = rng.gen_range(1..=pabs.capacity() / r);
        let z: Vec<usize> = (0..r)
            .flat_map(|i| {
                let mut free: Vec<usize> = g.part(i).iter().copied().filter(|v| !on_path.contains(v)).collect();
                free.shuffle(&mut rng);
                free.truncate(take);
                free
            })
            .collect();
        ensure!(z.len() == take * r, "run {run}: not enough free vertices");
        let p = absorb(&g, &pabs, &z).map_err(|e| format!("run {run}: {e}"))?;
        ensure!(naive_path(&g, &p, r), "run {run}: result is not an (r-1)-path");
        let want: HashSet<usize> = on_path.iter().chain(&z).copied().collect();
        ensure!(
            p.iter().copied().collect::<HashSet<_>>() == want && p.len() == want.len(),
            "run {run}: wrong vertex set"
        );
        let k = pabs.path.len();
        ensure!(
            p[..r] == pabs.path[..r] && p[p.len() - r..] == pabs.path[k - r..],
            "run {run}: terminal tuples moved"
        );
    }
    Ok("50 runs, n = 27..45".into())
}

fn c10_end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hampow");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |g: &MultipartiteGraph, name: &str, seed: u64| -> Result<(Option<i32>, Vec<u8>), String> {
        let path = dir.path().join(name);
        let f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
        save_graph(f, g, GraphFormat::Json).map_err(|e| e.to_string())?;
        let seed = seed.to_string();
        let args = [
            "pipeline",
            "--graph",
            path.to_str().unwrap(),
            "--r",
            "3",
            "--seed",
            &seed,
        ];
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        Ok((out.status.code(), out.stdout))
    };
    let mut seed = 0u64;
    for idx in 0..25 {
        let m = [3, 4, 5][idx % 3];
        let g = loop {
            seed += 1;
            let g = gen_random(&[m, m, m], Ratio::new(19, 20), seed).map_err(|e| e.to_string())?;
            if degree_profile(&g).map_err(|e| e.to_string())?.delta_p >= Ratio::new(17, 20) {
                break g;
            }
        };
        let (code, stdout) = run(&g, &format!("g{idx}.json"), seed)?;
        ensure!(code == Some(0), "instance {idx} (n = {}): exit {code:?}", g.n());
        let report: serde_json::Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
        let cycle: Vec<usize> = serde_json::from_value(report["cycle"].clone()).map_err(|e| e.to_string())?;
        ensure!(
            naive_cycle(&g, &cycle, 3),
            "instance {idx}: cycle rejected by the independent check"
        );
    }
    for sizes in [[3, 3, 3], [4, 4, 4], [5, 5, 5]] {
        let g = gen_extremal(&sizes, 3).map_err(|e| e.to_string())?;
        let (code, _) = run(&g, "x.json", 0)?;
        ensure!(code.is_some_and(|c| c != 0), "extremal {sizes:?}: exit {code:?}");
    }
    Ok("25 random hosts verified, 3 extremal hosts rejected".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("gadget fidelity", c1_gadget, 1),
        ("valid pair exhaustion", c2_valid_pairs, 1),
        ("template matrix exhaustion", c3_template_matrix, 1),
        ("solver soundness", c4_solver, 10),
        ("sequencing identities", c5_sequencing, 60),
        ("connecting walk counts", c6_connect, 30),
        ("fractional tiling", c7_tiling, 60),
        ("extremal necessity", c8_extremal, 60),
        ("absorption round trip", c9_absorption, 60),
        ("end to end", c10_end_to_end, 300),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs(*limit) => Err(format!("took longer than {limit} s")),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:>2} {name}: {tag} ({:.2} s, limit {limit} s) {detail}",
            i + 1,
            took.as_secs_f64()
        );
        failed += outcome.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
