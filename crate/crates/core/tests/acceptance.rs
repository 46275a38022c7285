//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p glw-core --test acceptance -- --nocapture` to see
//! the report. The test fails if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use glw_core::decide::{brute_force_on, decide, BruteOutcome, Verdict, DEFAULT_BRUTE_GUARD};
use glw_core::formula::{enumerate_minimal, parse, random_formula, Connectives, Formula};
use glw_core::kripke::{
    build_bounded_morphism, enumerate_trees, frame_validity, model_check, KripkeFrame, KripkeModel, DEFAULT_KN_GUARD,
    DEFAULT_VALIDITY_BITS,
};
use glw_core::measures::{
    build_gamma_structure, dagger_violations, derivative_rank, extract_descending_chain, filter_model_check,
    reduce_pipeline, seeded_mutants, sigma_satisfiable_at, soundness_invariant, validate_dagger, FilterValuation,
    GammaLabeling, SigmaEngine, DEFAULT_GAMMA_GUARD, DEFAULT_SIGMA_GUARD,
};
use glw_core::ordinals::{
    cells_derivative_contains, cells_to_set, gamma_end_candidate, gamma_end_validate, interval_countermodel_for,
    interval_model_check, Cell, NatSet, Ordinal, SymbolicSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

const SEED: u64 = 0x5eed;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every labeled structure with `n ≤ 4` and `b, m ≤ 3`.
fn generated() -> &'static [GammaLabeling] {
    static CELL: OnceLock<Vec<GammaLabeling>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for n in 0..=4 {
            for b in 1..=3 {
                for m in 1..=3 {
                    out.push(build_gamma_structure(n, b, m, DEFAULT_GAMMA_GUARD).expect("grid structure within guard"));
                }
            }
        }
        out
    })
}

fn name(gl: &GammaLabeling) -> String {
    format!("GammaStructure(n={}, b={}, {} points)", gl.truncation.n, gl.truncation.b, gl.structure.len())
}

#[derive(Default)]
struct Tally {
    refuted: usize,
    valid: usize,
    inconclusive: usize,
}

fn agree_on(f: &Formula, frames: &[KripkeFrame], max_nodes: usize, tally: &mut Tally) -> Result<(), String> {
    let verdict = decide(f).map_err(|e| format!("{}: {e}", f.print()))?;
    let oracle = brute_force_on(f, frames, max_nodes, DEFAULT_BRUTE_GUARD).map_err(|e| format!("{}: {e}", f.print()))?;
    match (&verdict, &oracle) {
        (Verdict::Countermodel { .. }, BruteOutcome::Refuted { .. }) => tally.refuted += 1,
        (Verdict::Valid, BruteOutcome::Refuted { .. }) => {
            return Err(format!("{}: decide says valid, oracle refutes", f.print()))
        }
        (Verdict::Valid, &BruteOutcome::NoCountermodel { conclusive, .. }) => {
            if conclusive {
                tally.valid += 1;
            } else {
                tally.inconclusive += 1;
            }
        }
        (Verdict::Countermodel { model, .. }, &BruteOutcome::NoCountermodel { conclusive, .. }) => {
            if conclusive || model.frame.len() <= max_nodes {
                return Err(format!("{}: decide refutes, oracle finds no countermodel", f.print()));
            }
            tally.inconclusive += 1;
        }
    }
    Ok(())
}

fn agreement() -> Check {
    const MAX_NODES: usize = 5;
    let frames = enumerate_trees(MAX_NODES).map_err(|e| e.to_string())?;
    let mut formulas: Vec<Formula> = enumerate_minimal(6, 2).into_iter().flatten().collect();
    let exhaustive = formulas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..500 {
        let size = rng.gen_range(0..=6);
        formulas.push(random_formula(&mut rng, size, 2, Connectives::Full));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = formulas.len().div_ceil(workers);
    let tallies: Vec<Result<Tally, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = formulas
            .chunks(chunk)
            .map(|part| {
                let frames = &frames;
                scope.spawn(move || {
                    let mut tally = Tally::default();
                    for f in part {
                        agree_on(f, frames, MAX_NODES, &mut tally)?;
                    }
                    Ok(tally)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = Tally::default();
    for t in tallies {
        let t = t?;
        total.refuted += t.refuted;
        total.valid += t.valid;
        total.inconclusive += t.inconclusive;
    }
    Ok(format!(
        "{} formulas ({exhaustive} exhaustive over ~,->,[] + 500 random), trees up to {MAX_NODES} worlds: \
         {} refuted by both, {} conclusively valid by both, {} valid by decide with no oracle refutation, \
         0 disagreements",
        formulas.len(),
        total.refuted,
        total.valid,
        total.inconclusive
    ))
}

fn axioms() -> Check {
    let p0 = Formula::Var(0);
    let theorems = [
        Formula::lob(p0.clone()),
        Formula::k_axiom(p0.clone(), Formula::Var(1)),
        parse("[]p0 -> [][]p0").unwrap(),
    ];
    for f in &theorems {
        let v = decide(f).map_err(|e| e.to_string())?;
        ensure(v.is_valid(), || format!("{} not valid", f.print()))?;
    }
    let refutable = ["[]p0 -> p0", "<>T", "p0 -> []p0"];
    for text in refutable {
        let f = parse(text).unwrap();
        match decide(&f).map_err(|e| e.to_string())? {
            Verdict::Valid => return Err(format!("{text} reported valid")),
            Verdict::Countermodel { model, world } => {
                ensure(model.frame.is_transitive_irreflexive_tree(), || format!("{text}: not a GL frame"))?;
                ensure(!model_check(&model, &f).contains(&world), || format!("{text}: countermodel does not refute"))?;
            }
        }
    }
    Ok("3 theorems valid; 3 non-theorems refuted by re-checked tree countermodels".into())
}

fn random_valuation(rng: &mut ChaCha8Rng, vars: &BTreeSet<u32>, worlds: usize) -> BTreeMap<u32, BTreeSet<usize>> {
    vars.iter().map(|&v| (v, (0..worlds).filter(|_| rng.gen_bool(0.5)).collect())).collect()
}

fn morphisms() -> Check {
    let trees: Vec<KripkeFrame> =
        enumerate_trees(7).map_err(|e| e.to_string())?.into_iter().filter(|t| t.height().is_some_and(|h| h <= 3)).collect();
    let mut built = Vec::new();
    for t in &trees {
        let h = t.height().unwrap() as u32;
        let bm = build_bounded_morphism(h, t, DEFAULT_KN_GUARD).map_err(|e| format!("{t:?}: {e}"))?;
        bm.check().map_err(|v| format!("{t:?}: {v:?}"))?;
        built.push(bm);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut frame_checks = 0;
    for _ in 0..100 {
        let bm = &built[rng.gen_range(0..built.len())];
        let size = rng.gen_range(1..=5);
        let f = random_formula(&mut rng, size, 2, Connectives::Full);
        let vars = f.vars();
        let target_v = random_valuation(&mut rng, &vars, bm.target.len());
        let source_v: BTreeMap<u32, BTreeSet<usize>> = target_v
            .iter()
            .map(|(&v, ws)| (v, (0..bm.source.len()).filter(|&s| ws.contains(&bm.map[s])).collect()))
            .collect();
        let target = KripkeModel::new(bm.target.clone(), target_v).map_err(|e| e.to_string())?;
        let source = KripkeModel::new(bm.source.clone(), source_v).map_err(|e| e.to_string())?;
        let (tt, st) = (model_check(&target, &f), model_check(&source, &f));
        for s in 0..bm.source.len() {
            ensure(st.contains(&s) == tt.contains(&bm.map[s]), || {
                format!("{}: truth not preserved at source world {s}", f.print())
            })?;
        }
        if bm.source.len() * vars.len() <= DEFAULT_VALIDITY_BITS {
            let sv = frame_validity(&bm.source, &f, DEFAULT_VALIDITY_BITS).map_err(|e| e.to_string())?;
            let tv = frame_validity(&bm.target, &f, DEFAULT_VALIDITY_BITS).map_err(|e| e.to_string())?;
            ensure(!sv || tv, || format!("{}: valid on K_n truncation but not on its image", f.print()))?;
            frame_checks += 1;
        }
    }
    Ok(format!(
        "{} trees: every morphism built and checked; 100 (frame, formula) pairs preserve truth pointwise, \
         {frame_checks} also compared by frame validity",
        trees.len()
    ))
}

fn dagger() -> Check {
    for gl in generated() {
        validate_dagger(gl).map_err(|v| format!("{}: {v}", name(gl)))?;
    }
    let mutants = seeded_mutants(50, SEED).map_err(|e| e.to_string())?;
    let mut by_condition = BTreeMap::new();
    for (m, gl) in &mutants {
        let first = validate_dagger(gl).err().ok_or_else(|| format!("mutant {m:?} passes"))?;
        ensure(!dagger_violations(gl).is_empty(), || format!("mutant {m:?}: no witness"))?;
        *by_condition.entry(first.condition()).or_insert(0) += 1;
    }
    Ok(format!(
        "{} grid structures pass; 50 mutants fail with witnesses (first failing condition: {by_condition:?})",
        generated().len()
    ))
}

fn soundness() -> Check {
    let instances: Vec<Formula> = ["p0", "p0 & p1", "<>p0", "~p0 | []p1", "[]p0 -> p1", "#"]
        .iter()
        .map(|s| Formula::lob(parse(s).unwrap()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut exhaustive = 0;
    for gl in generated() {
        let ms = &gl.structure;
        let all: BTreeSet<usize> = (0..ms.len()).collect();
        for _ in 0..100 {
            let mut v = FilterValuation::new();
            for var in 0..2 {
                v.insert(var, (0..ms.len()).filter(|_| rng.gen_bool(0.5)).collect());
            }
            for f in &instances {
                ensure(filter_model_check(ms, &v, f) == all, || format!("{}: {} fails", name(gl), f.print()))?;
            }
        }
        if ms.len() <= 12 {
            exhaustive += 1;
            for code in 0u32..(1 << ms.len()) {
                let a: BTreeSet<usize> = (0..ms.len()).filter(|&p| code >> p & 1 == 1).collect();
                ensure(soundness_invariant(ms, &a), || format!("{}: invariant fails for {a:?}", name(gl)))?;
            }
        }
    }
    Ok(format!(
        "{} Löb instances x 100 valuations on {} structures; invariant exhaustive on {exhaustive} structures ≤ 12 points",
        instances.len(),
        generated().len()
    ))
}

fn mitchell_dia() -> Check {
    let mut points = 0;
    for gl in generated() {
        let ms = &gl.structure;
        for k in 0..=4 {
            let holds = filter_model_check(ms, &FilterValuation::new(), &Formula::dia_power(k));
            for p in 0..ms.len() {
                let rank = ms.mitchell_rank(p).map_err(|e| e.to_string())?;
                ensure(holds.contains(&p) == (rank >= k), || {
                    format!("{}: point {p} rank {rank} vs <>^{k}T", name(gl))
                })?;
            }
        }
        points += ms.len();
    }
    Ok(format!("{points} points x n = 0..4 agree"))
}

fn rho_equals_o() -> Check {
    let mut points = 0;
    for gl in generated() {
        let ms = &gl.structure;
        for p in 0..ms.len() {
            let rho = derivative_rank(ms, p).map_err(|e| e.to_string())?;
            let o = ms.mitchell_rank(p).map_err(|e| e.to_string())?;
            ensure(rho == o, || format!("{}: point {p} has rho {rho}, o {o}", name(gl)))?;
        }
        points += ms.len();
    }
    Ok(format!("{points} points agree"))
}

fn reduction() -> Check {
    let mut count = 0;
    for (f, valid) in common::corpus() {
        if valid || f.modal_depth() > 3 {
            continue;
        }
        let r = reduce_pipeline(&f, 1, DEFAULT_GAMMA_GUARD)
            .map_err(|e| format!("{}: {e}", f.print()))?
            .ok_or_else(|| format!("{}: no countermodel", f.print()))?;
        let eta = r.gamma.eta().ok_or("empty structure")?;
        let holds = filter_model_check(&r.gamma.structure, &r.valuation, &f);
        ensure(!holds.contains(&eta), || format!("{}: holds at eta", f.print()))?;
        count += 1;
    }
    Ok(format!("{count} corpus non-theorems refuted at eta"))
}

fn sigma() -> Check {
    let mut cases = 0;
    for n in 0..=3 {
        let gl = build_gamma_structure(n, 2, 1, DEFAULT_GAMMA_GUARD).map_err(|e| e.to_string())?;
        let ms = &gl.structure;
        let eta = gl.eta().ok_or("empty structure")?;
        for k in 0..=(n as usize + 1) {
            let out = sigma_satisfiable_at(ms, eta, k, SigmaEngine::Auto, DEFAULT_SIGMA_GUARD)
                .map_err(|e| format!("n={n} k={k}: {e}"))?;
            ensure(out.satisfiable == (k < n as usize), || format!("n={n} k={k}: satisfiable = {}", out.satisfiable))?;
            if let Ok(brute) = sigma_satisfiable_at(ms, eta, k, SigmaEngine::Brute, DEFAULT_SIGMA_GUARD) {
                ensure(brute.satisfiable == out.satisfiable, || format!("n={n} k={k}: engines disagree"))?;
            }
            if let Some(w) = &out.witness {
                let chain = extract_descending_chain(ms, eta, w, k).map_err(|e| e.to_string())?;
                ensure(chain.len() == k + 1, || format!("n={n} k={k}: chain length {}", chain.len()))?;
                for pair in chain.windows(2) {
                    ensure(ms.mitchell_below(pair[1], pair[0]), || format!("n={n} k={k}: chain not descending"))?;
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, k) cases at eta; every witness gives a descending chain of length k+1"))
}

fn random_ordinal(rng: &mut ChaCha8Rng, top: &Ordinal) -> Ordinal {
    if rng.gen_ratio(1, 10) {
        return top.clone();
    }
    let deg = top.degree();
    let coeffs: Vec<u64> = (0..deg).map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..6) }).collect();
    Ordinal::from_coeffs(&coeffs)
}

fn random_set(rng: &mut ChaCha8Rng, top: &Ordinal, depth: u32) -> SymbolicSet {
    let deg = top.degree();
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => {
            let (a, b) = (random_ordinal(rng, top), random_ordinal(rng, top));
            SymbolicSet::interval(top, &a.clone().min(b.clone()), &a.max(b))
        }
        1 => {
            let lo = rng.gen_range(0..=deg);
            SymbolicSet::rank_window(top, lo, rng.gen_range(lo..=deg))
        }
        _ => {
            let m = rng.gen_range(1..4);
            SymbolicSet::coefficient_in(top, rng.gen_range(0..=deg), &NatSet::residue(rng.gen_range(0..m), m))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let a = random_set(rng, top, depth - 1);
    match rng.gen_range(0..4) {
        0 => a.union(&random_set(rng, top, depth - 1)).unwrap(),
        1 => a.intersection(&random_set(rng, top, depth - 1)).unwrap(),
        2 => a.complement(),
        _ => a.difference(&random_set(rng, top, depth - 1)).unwrap(),
    }
}

fn ordinal_semantics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut samples = 0;
    for deg in 1..=4u32 {
        let top = Ordinal::omega_pow(deg);
        for _ in 0..150 {
            let x = random_set(&mut rng, &top, 2);
            let dx = x.derivative();
            let cells: Vec<Cell> = (0..rng.gen_range(1..4))
                .map(|_| {
                    let (a, b) = (random_ordinal(&mut rng, &top), random_ordinal(&mut rng, &top));
                    let lo_rank = rng.gen_range(0..=deg);
                    Cell { lo: a.clone().min(b.clone()), hi: a.max(b), lo_rank, hi_rank: rng.gen_range(lo_rank..=deg) }
                })
                .collect();
            let dc = cells_to_set(&top, &cells).derivative();
            for _ in 0..4 {
                let mut alpha = random_ordinal(&mut rng, &top);
                if alpha.is_successor() && rng.gen_bool(0.7) {
                    alpha = Ordinal::from_terms(alpha.terms().iter().copied().filter(|t| t.0 > 0).collect());
                }
                ensure(dx.contains(&alpha) == x.cofinal_in(&alpha), || format!("d(X) at {alpha} on [0, {top}]"))?;
                ensure(dc.contains(&alpha) == cells_derivative_contains(&top, &cells, &alpha), || {
                    format!("cells {cells:?} at {alpha} on [0, {top}]")
                })?;
                samples += 1;
            }
        }
        let mut d = SymbolicSet::full(&top);
        for k in 0..=deg + 1 {
            ensure(d == SymbolicSet::rank_window(&top, k, u32::MAX), || format!("d^{k}(full) on [0, {top}]"))?;
            d = d.derivative();
        }
    }

    let mut refuted = Vec::new();
    for (f, valid) in common::corpus() {
        let d = f.modal_depth() as u32;
        if valid || d > 3 {
            continue;
        }
        let cm = interval_countermodel_for(&f, d)
            .map_err(|e| format!("{}: {e}", f.print()))?
            .ok_or_else(|| format!("{}: no countermodel", f.print()))?;
        ensure(cm.space_top == Ordinal::omega_pow(d), || {
            format!("{}: countermodel needs [0, {}], depth is {d}", f.print(), cm.space_top)
        })?;
        let holds = interval_model_check(&cm.space_top, &cm.valuation, &f).map_err(|e| e.to_string())?;
        ensure(!holds.contains(&cm.refuting_point), || format!("{}: holds at {}", f.print(), cm.refuting_point))?;
        refuted.push(format!("{}@{}", f.print(), cm.refuting_point));
    }

    for n in 0..=2 {
        for b in 1..=3 {
            gamma_end_validate(n, &gamma_end_candidate(n, b)).map_err(|v| format!("Γ_end n={n} b={b}: {v}"))?;
        }
    }
    Ok(format!(
        "{samples} derivative samples over [0, w^1..4] against both oracles; d^k(full) = rank >= k; \
         {} corpus countermodels confirmed on [0, w^d]; Γ_end candidate valid for n <= 2, b <= 3",
        refuted.len()
    ))
}

struct Criterion {
    id: u8,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion { id: 1, title: "decide agrees with brute force", limit: Some(Duration::from_secs(120)), run: agreement },
        Criterion { id: 2, title: "axiom regression", limit: None, run: axioms },
        Criterion { id: 3, title: "bounded morphisms", limit: Some(Duration::from_secs(60)), run: morphisms },
        Criterion { id: 4, title: "labeling conditions and mutants", limit: Some(Duration::from_secs(60)), run: dagger },
        Criterion { id: 5, title: "soundness on filter structures", limit: None, run: soundness },
        Criterion { id: 6, title: "Mitchell rank vs <>^n T", limit: None, run: mitchell_dia },
        Criterion { id: 7, title: "derivative rank = Mitchell rank", limit: None, run: rho_equals_o },
        Criterion { id: 8, title: "reduction round trip", limit: Some(Duration::from_secs(120)), run: reduction },
        Criterion { id: 9, title: "Σ fragment and descending chains", limit: None, run: sigma },
        Criterion { id: 10, title: "ordinal semantics", limit: Some(Duration::from_secs(180)), run: ordinal_semantics },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            (r, _) => r,
        };
        let budget = c.limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        match &result {
            Ok(detail) => println!("AC{:<2} PASS  {} [{elapsed:.1?}{budget}]: {detail}", c.id, c.title),
            Err(why) => {
                println!("AC{:<2} FAIL  {} [{elapsed:.1?}{budget}]: {why}", c.id, c.title);
                failed.push(c.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
