//! Acceptance suite: one pass/fail line per criterion, exit status 1 if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use loewner_carpet::analysis::{
    ahlfors_check, euclidean_band, modulus, modulus_p2_exact, pullback_band, AinftyField, ModulusProblem, Raster,
};
use loewner_carpet::embedding::{cumulative_corridor, planarity_check, snowflake_stats, Drawing};
use loewner_carpet::graph::{build_seed, MetricGraph, VertexType};
use loewner_carpet::io::format::{file_sha256, read_drawing, read_graph, write_drawing, write_graph};
use loewner_carpet::io::{cmd_build, RunManifest};
use loewner_carpet::planner::{
    choose_parameters, closed_form_dims, exact_rule_dims, h_inf_bar, h_inf_bar_gauge, level_scales,
    repeat_sequence, ExponentSystem, PowerLaw, UniformityProfile,
};
use loewner_carpet::rational::{int, ratio, to_f64, Rational};
use loewner_carpet::substitution::{
    apply_rule, check_admissibility, star_quotient_check, wormhole_graphs, PointLabel, Rule, Step,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RESIDUAL_TOL: f64 = 1e-9;
const DIMS_ROUND_TRIP_TOL: f64 = 1e-9;
const MODULUS_REL_TOL: f64 = 1e-6;
const POWER_LAW_TOL: f64 = 1e-9;
const BAND_LIMIT: f64 = 100.0;
const STABILITY_FACTOR: f64 = 2.0;
const AINFTY_EUCLID_LIMIT: f64 = 10.0;
const CORRIDOR_BUDGET: (i64, i64) = (1, 3);
const LIMIT_C1: Duration = Duration::from_secs(1);
const LIMIT_C2: Duration = Duration::from_secs(1);
const LIMIT_C3: Duration = Duration::from_secs(5);
const LIMIT_C4: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed(limit: Duration, start: Instant) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took <= limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{:.2?}", took))
}

fn pow(base: i64, k: u32) -> Rational {
    Rational::from_integer(BigInt::from(base).pow(k))
}

/// Basic levels 0..=3 with their steps, built once.
struct BasicTower {
    graphs: Vec<MetricGraph>,
    steps: Vec<Step>,
    build_time: Duration,
}

impl BasicTower {
    fn build() -> Result<Self, String> {
        let start = Instant::now();
        let mut graphs = vec![build_seed()];
        let mut steps = Vec::new();
        for _ in 0..3 {
            let step = apply_rule(graphs.last().unwrap(), Rule::Basic).map_err(|e| e.to_string())?;
            graphs.push(step.graph.clone());
            steps.push(step);
        }
        Ok(BasicTower { graphs, steps, build_time: start.elapsed() })
    }
}

/// 1: exact dimensions of the basic rule. The oracle reads the powers of two
/// in the per-step factors (edges x64, lengths /32, cells /16).
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (q, alpha, q_prime) = exact_rule_dims(Rule::Basic).ok_or("no exact dims")?;
    let two_power = |n: u64| n.trailing_zeros() as i64;
    let (h, s, l) = (two_power(2 * 32), two_power(32), two_power(16));
    ensure(q == ratio(h, s), format!("Q = {q}"))?;
    ensure(alpha == ratio(l, s), format!("alpha = {alpha}"))?;
    ensure(q_prime == ratio(h, l), format!("Q' = {q_prime}"))?;
    // Stated values of the explicit theorem.
    ensure((q.clone(), alpha.clone(), q_prime.clone()) == (ratio(6, 5), ratio(4, 5), ratio(3, 2)), "paper values")?;
    Ok(format!("Q = {q}, alpha = {alpha}, Q' = {q_prime}; {}", timed(LIMIT_C1, start)?))
}

/// 2: exact scales, cross-checked between the planner and the built graphs.
fn criterion_2(tower: &BasicTower) -> Outcome {
    let start = Instant::now();
    let rules = [Rule::Basic; 5];
    let profile = UniformityProfile::from_rules(&rules);
    for k in 0..=5u32 {
        let sc = level_scales(&rules, k as usize).map_err(|e| e.to_string())?;
        let (s, l, h) = (pow(32, k).recip(), pow(16, k).recip(), pow(64, k).recip());
        ensure(sc.s == s && sc.l == l && sc.h == h, format!("level {k}: {:?}", (&sc.s, &sc.l, &sc.h)))?;
        ensure(profile.gauge(&s) == Some(&h), format!("h(s_{k}) != 64^-{k}"))?;
    }
    for (k, g) in tower.graphs.iter().enumerate() {
        let row = &profile.rows[k];
        ensure(g.s == row.s && g.l == row.l, format!("graph {k} scales differ from planner"))?;
        ensure(g.edges().iter().all(|e| e.measure == row.h), format!("graph {k} edge measure differs from h_{k}"))?;
    }
    Ok(format!("k <= 5 exact, graphs 0..3 agree; {}", timed(LIMIT_C2, start)?))
}

/// Dimension formulas written out from the explicit sums over the three rules.
fn direct_dims(n: [u128; 3], a: [f64; 3]) -> (f64, f64) {
    let [n0, n1, n2] = n.map(|x| x as f64);
    let ws = 8.0 * (n2 + 2.0 * n2 * n2);
    let num = a[0] * n0.ln() + a[1] * ((96.0 * n1 + 26.0) * (2.0 * n1 + 1.0)).ln() + a[2] * ws.ln();
    let den_s = a[0] * n0.ln() + a[1] * (96.0 * n1 + 26.0).ln() + a[2] * ws.ln();
    let den_l = a[0] * n0.ln() + a[1] * (64.0 * n1).ln() + a[2] * (8.0 * n2).ln();
    (num / den_s, num / den_l)
}

/// 3: exponent solver round trip for (1.2, 1.5).
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (q, qp) = (1.2, 1.5);
    let (n0, n1, n2, sol) = choose_parameters(q, qp).map_err(|e| e.to_string())?;
    let a = sol.alpha;
    ensure(a.iter().all(|&x| x >= 0.0), format!("negative frequency {a:?}"))?;
    let (dq, dqp) = direct_dims([n0, n1, n2], a);
    let norm = (a.iter().sum::<f64>() - 1.0).abs();
    let worst = norm.max((dq - q).abs()).max((dqp - qp).abs());
    ensure(sol.residuals.iter().all(|r| r.abs() < RESIDUAL_TOL), format!("residuals {:?}", sol.residuals))?;
    ensure(worst < RESIDUAL_TOL, format!("direct residual {worst:e}"))?;
    let d = closed_form_dims(n0, n1, n2, a).map_err(|e| e.to_string())?;
    ensure(
        (d.q - q).abs() < DIMS_ROUND_TRIP_TOL && (d.q_prime - qp).abs() < DIMS_ROUND_TRIP_TOL,
        format!("closed form gives ({}, {})", d.q, d.q_prime),
    )?;
    // Sign bracket at the segment endpoints, evaluated from the direct formula.
    let (minus, plus) = ExponentSystem::new(q, qp, n0, n1, n2).endpoints();
    let f = |x: [f64; 3]| {
        let (dq, _) = direct_dims([n0, n1, n2], x);
        let den = x[0] * (n0 as f64).ln()
            + x[1] * ((96 * n1 + 26) as f64).ln()
            + x[2] * ((8 * (n2 + 2 * n2 * n2)) as f64).ln();
        (dq - q) * den
    };
    ensure(f(minus) < 0.0 && 0.0 < f(plus), format!("bracket ({}, {})", f(minus), f(plus)))?;
    Ok(format!(
        "N = ({n0}, {n1}, {n2}), alpha = ({:.6}, {:.6}, {:.6}), max residual {worst:.1e}; {}",
        a[0],
        a[1],
        a[2],
        timed(LIMIT_C3, start)?
    ))
}

/// Structural suite on a chain of steps.
fn structural_suite(graphs: &[MetricGraph], steps: &[Step]) -> Result<String, String> {
    let mut drawings = Vec::new();
    for (k, g) in graphs.iter().enumerate() {
        ensure(g.total_measure() == int(4), format!("level {k} total measure {}", g.total_measure()))?;
        let d = Drawing::from_graph(g);
        let crossings = planarity_check(&d);
        ensure(crossings.is_empty(), format!("level {k}: {} crossings", crossings.len()))?;
        drawings.push(d);
    }
    let mut classes = 0;
    for (k, step) in steps.iter().enumerate() {
        let (w, connected) = wormhole_graphs(&step.ledger);
        ensure(connected, format!("step {k}: disconnected wormhole graph among {}", w.len()))?;
        let sq = star_quotient_check(&step.ledger, &graphs[k]);
        ensure(sq.passed(), format!("step {k}: star quotient failures"))?;
        classes += sq.classes.len();
        let adm = check_admissibility(&graphs[k], &graphs[k + 1], &step.ledger).map_err(|e| e.to_string())?;
        ensure(adm.passed(), format!("step {k}: conditions {:?} fail", adm.failed()))?;
    }
    let ledgers: Vec<_> = steps.iter().map(|s| s.ledger.clone()).collect();
    let budget = ratio(CORRIDOR_BUDGET.0, CORRIDOR_BUDGET.1);
    let corridor = cumulative_corridor(&drawings, &ledgers, &budget);
    ensure(corridor.passed(), format!("{} cumulative corridor violations", corridor.violations.len()))?;
    let worst = corridor.worst.iter().map(|w| w.2).fold(0.0, f64::max);
    Ok(format!("{classes} quotient classes, worst cumulative deviation {worst:.4} l_j"))
}

/// 4: Basic levels 0 to 3.
fn criterion_4(tower: &BasicTower) -> Outcome {
    let start = Instant::now();
    let detail = structural_suite(&tower.graphs, &tower.steps)?;
    let took = start.elapsed() + tower.build_time;
    ensure(took <= LIMIT_C4, format!("took {took:?}"))?;
    Ok(format!("{} edges at level 3, {detail}; {took:.2?}", tower.graphs[3].edge_count()))
}

/// Wormhole identifications of `C_N` on the seed enumerated from the rule
/// formulas: every seed star turns right, so its in-edge plays `i_s` and its
/// out-edge `o_e`, both pairing label `2N + 1` with each `j <= 2N` at
/// `4 (4N + 1 - j)` and `4 (8N + 1 + j)` steps from the star vertex.
fn cn_seed_pairs(seed: &MetricGraph, n: u32) -> Vec<(PointLabel, PointLabel)> {
    let m = 96 * n + 26;
    let top = 2 * n + 1;
    let mut pairs = Vec::new();
    for v in 0..seed.vertex_count() {
        for e in seed.edges() {
            let position = if e.head == v {
                |t: u32, m: u32| m - t
            } else if e.tail == v {
                |t: u32, _: u32| t
            } else {
                continue;
            };
            for j in 1..top {
                for t in [4 * (4 * n + 1 - j), 4 * (8 * n + 1 + j)] {
                    let index = position(t, m);
                    let a = PointLabel { copy: top, edge: e.id as u32, index };
                    let b = PointLabel { copy: j, edge: e.id as u32, index };
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs
}

fn classes_of(pairs: &[(PointLabel, PointLabel)]) -> Vec<Vec<PointLabel>> {
    let mut classes: Vec<Vec<PointLabel>> = Vec::new();
    for (a, b) in pairs {
        let ia = classes.iter().position(|c| c.contains(a));
        let ib = classes.iter().position(|c| c.contains(b));
        match (ia, ib) {
            (None, None) => classes.push(vec![*a, *b]),
            (Some(i), None) => classes[i].push(*b),
            (None, Some(j)) => classes[j].push(*a),
            (Some(i), Some(j)) if i != j => {
                let moved = classes.remove(i.max(j));
                classes[i.min(j)].extend(moved);
            }
            _ => {}
        }
    }
    for c in classes.iter_mut() {
        c.sort();
        c.dedup();
    }
    classes.sort();
    classes
}

/// 5: one `C_1` step on the seed with an enumerated audit of its offsets.
fn criterion_5() -> Outcome {
    let seed = build_seed();
    let step = apply_rule(&seed, Rule::C(1)).map_err(|e| e.to_string())?;
    let detail = structural_suite(&[seed.clone(), step.graph.clone()], std::slice::from_ref(&step))?;
    ensure(seed.vertices().iter().all(|v| v.vtype == VertexType::B), "seed stars are not all right turns")?;
    let expected = classes_of(&cn_seed_pairs(&seed, 1));
    let mut found = step.ledger.classes_i.clone();
    for c in found.iter_mut() {
        c.sort();
    }
    found.sort();
    ensure(found == expected, format!("{} wormhole classes, expected {}", step.ledger.classes_i.len(), expected.len()))?;
    ensure(step.ledger.classes_q.is_empty(), "seed stars have degree two, so no quotient classes")?;
    let m = 122u32;
    let largest = expected.iter().flatten().map(|p| p.index.min(m - p.index)).max().unwrap();
    ensure(largest < m / 2, format!("offset {largest} reaches half an edge"))?;
    Ok(format!("{} wormhole classes match the formulas, largest offset {largest} s_1 < 61 s_1; {detail}", expected.len()))
}

/// 6: iterative 2-modulus against the exact active-set oracle.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let edges = rng.gen_range(1..=12usize);
        let lengths: Vec<Rational> = (0..edges).map(|_| ratio(rng.gen_range(1..5), rng.gen_range(1..4))).collect();
        let measures: Vec<Rational> = (0..edges).map(|_| ratio(rng.gen_range(1..5), rng.gen_range(1..4))).collect();
        let curves: Vec<Vec<usize>> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut c: Vec<usize> = (0..edges).filter(|_| rng.gen_bool(0.4)).collect();
                if c.is_empty() {
                    c.push(rng.gen_range(0..edges));
                }
                c
            })
            .collect();
        let exact = to_f64(&modulus_p2_exact(&lengths, &measures, &curves).map_err(|e| e.to_string())?);
        let problem = ModulusProblem {
            lengths: lengths.iter().map(to_f64).collect(),
            measures: measures.iter().map(to_f64).collect(),
            curves,
            p: 2.0,
        };
        let got = modulus(&problem).map_err(|e| e.to_string())?.value;
        let rel = (got - exact).abs() / exact;
        ensure(rel <= MODULUS_REL_TOL, format!("case {case}: {got} vs {exact}"))?;
        worst = worst.max(rel);
    }
    let path = ModulusProblem { lengths: vec![1.0; 5], measures: vec![1.0; 5], curves: vec![(0..5).collect()], p: 2.0 };
    let single = modulus(&path).map_err(|e| e.to_string())?.value;
    ensure((single - 0.2).abs() <= MODULUS_REL_TOL * 0.2, format!("single path {single}"))?;
    Ok(format!("100 instances, worst relative error {worst:.1e}; single path {single:.9}"))
}

fn radii_from(s: &Rational) -> Vec<Rational> {
    let mut radii = vec![s.clone()];
    while radii.last().unwrap() * int(2) <= ratio(1, 4) {
        let next = radii.last().unwrap() * int(2);
        radii.push(next);
    }
    radii
}

/// Ahlfors band with gauge `r^(6/5)` and snowflake band with exponent 4/5.
fn bands(g: &MetricGraph) -> Result<(f64, f64), String> {
    let radii = radii_from(&g.s);
    let ahl = ahlfors_check(g, 200, &radii, |r| Some(to_f64(r).powf(1.2)), 7).map_err(|e| e.to_string())?;
    let snow = snowflake_stats(g, &Drawing::from_graph(g), 2000, 8, 0.8, 7).map_err(|e| e.to_string())?;
    Ok((ahl.overall.band_ratio, snow.band_ratio))
}

/// 7: Ahlfors and snowflake bands at Basic level 3, stable from level 2.
fn criterion_7(tower: &BasicTower) -> Outcome {
    let (a2, s2) = bands(&tower.graphs[2])?;
    let (a3, s3) = bands(&tower.graphs[3])?;
    ensure(a3 <= BAND_LIMIT, format!("Ahlfors band {a3}"))?;
    ensure(s3 <= BAND_LIMIT, format!("snowflake band {s3}"))?;
    let stable = |x: f64, y: f64| x / y <= STABILITY_FACTOR && y / x <= STABILITY_FACTOR;
    ensure(stable(a2, a3), format!("Ahlfors band moved {a2} -> {a3}"))?;
    ensure(stable(s2, s3), format!("snowflake band moved {s2} -> {s3}"))?;
    Ok(format!("Ahlfors {a2:.3} -> {a3:.3}, snowflake {s2:.3} -> {s3:.3}"))
}

/// 8: the quasi-invariant on power laws, scaled profiles and repetitions.
fn criterion_8() -> Outcome {
    let law = PowerLaw { q: 1.2, c: 3.0, lo: 1e-6, hi: 1.0 };
    for t in [0.5, 0.1, 0.01] {
        let v = h_inf_bar_gauge(&law, t, 64).map_err(|e| e.to_string())?;
        ensure((v - t.powf(1.2)).abs() <= POWER_LAW_TOL, format!("t = {t}: {v}"))?;
    }
    let mixed = UniformityProfile::from_rules(&[Rule::S(16), Rule::C(1), Rule::Basic, Rule::C(2)]);
    for t in [ratio(1, 2), ratio(1, 9)] {
        let a = h_inf_bar(&mixed, &t).map_err(|e| e.to_string())?;
        let b = h_inf_bar(&mixed.scaled(&ratio(11, 7)), &t).map_err(|e| e.to_string())?;
        ensure(a == b, format!("scaling changed h_inf_bar({t}): {a} vs {b}"))?;
    }
    let block = [Rule::S(16), Rule::C(1)];
    let mut values = Vec::new();
    for n in [1, 2, 4] {
        let p = UniformityProfile::from_rules(&repeat_sequence(&block, n));
        values.push(h_inf_bar(&p, &ratio(1, 2)).map_err(|e| e.to_string())?);
    }
    ensure(values.windows(2).all(|w| w[1] <= w[0]), format!("not non-increasing: {values:?}"))?;
    let shown: Vec<String> = values.iter().map(|v| format!("{:.6}", to_f64(v))).collect();
    Ok(format!("t^Q within {POWER_LAW_TOL:e}, scaling exact, h_inf_bar(1/2) over N = 1, 2, 4: {}", shown.join(", ")))
}

/// 9: strong-A-infinity probe.
fn criterion_9(tower: &BasicTower) -> Outcome {
    let g = &tower.graphs[2];
    let drawing = Drawing::from_graph(g);
    let raster = Raster::from_drawing(&drawing, 512).map_err(|e| e.to_string())?;
    let flat = AinftyField::new(raster.clone(), 0.0, 2.0).map_err(|e| e.to_string())?;
    let euclid = euclidean_band(&flat, 25, 20, 9).map_err(|e| e.to_string())?;
    ensure(euclid.band_ratio <= AINFTY_EUCLID_LIMIT, format!("beta = 0 band {}", euclid.band_ratio))?;
    let beta = AinftyField::default_beta(0.8, 2.0);
    let field = AinftyField::new(raster, beta, 2.0).map_err(|e| e.to_string())?;
    let pull = pullback_band(g, &drawing, &field, 25, 20, 9).map_err(|e| e.to_string())?;
    ensure(pull.min > 0.0 && pull.max.is_finite(), format!("pullback band {pull:?}"))?;
    Ok(format!(
        "beta = 0 band {:.3}; beta = {beta} pullback band {:.3} (min {:.4}, max {:.4}, {} pairs)",
        euclid.band_ratio, pull.band_ratio, pull.min, pull.max, pull.count
    ))
}

fn rehash(dir: &Path, name: &str) -> Result<(), String> {
    let mut m = RunManifest::read(dir).map_err(|e| e.to_string())?;
    m.files.insert(name.to_string(), file_sha256(&dir.join(name)).map_err(|e| e.to_string())?);
    m.write(dir).map_err(|e| e.to_string())
}

/// Runs `carpet verify` and returns the exit code and report.
fn verify(dir: &Path, checks: &str) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(["verify", "--out"])
        .arg(dir)
        .args(["--checks", checks])
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn failing_rows(report: &str, check: &str) -> Vec<String> {
    report
        .lines()
        .filter(|l| l.starts_with(&format!("{check},")) && l.ends_with(",fail"))
        .map(str::to_string)
        .collect()
}

/// 10: corrupted runs fail with the check named and exit status 1.
fn criterion_10() -> Outcome {
    let fresh = || -> Result<tempfile::TempDir, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        cmd_build(&[Rule::Basic], None, dir.path(), 0).map_err(|e| e.to_string())?;
        Ok(dir)
    };
    let clean = fresh()?;
    let (code, _) = verify(clean.path(), "axioms,corridor,planarity")?;
    ensure(code == 0, format!("clean run exits {code}"))?;

    let measure = fresh()?;
    let name = "level_1.graph.json";
    let g = read_graph(&measure.path().join(name)).map_err(|e| e.to_string())?;
    let mut edges = g.edges().to_vec();
    // Copy 1 of parent edge 0 carries half its mass, copy 2 the rest.
    for e in edges.iter_mut().take(64) {
        e.measure = &e.measure * if e.id < 32 { ratio(1, 2) } else { ratio(3, 2) };
    }
    let corrupted = MetricGraph::new(g.level, g.s.clone(), g.l.clone(), g.vertices().to_vec(), edges, g.provenance.clone())
        .map_err(|e| e.to_string())?;
    write_graph(&measure.path().join(name), &corrupted).map_err(|e| e.to_string())?;
    rehash(measure.path(), name)?;
    let (code, report) = verify(measure.path(), "axioms")?;
    let rows = failing_rows(&report, "axioms");
    let named = rows.iter().filter(|r| r.contains("failed_conditions")).any(|r| {
        r.split("failed_conditions=[")
            .nth(1)
            .and_then(|rest| rest.split(']').next())
            .is_some_and(|list| list.split(", ").any(|c| c == "4" || c == "9"))
    });
    ensure(code == 1 && named, format!("measure corruption: exit {code}, rows {rows:?}"))?;

    let shifted = fresh()?;
    let name = "level_1.drawing.json";
    let mut d = read_drawing(&shifted.path().join(name)).map_err(|e| e.to_string())?;
    for p in d.points.iter_mut() {
        p[0] += 6;
    }
    write_drawing(&shifted.path().join(name), &d).map_err(|e| e.to_string())?;
    rehash(shifted.path(), name)?;
    let (code_c, report) = verify(shifted.path(), "corridor")?;
    ensure(code_c == 1 && !failing_rows(&report, "corridor").is_empty(), format!("shift: exit {code_c}"))?;

    let crossing = fresh()?;
    let mut d = read_drawing(&crossing.path().join(name)).map_err(|e| e.to_string())?;
    let (xs, ys): (Vec<i64>, Vec<i64>) = d.points.iter().map(|p| (p[0], p[1])).unzip();
    let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let y = (ys.iter().min().unwrap() + ys.iter().max().unwrap()) / 2;
    d.points.push([x0 - 1, y]);
    d.points.push([x1 + 1, y]);
    d.segments.push([d.points.len() - 2, d.points.len() - 1]);
    write_drawing(&crossing.path().join(name), &d).map_err(|e| e.to_string())?;
    rehash(crossing.path(), name)?;
    let (code_p, report) = verify(crossing.path(), "planarity")?;
    ensure(code_p == 1 && !failing_rows(&report, "planarity").is_empty(), format!("crossing: exit {code_p}"))?;
    let conditions = rows.iter().find(|r| r.contains("failed_conditions")).unwrap();
    Ok(format!("measure -> {conditions}; shift -> corridor fail; crossing -> planarity fail; exit codes 1"))
}

/// Runs every criterion, or only those numbered on the command line.
fn main() {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let tower = std::sync::OnceLock::new();
    let with_tower = |f: fn(&BasicTower) -> Outcome| match tower.get_or_init(BasicTower::build) {
        Ok(t) => f(t),
        Err(e) => Err(format!("building Basic levels failed: {e}")),
    };
    let criteria: [(u8, &str, &dyn Fn() -> Outcome); 10] = [
        (1, "closed-form dimensions of the basic rule", &criterion_1),
        (2, "scale bookkeeping", &|| with_tower(criterion_2)),
        (3, "exponent solver round trip", &criterion_3),
        (4, "structural suite, Basic levels 0-3", &|| with_tower(criterion_4)),
        (5, "structural suite and offsets, C_1 on the seed", &criterion_5),
        (6, "modulus oracle equivalence", &criterion_6),
        (7, "Ahlfors and snowflake bands", &|| with_tower(criterion_7)),
        (8, "h_inf_bar suite", &criterion_8),
        (9, "strong A-infinity probe", &|| with_tower(criterion_9)),
        (10, "negative controls", &criterion_10),
    ];
    let (mut run, mut failed) = (0, 0);
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        run += 1;
        match check() {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {run} criteria passed", run - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
