use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::format::{read_drawing, read_graph, read_ledger, write_drawing, write_graph, write_ledger};
use super::manifest::{
    drawing_file, graph_file, ledger_file, PlanRecord, RunManifest, Timings, PROFILE_FILE, TIMINGS_FILE,
};
use crate::analysis::{
    ahlfors_check, euclidean_band, monotonicity_probe, profile_gauge, pullback_band, AinftyField, ProbeRow, Raster,
    AMBIENT_DIMENSION,
};
use crate::embedding::{
    corridor_check, cumulative_corridor, draw_level, planarity_check, snowflake_stats, to_svg, BandStats,
    CorridorSpec, Drawing,
};
use crate::error::{CarpetError, Result};
use crate::graph::{build_seed, validate_graph, MetricGraph, ValidationLimits};
use crate::planner::{
    balanced_sequence, choose_parameters, h_inf_bar, sequence_dims, ConstructionPlan, ExponentSolution,
    UniformityProfile,
};
use crate::rational::{int, ratio, to_f64, Rational};
use crate::substitution::{
    apply_rule, check_admissibility, star_quotient_check, wormhole_graphs, IdentificationLedger, Rule, Step,
};

/// Band-ratio limit used by the Ahlfors and snowflake checks.
pub const BAND_LIMIT: f64 = 100.0;
/// Vertex pairs of the modulus check.
pub const MODULUS_PAIRS: usize = 50;
/// Curve cap of the modulus check.
pub const MODULUS_CAP: usize = 64;

/// Checks run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Ahlfors,
    Wormhole,
    Corridor,
    Planarity,
    Snowflake,
    Modulus,
    Axioms,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Ahlfors,
        Check::Wormhole,
        Check::Corridor,
        Check::Planarity,
        Check::Snowflake,
        Check::Modulus,
        Check::Axioms,
    ];

    /// Parses a comma-separated list; `all` selects every check.
    pub fn parse_list(s: &str) -> Result<Vec<Check>> {
        if s.trim() == "all" {
            return Ok(Check::ALL.to_vec());
        }
        let mut out: Vec<Check> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Ahlfors => "ahlfors",
            Check::Wormhole => "wormhole",
            Check::Corridor => "corridor",
            Check::Planarity => "planarity",
            Check::Snowflake => "snowflake",
            Check::Modulus => "modulus",
            Check::Axioms => "axioms",
        })
    }
}

impl FromStr for Check {
    type Err = CarpetError;

    fn from_str(s: &str) -> Result<Check> {
        Check::ALL
            .into_iter()
            .find(|c| c.to_string() == s.trim())
            .ok_or_else(|| CarpetError::InvalidParameter(format!("unknown check {s:?}")))
    }
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub target: String,
    pub measured: String,
    pub verdict: String,
}

impl CheckRow {
    fn new(check: Check, target: impl Into<String>, measured: impl Into<String>, passed: bool) -> Self {
        CheckRow {
            check: check.to_string(),
            target: target.into(),
            measured: measured.into(),
            verdict: if passed { "pass" } else { "fail" }.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

pub fn write_report<W: std::io::Write>(rows: &[CheckRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Audits one substitution step; the first failing check names the error.
pub fn verify_step(parent: &MetricGraph, step: &Step) -> Result<()> {
    let level = step.graph.level;
    let fail = |what: String| Err(CarpetError::CheckFailed(format!("level {level}: {what}")));
    let report = validate_graph(&step.graph, &ValidationLimits::default());
    if !report.is_valid() {
        return fail(format!("axioms: {} graph violations", report.violations.len()));
    }
    if step.graph.total_measure() != int(4) {
        return fail(format!("axioms: total measure {}", step.graph.total_measure()));
    }
    if !wormhole_graphs(&step.ledger).1 {
        return fail("wormhole: a wormhole graph is disconnected".to_string());
    }
    let sq = star_quotient_check(&step.ledger, parent);
    if !sq.passed() {
        return fail(format!("star quotient: {} classes fail", sq.failures().count()));
    }
    let adm = check_admissibility(parent, &step.graph, &step.ledger)?;
    if !adm.passed() {
        return fail(format!("admissibility: conditions {:?} fail", adm.failed()));
    }
    Ok(())
}

fn check_rules(rules: &[Rule]) -> Result<()> {
    for r in rules {
        r.validate()?;
    }
    Ok(())
}

/// Builds levels `0..=rules.len()`, auditing each step before writing it,
/// and writes graph, ledger, drawing, profile, manifest and timing files.
pub fn cmd_build(rules: &[Rule], construction: Option<ConstructionPlan>, out: &Path, seed: u64) -> Result<RunManifest> {
    check_rules(rules)?;
    std::fs::create_dir_all(out)?;
    let mut manifest = RunManifest {
        files: Default::default(),
        levels: rules.len() as u32,
        plan: PlanRecord { construction, rule_seq: rules.iter().map(Rule::to_string).collect() },
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut timings = Timings::default();
    let mut graph = build_seed();
    let mut drawing = Drawing::from_graph(&graph);
    let mut record = |name: String, hash: String| manifest.files.insert(name, hash);
    let graph_hash = write_graph(&out.join(graph_file(0)), &graph)?;
    record(graph_file(0), graph_hash.clone());
    record(drawing_file(0), write_drawing(&out.join(drawing_file(0)), &drawing)?);
    let mut parent_hash = graph_hash;
    for (i, &rule) in rules.iter().enumerate() {
        let k = i as u32 + 1;
        let start = Instant::now();
        let mut step = apply_rule(&graph, rule)?;
        let child_drawing = draw_level(&step.graph, &step.ledger, &drawing, rule)?;
        verify_step(&graph, &step)?;
        step.graph.provenance.parent_file_hash = Some(parent_hash);
        parent_hash = write_graph(&out.join(graph_file(k)), &step.graph)?;
        record(graph_file(k), parent_hash.clone());
        record(ledger_file(k), write_ledger(&out.join(ledger_file(k)), &step.ledger)?);
        record(drawing_file(k), write_drawing(&out.join(drawing_file(k)), &child_drawing)?);
        timings.build_ms.push(start.elapsed().as_millis() as u64);
        graph = step.graph;
        drawing = child_drawing;
    }
    let profile = UniformityProfile::from_rules(rules);
    let mut csv_bytes = Vec::new();
    profile.write_csv(&mut csv_bytes)?;
    std::fs::write(out.join(PROFILE_FILE), &csv_bytes)?;
    record(PROFILE_FILE.to_string(), super::format::sha256_hex(&csv_bytes));
    manifest.write(out)?;
    std::fs::write(out.join(TIMINGS_FILE), super::format::to_canonical_bytes(&timings)?)?;
    Ok(manifest)
}

/// A run directory loaded after its hashes were checked.
pub struct Run {
    pub manifest: RunManifest,
    pub rules: Vec<Rule>,
    pub graphs: Vec<MetricGraph>,
    /// `ledgers[k]` maps level `k + 1` onto level `k`.
    pub ledgers: Vec<IdentificationLedger>,
    pub drawings: Vec<Drawing>,
    pub profile: UniformityProfile,
}

impl Run {
    /// Loads levels `0..=top` (default: all built levels).
    pub fn load(dir: &Path, top: Option<u32>) -> Result<Run> {
        let manifest = RunManifest::load_verified(dir)?;
        let top = top.unwrap_or(manifest.levels);
        if top > manifest.levels {
            return Err(CarpetError::InvalidParameter(format!("run has {} levels, asked for {top}", manifest.levels)));
        }
        let rules = manifest.plan.rule_seq.iter().map(|r| r.parse()).collect::<Result<Vec<Rule>>>()?;
        let profile = UniformityProfile::read_csv(std::fs::File::open(dir.join(PROFILE_FILE))?)?;
        let graphs = (0..=top).map(|k| read_graph(&dir.join(graph_file(k)))).collect::<Result<Vec<_>>>()?;
        let ledgers = (1..=top).map(|k| read_ledger(&dir.join(ledger_file(k)))).collect::<Result<Vec<_>>>()?;
        let drawings = (0..=top).map(|k| read_drawing(&dir.join(drawing_file(k)))).collect::<Result<Vec<_>>>()?;
        Ok(Run { manifest, rules, graphs, ledgers, drawings, profile })
    }

    pub fn top(&self) -> usize {
        self.graphs.len() - 1
    }
}

/// Runs the selected checks on a loaded run, in parallel, with rows in a
/// fixed order.
pub fn verify_run(run: &Run, checks: &[Check], seed: u64) -> Result<Vec<CheckRow>> {
    let rows = checks.par_iter().map(|&c| run_check(run, c, seed)).collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Loads a run directory, refusing it on any hash mismatch, and verifies it.
pub fn cmd_verify(dir: &Path, checks: &[Check], level: Option<u32>, seed: u64) -> Result<Vec<CheckRow>> {
    let run = Run::load(dir, level)?;
    verify_run(&run, checks, seed)
}

fn band_row(check: Check, what: &str, band: &BandStats) -> CheckRow {
    CheckRow::new(
        check,
        format!("{what} band ratio <= {BAND_LIMIT}"),
        format!("{:.6} over {} samples", band.band_ratio, band.count),
        band.band_ratio <= BAND_LIMIT,
    )
}

fn run_check(run: &Run, check: Check, seed: u64) -> Result<Vec<CheckRow>> {
    let top = run.top();
    let rules = &run.rules[..top];
    let mut rows = Vec::new();
    match check {
        Check::Axioms => {
            for (k, g) in run.graphs.iter().enumerate() {
                let report = validate_graph(g, &ValidationLimits::default());
                let row = &run.profile.rows[k];
                let scales = g.s == row.s && g.l == row.l && g.edges().iter().all(|e| e.measure == row.h);
                let total = g.total_measure();
                rows.push(CheckRow::new(
                    check,
                    format!("level {k}: valid graph, total measure 4, scales match profile"),
                    format!("violations={} total={} scales_match={}", report.violations.len(), total, scales),
                    report.is_valid() && total == int(4) && scales,
                ));
            }
            for (k, ledger) in run.ledgers.iter().enumerate() {
                let adm = check_admissibility(&run.graphs[k], &run.graphs[k + 1], ledger)?;
                let sq = star_quotient_check(ledger, &run.graphs[k]);
                rows.push(CheckRow::new(
                    check,
                    format!("step {k}->{}: admissibility (1)-(10) and star quotients", k + 1),
                    format!("failed_conditions={:?} failed_classes={}", adm.failed(), sq.failures().count()),
                    adm.passed() && sq.passed(),
                ));
            }
        }
        Check::Wormhole => {
            for (k, ledger) in run.ledgers.iter().enumerate() {
                let (graphs, connected) = wormhole_graphs(ledger);
                rows.push(CheckRow::new(
                    check,
                    format!("step {k}->{}: all wormhole graphs connected", k + 1),
                    format!("graphs={} connected={connected}", graphs.len()),
                    connected,
                ));
            }
        }
        Check::Corridor => {
            for (k, ledger) in run.ledgers.iter().enumerate() {
                let spec = CorridorSpec::for_rule(ledger.rule);
                let r = corridor_check(&run.drawings[k], &run.drawings[k + 1], ledger, &spec);
                rows.push(CheckRow::new(
                    check,
                    format!("step {k}->{}: deviation <= {} cells", k + 1, r.limit),
                    format!("{:.6} cells, {} violations", r.max_deviation, r.violations.len()),
                    r.passed(),
                ));
            }
            let budget = ratio(1, 3);
            let r = cumulative_corridor(&run.drawings, &run.ledgers, &budget);
            let worst = r.worst.iter().map(|w| w.2).fold(0.0, f64::max);
            rows.push(CheckRow::new(
                check,
                format!("cumulative deviation <= {budget} ancestor cell"),
                format!("{worst:.6}, {} violations", r.violations.len()),
                r.passed(),
            ));
        }
        Check::Planarity => {
            for (k, d) in run.drawings.iter().enumerate() {
                let crossings = planarity_check(d);
                rows.push(CheckRow::new(
                    check,
                    format!("level {k}: no crossings"),
                    format!("{} crossings", crossings.len()),
                    crossings.is_empty(),
                ));
            }
        }
        Check::Snowflake => {
            let alpha = if rules.is_empty() { 1.0 } else { sequence_dims(rules)?.alpha };
            let min_sep = if top >= 2 { 8 } else { 1 };
            let band = snowflake_stats(&run.graphs[top], &run.drawings[top], 2000, min_sep, alpha, seed)?;
            rows.push(band_row(check, &format!("level {top} snowflake (alpha {alpha:.6})"), &band));
        }
        Check::Ahlfors => {
            let g = &run.graphs[top];
            let mut radii = vec![g.s.clone()];
            while radii.last().unwrap() * int(2) <= ratio(1, 4) {
                radii.push(radii.last().unwrap() * int(2));
            }
            let profile = &run.profile;
            let report = ahlfors_check(g, 200, &radii, |r| profile_gauge(profile, r).map(|h| to_f64(&h)), seed)?;
            rows.push(band_row(check, &format!("level {top} ball measure / h(r)"), &report.overall));
        }
        Check::Modulus => {
            let k = top.min(2);
            let q = if k == 0 { 1.0 } else { sequence_dims(&rules[..k])?.q };
            let table = monotonicity_probe(
                &run.graphs[k],
                MODULUS_PAIRS,
                &modulus_eps_grid(),
                &int(1),
                q,
                MODULUS_CAP,
                seed,
            )?;
            let monotone = table.windows(2).all(|w| w[1].min_modulus >= w[0].min_modulus * (1.0 - 1e-6));
            for row in &table {
                rows.push(CheckRow::new(
                    check,
                    format!("level {k}: min modulus at eps {} > 0", row.eps),
                    format!("{:.6e} over {} pairs", row.min_modulus, row.pairs),
                    row.min_modulus > 0.0,
                ));
            }
            rows.push(CheckRow::new(check, format!("level {k}: non-decreasing in eps"), format!("{monotone}"), monotone));
        }
    }
    Ok(rows)
}

/// Default `eps` grid of the modulus probe.
pub fn modulus_eps_grid() -> Vec<Rational> {
    vec![ratio(1, 8), ratio(1, 4), ratio(1, 2)]
}

/// SVG of one drawn level.
pub fn cmd_render(dir: &Path, level: u32) -> Result<String> {
    let manifest = RunManifest::load_verified(dir)?;
    if level > manifest.levels {
        return Err(CarpetError::InvalidParameter(format!("run has {} levels", manifest.levels)));
    }
    Ok(to_svg(&read_drawing(&dir.join(drawing_file(level)))?))
}

/// Parameters, frequencies and a balanced rule sequence for `(q, q_prime)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimsOutput {
    pub n: [u128; 3],
    pub solution: ExponentSolution,
    /// Absent when a parameter does not fit the 64-bit rule sizes.
    pub plan: Option<ConstructionPlan>,
}

pub fn cmd_dims(q: f64, q_prime: f64, length: usize) -> Result<DimsOutput> {
    let (n0, n1, n2, solution) = choose_parameters(q, q_prime)?;
    let plan = match (u64::try_from(n0), u64::try_from(n1), u64::try_from(n2)) {
        (Ok(n0), Ok(n1), Ok(n2)) => Some(ConstructionPlan {
            n0,
            n1,
            n2,
            alpha: solution.alpha,
            symbols: balanced_sequence(&solution.alpha, length)?,
        }),
        _ => None,
    };
    Ok(DimsOutput { n: [n0, n1, n2], solution, plan })
}

/// `h_inf_bar(t)` of a profile file for each `t`.
pub fn cmd_invariant(profile: &Path, ts: &[Rational]) -> Result<Vec<(Rational, Rational)>> {
    let p = UniformityProfile::read_csv(std::fs::File::open(profile)?)?;
    ts.iter().map(|t| Ok((t.clone(), h_inf_bar(&p, t)?))).collect()
}

/// Modulus monotonicity table for one level of a run.
pub fn cmd_modulus(dir: &Path, level: u32, q: f64, pairs: usize, seed: u64) -> Result<Vec<ProbeRow>> {
    let run = Run::load(dir, Some(level))?;
    monotonicity_probe(&run.graphs[level as usize], pairs, &modulus_eps_grid(), &int(1), q, MODULUS_CAP, seed)
}

/// Result of the strong-A-infinity experiment on one drawn level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AinftyOutput {
    pub beta: f64,
    pub resolution: usize,
    /// `D_omega / |x - y|` over random pixel pairs.
    pub euclidean: BandStats,
    /// `D_omega(f(x), f(y)) / d(x, y)` over random vertex pairs.
    pub pullback: BandStats,
}

/// Rasterizes a level, writes it as PGM when `pgm` is given, and measures
/// both bands. `beta` defaults to `2 (1/alpha - 1)`.
pub fn cmd_ainfty(
    dir: &Path,
    level: u32,
    beta: Option<f64>,
    resolution: usize,
    seed: u64,
    pgm: Option<&Path>,
) -> Result<AinftyOutput> {
    let run = Run::load(dir, Some(level))?;
    let k = level as usize;
    let alpha = if k == 0 { 1.0 } else { sequence_dims(&run.rules[..k])?.alpha };
    let beta = beta.unwrap_or_else(|| AinftyField::default_beta(alpha, AMBIENT_DIMENSION));
    let raster = Raster::from_drawing(&run.drawings[k], resolution)?;
    if let Some(p) = pgm {
        raster.write_pgm(p)?;
    }
    let field = AinftyField::new(raster, beta, AMBIENT_DIMENSION)?;
    Ok(AinftyOutput {
        beta,
        resolution,
        euclidean: euclidean_band(&field, 25, 20, seed)?,
        pullback: pullback_band(&run.graphs[k], &run.drawings[k], &field, 25, 20, seed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_verify_render_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = cmd_build(&[Rule::Basic], None, dir.path(), 0).unwrap();
        assert_eq!(m.files.len(), 6);
        let checks = [Check::Axioms, Check::Wormhole, Check::Corridor, Check::Planarity];
        let rows = cmd_verify(dir.path(), &checks, None, 0).unwrap();
        assert!(rows.iter().all(CheckRow::passed), "{rows:?}");
        let svg = cmd_render(dir.path(), 1).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 256);
    }

    #[test]
    fn builds_are_byte_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        cmd_build(&[Rule::C(1)], None, a.path(), 0).unwrap();
        cmd_build(&[Rule::C(1)], None, b.path(), 0).unwrap();
        for name in ["manifest.json", "level_1.graph.json", "level_1.ledger.json", "profile.csv"] {
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
    }

    #[test]
    fn tampered_file_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        cmd_build(&[], None, dir.path(), 0).unwrap();
        let path = dir.path().join(graph_file(0));
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.insert(1, b' ');
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(cmd_verify(dir.path(), &Check::ALL, None, 0), Err(CarpetError::HashMismatch(_))));
        assert!(matches!(cmd_render(dir.path(), 0), Err(CarpetError::HashMismatch(_))));
    }

    #[test]
    fn short_subdivision_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_build(&[Rule::S(8)], None, dir.path(), 0).is_err());
    }

    #[test]
    fn check_list_parsing() {
        assert_eq!(Check::parse_list("all").unwrap().len(), 7);
        assert_eq!(Check::parse_list("planarity,axioms,planarity").unwrap(), vec![Check::Planarity, Check::Axioms]);
        assert!(Check::parse_list("bogus").is_err());
    }

    #[test]
    fn dims_and_invariant() {
        let out = cmd_dims(1.2, 1.5, 32).unwrap();
        assert_eq!(out.n, [16, 6, 2]);
        assert_eq!(out.plan.unwrap().symbols.len(), 32);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        UniformityProfile::from_rules(&[Rule::Basic; 3]).write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        assert_eq!(cmd_invariant(&path, &[int(1)]).unwrap()[0].1, int(1));
    }
}
