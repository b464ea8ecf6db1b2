//! Command-line front end: configuration, caching and report emission.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::borcherds_local::{
    cocycle_report, heegner_data, relation_rank, tabulated_tuple, trivial_tuple, DivisorName, SymMat2,
    DEFAULT_FLIP_BUDGET,
};
use crate::cache::{Cache, CacheStatus, GroupArtifact};
use crate::cy_pipeline::{Ambient, Census, Pipeline};
use crate::group_engine::{parse_generator_file, Subgroup, DEFAULT_CLOSURE_CAP};
use crate::model::Model;
use crate::theta_numerics::verification_report;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

pub const EA_CLASSES: usize = 165;
pub const EA_PROJECTIVE: usize = 144;
pub const CLASS_EULER_PAIRS: [(i64, i64); 40] = [
    (28, 56), (20, 40), (16, 32), (14, 28), (15, 26), (12, 16), (10, 20), (8, 16), (4, 8), (26, 50),
    (10, 8), (22, 44), (14, 26), (18, 28), (13, 20), (44, 88), (11, 16), (16, 28), (34, 68), (20, 32),
    (16, 16), (14, 20), (13, 26), (22, 40), (15, 28), (41, 82), (26, 52), (6, 8), (12, 8), (17, 32),
    (19, 38), (70, 140), (14, 16), (12, 20), (10, 16), (9, 14), (46, 92), (40, 80), (32, 64), (18, 32),
];
pub const HODGE_PAIRS: [(i64, i64); 33] = [
    (14, 0), (12, 4), (20, 0), (14, 1), (6, 2), (26, 0), (32, 0), (26, 1), (70, 0), (18, 2), (16, 8),
    (44, 0), (15, 2), (15, 1), (12, 2), (10, 2), (14, 6), (9, 2), (4, 0), (22, 2), (10, 0), (16, 0),
    (14, 4), (12, 8), (22, 0), (20, 4), (13, 0), (28, 0), (19, 0), (16, 2), (34, 0), (40, 0), (8, 0),
];
/// (order, classes, projective classes) of freely acting subgroups.
pub const FREE_CENSUS: [(usize, usize, usize); 6] = [(1, 1, 1), (2, 3, 3), (4, 9, 9), (8, 20, 13), (16, 13, 1), (32, 8, 0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AmbientArg {
    G,
    H,
}

#[derive(Debug, Parser)]
#[command(name = "nodal-cy", version, about = "Calabi-Yau quotients of the nodal quadric threefold with 96 nodes")]
pub struct RunConfig {
    #[arg(long, global = true, default_value = ".nodal-cy-cache")]
    pub cache_dir: PathBuf,
    #[arg(long, global = true, default_value_t = DEFAULT_CLOSURE_CAP)]
    pub budget_closure: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_FLIP_BUDGET)]
    pub budget_flipset: u64,
    #[arg(long, global = true, default_value_t = 32)]
    pub max_order: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, value_enum, default_value_t = AmbientArg::G)]
    pub ambient: AmbientArg,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or load the group, node and divisor tables and print the headline counts.
    BuildGroup,
    /// Report on the subgroup generated by the elements listed in a file.
    Classify {
        #[arg(long)]
        generators: PathBuf,
    },
    /// Local Borcherds cocycle tables at the standard cusp.
    BorcherdsTables,
    /// Numerical checks of the theta-constant model.
    ThetaVerify {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Census of elementary abelian 2-subgroups.
    #[command(name = "census-2elem")]
    Census2elem,
    /// Census of freely acting subgroups up to --max-order.
    CensusFree,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget_closure == 0 || self.budget_flipset == 0 || self.max_order == 0 {
            return Err(Error::Precondition("budgets must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Precondition("tolerance must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn ambient(&self) -> Ambient {
        match self.ambient {
            AmbientArg::G => Ambient::G,
            AmbientArg::H => Ambient::H,
        }
    }
}

/// Output text, exit code and diagnostics for standard error.
pub struct Outcome {
    pub output: String,
    pub code: i32,
    pub diagnostics: Vec<String>,
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct BuildSummary {
    group_order: usize,
    h_order: usize,
    nodes: usize,
    stabilizer_order: usize,
    ruling_group_order: usize,
    divisor_orbits: [usize; 3],
    content_hash: String,
    source: String,
}

enum ModelRef {
    Shared(&'static Model),
    Owned(Box<Model>),
}

impl std::ops::Deref for ModelRef {
    type Target = Model;
    fn deref(&self) -> &Model {
        match self {
            ModelRef::Shared(m) => m,
            ModelRef::Owned(m) => m,
        }
    }
}

fn model(cfg: &RunConfig) -> Result<ModelRef> {
    if cfg.budget_closure == DEFAULT_CLOSURE_CAP {
        Ok(ModelRef::Shared(Model::global()))
    } else {
        Model::build(cfg.budget_closure).map(|m| ModelRef::Owned(Box::new(m)))
    }
}

fn build_group(cfg: &RunConfig) -> Result<Outcome> {
    let cache = Cache::new(&cfg.cache_dir);
    let (artifact, status) = cache.load_or_build(|| Ok(GroupArtifact::from_model(&*model(cfg)?)))?;
    let mut diagnostics = Vec::new();
    let source = match &status {
        CacheStatus::Built => "built".to_string(),
        CacheStatus::Loaded => "cache".to_string(),
        CacheStatus::Rebuilt(reason) => {
            diagnostics.push(format!("warning: cache rebuilt: {reason}"));
            "rebuilt".to_string()
        }
    };
    let s = BuildSummary {
        group_order: artifact.group_order,
        h_order: artifact.h_order,
        nodes: artifact.node_count,
        stabilizer_order: artifact.stabilizer_order,
        ruling_group_order: artifact.ruling_group_order,
        divisor_orbits: artifact.divisor_orbits,
        content_hash: artifact.content_hash(),
        source,
    };
    let ok = (s.group_order, s.h_order, s.nodes, s.stabilizer_order, s.ruling_group_order, s.divisor_orbits)
        == (24576, 12288, 96, 256, 128, [48, 12, 128]);
    let output = match cfg.format {
        Format::Json => json(&s),
        Format::Csv => format!(
            "group_order,h_order,nodes,stabilizer_order,ruling_group_order,d1,d2,d3,content_hash\n{},{},{},{},{},{},{},{},{}\n",
            s.group_order, s.h_order, s.nodes, s.stabilizer_order, s.ruling_group_order,
            s.divisor_orbits[0], s.divisor_orbits[1], s.divisor_orbits[2], s.content_hash
        ),
    };
    Ok(Outcome { output, code: if ok { EXIT_OK } else { EXIT_INCONSISTENT }, diagnostics })
}

fn classify(cfg: &RunConfig, path: &PathBuf) -> Result<Outcome> {
    let text = std::fs::read_to_string(path)?;
    let matrices = parse_generator_file(&text)?;
    let m = model(cfg)?;
    let mut ids = Vec::new();
    for mat in &matrices {
        let (e, _) = mat.to_element()?;
        let id = m.group.require_id(&e)?;
        if !m.h.contains(id) {
            return Err(Error::NotInGroup(format!("{} is not in the index-two subgroup", e.notation())));
        }
        ids.push(id);
    }
    let sub = Subgroup::generate(&m.group, &ids);
    let pipeline = Pipeline::new(&m, cfg.ambient())?;
    let r = pipeline.report(&sub)?;
    let output = match cfg.format {
        Format::Json => json(&r),
        Format::Csv => {
            let opt = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
            format!(
                "order,free,weak_cy,projective,h11,h12,e\n{},{},{},{},{},{},{}\n",
                r.order, r.acts_freely, r.weak_cy, r.projective, opt(r.h11), opt(r.h12), opt(r.euler)
            )
        }
    };
    let code = if r.weak_cy && r.projective { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome { output, code, diagnostics: Vec::new() })
}

#[derive(Serialize)]
struct BorcherdsOutput<T: Serialize> {
    tables: T,
    relation_rank: usize,
    relations: Vec<Vec<String>>,
}

fn borcherds(cfg: &RunConfig) -> Result<Outcome> {
    let tables = cocycle_report(cfg.budget_flipset)?;
    let data = heegner_data();
    let rows = DivisorName::MINUS
        .iter()
        .map(|n| tabulated_tuple(&data[n], cfg.budget_flipset))
        .collect::<Result<Vec<_>>>()?;
    let rel = relation_rank(&rows, &[trivial_tuple(&SymMat2::e11()), trivial_tuple(&SymMat2::e22())]);
    let out = BorcherdsOutput {
        tables,
        relation_rank: rel.rank,
        relations: rel.relations.iter().map(|r| r.iter().map(crate::scalars::rat_to_string).collect()).collect(),
    };
    let output = match cfg.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut s = String::from("divisor,generator,h00,h01,h10,h11,C_turns\n");
            for (d, row) in &out.tables {
                for (g, e) in row {
                    let h = e.eight_h;
                    s.push_str(&format!("{d},{g},{},{},{},{},{}\n", h[0], h[1], h[2], h[3], e.c_turns));
                }
            }
            s
        }
    };
    Ok(Outcome { output, code: if rel.rank == 1 { EXIT_OK } else { EXIT_INCONSISTENT }, diagnostics: Vec::new() })
}

fn theta(cfg: &RunConfig, samples: usize, seed: u64) -> Result<Outcome> {
    let records = verification_report(seed, samples, cfg.tol)?;
    let failed = records.iter().filter(|r| !r.pass).count();
    let output = match cfg.format {
        Format::Json => json(&records),
        Format::Csv => {
            let mut s = String::from("check,residual,tol,pass\n");
            for r in &records {
                s.push_str(&format!("{},{:e},{:e},{}\n", r.check, r.residual, r.tol, r.pass));
            }
            s
        }
    };
    let diagnostics = if failed > 0 { vec![format!("{failed} theta checks failed")] } else { Vec::new() };
    Ok(Outcome { output, code: if failed == 0 { EXIT_OK } else { EXIT_INCONSISTENT }, diagnostics })
}

#[derive(Serialize)]
struct CensusOutput<'a> {
    classes: usize,
    projective: usize,
    class_euler_pairs: Vec<(i64, i64)>,
    hodge_pairs: Vec<(i64, i64)>,
    by_order: Vec<(usize, usize, usize)>,
    reports: &'a Census,
}

fn census_output(cfg: &RunConfig, c: &Census) -> String {
    match cfg.format {
        Format::Csv => c.to_csv(),
        Format::Json => json(&CensusOutput {
            classes: c.reports.len(),
            projective: c.projective_count(),
            class_euler_pairs: c.class_euler_pairs().into_iter().collect(),
            hodge_pairs: c.hodge_pairs().into_iter().collect(),
            by_order: c.by_order().into_iter().map(|(o, (n, p))| (o, n, p)).collect(),
            reports: c,
        }),
    }
}

/// Mismatches between an elementary abelian census and the printed counts.
pub fn check_elementary_abelian(c: &Census) -> Vec<String> {
    let mut bad = Vec::new();
    if c.reports.len() != EA_CLASSES {
        bad.push(format!("{} classes, expected {EA_CLASSES}", c.reports.len()));
    }
    if c.projective_count() != EA_PROJECTIVE {
        bad.push(format!("{} projective, expected {EA_PROJECTIVE}", c.projective_count()));
    }
    if c.class_euler_pairs() != CLASS_EULER_PAIRS.into_iter().collect::<BTreeSet<_>>() {
        bad.push("(cl, e) pair set differs from the printed list".into());
    }
    if c.hodge_pairs() != HODGE_PAIRS.into_iter().collect::<BTreeSet<_>>() {
        bad.push("Hodge pair set differs from the printed list".into());
    }
    bad
}

/// Mismatches between a free census up to `max_order` and the printed counts.
pub fn check_free(c: &Census, max_order: usize) -> Vec<String> {
    let by = c.by_order();
    let mut bad = Vec::new();
    for (order, n, p) in FREE_CENSUS.iter().copied().filter(|e| e.0 <= max_order) {
        let got = by.get(&order).copied().unwrap_or((0, 0));
        if got != (n, p) {
            bad.push(format!("order {order}: {got:?} (classes, projective), expected {:?}", (n, p)));
        }
    }
    bad
}

fn census_2elem(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let c = Pipeline::new(&m, cfg.ambient())?.elementary_abelian_census(cfg.budget_closure)?;
    let bad = check_elementary_abelian(&c);
    Ok(Outcome {
        output: census_output(cfg, &c),
        code: if bad.is_empty() { EXIT_OK } else { EXIT_INCONSISTENT },
        diagnostics: bad,
    })
}

fn census_free(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.max_order > 32 {
        return Err(Error::Precondition("the free census is bounded by order 32".into()));
    }
    let m = model(cfg)?;
    let c = Pipeline::new(&m, cfg.ambient())?.free_census(cfg.max_order, cfg.budget_closure)?;
    let bad = check_free(&c, cfg.max_order);
    Ok(Outcome {
        output: census_output(cfg, &c),
        code: if bad.is_empty() { EXIT_OK } else { EXIT_INCONSISTENT },
        diagnostics: bad,
    })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match &cfg.command {
        Command::BuildGroup => build_group(cfg),
        Command::Classify { generators } => classify(cfg, generators),
        Command::BorcherdsTables => borcherds(cfg),
        Command::ThetaVerify { samples, seed } => theta(cfg, *samples, *seed),
        Command::Census2elem => census_2elem(cfg),
        Command::CensusFree => census_free(cfg),
    }
}

/// Runs a parsed configuration, writing output and diagnostics; returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(outcome) => {
            for d in &outcome.diagnostics {
                eprintln!("{d}");
            }
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, &outcome.output).map_err(|e| e.to_string()),
                None => {
                    print!("{}", outcome.output);
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INCONSISTENT
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INCONSISTENT
        }
    }
}
