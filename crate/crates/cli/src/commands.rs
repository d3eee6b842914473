use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sparselb::caprac::{delta_levelset_conjugate, l0_conjugate};
use sparselb::extreal::{lower_add, upper_add};
use sparselb::gso::{
    convolution_norm, dual_norm_from_point_family, dual_sup_norm, gso_lower_bound_lsq, norm_from_point_family,
    ThetaMode,
};
use sparselb::lower_bound::{dual_lower_bound_lsq, exact_sparse_lsq, DualSearchConfig};
use sparselb::sparse_norms::{gauge_norm, ksupport_norm, l0};
use sparselb::vector::{dot, norm2};
use sparselb::{ExtReal, GroupStructure, LsqInstance};

use crate::config::{Command, RunConfig, Theta};
use crate::io::{load_matrix_csv, load_point_family, load_vector_csv, write_text, GroupsFile};
use crate::report::{batch_csv, instance_digest, to_json, ReportJson};
use crate::CliError;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SPARSE_LB_THREADS";

/// Text produced by a command: the JSON document and, for batches, the
/// plot-ready CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: String,
    pub csv: Option<String>,
}

/// Runs the command and writes its output; the CSV goes next to the JSON
/// file with the same stem.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let out = execute(cfg)?;
    write_text(cfg.output.as_deref(), &out.json)?;
    if let (Some(csv), Some(path)) = (&out.csv, &cfg.output) {
        write_text(Some(&path.with_extension("csv")), csv)?;
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    let pool = thread_pool()?;
    pool.install(|| match cfg.command {
        Command::NormEval => norm_eval(cfg),
        Command::NormDualCheck => norm_dual_check(cfg),
        Command::LbLsq => lb_lsq(cfg),
        Command::LbGso => lb_gso(cfg),
        Command::ConjCaprac => conj_caprac(cfg),
        Command::ExactEnumerate => exact_enumerate(cfg),
        Command::Selftest => selftest(cfg),
    })
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn search_config(cfg: &RunConfig) -> DualSearchConfig {
    DualSearchConfig {
        starts: cfg.starts,
        iterations: cfg.iterations,
        inner_tol: cfg.tol,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn json_output(value: Value) -> Output {
    Output { json: to_json(&value), csv: None }
}

fn header(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn load_groups(path: &PathBuf) -> Result<(GroupsFile, GroupStructure), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: GroupsFile = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: invalid JSON at `{}`: {}", path.display(), e.path(), e.inner())))?;
    let gs = file.build()?;
    Ok((file, gs))
}

fn finalize(cfg: &RunConfig, mut r: ReportJson) -> Result<ReportJson, CliError> {
    if cfg.debug_bound_offset != 0.0 {
        r.dual_value += cfg.debug_bound_offset;
        r.gap = r.exact_value - r.dual_value;
    }
    r.check_bound()?;
    Ok(r)
}

fn lb_lsq(cfg: &RunConfig) -> Result<Output, CliError> {
    let k = cfg.require(&cfg.k, "k")?;
    let search = search_config(cfg);
    let name = cfg.command.name();
    if let Some(n) = cfg.random {
        let d = cfg.require(&cfg.d, "d")?;
        let p = cfg.require(&cfg.p, "p")?;
        let reports = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let inst = LsqInstance::random(d, p, k, cfg.seed.wrapping_add(i))?;
                let digest = instance_digest("lsq", inst.a(), inst.z(), k);
                let r = dual_lower_bound_lsq(&inst, &search)?;
                finalize(cfg, ReportJson::new(name, cfg.seed, digest, k, &r))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        return Ok(Output { json: to_json(&reports), csv: Some(batch_csv(&reports)?) });
    }
    let a = load_matrix_csv(&cfg.require(&cfg.matrix, "matrix")?)?;
    let z = load_vector_csv(&cfg.require(&cfg.target, "target")?)?;
    let digest = instance_digest("lsq", &a, &z, k);
    let inst = LsqInstance::new(a, z, k)?;
    let r = dual_lower_bound_lsq(&inst, &search)?;
    let report = finalize(cfg, ReportJson::new(name, cfg.seed, digest, k, &r))?;
    Ok(Output { json: to_json(&report), csv: None })
}

fn lb_gso(cfg: &RunConfig) -> Result<Output, CliError> {
    let (file, gs) = load_groups(&cfg.require(&cfg.groups, "groups")?)?;
    let a = load_matrix_csv(&cfg.require(&cfg.matrix, "matrix")?)?;
    let z = load_vector_csv(&cfg.require(&cfg.target, "target")?)?;
    let mode = match cfg.theta {
        Theta::Local => ThetaMode::LocalNorm,
        Theta::Euclidean => ThetaMode::Euclidean,
    };
    let largest = gs.groups().iter().map(|g| g.len()).max().unwrap_or(0);
    let tag = format!("gso:{}", serde_json::to_string(&file).expect("groups serialize"));
    let digest = instance_digest(&tag, &a, &z, largest);
    let r = gso_lower_bound_lsq(&gs, mode, &a, &z, &search_config(cfg))?;
    let report = finalize(cfg, ReportJson::new(cfg.command.name(), cfg.seed, digest, largest, &r))?;
    Ok(Output { json: to_json(&report), csv: None })
}

fn exact_enumerate(cfg: &RunConfig) -> Result<Output, CliError> {
    let k = cfg.require(&cfg.k, "k")?;
    let a = load_matrix_csv(&cfg.require(&cfg.matrix, "matrix")?)?;
    let z = load_vector_csv(&cfg.require(&cfg.target, "target")?)?;
    let digest = instance_digest("lsq", &a, &z, k);
    let sol = exact_sparse_lsq(&LsqInstance::new(a, z, k)?)?;
    let mut m = header(cfg);
    m.insert("instance_digest".into(), json!(digest));
    m.insert("k".into(), json!(k));
    m.insert("value".into(), json!(sol.value));
    m.insert("support".into(), json!(sol.support.one_based()));
    m.insert("x".into(), json!(sol.x));
    Ok(json_output(Value::Object(m)))
}

fn norm_eval(cfg: &RunConfig) -> Result<Output, CliError> {
    let v = load_vector_csv(&cfg.require(&cfg.vector, "vector")?)?;
    let d = v.len();
    let mut m = header(cfg);
    m.insert("l0".into(), json!(l0(&v)));
    m.insert("l2".into(), json!(norm2(&v)));
    match cfg.k {
        Some(k) => {
            m.insert("k".into(), json!(k));
            m.insert("gauge_norm".into(), json!(gauge_norm(&v, k)?));
            m.insert("ksupport_norm".into(), json!(ksupport_norm(&v, k)?));
        }
        None => {
            let gauge = (1..=d).map(|k| gauge_norm(&v, k)).collect::<sparselb::Result<Vec<_>>>()?;
            let ks = (1..=d).map(|k| ksupport_norm(&v, k)).collect::<sparselb::Result<Vec<_>>>()?;
            m.insert("gauge_norms".into(), json!(gauge));
            m.insert("ksupport_norms".into(), json!(ks));
        }
    }
    if let Some(path) = &cfg.groups {
        let (_, gs) = load_groups(path)?;
        m.insert("convolution_norm".into(), json!(convolution_norm(&gs, &v, cfg.tol)?));
        m.insert("dual_sup_norm".into(), json!(dual_sup_norm(&gs, &v)?));
    }
    if let Some(path) = &cfg.point_family {
        let pf = load_point_family(path)?;
        m.insert("point_family_norm".into(), json!(norm_from_point_family(&pf, &v)?));
        m.insert("point_family_dual_norm".into(), json!(dual_norm_from_point_family(&pf, &v)?));
    }
    Ok(json_output(Value::Object(m)))
}

fn norm_dual_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let x = load_vector_csv(&cfg.require(&cfg.vector, "vector")?)?;
    let y = load_vector_csv(&cfg.require(&cfg.dual_vector, "dual_vector")?)?;
    if x.len() != y.len() {
        return Err(CliError::Config(format!("vector has {} entries, dual vector {}", x.len(), y.len())));
    }
    let (kind, primal, dual) = if let Some(path) = &cfg.groups {
        let (_, gs) = load_groups(path)?;
        ("groups", convolution_norm(&gs, &x, cfg.tol)?, dual_sup_norm(&gs, &y)?)
    } else if let Some(path) = &cfg.point_family {
        let pf = load_point_family(path)?;
        ("point-family", norm_from_point_family(&pf, &x)?, dual_norm_from_point_family(&pf, &y)?)
    } else {
        let k = cfg.require(&cfg.k, "k")?;
        ("k-support", ksupport_norm(&x, k)?, gauge_norm(&y, k)?)
    };
    let inner = dot(&x, &y);
    let slack = primal * dual - inner;
    let holds = slack >= -cfg.tol * (1.0 + (primal * dual).abs());
    let mut m = header(cfg);
    m.insert("norm".into(), json!(kind));
    m.insert("inner_product".into(), json!(inner));
    m.insert("primal_norm".into(), json!(primal));
    m.insert("dual_norm".into(), json!(dual));
    m.insert("slack".into(), json!(slack));
    m.insert("holds".into(), json!(holds));
    if !holds {
        return Err(CliError::Numeric(format!("duality sandwich fails: <x, y> = {inner} > {primal} * {dual}")));
    }
    Ok(json_output(Value::Object(m)))
}

fn conj_caprac(cfg: &RunConfig) -> Result<Output, CliError> {
    let y = load_vector_csv(&cfg.require(&cfg.vector, "vector")?)?;
    let levels = (0..=y.len()).map(|k| delta_levelset_conjugate(&y, k)).collect::<sparselb::Result<Vec<_>>>()?;
    let mut m = header(cfg);
    m.insert("l0_conjugate".into(), json!(l0_conjugate(&y)));
    m.insert("levelset_conjugates".into(), json!(levels));
    Ok(json_output(Value::Object(m)))
}

fn selftest(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut checks: Vec<(&str, bool)> = Vec::new();
    checks.push((
        "infinite sums resolve down and up",
        lower_add(ExtReal::PosInf, ExtReal::NegInf) == ExtReal::NegInf
            && upper_add(ExtReal::PosInf, ExtReal::NegInf) == ExtReal::PosInf,
    ));
    let v = [3.0, -4.0, 1.0];
    checks.push((
        "norm reductions",
        gauge_norm(&v, 1)? == 4.0 && (ksupport_norm(&v, 1)? - 8.0).abs() < 1e-12 && (gauge_norm(&v, 3)? - 26f64.sqrt()).abs() < 1e-12,
    ));
    checks.push(("level-set conjugate", delta_levelset_conjugate(&v, 2)? == 5.0 && l0_conjugate(&[2.0, 0.0]) == 1.0));
    let gs = GroupStructure::new(
        3,
        vec![sparselb::SupportSet::new(3, vec![0, 1])?, sparselb::SupportSet::new(3, vec![1, 2])?],
        vec![1.0, 1.0],
    )?;
    checks.push(("overlapping group norm", (convolution_norm(&gs, &[3.0, 4.0, 0.0], 1e-9)? - 5.0).abs() < 1e-6));
    let inst = LsqInstance::random(4, 3, 2, cfg.seed)?;
    let search = DualSearchConfig { starts: 4, iterations: 100, seed: cfg.seed, ..Default::default() };
    let r = dual_lower_bound_lsq(&inst, &search)?;
    checks.push(("certified bound below optimum", r.dual_value <= r.exact_value + r.inner_sup_tolerance));

    let passed = checks.iter().all(|c| c.1);
    let mut m = header(cfg);
    m.insert(
        "checks".into(),
        Value::Array(checks.iter().map(|(name, ok)| json!({"name": name, "passed": ok})).collect()),
    );
    m.insert("passed".into(), json!(passed));
    if !passed {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        return Err(CliError::Numeric(format!("selftest failed: {}", failed.join(", "))));
    }
    Ok(json_output(Value::Object(m)))
}
