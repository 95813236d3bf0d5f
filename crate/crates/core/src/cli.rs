//! Command-line front end. `execute` returns the JSON report or an error
//! carrying the process exit code.

use crate::fusion::{pointed_category, validate as validate_fusion};
use crate::groups::{module_cat_params, omega_alpha, parse_cocycle, Cochain, FiniteGroup, GroupError};
use crate::modsph::{build_modsph, Bicat, ModsphError};
use crate::moves::MoveKind;
use crate::oracle::tv_oracle;
use crate::scalar::CycScalar;
use crate::skeleton::{dual_skeleton, Skeleton};
use crate::statesum::{moves_check, Prepared, StateSumError, SumResult};
use crate::triangulation::{Triangulation, TriangulationError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<TriangulationError> for CliError {
    fn from(e: TriangulationError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<ModsphError> for CliError {
    fn from(e: ModsphError) -> Self {
        match e {
            ModsphError::Group(g) => g.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<StateSumError> for CliError {
    fn from(e: StateSumError) -> Self {
        match e {
            StateSumError::Modsph(m) => m.into(),
            StateSumError::Skeleton(s) => CliError::Parse(s),
            other => CliError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "statesum", version, about = "Turaev-Viro and bicategorical state sums over Vec_G^ω")]
pub struct Cli {
    /// worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// write the JSON report here as well as to stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CategoryArgs {
    /// cyclic:n, product:A,B,.., table:[[..]] or heisenberg:n
    #[arg(long, default_value = "cyclic:2")]
    pub group: String,
    /// trivial, omega_alpha:n:q, or a JSON descriptor
    #[arg(long, default_value = "trivial")]
    pub cocycle: String,
    /// JSON file {"group": .., "cocycle": ..}; overrides --group/--cocycle
    #[arg(long)]
    pub category: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: Backend,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turaev-Viro invariant of a manifold
    Tv {
        #[command(flatten)]
        cat: CategoryArgs,
        /// builtin:NAME or a triangulation JSON file
        #[arg(long)]
        manifold: String,
    },
    /// Bicategorical state sum on the dual skeleton
    St {
        #[command(flatten)]
        cat: CategoryArgs,
        #[arg(long)]
        manifold: String,
        /// report the partial sum of every 3-cell labeling
        #[arg(long)]
        per_phi3: bool,
    },
    /// Recompute St along seeded random move sequences
    MovesCheck {
        #[command(flatten)]
        cat: CategoryArgs,
        #[arg(long, default_value = "builtin:s3_2tet")]
        manifold: String,
        #[arg(long, default_value_t = 100)]
        sequences: usize,
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// skip moves that would create more 3-cells than this
        #[arg(long, default_value_t = 6)]
        max_cells: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// TV of Vec^{ω_α} on (Z/n)³ against TV of the central extension
    MoritaCompare {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        q_exp: i64,
        #[arg(long, value_delimiter = ',', default_value = "builtin:s3_2tet,builtin:rp3,builtin:lens:4:1")]
        manifolds: Vec<String>,
        #[arg(long, value_enum, default_value = "exact")]
        backend: Backend,
    },
    /// Check the pointed fusion datum and the module bicategory
    Validate {
        #[command(flatten)]
        cat: CategoryArgs,
        /// random samples per bicategory check
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// list module categories and dimensions instead of validating
        #[arg(long)]
        list_modules: bool,
    },
}

fn check_backend(b: Backend) -> Result<(), CliError> {
    match b {
        Backend::Exact => Ok(()),
        Backend::Float => Err(CliError::Parse("the float backend is not available; use --backend exact".into())),
    }
}

fn load_category(c: &CategoryArgs) -> Result<(FiniteGroup, Cochain, String), CliError> {
    check_backend(c.backend)?;
    let (gs, ws) = match &c.category {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            let g = v.get("group").and_then(|x| x.as_str()).ok_or_else(|| CliError::Parse("category file needs \"group\"".into()))?;
            let w = match v.get("cocycle") {
                None => "trivial".to_string(),
                Some(Value::String(s)) => s.clone(),
                Some(other) => other.to_string(),
            };
            (g.to_string(), w)
        }
        None => (c.group.clone(), c.cocycle.clone()),
    };
    let g = FiniteGroup::parse(&gs)?;
    let w = parse_cocycle(&g, &ws)?;
    Ok((g, w, format!("{gs}|{ws}")))
}

fn bicat(g: &FiniteGroup, w: &Cochain) -> Result<Bicat, CliError> {
    Ok(build_modsph(g, w, &module_cat_params(g, w)?)?)
}

fn load_manifold(desc: &str) -> Result<(Triangulation, String), CliError> {
    let tri = Triangulation::load(desc)?;
    // key on content so edits to a file invalidate the cache
    Ok((tri.clone(), tri.to_json().to_string()))
}

fn result_json(x: &SumResult, sk: &Skeleton) -> Value {
    let (re, im) = x.value.approx();
    let c = sk.counts();
    json!({
        "invariant": x.value.to_json(),
        "value": x.value.to_string(),
        "approx": [re, im],
        "skeleton": {"v": c.v, "e": c.e, "regions": c.regions, "cells": c.cells},
        "labelings_enumerated": x.labelings,
        "backend": "exact",
    })
}

/// Result JSON memoized under STATESUM_CACHE_DIR, keyed by the inputs.
fn with_cache(key: &str, f: impl FnOnce() -> Result<Value, CliError>) -> Result<Value, CliError> {
    let Some(dir) = std::env::var_os("STATESUM_CACHE_DIR") else { return f() };
    let dir = PathBuf::from(dir);
    let name = format!("{:x}.json", Sha256::digest(key.as_bytes()));
    let path = dir.join(name);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(v) = serde_json::from_str(&text) {
            return Ok(v);
        }
    }
    let v = f()?;
    if std::fs::create_dir_all(&dir).is_ok() {
        // a failed write only costs a recomputation next time
        let _ = std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap_or_default());
    }
    Ok(v)
}

fn guard(b: &Bicat) -> Result<(), CliError> {
    let rep = b.validate(8, 0);
    if rep.is_ok() {
        Ok(())
    } else {
        Err(CliError::Validation(rep.failures.join("; ")))
    }
}

fn is_rational(x: &CycScalar) -> bool {
    x.to_rational().is_some()
}

pub fn execute(cli: &Cli) -> Result<Value, CliError> {
    match &cli.cmd {
        Command::Tv { cat, manifold } => {
            let (g, w, ck) = load_category(cat)?;
            let (tri, mk) = load_manifold(manifold)?;
            with_cache(&format!("tv|{ck}|{mk}"), || {
                let b = bicat(&g, &w)?;
                let sk = dual_skeleton(&tri);
                let r = Prepared::new(&b, &sk)?.tv()?;
                Ok(result_json(&r, &sk))
            })
        }
        Command::St { cat, manifold, per_phi3 } => {
            let (g, w, ck) = load_category(cat)?;
            let (tri, mk) = load_manifold(manifold)?;
            with_cache(&format!("st|{per_phi3}|{ck}|{mk}"), || {
                let b = bicat(&g, &w)?;
                guard(&b)?;
                let sk = dual_skeleton(&tri);
                let p = Prepared::new(&b, &sk)?;
                let r = p.st()?;
                let mut out = result_json(&r, &sk);
                if *per_phi3 {
                    let parts: Vec<Value> = p
                        .all_partial_sums()?
                        .into_iter()
                        .map(|(phi3, s)| json!({"phi3": phi3, "value": s.value.to_string(), "sum": s.value.to_json(), "labelings": s.labelings}))
                        .collect();
                    let equal = parts.windows(2).all(|w| w[0]["value"] == w[1]["value"]);
                    out["partial_sums"] = Value::Array(parts);
                    out["partial_sums_equal"] = json!(equal);
                }
                Ok(out)
            })
        }
        Command::MovesCheck { cat, manifold, sequences, length, max_cells, seed } => {
            let (g, w, _) = load_category(cat)?;
            let (tri, _) = load_manifold(manifold)?;
            let b = bicat(&g, &w)?;
            let sk = dual_skeleton(&tri);
            let rep = moves_check(&b, &sk, manifold, *sequences, *length, *max_cells, *seed, &|_, s| s)?;
            let mut per_kind = serde_json::Map::new();
            for k in MoveKind::ALL {
                let n = rep.sequences.iter().flat_map(|s| &s.moves).filter(|m| m.kind() == k).count();
                per_kind.insert(format!("{k:?}"), json!(n));
            }
            let failures: Vec<Value> = rep
                .sequences
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.failed_at.map(|k| json!({"sequence": i, "step": k, "move": format!("{:?}", s.moves[k])})))
                .collect();
            let out = json!({
                "manifold": manifold,
                "sequences": rep.sequences.len(),
                "moves": rep.sequences.iter().map(|s| s.moves.len()).sum::<usize>(),
                "per_kind": per_kind,
                "failures": failures,
                "result": if rep.passed() { "PASS" } else { "FAIL" },
            });
            if rep.passed() {
                Ok(out)
            } else {
                Err(CliError::Validation(out.to_string()))
            }
        }
        Command::MoritaCompare { n, q_exp, manifolds, backend } => {
            check_backend(*backend)?;
            let (ga, wa) = omega_alpha(*n, *q_exp)?;
            let h = FiniteGroup::parse(&format!("heisenberg:{n}"))?;
            let wh = Cochain::trivial(h.order(), 3);
            let (ba, bh) = (bicat(&ga, &wa)?, bicat(&h, &wh)?);
            let mut rows = Vec::new();
            let mut pass = true;
            for m in manifolds {
                let (tri, _) = load_manifold(m)?;
                let sk = dual_skeleton(&tri);
                let x = Prepared::new(&ba, &sk)?.tv()?.value;
                let y = Prepared::new(&bh, &sk)?.tv()?.value;
                let l = x.conductor().max(y.conductor());
                let equal = x.lift(l) == y.lift(l);
                let rational = is_rational(&x) && is_rational(&y);
                pass &= equal && rational;
                rows.push(json!({
                    "manifold": m,
                    "twisted": x.to_string(),
                    "extension": y.to_string(),
                    "extension_oracle": tv_oracle(&tri, &h).to_string(),
                    "equal": equal,
                    "rational": rational,
                }));
            }
            let out = json!({"n": n, "q_exp": q_exp, "rows": rows, "result": if pass { "PASS" } else { "FAIL" }});
            if pass {
                Ok(out)
            } else {
                Err(CliError::Validation(out.to_string()))
            }
        }
        Command::Validate { cat, samples, seed, list_modules } => {
            let (g, w, _) = load_category(cat)?;
            let b = bicat(&g, &w)?;
            if *list_modules {
                let mut out = b.to_json();
                out["modules"] = Value::Array(
                    b.cats
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            json!({
                                "index": i,
                                "subgroup": c.params.subgroup.elems,
                                "psi": {"modulus": c.params.psi.modulus, "values": c.params.psi.values},
                                "simples": c.size,
                                "dim": c.dim.to_string(),
                            })
                        })
                        .collect(),
                );
                return Ok(out);
            }
            let fr = validate_fusion(&pointed_category(&g, &w).map_err(|e| CliError::Parse(e.to_string()))?);
            let br = b.validate(*samples, *seed);
            let pass = fr.is_ok() && br.is_ok();
            let out = json!({
                "fusion": {"failures": fr.failures},
                "bicategory": br,
                "result": if pass { "PASS" } else { "FAIL" },
            });
            if pass {
                Ok(out)
            } else {
                Err(CliError::Validation(out.to_string()))
            }
        }
    }
}

/// Parse arguments, run, print; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match execute(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).unwrap_or_default();
            println!("{text}");
            if let Some(p) = &cli.output {
                if let Err(e) = std::fs::write(p, &text) {
                    eprintln!("error: {}: {e}", p.display());
                    return 4;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
