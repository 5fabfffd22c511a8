//! Command-line front end. Every successful command prints one JSON document
//! tagged with the report schema; domain errors print `{error, detail}` and
//! exit 1, usage errors exit 2.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::gf::field_of_order;
use crate::groups::{dickson_table, set_closure_cap, Ambient};
use crate::kmaction::{apply_word, zp_sweep, EdgeLabel, KMParams, KMWord, PhiMode};
use crate::lattice::{
    build_standard_lattice, classify, covering_check, edge_orbit_layers, lubotzky_check, min_covolume,
    ClassificationInput, EdgeOfGroups, Flags, LatticeKind, Levi,
};
use crate::laurent::LaurentPoly;
use crate::par::Exec;
use crate::serretree::{
    conjugation_identity_holds, dihedral_obstruction_search_with, involution_families, neighbors, vertex_distance,
    InvolutionRegion, Mat2, Vertex,
};
use crate::REPORT_SCHEMA;

#[derive(Parser, Debug)]
#[command(name = "kmlat", version, about = "Edge-transitive lattices on the Bruhat-Tits tree of SL2 and rank-2 Kac-Moody groups")]
struct Cli {
    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pretty-print with this indent; 0 prints compact JSON.
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
    /// Cap on the size of any generated group.
    #[arg(long, global = true)]
    max_elements: Option<usize>,
    /// Run sweeps on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Edge-transitive lattice types for the given group data.
    Classify(ClassifyArgs),
    /// Minimal covolume and delta0 over the non-sporadic rows.
    MinCovolume(ClassifyArgs),
    /// Subgroup table of SL2, PSL2 or PGL2 over F_q.
    Dickson {
        #[arg(long)]
        q: u32,
        #[arg(long, value_enum, default_value = "sl2")]
        ambient: AmbientArg,
    },
    /// Build a standard vertex-group pair and check it on the tree.
    Verify {
        #[arg(long)]
        q: u32,
        /// cyclic_p2, torus_normalizer or exceptional(TYPE), TYPE one of SL2(3), 2S4, SL2(5).
        #[arg(long)]
        kind: String,
        /// Word length for the edge-orbit growth check.
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// Image of an edge under a root-group word.
    KmAct {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long)]
        q: u32,
        /// e.g. "x1:1,x2d1:2"; the rightmost letter acts first.
        #[arg(long)]
        word: String,
        /// "base", "L:0,2,1" or "R:1".
        #[arg(long)]
        edge: String,
        #[arg(long, value_enum, default_value = "identity")]
        mode: ModeArg,
    },
    /// Sweep alternating words and compare z^p with the coefficient sums.
    ZpTest {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        pairs: usize,
    },
    /// Search for involution triples forbidden in a dihedral vertex group.
    DihedralSearch {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        window: u32,
        /// Random checks of the conjugation identity.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Distances and neighbours in the tree; matrices as "a,b;c,d".
    Tree {
        #[arg(long)]
        q: u32,
        #[arg(long, num_args = 2, value_names = ["M1", "M2"])]
        distance: Option<Vec<String>>,
        #[arg(long, value_name = "M")]
        neighbors: Option<String>,
    },
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, value_enum)]
    levi: LeviArg,
    /// |Z(G)|.
    #[arg(long)]
    z: u64,
    #[arg(long)]
    zmi_in_zg: Option<bool>,
    #[arg(long)]
    qi_in_zg: Option<bool>,
    #[arg(long)]
    qi0_in_zg: Option<bool>,
    #[arg(long)]
    qi0_nontrivial: Option<bool>,
}

impl ClassifyArgs {
    fn input(&self) -> ClassificationInput {
        ClassificationInput {
            p: self.p,
            q: self.q,
            m: self.m,
            levi: match self.levi {
                LeviArg::Psl => Levi::Psl,
                LeviArg::Pgl => Levi::Pgl,
            },
            z_order: self.z,
            flags: Flags {
                zmi_in_zg: self.zmi_in_zg,
                qi_in_zg: self.qi_in_zg,
                qi0_in_zg: self.qi0_in_zg,
                qi0_nontrivial: self.qi0_nontrivial,
            },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LeviArg {
    Psl,
    Pgl,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AmbientArg {
    Sl2,
    Psl2,
    Pgl2,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Identity,
    Twisted,
}

struct Failure {
    kind: String,
    detail: String,
}

impl<E: std::error::Error + std::fmt::Debug> From<E> for Failure {
    fn from(e: E) -> Self {
        let dbg = format!("{e:?}");
        let kind = dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
        Failure { kind, detail: e.to_string() }
    }
}

fn fail(kind: &str, detail: impl Into<String>) -> Failure {
    Failure { kind: kind.into(), detail: detail.into() }
}

fn with_schema<T: Serialize>(body: T) -> Value {
    let mut v = serde_json::to_value(body).expect("serializable report");
    match v.as_object_mut() {
        Some(obj) => {
            let mut out = serde_json::Map::new();
            out.insert("schema".into(), json!(REPORT_SCHEMA));
            out.extend(std::mem::take(obj));
            Value::Object(out)
        }
        None => json!({ "schema": REPORT_SCHEMA, "result": v }),
    }
}

fn render(v: &Value, indent: usize) -> String {
    if indent == 0 {
        return v.to_string();
    }
    let pad = vec![b' '; indent];
    let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    v.serialize(&mut ser).expect("json");
    String::from_utf8(buf).expect("utf-8")
}

fn dispatch(cli: &Cli) -> Result<Value, Failure> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match &cli.cmd {
        Command::Classify(a) => {
            let input = a.input();
            let rows = classify(&input)?;
            Ok(with_schema(json!({ "input": input, "rows": rows })))
        }
        Command::MinCovolume(a) => Ok(with_schema(min_covolume(&a.input())?)),
        Command::Dickson { q, ambient } => {
            let f = field_of_order(*q)?;
            let amb = match ambient {
                AmbientArg::Sl2 => Ambient::Sl2,
                AmbientArg::Psl2 => Ambient::Psl2,
                AmbientArg::Pgl2 => Ambient::Pgl2,
            };
            Ok(with_schema(json!({ "q": q, "ambient": amb, "rows": dickson_table(f, amb) })))
        }
        Command::Verify { q, kind, radius } => {
            let f = field_of_order(*q)?;
            let k = LatticeKind::parse(kind).ok_or_else(|| fail("UnknownKind", format!("unknown kind {kind:?}")))?;
            let l = build_standard_lattice(f, k)?;
            let report = lubotzky_check(&l.a1, &l.a2, &l.base)?;
            let eog = EdgeOfGroups::inclusion(l.a1.clone(), l.a2.clone());
            let id = Mat2::identity(f);
            let covering = covering_check(&eog, |g| g.clone(), |g| g.clone(), &id, &id)?;
            let layers = if report.pass { Some(edge_orbit_layers(&l.a1, &l.a2, &l.base, *radius)?) } else { None };
            let mut v = with_schema(&report);
            let obj = v.as_object_mut().unwrap();
            obj.insert("kind".into(), json!(k.to_string()));
            obj.insert("covering".into(), json!(covering));
            obj.insert("cover_layers".into(), json!(layers));
            Ok(v)
        }
        Command::KmAct { m, q, word, edge, mode } => {
            let f = field_of_order(*q)?;
            let params = KMParams::new(*m, f)?;
            let w = KMWord::parse(f, word)?;
            let e = EdgeLabel::parse(f, edge)?;
            let mode = match mode {
                ModeArg::Identity => PhiMode::Identity,
                ModeArg::Twisted => PhiMode::Twisted,
            };
            let image = apply_word(&params, &w, &e, mode)?;
            Ok(with_schema(json!({ "word": w.to_string(), "edge": e.to_string(), "mode": mode, "image": image.to_string() })))
        }
        Command::ZpTest { m, q, pairs } => {
            let f = field_of_order(*q)?;
            let params = KMParams::new(*m, f)?;
            Ok(with_schema(zp_sweep(exec, &params, *pairs)?))
        }
        Command::DihedralSearch { q, window, samples } => {
            let f = field_of_order(*q)?;
            let report = dihedral_obstruction_search_with(exec, f, *window)?;
            let mut gammas = involution_families(f, InvolutionRegion::P1MinusB, *window)?;
            gammas.extend(involution_families(f, InvolutionRegion::P2MinusB, *window)?);
            gammas.retain(|g| g.a == g.d);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let w = *window as i32;
            let mut verified = 0;
            for _ in 0..*samples {
                if gammas.is_empty() {
                    break;
                }
                let g = &gammas[rng.gen_range(0..gammas.len())];
                let terms: Vec<_> = (-w..=w).map(|d| (d, f.elem(rng.gen_range(0..f.q())))).collect();
                let b = LaurentPoly::from_terms(f, &terms)?;
                if !conjugation_identity_holds(g, &b)? {
                    return Err(fail("IdentityFailed", format!("{g} with b = {b}")));
                }
                verified += 1;
            }
            let mut v = with_schema(&report);
            let obj = v.as_object_mut().unwrap();
            obj.insert("violation_count".into(), json!(report.violations.len()));
            obj.insert("identity_samples".into(), json!(verified));
            obj.insert("seed".into(), json!(cli.seed));
            Ok(v)
        }
        Command::Tree { q, distance, neighbors: nb } => {
            let f = field_of_order(*q)?;
            let vertex = |s: &str| -> Result<Vertex, Failure> { Ok(Vertex::new(Mat2::parse(f, s)?)?) };
            match (distance, nb) {
                (Some(pair), None) => {
                    let d = vertex_distance(&vertex(&pair[0])?, &vertex(&pair[1])?)?;
                    Ok(with_schema(json!({ "distance": d })))
                }
                (None, Some(m)) => {
                    let ns = neighbors(&vertex(m)?)?;
                    Ok(with_schema(json!({ "vertex": m, "neighbors": ns })))
                }
                _ => Err(fail("Usage", "give exactly one of --distance M1 M2 or --neighbors M")),
            }
        }
    }
}

/// Parses `argv` (program name first), writes the report to `out`, returns the exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Some(cap) = cli.max_elements {
        set_closure_cap(cap);
    }
    let (value, code) = match dispatch(&cli) {
        Ok(v) => (v, 0),
        Err(f) => (json!({ "schema": REPORT_SCHEMA, "error": f.kind, "detail": f.detail }), 1),
    };
    let _ = writeln!(out, "{}", render(&value, cli.json_indent));
    code
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}
