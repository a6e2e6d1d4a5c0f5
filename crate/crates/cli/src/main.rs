use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commsq::catalog::{self, CATALOG_NAMES};
use commsq::connection::{verify, Connection, VerificationReport, VERIFY_TOL};
use commsq::factorization::{enumerate_factorizations, raw_count, screen_intermediate};
use commsq::fourstar::{family_connection, family_point, fourstar_constants, index_table, UNITARY_TOL};
use commsq::fusion::{bimodule_by_spec, fusion_graph_action, fusion_graph_map, SearchOptions, Triple};
use commsq::graph::{BipartiteGraph, SPECTRAL_TOL};
use commsq::{spectral, Error};

#[derive(Parser)]
#[command(name = "commsq", version, about = "Commuting squares, bi-unitary connections and fusion bimodules")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a catalog connection or a connection JSON file.
    Verify {
        target: String,
        /// Residual tolerance (default 1e-10, or COMMSQ_TOL).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Norms of the catalog graphs against their closed forms.
    Norms,
    /// Enumerate factorizations `G = HK` of a graph's adjacency matrix.
    Factorize {
        /// Catalog name, `star3333`, `star:3,3,3,3` or a graph JSON file.
        #[arg(long)]
        graph: String,
        /// Keep only factorizations with `||H||^2` equal to this value.
        #[arg(long)]
        target_norm_sq: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also report the number of labeled factorizations.
        #[arg(long)]
        raw_count: bool,
    },
    /// A member of the four-star family, or the index table.
    #[command(args_conflicts_with_subcommands = true)]
    Fourstar {
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        /// Write the full connection JSON here.
        #[arg(long)]
        export: Option<PathBuf>,
        #[command(subcommand)]
        table: Option<FourstarCommand>,
    },
    /// Multiplication maps on a triple of fusion bimodules.
    Multmaps {
        /// Three bimodules: JSON files or `regular:<ring>` (Z2, Z3, fib, su2_3, ...).
        #[arg(long, num_args = 3, value_names = ["K", "L", "M"])]
        triple: Vec<String>,
        /// Skip the pairing condition through the right ring.
        #[arg(long)]
        skip_c_prime: bool,
        /// Also pair against `eta_j2 etabar_j1`, with the eta indices swapped.
        #[arg(long)]
        literal_d: bool,
    },
    /// Fusion graph of a generator acting on a module or through a map.
    Fusiongraph {
        /// Bimodule whose left action is used.
        #[arg(long, conflicts_with_all = ["triple", "map"])]
        module: Option<String>,
        /// Triple whose multiplication map is used.
        #[arg(long, num_args = 3, value_names = ["K", "L", "M"], requires = "map")]
        triple: Vec<String>,
        /// Index of the map in `multmaps` output for the triple.
        #[arg(long)]
        map: Option<usize>,
        /// Skip the pairing condition through the right ring.
        #[arg(long)]
        skip_c_prime: bool,
        /// Generator label.
        #[arg(long)]
        x: String,
    },
}

#[derive(Subcommand)]
enum FourstarCommand {
    /// Index of `S(i,i,j,j)` for `i <= j <= max`.
    Table {
        #[arg(long, default_value_t = 4)]
        max: usize,
    },
}

enum Failure {
    Input(String),
    Result(Output),
}

struct Output {
    json: Value,
    text: String,
    dot: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// 17 significant digits, as a string.
fn num(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

fn default_tol() -> Result<f64, Failure> {
    match std::env::var("COMMSQ_TOL") {
        Ok(s) => s
            .parse::<f64>()
            .ok()
            .filter(|t| *t > 0.0)
            .ok_or_else(|| Failure::Input(format!("COMMSQ_TOL={s} is not a positive number"))),
        Err(_) => Ok(VERIFY_TOL),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn report_json(name: &str, r: &VerificationReport) -> Value {
    let worst = r.worst_block().map(|b| json!({"name": b.name, "size": b.size, "residual": num(b.residual)}));
    json!({
        "target": name,
        "passed": r.passed(),
        "nondegenerate": r.nondegenerate,
        "tolerance": num(r.tolerance),
        "max_unitarity_residual_u": num(r.max_unitarity_residual_u),
        "max_unitarity_residual_v": num(r.max_unitarity_residual_v),
        "bi_dual_residual": num(r.bi_dual_residual),
        "blocks": r.blocks.len(),
        "worst_block": worst,
    })
}

fn cmd_verify(target: &str, tol: Option<f64>) -> Result<Output, Failure> {
    let tol = match tol {
        Some(t) => t,
        None => default_tol()?,
    };
    let (conn, identities) = if CATALOG_NAMES.contains(&target) {
        let e = catalog::by_name(target)?;
        (e.connection, Some(e.identities))
    } else {
        (Connection::from_json(&read_json(Path::new(target))?)?, None)
    };
    let r = verify(&conn, tol);
    let mut json = report_json(target, &r);
    if let Some(ids) = &identities {
        json["identities"] = ids
            .iter()
            .map(|i| json!({"name": i.name, "value": num(i.value), "expected": num(i.expected), "residual": num(i.residual)}))
            .collect();
    }
    let text = format!(
        "{target}: {} (u {:.3e}, v {:.3e}, bi-dual {:.3e}, nondegenerate {}, tol {tol:e})\n",
        if r.passed() { "PASS" } else { "FAIL" },
        r.max_unitarity_residual_u,
        r.max_unitarity_residual_v,
        r.bi_dual_residual,
        r.nondegenerate
    );
    let out = Output { json, text, dot: None };
    if r.passed() {
        Ok(out)
    } else {
        Err(Failure::Result(out))
    }
}

fn cmd_norms() -> Result<Output, Failure> {
    let mut rows = Vec::new();
    let mut text = String::new();
    for name in CATALOG_NAMES {
        let g = catalog::shape_by_name(name)?.g_graph()?;
        let value = spectral(&g, SPECTRAL_TOL)?.index();
        let expected = catalog::stated_norm_sq(name)?;
        let listed = catalog::index_list()
            .into_iter()
            .find(|(_, v)| (v - value).abs() < 1e-4)
            .map(|(f, _)| f);
        rows.push(json!({
            "graph": name,
            "norm_sq": num(value),
            "closed_form": num(expected),
            "residual": num((value - expected).abs()),
            "listed_as": listed,
        }));
        text.push_str(&format!(
            "{name:<13} {value:.12} closed form {expected:.12} residual {:.1e}\n",
            (value - expected).abs()
        ));
    }
    Ok(Output { json: Value::Array(rows), text, dot: None })
}

fn load_graph(spec: &str) -> Result<BipartiteGraph, Failure> {
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(BipartiteGraph::from_json(&read_json(path)?)?);
    }
    Ok(catalog::graph_by_name(spec)?)
}

fn cmd_factorize(graph: &str, target: Option<f64>, tol: f64, raw: bool) -> Result<Output, Failure> {
    let g = load_graph(graph)?;
    let fs = match target {
        Some(t) => screen_intermediate(&g.adjacency, t, tol)?,
        None => enumerate_factorizations(&g.adjacency)?,
    };
    let mut json = json!({
        "graph": graph,
        "count": fs.len(),
        "factorizations": fs.iter().map(|f| {
            let mut v = f.to_json();
            v["H_norm_sq"] = num(v["H_norm_sq"].as_f64().unwrap_or(f64::NAN));
            v
        }).collect::<Vec<_>>(),
    });
    if let Some(t) = target {
        json["target_norm_sq"] = num(t);
        json["tol"] = num(tol);
    }
    let mut text = format!("{graph}: {} factorizations", fs.len());
    if raw {
        let rc = raw_count(&fs);
        json["raw_count"] = Value::String(rc.to_string());
        text.push_str(&format!(" ({rc} labeled)"));
    }
    text.push('\n');
    let out = Output { json, text, dot: None };
    if fs.is_empty() {
        Err(Failure::Result(out))
    } else {
        Ok(out)
    }
}

fn cmd_fourstar(i: usize, j: usize, s: f64, export: Option<&Path>) -> Result<Output, Failure> {
    let c = fourstar_constants(i, j)?;
    let p = family_point(&c, s)?;
    let conn = family_connection(i, j, s)?;
    let r = verify(&conn, default_tol()?);
    let block_res = commsq::connection::unitarity_residual(&p.block);
    if let Some(path) = export {
        let text = serde_json::to_string_pretty(&conn.to_json()).map_err(|e| Failure::Input(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let block: Vec<Vec<Value>> = (0..4)
        .map(|a| (0..4).map(|b| json!([num(p.block[(a, b)].re), num(p.block[(a, b)].im)])).collect())
        .collect();
    let json = json!({
        "i": i,
        "j": j,
        "s": num(s),
        "t": num(p.t),
        "norm_sq": num(c.norm_sq()),
        "constants": {
            "alpha1": num(c.alpha1), "alpha2": num(c.alpha2), "alpha3": num(c.alpha3),
            "beta": num(c.beta), "xi": num(c.xi),
        },
        "central_block": block,
        "unitarity_residual": num(block_res),
        "verification": report_json(&format!("fourstar({i},{j},{s})"), &r),
    });
    let text = format!(
        "S({i},{i},{j},{j}) s={s} t={:.12} central block residual {block_res:.3e}, connection {}\n",
        p.t,
        if r.passed() { "PASS" } else { "FAIL" }
    );
    let out = Output { json, text, dot: None };
    if r.passed() && block_res <= UNITARY_TOL {
        Ok(out)
    } else {
        Err(Failure::Result(out))
    }
}

fn cmd_table(max: usize) -> Result<Output, Failure> {
    let cells = index_table(max, max)?;
    let mut text = String::new();
    let json = cells
        .iter()
        .map(|c| {
            text.push_str(&format!("S({0},{0},{1},{1}) {2:.9}\n", c.i, c.j, c.norm_sq));
            json!({
                "i": c.i.to_string(),
                "j": c.j.to_string(),
                "norm_sq": num(c.norm_sq),
                "truncation_estimate": num(c.truncation_estimate),
            })
        })
        .collect();
    Ok(Output { json, text, dot: None })
}

fn load_triple(specs: &[String]) -> Result<Triple, Failure> {
    let [k, l, m] = specs else {
        return Err(Failure::Input("--triple needs three bimodules".into()));
    };
    Ok(Triple::new(bimodule_by_spec(k)?, bimodule_by_spec(l)?, bimodule_by_spec(m)?)?)
}

fn cmd_multmaps(specs: &[String], opts: SearchOptions) -> Result<Output, Failure> {
    let t = load_triple(specs)?;
    let maps = t.find_multiplication_maps(opts);
    let classes = t.classes_up_to_automorphism(&maps);
    let json = json!({
        "triple": specs,
        "skip_c_prime": opts.skip_c_prime,
        "literal_condition_d": opts.literal_condition_d,
        "count": maps.len(),
        "classes_up_to_automorphism": classes.len(),
        "class_representatives": classes,
        "maps": maps.iter().map(|m| m.to_json(&t)).collect::<Vec<_>>(),
    });
    let text = format!("{} maps, {} up to automorphisms of M\n", maps.len(), classes.len());
    let out = Output { json, text, dot: None };
    if maps.is_empty() {
        Err(Failure::Result(out))
    } else {
        Ok(out)
    }
}

fn graph_output(g: BipartiteGraph) -> Output {
    let text = format!("{}", g.adjacency);
    Output { json: g.to_json(), dot: Some(g.to_dot()), text }
}

fn cmd_fusiongraph(
    module: Option<&str>,
    triple: &[String],
    map: Option<usize>,
    skip_c_prime: bool,
    x: &str,
) -> Result<Output, Failure> {
    if let Some(spec) = module {
        let b = bimodule_by_spec(spec)?;
        let mut gen = vec![0; b.left_ring.rank()];
        gen[b.left_ring.index_of(x)?] = 1;
        return Ok(graph_output(fusion_graph_action(&b, &gen)?));
    }
    let id = map.ok_or_else(|| Failure::Input("either --module or --triple with --map is required".into()))?;
    let t = load_triple(triple)?;
    let maps = t.find_multiplication_maps(SearchOptions { skip_c_prime, ..Default::default() });
    let m = maps
        .get(id)
        .ok_or_else(|| Failure::Input(format!("map {id} out of range ({} maps)", maps.len())))?;
    let mut gen = vec![0; t.k.rank()];
    gen[t.k.index_of(x)?] = 1;
    Ok(graph_output(fusion_graph_map(&t, m, &gen)?))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Verify { target, tol } => cmd_verify(target, *tol),
        Command::Norms => cmd_norms(),
        Command::Factorize { graph, target_norm_sq, tol, raw_count } => {
            cmd_factorize(graph, *target_norm_sq, *tol, *raw_count)
        }
        Command::Fourstar { table: Some(FourstarCommand::Table { max }), .. } => cmd_table(*max),
        Command::Fourstar { i, j, s, export, table: None } => match (i, j, s) {
            (Some(i), Some(j), Some(s)) => cmd_fourstar(*i, *j, *s, export.as_deref()),
            _ => Err(Failure::Input("fourstar needs --i, --j and --s".into())),
        },
        Command::Multmaps { triple, skip_c_prime, literal_d } => cmd_multmaps(
            triple,
            SearchOptions { skip_c_prime: *skip_c_prime, literal_condition_d: *literal_d },
        ),
        Command::Fusiongraph { module, triple, map, skip_c_prime, x } => {
            cmd_fusiongraph(module.as_deref(), triple, *map, *skip_c_prime, x)
        }
    }
}

fn render(out: &Output, format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(&out.json).map(|s| s + "\n").map_err(|e| e.to_string()),
        Format::Text => Ok(out.text.clone()),
        Format::Dot => out.dot.clone().ok_or_else(|| "dot output is only available for graphs".to_string()),
    }
}

fn emit(out: &Output, cli: &Cli) -> Result<(), String> {
    let s = render(out, cli.format)?;
    match &cli.output {
        Some(p) => std::fs::write(p, s).map_err(|e| format!("{}: {e}", p.display())),
        None => match std::io::stdout().lock().write_all(s.as_bytes()) {
            // a closed pipe downstream is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = match run(&cli) {
        Ok(out) => (out, 0),
        Err(Failure::Result(out)) => (out, 1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = emit(&out, &cli) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
