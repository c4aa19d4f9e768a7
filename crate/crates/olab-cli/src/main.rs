//! `olab`: command-line front end for the ordered-locale workbench.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use olab::coverage::{CoverageConfig, CoverageEngine, Direction, VerdictKind};
use olab::dependence::AbstractCoverage;
use olab::grid::{self, mask_of, ChainMode, GridJson, GridScenario};
use olab::locale::{check_axioms, Axiom, OrderedLocale, Outcome, Universe};
use olab::paths::{make_path, restrict_future, restrict_past};
use olab::render;
use olab::scenarios;
use olab::sites::{kleisli_stability_search, verify_down_gt_axioms};
use olab::space::{parse_space, FiniteSpace, Mask};

const HOLDS: u8 = 0;
const VIOLATION: u8 = 1;
const UNKNOWN: u8 = 2;
const INPUT_ERROR: u8 = 3;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser)]
#[command(name = "olab", version, about = "Finite ordered locales, causal coverage and domains of dependence")]
struct Cli {
    /// Worker threads; has no effect on output.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Bounds {
    /// Longest target path explored (default 2·|opens|).
    #[arg(long)]
    max_path_len: Option<usize>,
    /// Longest refinement accepted (default (len+1)·(|steps|+1)).
    #[arg(long)]
    max_refinement_len: Option<usize>,
}

impl Bounds {
    fn config(&self) -> Result<CoverageConfig> {
        let mut cfg = CoverageConfig::default();
        if let Some(n) = self.max_path_len {
            if n == 0 {
                return Err(input_err("--max-path-len must be positive"));
            }
            cfg = cfg.with_target_len(n);
        }
        if let Some(n) = self.max_refinement_len {
            if n == 0 {
                return Err(input_err("--max-refinement-len must be positive"));
            }
            cfg = cfg.with_refinement_len(n);
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    EgliMilner,
    Upper,
    Equality,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoverDirection {
    Below,
    Above,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TimeDirection {
    Future,
    Past,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Semantics {
    Localic,
    ChainCausal,
    ChainChron,
    InextCausal,
    InextChron,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Render {
    Json,
    Ascii,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Check the ordered-locale axioms.
    CheckAxioms {
        input: String,
        /// Restrict to these axioms (repeatable).
        #[arg(long = "axiom")]
        axioms: Vec<String>,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
    },
    /// Pointwise and localic cones of a region.
    Cones {
        input: String,
        #[arg(long, default_value = "")]
        region: String,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
    },
    /// Decide whether A covers U.
    Cover {
        input: String,
        #[arg(long = "a")]
        a: String,
        #[arg(long = "u")]
        u: String,
        #[arg(long, value_enum, default_value = "below")]
        direction: CoverDirection,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Domain of dependence of a region.
    Domain {
        input: String,
        /// Region; defaults to the grid's region A.
        #[arg(long)]
        region: Option<String>,
        #[arg(long, value_enum, default_value = "future")]
        direction: TimeDirection,
        #[arg(long, value_enum, default_value = "all")]
        semantics: Semantics,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Grothendieck-topology axioms of the past coverage.
    Gtop {
        input: String,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Path operations.
    Paths {
        #[command(subcommand)]
        op: PathsOp,
    },
    /// Run a named grid scenario; without a name, list them.
    Scenario {
        name: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        render: Render,
        /// Write the artifact into this directory instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PathsOp {
    /// Restrict a path to the past of W or the future of V.
    Restrict {
        input: String,
        /// Steps separated by `;`, points within a step by `,`.
        #[arg(long)]
        path: String,
        #[arg(long, conflicts_with = "future")]
        past: Option<String>,
        #[arg(long)]
        future: Option<String>,
        #[arg(long, value_enum, default_value = "egli-milner")]
        order: OrderKind,
    },
}

enum Input {
    Space(FiniteSpace),
    Grid(GridScenario),
}

impl Input {
    fn load(arg: &str) -> Result<Input> {
        let path = FsPath::new(arg);
        if path.is_file() {
            let text = fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text).map_err(input_err)?;
            if v.get("kind").and_then(Value::as_str) == Some("grid") {
                let j: GridJson = serde_json::from_value(v).map_err(input_err)?;
                let g = grid::build_grid(j.params().map_err(input_err)?).map_err(input_err)?;
                let a = j.region(&g, "A").map_err(input_err)?;
                let u = j.region(&g, "U").map_err(input_err)?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                return Ok(Input::Grid(GridScenario { name, grid: g, a, u }));
            }
            return parse_space(&text).map(Input::Space).map_err(input_err);
        }
        if let Some(s) = scenarios::named_space(&arg.to_lowercase()) {
            return Ok(Input::Space(s));
        }
        if let Some(s) = grid::grid_scenario(arg) {
            return Ok(Input::Grid(s));
        }
        Err(input_err(format!("{arg}: no such file, named space or scenario")))
    }

    fn locale(&self, order: OrderKind) -> Result<OrderedLocale> {
        match self {
            Input::Space(s) => Ok(match order {
                OrderKind::EgliMilner => OrderedLocale::egli_milner(s.clone()),
                OrderKind::Upper => OrderedLocale::upper(s.clone()),
                OrderKind::Equality => OrderedLocale::equality(s.clone()),
            }),
            Input::Grid(s) => s.grid.locale().map_err(input_err),
        }
    }

    /// Opens used as path steps and axiom instances.
    fn universe(&self, l: &OrderedLocale) -> Universe {
        match self {
            Input::Grid(s) if !l.space().is_enumerable() => Universe::Explicit(s.grid.interval_basis(l)),
            _ => Universe::All,
        }
    }

    fn region(&self, text: &str) -> Result<Mask> {
        match self {
            Input::Space(s) => {
                let labels: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                let m = s.mask_of(&labels).map_err(input_err)?;
                if !s.is_open(m) {
                    return Err(input_err(format!("region {{{}}} is not open", labels.join(","))));
                }
                Ok(m)
            }
            Input::Grid(s) => {
                let set = grid_region(s, text)?;
                if set.len() > 64 {
                    return Err(input_err("grid exceeds the frame capacity"));
                }
                Ok(mask_of(&set))
            }
        }
    }
}

/// Cells written `x:t`, separated by commas.
fn grid_region(s: &GridScenario, text: &str) -> Result<grid::CellSet> {
    let mut coords = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, t) = tok.split_once(':').ok_or_else(|| input_err(format!("cell {tok:?} is not x:t")))?;
        let p = |v: &str| v.trim().parse::<i64>().map_err(|_| input_err(format!("bad coordinate in {tok:?}")));
        coords.push((p(x)?, p(t)?));
    }
    Ok(s.grid.set_of(&s.grid.cells_of(&coords).map_err(input_err)?))
}

fn universe_json(u: &Universe, n: usize) -> Value {
    match u {
        Universe::All => json!({ "kind": "all-opens", "size": n }),
        Universe::Explicit(_) => json!({ "kind": "interval-basis", "size": n }),
    }
}

fn outcome_code(outcomes: impl IntoIterator<Item = Outcome>) -> u8 {
    match outcomes.into_iter().fold(Outcome::Holds, Outcome::and) {
        Outcome::Holds => HOLDS,
        Outcome::Violated => VIOLATION,
        Outcome::Unknown => UNKNOWN,
    }
}

struct Report {
    body: String,
    code: u8,
}

fn json_report(v: Value, code: u8) -> Report {
    let mut body = serde_json::to_string_pretty(&v).expect("serializable");
    body.push('\n');
    Report { body, code }
}

fn run(cmd: Command) -> Result<Report> {
    match cmd {
        Command::CheckAxioms { input, axioms, order } => {
            let input = Input::load(&input)?;
            let l = input.locale(order)?;
            let selection: Vec<Axiom> = if axioms.is_empty() {
                Axiom::ALL.to_vec()
            } else {
                axioms
                    .iter()
                    .map(|a| Axiom::from_name(a).ok_or_else(|| input_err(format!("unknown axiom {a:?}"))))
                    .collect::<Result<_>>()?
            };
            let universe = input.universe(&l);
            let budget = olab::default_budget();
            let size = l.universe(&universe).map_err(input_err)?.len();
            let reports = check_axioms(&l, &universe, &selection, budget).map_err(input_err)?;
            let code = outcome_code(reports.iter().map(|r| r.outcome));
            Ok(json_report(
                json!({
                    "bounds": { "budget": budget, "universe": universe_json(&universe, size) },
                    "space": l.space().name(),
                    "order_source": l.source_name(),
                    "reports": reports.iter().map(|r| r.to_json(l.space())).collect::<Vec<_>>(),
                }),
                code,
            ))
        }
        Command::Cones { input, region, order } => {
            let input = Input::load(&input)?;
            let l = input.locale(order)?;
            let sp = l.space();
            let r = input.region(&region)?;
            Ok(json_report(
                json!({
                    "space": sp.name(),
                    "order_source": l.source_name(),
                    "region": sp.labels_of(r),
                    "up": sp.labels_of(sp.up_set(r)),
                    "down": sp.labels_of(sp.down_set(r)),
                    "localic_up": sp.labels_of(l.cone_up(r)),
                    "localic_down": sp.labels_of(l.cone_down(r)),
                }),
                HOLDS,
            ))
        }
        Command::Cover { input, a, u, direction, order, bounds } => {
            let input = Input::load(&input)?;
            let l = input.locale(order)?;
            let (a, u) = (input.region(&a)?, input.region(&u)?);
            let mut cfg = bounds.config()?;
            if let Universe::Explicit(b) = input.universe(&l) {
                cfg = cfg.with_basis(b);
            }
            let engine = CoverageEngine::new(&l, cfg).map_err(input_err)?;
            let d = if direction == CoverDirection::Below { Direction::Below } else { Direction::Above };
            let v = engine.cover(d, a, u).map_err(input_err)?;
            let code = match v.kind {
                VerdictKind::Covered => HOLDS,
                VerdictKind::NotCovered => VIOLATION,
                VerdictKind::Unknown => UNKNOWN,
            };
            let mut body = v.to_json(l.space());
            body["bounds"]["budget"] = json!(engine.config().budget);
            Ok(json_report(body, code))
        }
        Command::Domain { input, region, direction, semantics, order, bounds } => {
            let input = Input::load(&input)?;
            let cfg = bounds.config()?;
            match &input {
                Input::Space(_) => {
                    if !matches!(semantics, Semantics::Localic | Semantics::All) {
                        return Err(input_err("chain semantics need a grid input"));
                    }
                    let l = input.locale(order)?;
                    let a = input.region(region.as_deref().unwrap_or(""))?;
                    let c = AbstractCoverage::from_locale(&l, &cfg).map_err(input_err)?;
                    let e = c.domain_of(direction == TimeDirection::Future, a);
                    let sp = l.space();
                    let code = if e.unknown.is_empty() { HOLDS } else { UNKNOWN };
                    Ok(json_report(
                        json!({
                            "bounds": render::bounds_json(&cfg),
                            "space": sp.name(),
                            "order_source": l.source_name(),
                            "direction": if direction == TimeDirection::Future { "future" } else { "past" },
                            "semantics": "localic",
                            "region": sp.labels_of(a),
                            "domain": sp.labels_of(e.domain),
                            "unknown": e.unknown.iter().map(|&m| sp.labels_of(m)).collect::<Vec<_>>(),
                        }),
                        code,
                    ))
                }
                Input::Grid(s) => {
                    if direction == TimeDirection::Past {
                        return Err(input_err("grid domains are future domains"));
                    }
                    let a = match &region {
                        Some(r) => grid_region(s, r)?,
                        None => s.a.clone(),
                    };
                    grid_domain(s, &a, semantics, &cfg)
                }
            }
        }
        Command::Gtop { input, order, bounds } => {
            let input = Input::load(&input)?;
            let l = input.locale(order)?;
            let cfg = bounds.config()?;
            let reports = verify_down_gt_axioms(&l, &cfg).map_err(input_err)?;
            let engine = CoverageEngine::new(&l, cfg.clone()).map_err(input_err)?;
            let tables = olab::coverage::CoverTables::compute(&engine).map_err(input_err)?;
            let kleisli = kleisli_stability_search(&l, &tables, cfg.budget).map_err(input_err)?;
            let sp = l.space();
            let code = outcome_code(reports.iter().map(|r| r.outcome));
            Ok(json_report(
                json!({
                    "bounds": render::bounds_json(&cfg),
                    "space": sp.name(),
                    "order_source": l.source_name(),
                    "axioms": reports.iter().map(|r| r.to_json(sp)).collect::<Vec<_>>(),
                    "kleisli_stability": match kleisli {
                        None => json!({ "fails": false }),
                        Some(k) => json!({
                            "fails": true,
                            "U": sp.labels_of(k.u),
                            "W": sp.labels_of(k.w),
                            "S": k.s.to_json(sp),
                            "pulled_join": sp.labels_of(k.pulled_join),
                        }),
                    },
                }),
                code,
            ))
        }
        Command::Paths { op: PathsOp::Restrict { input, path, past, future, order } } => {
            let input = Input::load(&input)?;
            let l = input.locale(order)?;
            let steps = path.split(';').map(|s| input.region(s)).collect::<Result<Vec<_>>>()?;
            let p = make_path(&l, steps).map_err(input_err)?;
            let (side, r) = match (past, future) {
                (Some(w), None) => ("past", restrict_past(&l, &p, input.region(&w)?)),
                (None, Some(v)) => ("future", restrict_future(&l, &p, input.region(&v)?)),
                _ => return Err(input_err("give exactly one of --past or --future")),
            };
            let r = r.map_err(input_err)?;
            let sp = l.space();
            Ok(json_report(
                json!({ "path": p.to_json(sp), "side": side, "restricted": r.to_json(sp) }),
                HOLDS,
            ))
        }
        Command::Scenario { name, render: how, out } => {
            let Some(name) = name else {
                let mut body = String::new();
                for n in grid::GRID_SCENARIOS {
                    body.push_str(n);
                    body.push('\n');
                }
                return Ok(Report { body, code: HOLDS });
            };
            let s = grid::grid_scenario(&name).ok_or_else(|| input_err(format!("unknown scenario {name:?}")))?;
            let cfg = CoverageConfig::default();
            let report = s.grid.domains_all(&s.a, &cfg);
            let (body, ext) = match how {
                Render::Json => {
                    let mut b = serde_json::to_string_pretty(&render::scenario_json(&s, &cfg, &report)).expect("json");
                    b.push('\n');
                    (b, "json")
                }
                Render::Ascii => {
                    let b = format!(
                        "{}\n{}{}",
                        s.name,
                        render::ascii_layers(&s.grid, &s.a, &report),
                        render::ascii_legend(&report)
                    );
                    (b, "txt")
                }
                Render::Svg => (render::svg(&s.grid, &s.a, &s.u, &report), "svg"),
            };
            match out {
                None => Ok(Report { body, code: HOLDS }),
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let file: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
                    let path = dir.join(format!("{file}.{ext}"));
                    fs::write(&path, body)?;
                    Ok(Report { body: format!("{}\n", path.display()), code: HOLDS })
                }
            }
        }
    }
}

fn grid_domain(s: &GridScenario, a: &grid::CellSet, semantics: Semantics, cfg: &CoverageConfig) -> Result<Report> {
    let g = &s.grid;
    let cells = |set: &grid::CellSet| g.coords(set).into_iter().map(|(x, t)| [x, t]).collect::<Vec<_>>();
    let header = json!({
        "bounds": render::bounds_json(cfg),
        "grid": g.to_json(),
        "region": cells(a),
    });
    let single = |name: &str, set: grid::CellSet, unknown: Vec<usize>| {
        let mut v = header.clone();
        v["semantics"] = json!(name);
        v["domain"] = json!(cells(&set));
        v["unknown"] = json!(unknown.iter().map(|&i| { let (x, t) = g.cell(i); [x, t] }).collect::<Vec<_>>());
        let code = if unknown.is_empty() { HOLDS } else { UNKNOWN };
        json_report(v, code)
    };
    Ok(match semantics {
        Semantics::ChainCausal => single("chain-causal", g.domain_bounded(a, ChainMode::Causal), vec![]),
        Semantics::ChainChron => single("chain-chron", g.domain_bounded(a, ChainMode::Chronological), vec![]),
        Semantics::InextCausal => single("inext-causal", g.domain_inextendible(a, ChainMode::Causal), vec![]),
        Semantics::InextChron => single("inext-chron", g.domain_inextendible(a, ChainMode::Chronological), vec![]),
        Semantics::Localic => {
            let c = g.domain_localic(a, cfg).map_err(input_err)?;
            single("localic", c.cells, c.unknown)
        }
        Semantics::All => {
            let r = g.domains_all(a, cfg);
            let mut v = header;
            v["semantics"] = json!("all");
            v["report"] = r.to_json(g);
            let code = if !r.chain_holds() {
                VIOLATION
            } else if !r.localic_unknown.is_empty() {
                UNKNOWN
            } else {
                HOLDS
            };
            json_report(v, code)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { HOLDS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(r) => {
            print!("{}", r.body);
            ExitCode::from(r.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

