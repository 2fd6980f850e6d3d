use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use primrel::constructions::{self, ScheduleOrder};
use primrel::error::Error;
use primrel::presentation::{FanPresentation, Label};
use primrel::transforms::{self, FlipSpec};
use primrel::{mori, oracle};

/// Primitive-relation calculus for smooth projective toric varieties.
#[derive(Parser)]
#[command(name = "primrel", version, disable_help_subcommand = true)]
struct Cli {
    /// Emit machine-readable JSON instead of human tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArg {
    /// Presentation JSON file; standard input when omitted.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a fan presentation.
    Construct {
        #[command(subcommand)]
        what: ConstructCmd,
    },
    /// Apply a rewrite rule to a presentation.
    Transform {
        #[command(subcommand)]
        what: TransformCmd,
    },
    /// Verify properties of a presentation.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Mori-cone queries.
    Mori {
        #[command(subcommand)]
        what: MoriCmd,
    },
    /// Run the staged anti-flip construction.
    Schedule {
        #[command(subcommand)]
        what: ScheduleCmd,
    },
    /// Summarize a presentation.
    Info(InputArg),
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Projective space P^d.
    Pd {
        #[arg(long)]
        dim: usize,
    },
    /// Blow-up of P^d at n torus-invariant points.
    Bdn {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        points: usize,
    },
}

#[derive(Subcommand)]
enum TransformCmd {
    /// Blow up along the cone spanned by the given generators.
    Blowup {
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated generator labels spanning the center.
        #[arg(long)]
        center: String,
        /// Label for the new ray.
        #[arg(long)]
        label: String,
    },
    /// Blow down along an extremal divisorial wall.
    Blowdown {
        #[command(flatten)]
        input: InputArg,
        /// Wall addressed by its sorted collection labels, comma-separated.
        #[arg(long)]
        wall: String,
    },
    /// Cross an extremal small wall (anti-flip, flop or flip).
    Antiflip {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        wall: String,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Fano test: every primitive relation has positive degree.
    Fano {
        #[command(flatten)]
        input: InputArg,
        /// Exit nonzero when the presentation is not Fano.
        #[arg(long)]
        expect_fano: bool,
    },
    /// Full oracle: reconstruct, certify smooth/complete, round-trip.
    Oracle {
        #[command(flatten)]
        input: InputArg,
        /// Attach the reconstructed cone complex to the report.
        #[arg(long)]
        emit_cones: bool,
    },
    /// Existence of a strictly convex support function.
    Projective {
        #[command(flatten)]
        input: InputArg,
    },
}

#[derive(Subcommand)]
enum MoriCmd {
    /// Contraction type of an extremal wall.
    Classify {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        wall: String,
    },
    /// Extremality of one wall, or of every relation.
    Extremal {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        wall: Option<String>,
    },
}

#[derive(Subcommand)]
enum ScheduleCmd {
    /// Run the anti-flip schedule from B^d_n to its endpoint.
    Run {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        points: usize,
        /// Verification to run on every intermediate ("oracle").
        #[arg(long)]
        verify: Option<String>,
        /// Within-stage wall order: lex (default) or reversed.
        #[arg(long, default_value = "lex")]
        order: String,
        /// Seed for a deterministic shuffled order (overrides --order).
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for per-stage snapshot files.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Error::BadArgument(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read_presentation(input: &InputArg) -> Result<FanPresentation, Error> {
    let text = match &input.input {
        Some(path) => std::fs::read_to_string(path)?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Json(e.to_string()))?;
    FanPresentation::from_json(&value)
}

fn parse_labels(spec: &str) -> BTreeSet<Label> {
    spec.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| Label::new(s.trim().to_string()))
        .collect()
}

fn wall_by_labels<'a>(
    f: &'a FanPresentation,
    spec: &str,
) -> Result<&'a primrel::PrimitiveRelation, Error> {
    let lhs = parse_labels(spec);
    f.find_relation_by_lhs(&lhs)
        .ok_or_else(|| Error::UnknownWall(spec.to_string()))
}

fn emit_presentation(f: &FanPresentation, as_json: bool) {
    if as_json {
        println!("{}", f.to_json());
    } else {
        println!("dim {}", f.dim);
        for (label, point) in &f.generators {
            let coords: Vec<String> = point.0.iter().map(|c| c.to_string()).collect();
            println!("  {:<4} ({})", label.to_string(), coords.join(", "));
        }
        for r in &f.relations {
            println!("  {}  [degree {}]", r, r.degree());
        }
    }
}

fn emit_report(report: &Value, as_json: bool) {
    if as_json {
        println!("{report}");
    } else if let Some(obj) = report.as_object() {
        for (k, v) in obj {
            println!("{k}: {v}");
        }
    } else {
        println!("{report}");
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Construct { what } => {
            let f = match what {
                ConstructCmd::Pd { dim } => constructions::projective_space(*dim)?,
                ConstructCmd::Bdn { dim, points } => {
                    constructions::blowup_at_points(*dim, *points)?
                }
            };
            emit_presentation(&f, cli.json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Transform { what } => {
            let f = match what {
                TransformCmd::Blowup {
                    input,
                    center,
                    label,
                } => {
                    let f = read_presentation(input)?;
                    transforms::blow_up(&f, &parse_labels(center), Label::new(label.clone()))?
                }
                TransformCmd::Blowdown { input, wall } => {
                    let f = read_presentation(input)?;
                    let wall = wall_by_labels(&f, wall)?.clone();
                    transforms::blow_down(&f, &wall)?
                }
                TransformCmd::Antiflip { input, wall } => {
                    let f = read_presentation(input)?;
                    let wall = wall_by_labels(&f, wall)?.clone();
                    transforms::star_flip(&f, &FlipSpec::new(wall))?
                }
            };
            emit_presentation(&f, cli.json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { what } => match what {
            CheckCmd::Fano { input, expect_fano } => {
                let f = read_presentation(input)?;
                let fano = f.is_fano()?;
                let report = json!({
                    "fano": fano,
                    "degrees": f
                        .relations
                        .iter()
                        .map(|r| json!([r.to_string(), r.degree().to_string()]))
                        .collect::<Vec<_>>(),
                });
                emit_report(&report, cli.json);
                if *expect_fano && !fano {
                    return Ok(ExitCode::from(1));
                }
                Ok(ExitCode::SUCCESS)
            }
            CheckCmd::Oracle { input, emit_cones } => {
                let f = read_presentation(input)?;
                let complex = oracle::reconstruct(&f)?;
                let geometry = oracle::check_smooth_complete(&complex);
                let round_trip = oracle::recompute(&complex)
                    .map(|back| back == f)
                    .unwrap_or(false);
                let ok = geometry.ok() && round_trip;
                let mut report = json!({
                    "smooth": geometry.smooth,
                    "complete": geometry.complete,
                    "proper_intersections": geometry.proper_intersections,
                    "round_trip": round_trip,
                    "max_cone_count": complex.max_cones.len(),
                    "issues": geometry.issues,
                });
                if *emit_cones {
                    report["cones"] = complex.to_json();
                }
                emit_report(&report, cli.json);
                Ok(if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
            CheckCmd::Projective { input } => {
                let f = read_presentation(input)?;
                let complex = oracle::reconstruct(&f)?;
                let projective = oracle::check_projective(&complex);
                emit_report(&json!({ "projective": projective }), cli.json);
                Ok(if projective {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
        },
        Command::Mori { what } => match what {
            MoriCmd::Classify { input, wall } => {
                let f = read_presentation(input)?;
                let wall = wall_by_labels(&f, wall)?.clone();
                let (contraction, surgery) = mori::classify(&f, &wall)?;
                emit_report(
                    &json!({
                        "wall": wall.to_string(),
                        "contraction": contraction.to_string(),
                        "surgery": surgery.to_string(),
                    }),
                    cli.json,
                );
                Ok(ExitCode::SUCCESS)
            }
            MoriCmd::Extremal { input, wall } => {
                let f = read_presentation(input)?;
                let walls: Vec<primrel::PrimitiveRelation> = match wall {
                    Some(spec) => vec![wall_by_labels(&f, spec)?.clone()],
                    None => f.relations.clone(),
                };
                let entries: Vec<Value> = walls
                    .iter()
                    .map(|r| {
                        mori::is_extremal(&f, r)
                            .map(|e| json!({ "wall": r.to_string(), "extremal": e }))
                    })
                    .collect::<Result<_, _>>()?;
                emit_report(&json!({ "relations": entries }), cli.json);
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Schedule { what } => match what {
            ScheduleCmd::Run {
                dim,
                points,
                verify,
                order,
                seed,
                snapshot_dir,
            } => {
                let order = match (seed, order.as_str()) {
                    (Some(s), _) => ScheduleOrder::Shuffled(*s),
                    (None, "lex") => ScheduleOrder::Lex,
                    (None, "reversed") => ScheduleOrder::Reversed,
                    (None, other) => {
                        return Err(Error::BadArgument(format!("unknown order {other:?}")))
                    }
                };
                match verify.as_deref() {
                    None | Some("oracle") => {}
                    Some(other) => {
                        return Err(Error::BadArgument(format!("unknown verifier {other:?}")))
                    }
                }
                let report = constructions::run_construction_ordered(*dim, *points, order)?;
                if verify.as_deref() == Some("oracle") {
                    for f in report.all_presentations() {
                        let complex = oracle::verify(f)?;
                        if !oracle::check_projective(&complex) {
                            return Err(Error::NotAFan(
                                "intermediate presentation is not projective".into(),
                            ));
                        }
                    }
                }
                let mut doc = report.to_json();
                if let Some(dir) = snapshot_dir {
                    std::fs::create_dir_all(dir)?;
                    let mut files = Vec::new();
                    for (r, f) in &report.stage_snapshots {
                        let path = dir.join(format!("b{}_{}_r{}.json", dim, points, r));
                        std::fs::write(&path, format!("{}\n", f.to_json()))?;
                        files.push(json!(path.to_string_lossy()));
                    }
                    doc["snapshots"] = Value::Array(files);
                }
                emit_report(&doc, cli.json);
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Info(input) => {
            let f = read_presentation(input)?;
            let report = json!({
                "dim": f.dim,
                "generators": f.generators.len(),
                "picard_number": f.picard_number(),
                "relations": f.relations.len(),
                "fano": f.is_fano().ok(),
                "violations": f.validate(),
            });
            emit_report(&report, cli.json);
            Ok(ExitCode::SUCCESS)
        }
    }
}
