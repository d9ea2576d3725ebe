use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use caccioppoli::functional::{builtin, evaluate_functional_with, SymmetryCheck};
use caccioppoli::partition::io::{format_f64, to_json_string, PartitionFile};
use caccioppoli::scenario::{run_resolved, OutputFormat, Scenario};
use caccioppoli::{Error, QuadratureSpec};

#[derive(Parser)]
#[command(name = "caccioppoli", version, about = "Surface energies of partition fields")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CACCIOPPOLI_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a partition file.
    Validate { path: PathBuf },
    /// Evaluate surface energies of a partition file.
    Eval {
        path: PathBuf,
        /// Built-in integrand name; repeat for several.
        #[arg(long = "integrand", default_value = "one")]
        integrands: Vec<String>,
        #[arg(long)]
        quad_order: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a convergence scenario.
    Run {
        scenario: PathBuf,
        /// Output file; tables go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        quad_order: Option<usize>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Generator(_) | Error::Structural(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn validate(path: &PathBuf) -> ExitCode {
    let file = match PartitionFile::read(path) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let report = file.validate();
    if report.is_ok() {
        println!("ok: {} cells, {} labels", file.cell_labels.len(), file.labels.len());
        ExitCode::SUCCESS
    } else {
        println!("{report}");
        ExitCode::from(1)
    }
}

fn eval(path: &PathBuf, names: &[String], quad_order: Option<usize>, seed: Option<u64>, format: Format) -> ExitCode {
    let result = (|| {
        let (labels, u) = PartitionFile::read(path)?.into_parts()?;
        let mut quad = QuadratureSpec::default();
        if let Some(k) = quad_order {
            quad = QuadratureSpec::new(k, quad.subdivisions)?;
        }
        let check = SymmetryCheck { seed: seed.unwrap_or(SymmetryCheck::default().seed), ..SymmetryCheck::default() };
        let region = u.bounding_box();
        let perimeter = u.perimeter()?;
        let tv = u.total_variation(&labels)?;
        let facets = u.jump_set()?.len();
        names
            .iter()
            .map(|name| {
                let g = builtin(name, &labels, &region)?;
                Ok(EvalRow {
                    integrand: name.clone(),
                    f: evaluate_functional_with(&u, &labels, &g, &quad, &check)?,
                    perimeter,
                    total_variation: tv,
                    facets,
                })
            })
            .collect::<Result<Vec<_>, Error>>()
    })();
    let rows = match result {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match format {
        Format::Json => print!("{}", to_json_string(&rows)),
        Format::Csv => {
            println!("integrand,F,perimeter,total_variation,facets");
            for r in rows {
                println!(
                    "{},{},{},{},{}",
                    r.integrand,
                    format_f64(r.f),
                    format_f64(r.perimeter),
                    format_f64(r.total_variation),
                    r.facets
                );
            }
        }
    }
    ExitCode::SUCCESS
}

#[derive(serde::Serialize)]
struct EvalRow {
    integrand: String,
    #[serde(rename = "F")]
    f: f64,
    perimeter: f64,
    total_variation: f64,
    facets: usize,
}

fn run(
    path: &PathBuf,
    out: Option<&PathBuf>,
    format: Option<Format>,
    quad_order: Option<usize>,
    seed: Option<u64>,
) -> ExitCode {
    let result = (|| {
        let mut scenario = Scenario::read(path)?;
        if let Some(s) = seed {
            scenario.seed = Some(s);
        }
        if let Some(k) = quad_order {
            scenario.quadrature.order = k;
        }
        let format = format.map(OutputFormat::from).unwrap_or(scenario.output);
        let output = run_resolved(&scenario.resolve()?)?;
        match out {
            Some(p) => {
                output.write(p, format)?;
                eprint!("{}", output.summary());
            }
            None => print!("{}", output.render(format)),
        }
        Ok::<_, Error>(output.exit_code())
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    pool.install(|| match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Eval { path, integrands, quad_order, seed, format } => {
            eval(path, integrands, *quad_order, *seed, format.unwrap_or(Format::Csv))
        }
        Command::Run { scenario, out, format, quad_order, seed } => {
            run(scenario, out.as_ref(), *format, *quad_order, *seed)
        }
    })
}
