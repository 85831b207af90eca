use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fiber_core::experiments::{self, ExperimentParams};
use fiber_core::generators::{gen_ba, gen_config_uniform, gen_er_gnm, RngStream, DEFAULT_CONFIG_RETRIES};
use fiber_core::io::{read_covariates, read_graph, write_edge_list};
use fiber_core::oracle::enumerate_fibers;
use fiber_core::{
    count_degdist_fiber, count_degmix_fiber, count_degseq_fiber, count_edges_fiber,
    count_mixing_fiber, CovariateAssignment, DegreeDistribution, DegreeMixingMatrix,
    DegreeSequence, FiberError, Graph, MixingMatrix, NewmanMode, PropertyKind, PropertyValue,
    Result,
};

#[derive(Parser, Debug)]
#[command(name = "fiber", version, about = "Estimate fiber sizes of graph properties")]
struct Cli {
    /// Normalization of the expected degree-mixing entry.
    #[arg(long, global = true, env = "FIBER_NEWMAN_MODE", default_value = "standard")]
    newman_mode: NewmanMode,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Property {
    Edges,
    Degseq,
    Degdist,
    Mixing,
    Degmix,
}

impl From<Property> for PropertyKind {
    fn from(p: Property) -> Self {
        match p {
            Property::Edges => PropertyKind::Edges,
            Property::Degseq => PropertyKind::DegreeSequence,
            Property::Degdist => PropertyKind::DegreeDistribution,
            Property::Mixing => PropertyKind::Mixing,
            Property::Degmix => PropertyKind::DegreeMixing,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Ba,
    Er,
    Conf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edges per new vertex in the Barabási–Albert model.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate one fiber size and print its JSON record.
    Count {
        #[arg(long, value_enum)]
        property: Property,
        /// Vertex count (edges, degmix).
        #[arg(long)]
        n: Option<usize>,
        /// Edge count (edges).
        #[arg(long)]
        x: Option<usize>,
        /// Property value as JSON, or an edge-list graph whose value is used.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Category label per vertex, 1-based (mixing).
        #[arg(long)]
        covariates: Option<PathBuf>,
    },
    /// Step ratios and counts for the edge-count property.
    TableEdges {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        x: usize,
    },
    /// Regular-graph estimates against the asymptotic reference.
    RegularCompare {
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
        d: Vec<usize>,
    },
    /// Degree-distribution fibers: Barabási–Albert against G(n, m).
    BaEr(SampleArgs),
    /// Degree-mixing fibers: Barabási–Albert against the configuration model.
    BaConf(SampleArgs),
    /// Estimated number of distinct degree mixing matrices.
    Diversity {
        #[command(flatten)]
        sample: SampleArgs,
        /// Configuration-model draws per distribution.
        #[arg(long, default_value_t = 10)]
        inner_samples: usize,
    },
    /// Exact fiber table by exhaustive enumeration (n <= 7).
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        covariates: Option<PathBuf>,
    },
    /// Generate a random graph as an edge list.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Edge count (er).
        #[arg(long)]
        x: Option<usize>,
        /// Degree sequence as a JSON array (conf).
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Degree mixing matrix file: a dense symmetric matrix indexed by degree, or
/// an explicit list of `[k, l, count]` entries.
#[derive(Deserialize)]
#[serde(untagged)]
enum DmmFile {
    Dense(Vec<Vec<u64>>),
    Entries { entries: Vec<(usize, usize, u64)> },
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        FiberError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| FiberError::Input(format!("missing --{flag}")))
}

/// Reads `path` as an edge-list graph if it starts with an `n` header,
/// otherwise returns its text for JSON parsing.
fn read_input(path: &Path) -> Result<std::result::Result<Graph, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        FiberError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    if first.is_some_and(|l| l.starts_with("n ")) {
        Ok(Ok(read_graph(text.as_bytes())?))
    } else {
        Ok(Err(text))
    }
}

fn load_value(
    kind: PropertyKind,
    path: &Path,
    covariates: Option<&CovariateAssignment>,
) -> Result<(PropertyValue, Option<usize>)> {
    let text = match read_input(path)? {
        Ok(g) => return Ok((PropertyValue::of_graph(kind, &g, covariates)?, Some(g.n()))),
        Err(text) => text,
    };
    let value = match kind {
        PropertyKind::Edges => PropertyValue::Edges(serde_json::from_str(&text)?),
        PropertyKind::DegreeSequence => {
            PropertyValue::DegreeSequence(DegreeSequence::new(serde_json::from_str(&text)?)?)
        }
        PropertyKind::DegreeDistribution => {
            PropertyValue::DegreeDistribution(serde_json::from_str::<DegreeDistribution>(&text)?)
        }
        PropertyKind::Mixing => {
            let rows: Vec<Vec<u64>> = serde_json::from_str(&text)?;
            PropertyValue::Mixing(MixingMatrix::from_rows(&rows)?)
        }
        PropertyKind::DegreeMixing => PropertyValue::DegreeMixing(match serde_json::from_str(&text)? {
            DmmFile::Dense(rows) => DegreeMixingMatrix::from_rows(&rows)?,
            DmmFile::Entries { entries } => DegreeMixingMatrix::from_triples(entries),
        }),
    };
    Ok((value, None))
}

fn load_covariates(path: Option<&PathBuf>) -> Result<Option<CovariateAssignment>> {
    path.map(|p| read_covariates(open(p)?)).transpose()
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn params(s: &SampleArgs, mode: NewmanMode) -> ExperimentParams {
    ExperimentParams {
        m: s.m,
        mode,
        ..ExperimentParams::new(s.n, s.samples, s.seed)
    }
}

fn count(
    property: Property,
    n: Option<usize>,
    x: Option<usize>,
    file: Option<&PathBuf>,
    covariates: Option<&PathBuf>,
    mode: NewmanMode,
) -> Result<String> {
    let kind = PropertyKind::from(property);
    let a = load_covariates(covariates)?;
    let (value, graph_n) = match file {
        Some(path) => load_value(kind, path, a.as_ref())?,
        None if kind == PropertyKind::Edges => (PropertyValue::Edges(require(x, "x")?), None),
        None => return Err(FiberError::Input("missing --file".into())),
    };
    let estimate = match value {
        PropertyValue::Edges(x) => count_edges_fiber(require(n.or(graph_n), "n")?, x)?,
        PropertyValue::DegreeSequence(d) => count_degseq_fiber(&d, mode)?,
        PropertyValue::DegreeDistribution(d) => count_degdist_fiber(&d, mode)?,
        PropertyValue::Mixing(mm) => {
            let a = require(a, "covariates")?;
            count_mixing_fiber(&a, &mm)?
        }
        PropertyValue::DegreeMixing(dmm) => count_degmix_fiber(&dmm, require(n.or(graph_n), "n")?)?,
    };
    json(&estimate.record())
}

fn generate(
    model: Model,
    n: Option<usize>,
    m: usize,
    x: Option<usize>,
    file: Option<&PathBuf>,
    seed: u64,
) -> Result<String> {
    let mut rng = RngStream::new(seed).rng();
    let g = match model {
        Model::Ba => gen_ba(require(n, "n")?, m, &mut rng)?,
        Model::Er => gen_er_gnm(require(n, "n")?, require(x, "x")?, &mut rng)?,
        Model::Conf => {
            let path = require(file, "file")?;
            let d = DegreeSequence::new(serde_json::from_reader(open(path)?)?)?;
            gen_config_uniform(&d, &mut rng, DEFAULT_CONFIG_RETRIES)?
        }
    };
    let mut buf = Vec::new();
    write_edge_list(&mut buf, g.n(), g.edges())?;
    Ok(String::from_utf8(buf).expect("edge list is ascii"))
}

fn run(cli: &Cli) -> Result<String> {
    let mode = cli.newman_mode;
    match &cli.command {
        Command::Count {
            property,
            n,
            x,
            file,
            covariates,
        } => count(*property, *n, *x, file.as_ref(), covariates.as_ref(), mode),
        Command::TableEdges { n, x } => experiments::edge_table_csv(&experiments::table_edges(*n, *x)?),
        Command::RegularCompare { n, d } => {
            experiments::regular_csv(&experiments::regular_compare(n, d, mode)?)
        }
        Command::BaEr(s) | Command::BaConf(s) => {
            let p = params(s, mode);
            let report = if matches!(cli.command, Command::BaEr(_)) {
                experiments::ba_er(p)?
            } else {
                experiments::ba_conf(p)?
            };
            match s.format {
                Format::Csv => report.to_csv(),
                Format::Json => json(&report),
            }
        }
        Command::Diversity {
            sample,
            inner_samples,
        } => {
            let p = ExperimentParams {
                inner_samples: *inner_samples,
                ..params(sample, mode)
            };
            let report = experiments::diversity(p)?;
            match sample.format {
                Format::Csv => report.to_csv(),
                Format::Json => json(&report),
            }
        }
        Command::Oracle {
            n,
            property,
            covariates,
        } => {
            let a = load_covariates(covariates.as_ref())?;
            json(&enumerate_fibers(*n, (*property).into(), a.as_ref())?)
        }
        Command::Generate {
            model,
            n,
            m,
            x,
            file,
            seed,
        } => generate(*model, *n, *m, *x, file.as_ref(), *seed),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(cli.out.as_ref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
