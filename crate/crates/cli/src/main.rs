use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tempfile::NamedTempFile;

use dendron::dot::{forest_dot, gtree_dot, tree_dot};
use dendron::io::{parse_document, Document};
use dendron::suites::{run, Suite};
use dendron::tree::{enumerate_trees, RawTree};

#[derive(Parser)]
#[command(name = "dendron", version, about = "Trees, dendroidal categories and their equivariant variants")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the trees with N leaves and at most K vertices.
    Enumerate {
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        max_vertices: usize,
        /// Write the trees as a JSON list.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite and print its JSON report.
    Check {
        suite: Suite,
        #[arg(long)]
        max_edges: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        max_components: Option<usize>,
        /// Builtin group name or group file; repeatable.
        #[arg(long = "group")]
        groups: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Graphviz text for a tree, G-tree or G-forest file.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        color_orbits: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Enumerate { leaves, max_vertices, output } => {
            let trees = enumerate_trees(leaves, max_vertices);
            if let Some(p) = output {
                let raw: Vec<RawTree> = trees.iter().map(|t| t.raw()).collect();
                write_atomic(&p, &(serde_json::to_string_pretty(&raw)? + "\n"))?;
            }
            println!("{}", trees.len());
            Ok(true)
        }
        Command::Check { suite, max_edges, max_size, max_components, groups, output } => {
            let mut config = suite.default_config();
            config.max_edges = max_edges.unwrap_or(config.max_edges);
            config.max_size = max_size.unwrap_or(config.max_size);
            config.max_components = max_components.unwrap_or(config.max_components);
            if !groups.is_empty() {
                config.groups = groups;
            }
            let report = run(suite, &config)?;
            for c in &report.checks {
                eprintln!("{suite}: {} {} ({} cases)", c.name, if c.passed { "ok" } else { "FAILED" }, c.cases);
            }
            emit(output.as_deref(), &(report.to_json() + "\n"))?;
            Ok(report.passed)
        }
        Command::ExportDot { file, color_orbits, output } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let doc = parse_document(&text).with_context(|| format!("parsing {}", file.display()))?;
            let dot = match doc {
                Document::Tree(t) => tree_dot(&t),
                Document::GTree(t) => gtree_dot(&t, color_orbits),
                Document::Forest(f) => forest_dot(&f, color_orbits),
            };
            emit(output.as_deref(), &dot)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
