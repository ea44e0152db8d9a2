pub mod args;
mod infer;
mod simulate;
mod summarize;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use coalgp::genealogy::{parse_newick_with_dates, CoalescentData, DateSource, TipDates};

use args::{Cli, Command, ExtractArgs, TreeArgs};

/// Environment variable naming the directory relative output paths are
/// written to.
pub const OUT_DIR_VAR: &str = "COALGP_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<coalgp::Error> for CliError {
    fn from(e: coalgp::Error) -> Self {
        if e.is_input_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Infer(a) => infer::run(a),
        Command::Summarize(a) => summarize::run(a),
        Command::Extract(a) => extract(a),
    }
}

fn extract(args: ExtractArgs) -> CliResult<()> {
    let data = read_tree(&args.tree, &args.tree_args)?;
    let out = output_path(&args.out);
    write_file(&out, &to_json(&data)?)?;
    eprintln!("{} tips, root at {}; wrote {}", data.num_tips(), data.tmrca(), out.display());
    Ok(())
}

pub(crate) fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn read_tree(path: &Path, args: &TreeArgs) -> CliResult<CoalescentData> {
    let text = read_input(path)?;
    let table;
    let source = match (&args.dates, args.date_delim) {
        (Some(p), _) => {
            table = TipDates::from_tsv(&read_input(p)?)?;
            DateSource::Table(&table)
        }
        (None, Some(c)) => DateSource::LabelSuffix(c),
        (None, None) => DateSource::None,
    };
    let tree = parse_newick_with_dates(&text, source)?;
    Ok(CoalescentData::from_genealogy(&tree)?)
}

pub(crate) fn read_data_json(path: &Path) -> CliResult<CoalescentData> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolve a relative output path against the output directory override.
pub(crate) fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}
