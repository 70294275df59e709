//! Config files mirror the flags: each subcommand reads its own table, and a
//! key supplies its flag only when the command line did not.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};
use demandcast_core::Error;

use crate::args::Cli;

fn config_error(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {message}", path.display()))
}

fn scalar(path: &Path, key: &str, value: &toml::Value) -> Result<String, Error> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Datetime(d) => Ok(d.to_string()),
        _ => Err(config_error(
            path,
            format!("key {key:?} must be a string, number or list of them"),
        )),
    }
}

/// Extra arguments for `subcommand` taken from the config table, skipping
/// keys already set on the command line.
fn config_args(path: &Path, subcommand: &str, matches: &ArgMatches) -> Result<Vec<OsString>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let doc: toml::Table = text.parse().map_err(|e| config_error(path, e))?;
    for key in doc.keys() {
        if !["preprocess", "crossval", "forecast", "synth"].contains(&key.as_str()) {
            return Err(config_error(path, format!("unknown table [{key}]")));
        }
    }
    let Some(table) = doc.get(subcommand) else {
        return Ok(Vec::new());
    };
    let table = table
        .as_table()
        .ok_or_else(|| config_error(path, format!("[{subcommand}] must be a table")))?;

    let command = Cli::command();
    let sub = command.find_subcommand(subcommand).expect("known subcommand");
    let sub_matches = matches.subcommand_matches(subcommand).expect("parsed subcommand");
    let mut out = Vec::new();
    for (key, value) in table {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) || (a.is_positional() && a.get_id() == key.as_str()))
            .filter(|a| a.get_id() != "config")
            .ok_or_else(|| config_error(path, format!("[{subcommand}] has no option {key:?}")))?;
        if sub_matches.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        let values = match value {
            toml::Value::Array(items) => items
                .iter()
                .map(|v| scalar(path, key, v))
                .collect::<Result<Vec<_>, _>>()?,
            v => vec![scalar(path, key, v)?],
        };
        for v in values {
            if !arg.is_positional() {
                out.push(OsString::from(format!("--{key}")));
            }
            out.push(OsString::from(v));
        }
    }
    Ok(out)
}

/// Parses the command line, folding in the `--config` file when given.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(ParseFailure::Usage)?;
    let cli = Cli::from_arg_matches(&matches).map_err(ParseFailure::Usage)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let extra = config_args(&path, cli.command.name(), &matches).map_err(ParseFailure::Config)?;
    if extra.is_empty() {
        return Ok(cli);
    }
    let mut argv = argv;
    argv.extend(extra);
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(|e| ParseFailure::Config(config_error(&path, e.render())))?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Usage)
}

pub enum ParseFailure {
    Usage(clap::Error),
    Config(Error),
}
