mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

use config::{CliError, RunConfig};
use output::{append_manifest, write_csv, Destination, ManifestEntry};

fn cli() -> Command {
    let mut app = Command::new("bcslab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical BCS gap equation, critical temperature and Ginzburg-Landau laboratory")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("read `key = value` parameters from FILE (flags take precedence)"),
        );
    for c in config::commands() {
        let mut sub = Command::new(c.name).about(c.about);
        for k in &c.keys {
            let mut arg = Arg::new(k.name)
                .long(k.name)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(k.help);
            if let Some(d) = k.default {
                arg = arg.default_value(d);
            }
            sub = sub.arg(arg);
        }
        app = app.subcommand(sub);
    }
    app
}

/// Values given explicitly on the command line.
fn explicit_flags(m: &ArgMatches) -> BTreeMap<String, String> {
    m.ids()
        .filter(|id| id.as_str() != "config" && m.value_source(id.as_str()) == Some(ValueSource::CommandLine))
        .filter_map(|id| {
            m.get_one::<String>(id.as_str())
                .map(|v| (id.as_str().to_string(), v.clone()))
        })
        .collect()
}

fn resolve(name: &str, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let cmds = config::commands();
    let cmd = cmds.iter().find(|c| c.name == name).expect("registered subcommand");
    let file = match m.get_one::<String>("config") {
        Some(p) => config::read_config_file(&PathBuf::from(p))?,
        None => BTreeMap::new(),
    };
    RunConfig::resolve(cmd, &file, &explicit_flags(m))
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = match resolve(name, sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bcslab: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let dest = Destination::from_config(&cfg);
    let start = Instant::now();
    let result = commands::run(&cfg).and_then(|out| {
        let text = out.table.to_csv()?;
        match &dest.csv {
            Some(p) => write_csv(p, &text)?,
            None => print!("{text}"),
        }
        Ok(out)
    });
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(path) = &dest.manifest {
        let (tolerances, rows) = match &result {
            Ok(o) => (o.tolerances.clone(), o.table.rows.len()),
            Err(_) => (serde_json::Value::Null, 0),
        };
        let entry = ManifestEntry {
            cfg: &cfg,
            tolerances,
            elapsed,
            rows,
            csv: dest.csv.as_deref(),
            status: result.as_ref().map(|_| ()),
        };
        if let Err(e) = append_manifest(path, &entry.to_json()) {
            eprintln!("bcslab: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    match result {
        Ok(o) if o.success => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bcslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
