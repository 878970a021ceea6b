mod commands;
mod config;
mod error;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Arg, ArgAction, Command};

use config::{load_config, lookup, FileValues, Resolved};
use error::CliError;

fn cli() -> Command {
    let mut root = Command::new("wicklab")
        .version(wicklab_core::VERSION)
        .about("Experiments on Wick-renormalized random wave fields")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in commands::COMMANDS {
        let mut sub = Command::new(cmd.name).about(cmd.about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("flat key = value file; flags override it"),
        );
        for &name in cmd.keys {
            let key = lookup(name).expect("registered key");
            let help = match key.default {
                Some(d) => format!("{} [default: {d}]", key.help),
                None => key.help.to_string(),
            };
            sub = sub.arg(
                Arg::new(name)
                    .long(name)
                    .value_name("VALUE")
                    .action(ArgAction::Set)
                    .help(help),
            );
        }
        root = root.subcommand(sub);
    }
    root
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("WICKLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("WICKLAB_THREADS = {v:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(args: Vec<OsString>) -> Result<(), CliError> {
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text).trim_end().to_string();
            return Err(CliError::Usage(text));
        }
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let cmd = commands::find(name).expect("registered subcommand");
    let file = match sub.get_one::<String>("config") {
        Some(path) => load_config(&PathBuf::from(path))?,
        None => FileValues::default(),
    };
    let flags: BTreeMap<&'static str, String> = cmd
        .keys
        .iter()
        .filter_map(|&k| sub.get_one::<String>(k).map(|v| (k, v.clone())))
        .collect();
    let resolved = Resolved::new(name, cmd.keys, &file, &flags);
    for &k in cmd.keys {
        resolved.raw(k)?;
    }
    threads()?;
    println!("# wicklab {} {name}", wicklab_core::VERSION);
    for line in resolved.serialize().lines() {
        println!("# {line}");
    }
    (cmd.run)(&resolved)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
