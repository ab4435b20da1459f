//! Line-oriented user client for a running broker.

use std::io::{BufRead, Write};
use std::path::Path;

use ris_control::{Client, ControlError, ErrorCode};
use ris_core::Codebook;

use crate::error::CliError;

pub const HELP: &str = "\
commands:
  gen <location> <algorithm>   run a search and store the result
  apply <location>             make a stored codebook live
  save <location> <file>       store a RISCB codebook file
  delete <location>            remove a stored codebook
  list                         stored location ids
  rssi                         RSSI of the live codebook
  help | quit";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplSummary {
    pub commands: usize,
    pub rejected: usize,
    /// Requests refused because another session was running.
    pub busy: usize,
}

/// Executes commands until `quit` or end of input. Rejected requests are
/// printed and the loop continues; a lost connection ends it with an error.
pub fn run_repl(client: &mut Client, input: impl BufRead, mut out: impl Write) -> Result<ReplSummary, CliError> {
    let mut summary = ReplSummary::default();
    for line in input.lines() {
        let line = line.map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else {
            continue;
        };
        if cmd.starts_with('#') {
            continue;
        }
        if matches!(cmd, "quit" | "exit") {
            break;
        }
        summary.commands += 1;
        let reply = match (cmd, args) {
            ("help", _) => Ok(HELP.to_string()),
            ("gen", [loc, alg]) => client
                .generate(loc, alg)
                .map(|g| format!("gen_done {loc} queries={} rssi_dbm={:.6}", g.queries, g.rssi_dbm)),
            ("apply", [loc]) => client.apply(loc).map(|()| "ok".into()),
            ("delete", [loc]) => client.delete(loc).map(|()| "ok".into()),
            ("save", [loc, file]) => match read_codebook(Path::new(file)) {
                Ok(cb) => client.save(loc, cb).map(|()| "ok".into()),
                Err(msg) => {
                    writeln!(out, "error: {msg}").map_err(stdout_err)?;
                    continue;
                }
            },
            ("list", []) => client
                .list()
                .map(|ids| serde_json::to_string(&ids).expect("ids serialize")),
            ("rssi", []) => client
                .rssi()
                .map(|(rssi, frames)| format!("rssi_dbm={rssi:.6} frames={frames}")),
            _ => {
                writeln!(out, "error: cannot parse {:?}; try help", line.trim()).map_err(stdout_err)?;
                continue;
            }
        };
        match reply {
            Ok(text) => writeln!(out, "{text}").map_err(stdout_err)?,
            Err(ControlError::Rejected { code, text }) => {
                summary.rejected += 1;
                if code == ErrorCode::Busy {
                    summary.busy += 1;
                }
                writeln!(out, "error {code}: {text}").map_err(stdout_err)?;
            }
            Err(e) => return Err(e.into()),
        }
        out.flush().map_err(stdout_err)?;
    }
    Ok(summary)
}

fn read_codebook(path: &Path) -> Result<Codebook, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Codebook::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}
