//! Stub scorer process for protocol tests.
//!
//! ```text
//! echo-scorer [--name N] [--p P | --model FILE] [--reverse K]
//!             [--exit-after K] [--stall-after K] [--protocol V] [--mangle-ids]
//! ```

use std::io::{stdin, stdout, BufWriter};
use std::process::ExitCode;

use supportive::linear::TextClassifier;
use supportive::scorer::serve::{StubScore, StubServer};

fn parse() -> Result<StubServer, String> {
    let mut server = StubServer::new("echo", StubScore::Constant(0.5));
    let mut args = std::env::args().skip(1);
    while let Some(flag) = args.next() {
        let mut value = || args.next().ok_or_else(|| format!("{flag} needs a value"));
        let num = |s: String| s.parse::<usize>().map_err(|e| format!("{s}: {e}"));
        match flag.as_str() {
            "--name" => server.name = value()?,
            "--p" => {
                server.score =
                    StubScore::Constant(value()?.parse().map_err(|e| format!("--p: {e}"))?)
            }
            "--model" => {
                let m = TextClassifier::load(value()?).map_err(|e| e.to_string())?;
                server.score = StubScore::Model(Box::new(m));
            }
            "--reverse" => server.faults.reverse_window = num(value()?)?,
            "--exit-after" => server.faults.exit_after = Some(num(value()?)?),
            "--stall-after" => server.faults.stall_after = Some(num(value()?)?),
            "--protocol" => server.faults.protocol = Some(num(value()?)? as u64),
            "--mangle-ids" => server.faults.mangle_ids = true,
            other => return Err(format!("unknown argument `{other}`")),
        }
    }
    Ok(server)
}

fn main() -> ExitCode {
    let server = match parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("echo-scorer: {e}");
            return ExitCode::from(2);
        }
    };
    match server.serve(stdin().lock(), BufWriter::new(stdout().lock())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("echo-scorer: {e}");
            ExitCode::FAILURE
        }
    }
}
