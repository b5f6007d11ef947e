use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use saffron_core::format::{format_float, Precision};
use saffron_core::offline::{bh, storey_bh};
use saffron_core::simulation::{sweep, write_csv};
use saffron_core::{GammaSequence, OnlineProcedure, PValue};

use crate::config::{Method, OfflineSettings, StreamSettings, SweepSettings};
use crate::error::CliError;

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>, CliError> {
    match path {
        None => Ok(Box::new(io::stdin().lock())),
        Some(p) if p == Path::new("-") => Ok(Box::new(io::stdin().lock())),
        Some(p) => File::open(p)
            .map(|f| Box::new(BufReader::new(f)) as Box<dyn BufRead>)
            .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", p.display()))),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display()))),
    }
}

fn parse_pvalue(line: &str) -> Result<PValue, String> {
    let x: f64 = line
        .parse()
        .map_err(|_| format!("not a number: {line:?}"))?;
    PValue::new(x).map_err(|e| e.to_string())
}

pub fn run_sweep(settings: &SweepSettings, verbose: bool) -> Result<(), CliError> {
    let grid = &settings.grid;
    let cells = grid.procedures.len() * grid.gammas.len() * grid.pi1.len();
    if verbose {
        eprintln!(
            "sweep: {cells} cells x {} trials, T = {}, model {}",
            grid.trials, grid.horizon, grid.model
        );
    }
    let started = Instant::now();
    let rows = match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| sweep(grid)),
        None => sweep(grid),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = open_output(settings.out.as_deref())?;
    write_csv(&rows, &mut out, settings.precision)?;
    out.flush()?;
    if verbose {
        eprintln!("sweep: done in {:.1?}", started.elapsed());
    }
    Ok(())
}

/// Decides each line as it arrives. Returns whether any line was rejected
/// as malformed.
pub fn decide_stream(
    procedure: &mut dyn OnlineProcedure,
    input: impl BufRead,
    mut out: impl Write,
    mut diagnostics: impl Write,
    precision: Precision,
) -> io::Result<bool> {
    let mut bad_lines = false;
    for (n, line) in input.lines().enumerate() {
        // Fixed before the line is even parsed.
        let level = procedure.next_level();
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let p = match parse_pvalue(text) {
            Ok(p) => p,
            Err(msg) => {
                writeln!(diagnostics, "line {}: {msg}; skipped", n + 1)?;
                bad_lines = true;
                continue;
            }
        };
        let r = procedure.observe(p).expect("level fixed above");
        debug_assert_eq!(r.alpha, level.alpha);
        writeln!(
            out,
            "{},{},{},{},{}",
            r.index,
            format_float(r.alpha, precision),
            format_float(r.lambda, precision),
            r.rejected as u8,
            r.candidate as u8
        )?;
        out.flush()?;
    }
    Ok(bad_lines)
}

pub fn run_stream(settings: &StreamSettings) -> Result<(), CliError> {
    let gamma = GammaSequence::new(settings.gamma)?;
    let mut procedure = settings
        .procedure
        .build(settings.alpha, settings.w0, &gamma)?;
    let input = open_input(settings.input.as_deref())?;
    let bad = decide_stream(
        procedure.as_mut(),
        input,
        io::stdout().lock(),
        io::stderr().lock(),
        settings.precision,
    )?;
    if bad {
        return Err(CliError::Runtime("some input lines were skipped".into()));
    }
    Ok(())
}

pub fn run_offline(settings: &OfflineSettings) -> Result<(), CliError> {
    let input = open_input(settings.input.as_deref())?;
    let mut pvalues = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let p = parse_pvalue(text)
            .map_err(|msg| CliError::Runtime(format!("line {}: {msg}", n + 1)))?;
        pvalues.push(p);
    }
    let result = match settings.method {
        Method::Bh => bh(&pvalues, settings.alpha),
        Method::Storey => storey_bh(&pvalues, settings.alpha, settings.lambda),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut out = open_output(settings.out.as_deref())?;
    writeln!(out, "index,p,reject")?;
    let mut rejected = result.rejected.iter().peekable();
    for (i, p) in pvalues.iter().enumerate() {
        let hit = rejected.next_if_eq(&&i).is_some();
        writeln!(
            out,
            "{},{},{}",
            i + 1,
            format_float(p.get(), settings.precision),
            hit as u8
        )?;
    }
    out.flush()?;
    eprintln!(
        "{}: threshold {}, pi0 {}, {} of {} rejected",
        settings.method.name(),
        format_float(result.threshold, settings.precision),
        format_float(result.pi0, settings.precision),
        result.rejected.len(),
        pvalues.len()
    );
    Ok(())
}
