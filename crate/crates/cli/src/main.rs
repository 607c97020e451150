mod args;
mod report;
mod run;

use std::time::Instant;

use clap::Parser;

use args::Cli;
use report::Report;

fn main() {
    let cli = Cli::parse();

    // WITTEN_THREADS caps the rayon worker pool for every parallel sweep.
    if let Ok(spec) = std::env::var("WITTEN_THREADS") {
        if let Ok(n) = spec.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }

    let started = Instant::now();
    let exit = match run::execute(&cli.command, cli.seed, cli.out.as_deref()) {
        Ok(outcome) => {
            let report = Report::new(
                outcome.config,
                outcome.results,
                outcome.verdict.clone(),
                started.elapsed().as_millis(),
            );
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(exit);
}

fn emit(cli: &Cli, report: &Report) -> witten_core::Result<()> {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        println!("{}", report.verdict);
    }
    if let Some(path) = &cli.out {
        // `spectrum` writes its CSV at --out; everything else gets the JSON
        // report there.
        let is_csv = path.extension().is_some_and(|e| e == "csv");
        if !is_csv {
            std::fs::write(path, serde_json::to_string_pretty(report)?)?;
        }
    }
    Ok(())
}
