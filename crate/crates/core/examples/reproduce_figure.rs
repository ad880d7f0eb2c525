//! Writes the CSV behind one figure, the same rows as the `figure` command.
//!
//! cargo run --release --example reproduce_figure -- [id] [out.csv]

use dcsk_alloc::cli::config::ExperimentConfig;
use dcsk_alloc::cli::csv::render;
use dcsk_alloc::cli::figures::{figure_rows, parse_figure_id};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id = parse_figure_id(args.first().map_or("4", String::as_str))?;
    let rows = figure_rows(id, &ExperimentConfig::default())?;
    let text = render(&rows);
    match args.get(1) {
        Some(path) => {
            std::fs::write(path, &text)?;
            println!("figure={id} rows={} out={path}", rows.len());
        }
        None => print!("{text}"),
    }
    Ok(())
}
