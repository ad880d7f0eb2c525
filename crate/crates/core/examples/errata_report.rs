//! Prints the discrepancy report.
//!
//! cargo run --release --example errata_report

fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", dcsk_alloc::cli::errata::errata_report()?);
    Ok(())
}
