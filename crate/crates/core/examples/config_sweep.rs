//! Drives the command-line front end from a config file.
//!
//! cargo run --release --example config_sweep

use std::io::Write;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("dcsk-config-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("sweep.cfg");
    let mut f = std::fs::File::create(&cfg)?;
    writeln!(f, "# equal-power sweep at M=32")?;
    writeln!(f, "m=32")?;
    writeln!(f, "beta=64")?;
    writeln!(f, "p=1,2")?;
    writeln!(f, "ebn0-db=0:5:15")?;
    drop(f);

    let cfg = cfg.to_string_lossy().into_owned();
    let csv = dir.join("optimal.csv").to_string_lossy().into_owned();
    let args = ["dcsk-alloc", "optimal-n", "--config", &cfg, "--out", &csv];
    let code = dcsk_alloc::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    println!("exit code {code}");
    print!("{}", std::fs::read_to_string(&csv)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
