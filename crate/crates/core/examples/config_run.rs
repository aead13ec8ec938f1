//! Loads a TOML run configuration, prints the resolved echo and runs the
//! `diffract` and `index` commands into a scratch directory.
//!
//! ```text
//! cargo run --example config_run -- crates/core/examples/configs/mixture.toml
//! ```

use std::sync::atomic::AtomicBool;

use bec2::cli::{self, Context};

fn main() -> bec2::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/mixture.toml").into());
    let cfg = cli::load_config(path.as_ref())?;
    println!("# config hash {}", cfg.hash());
    print!("{}", cfg.echo());

    let cancel = AtomicBool::new(false);
    let out = std::env::temp_dir().join("bec2-config-run");
    let ctx = Context {
        out: out.clone(),
        format: None,
        jobs: 1,
        cancel: &cancel,
    };
    let summary = cli::cmd_diffract(&cfg, &ctx)?;
    if let Some(d) = &summary.derived {
        println!("n = {:.6}, tau = {:?}, separated = {}", d.refractive_index, d.taus, d.separated);
    }
    for f in &summary.files {
        println!("{}  {}", &f.sha256[..16], f.path);
    }
    for w in &summary.warnings {
        println!("warning: {w}");
    }
    println!("output in {}", out.display());
    Ok(())
}
