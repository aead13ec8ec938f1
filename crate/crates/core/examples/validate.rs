//! Runs the acceptance criteria and prints one line per criterion.
//!
//! ```text
//! cargo run --release --example validate
//! ```

fn main() {
    let report = bec2::validation::run_all();
    for c in &report.criteria {
        println!("{}", c.line());
        println!("       {}", c.detail);
    }
    std::process::exit(if report.passed { 0 } else { 1 });
}
