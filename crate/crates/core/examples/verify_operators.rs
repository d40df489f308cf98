//! Checks the operator identities and inequalities of the power-law drift on
//! a random corpus and prints the worst case of each check.

use powerlaw_lab::fluid::{fit_constants, random_corpus, verify_corpus, FluidParams, OperatorConstants};
use powerlaw_lab::spectral::GridSpec;

fn main() -> powerlaw_lab::Result<()> {
    let p: f64 = std::env::args().nth(1).map_or(Ok(1.7), |s| s.parse()).expect("p must be a number");
    let n = 5;
    let params = FluidParams::new(p, 1.0)?;
    let grid = GridSpec::for_cutoff(n)?;
    let corpus = random_corpus(n, 60, 7)?;
    let fitted = fit_constants(&corpus, &grid, &params)?;
    let constants = OperatorConstants { monotone: OperatorConstants::analytic_monotone(&params), ..fitted };
    let result = verify_corpus(&corpus, &grid, &params, &constants)?;
    println!("p = {p}, {} states", result.states);
    for c in &result.checks {
        println!(
            "{:<28} {:>4} pass {:>3} fail {:>3} inconclusive  worst lhs {:+.3e} rhs {:+.3e}{}",
            c.check_name,
            c.passed,
            c.failed,
            c.inconclusive,
            c.worst.lhs,
            c.worst.rhs,
            if c.gating { "" } else { "  (informational)" }
        );
    }
    println!("all gating checks pass: {}", result.all_pass());
    Ok(())
}
