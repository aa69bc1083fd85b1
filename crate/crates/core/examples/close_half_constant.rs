//! The constant `(3 - max g) / 6` for the quartic `g` on `[0, 1]`, at
//! several grid resolutions.

use ffrunner::verify::close_half_constant;

fn main() -> Result<(), ffrunner::Error> {
    for resolution in [1_000, 10_000, 100_000] {
        let c = close_half_constant(resolution)?;
        println!(
            "grid {resolution}: max g = {:.10} at {:.10}, constant {:.10} (rounded {:.4})",
            c.g_max, c.lambda, c.constant, c.constant
        );
    }
    Ok(())
}
