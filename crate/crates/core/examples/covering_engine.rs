//! The covering engine: kernels of circulant matrices, coverage of F_q^{D+k}
//! and the per-speed count of newly covered points.

use ffrunner::covering::{circulant, covers_with, kernel, CoverageOptions};
use ffrunner::gf::FieldCtx;
use ffrunner::poly::{enumerate_monic, MonicSet, Poly};

fn main() -> Result<(), ffrunner::Error> {
    let f2 = FieldCtx::of_size(2)?;
    let f = Poly::parse(&f2, "T^2+T+1")?;
    let a = circulant(&f, 2, 2)?;
    println!("rows of the level-2 matrix of {f}: {:?}", a.rows());
    println!("kernel basis: {:?}", kernel(&f, 2, 2)?.basis());

    let f3 = FieldCtx::of_size(3)?;
    let family = enumerate_monic(&f3, MonicSet::UpToDegree(2))?;
    let opts = CoverageOptions {
        threads: 2,
        ..Default::default()
    };
    for k in 1..=3 {
        let r = covers_with(&family, k, None, &opts)?;
        println!(
            "all 13 monic of degree <= 2 over F_3, k={k}: covers {} ({} points), witness {:?}",
            r.covers_all, r.covered_count, r.uncovered_witness
        );
        if k == 2 {
            println!("  new points per speed: {:?}", r.per_polynomial_new);
        }
    }
    Ok(())
}
