//! Exhaustive minimum covering families, with and without the
//! irreducible-factor pruning rule, plus a budget-limited run.

use ffrunner::gf::FieldCtx;
use ffrunner::verify::{min_cover_with, smalld_condition, MinCoverOptions};

fn main() -> Result<(), ffrunner::Error> {
    for (q, k, d) in [
        (2u32, 1, 1),
        (3, 1, 1),
        (4, 1, 1),
        (2, 2, 2),
        (3, 2, 2),
        (2, 2, 3),
    ] {
        let f = FieldCtx::of_size(q)?;
        for factor_pruning in [true, false] {
            let opts = MinCoverOptions {
                factor_pruning,
                ..Default::default()
            };
            let r = min_cover_with(&f, k, d, &opts)?.result;
            println!(
                "q={q} k={k} D={d} pruning={factor_pruning}: min {:?}, threshold {}, {} nodes",
                r.min_size, r.conjectured, r.nodes
            );
        }
        if k > 1 {
            let c = smalld_condition(q as u64, k as u32, d as u64)?;
            println!(
                "  small-degree condition {}/{} > {}: {}",
                c.lhs.num, c.lhs.den, c.rhs, c.holds
            );
        }
    }
    let f3 = FieldCtx::of_size(3)?;
    let capped = MinCoverOptions {
        node_cap: 4,
        ..Default::default()
    };
    let r = min_cover_with(&f3, 2, 2, &capped)?.result;
    println!(
        "node cap 4 at q=3, k=2: exact {}, lower bound {}",
        r.exact, r.lower_bound
    );
    Ok(())
}
