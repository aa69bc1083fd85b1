//! Contribution bounds for runners outside a maximum sunflower: the bound
//! against the petals and the staged bound along a change-point order.

use ffrunner::gf::FieldCtx;
use ffrunner::sunflower::{change_point_order, contribution_bound_check, max_sunflower, BoundMode};
use ffrunner::verify::planted_instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), ffrunner::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f3 = FieldCtx::of_size(3)?;
    for _ in 0..3 {
        let family = planted_instance(&mut rng, &f3, 4)?;
        let s = max_sunflower(&family, Some(4))?.expect("planted sunflower");
        let (order, change) = change_point_order(&family, &s)?;
        println!(
            "family of {} with a sunflower of {}; change point at {}",
            order.len(),
            s.n(),
            change + 1
        );
        for f in &order[s.n()..] {
            let a = contribution_bound_check(&order, &s, f, BoundMode::AgainstSunflower)?;
            let line = format!("  {f}: {} new vs petals (bound {})", a.actual, a.bound);
            if s.n() <= 3 {
                let b = contribution_bound_check(&order, &s, f, BoundMode::Staged)?;
                println!(
                    "{line}; {} new in order (bound {}, t {:?})",
                    b.actual, b.bound, b.t
                );
            } else {
                println!("{line}");
            }
        }
    }
    Ok(())
}
