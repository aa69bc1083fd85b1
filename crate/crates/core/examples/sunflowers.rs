//! Maximum codimension-4 sunflowers at level 2, their classification and
//! the split of the remaining speeds.

use ffrunner::gf::FieldCtx;
use ffrunner::poly::{enumerate_monic, MonicSet, Poly};
use ffrunner::sunflower::{construction, is_sunflower, max_sunflower, size_bound};

fn main() -> Result<(), ffrunner::Error> {
    for q in [2u32, 3, 4] {
        let f = FieldCtx::of_size(q)?;
        let family = enumerate_monic(&f, MonicSet::UpToDegree(2))?;
        let s = max_sunflower(&family, None)?.expect("codimension-4 pairs exist");
        let petals: Vec<String> = s.petals.iter().map(ToString::to_string).collect();
        println!(
            "q={q}: maximum size {} (bound {}), types {:?}",
            s.n(),
            size_bound(q),
            s.classification.types
        );
        println!("  petals {petals:?}");
        println!(
            "  |S'| = {}, |S''| = {}",
            s.decomposition.s_prime.len(),
            s.decomposition.s_double_prime.len()
        );
    }
    let f5 = FieldCtx::of_size(5)?;
    let p = Poly::parse(&f5, "T+2")?;
    let built = construction(&f5, &p)?;
    let core = is_sunflower(&built, 3)?.expect("construction is a sunflower");
    println!(
        "(T+2) times the construction over F_5: {} petals, core codimension {}",
        built.len(),
        core.codim()
    );
    println!(
        "{}",
        serde_json::to_string(&max_sunflower(&built, Some(3))?.map(|s| s.to_json())).unwrap()
    );
    Ok(())
}
