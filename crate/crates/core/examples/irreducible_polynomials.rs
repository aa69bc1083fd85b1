//! Monic irreducibles over F_q: the counting formula against enumeration,
//! and factorization of a sample polynomial.

use ffrunner::gf::FieldCtx;
use ffrunner::poly::{count_irreducible, enumerate_monic, MonicSet, Poly};

fn main() -> Result<(), ffrunner::Error> {
    for q in [2u32, 3, 4] {
        let f = FieldCtx::of_size(q)?;
        for m in 1..=4u32 {
            let listed = enumerate_monic(&f, MonicSet::Irreducible(m as usize))?.len();
            println!(
                "q={q} m={m}: formula {} enumerated {listed}",
                count_irreducible(m, q as u64)?
            );
        }
    }
    let f2 = FieldCtx::of_size(2)?;
    let g = Poly::parse(&f2, "T^6+T^5+T^4+T^3+T^2+T+1")?;
    let factors: Vec<String> = g
        .factor()?
        .iter()
        .map(|(h, e)| format!("({h})^{e}"))
        .collect();
    println!("{g} = {}", factors.join(" "));
    Ok(())
}
