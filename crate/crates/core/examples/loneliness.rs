//! Loneliness of a few speed sets, computed by coverage and by direct
//! enumeration of Laurent tails.

use ffrunner::covering::loneliness;
use ffrunner::gf::FieldCtx;
use ffrunner::laurent::loneliness_direct;
use ffrunner::poly::Poly;

fn main() -> Result<(), ffrunner::Error> {
    let f3 = FieldCtx::of_size(3)?;
    for text in [
        "1,T,T+1,T+2",
        "1,T",
        "T^2+1,T^2+T+2,T",
        "1,T,T+1,T+2,T^2,T^2+1",
    ] {
        let speeds = text
            .split(',')
            .map(|s| Poly::parse(&f3, s))
            .collect::<Result<Vec<_>, _>>()?;
        let a = loneliness(&speeds)?;
        let b = loneliness_direct(&speeds)?;
        println!(
            "{{{text}}} over F_3: loneliness 3^-{} (direct 3^-{}), witness tail {:?}",
            a.exponent,
            b.exponent,
            a.witness.coeffs()
        );
    }
    Ok(())
}
