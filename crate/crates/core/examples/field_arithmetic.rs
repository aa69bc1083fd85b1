//! Arithmetic in F_q, including the extension fields F_4, F_8 and F_9.

use ffrunner::gf::{FieldCtx, FieldOp};

fn main() -> Result<(), ffrunner::Error> {
    for (p, e) in [(2, 2), (2, 3), (3, 2)] {
        let f = FieldCtx::new(p, e)?;
        println!(
            "F_{} modulus (ascending) {:?}",
            f.q(),
            f.modulus().unwrap_or(&[])
        );
        let g = f
            .elements()
            .find(|&a| a > 1 && (1..f.q() - 1).all(|n| f.pow(a, n as u64) != 1));
        if let Some(g) = g {
            let powers: Vec<u32> = (0..f.q() - 1).map(|n| f.pow(g, n as u64)).collect();
            println!("  generator {g}, powers {powers:?}");
        }
        let a = f.q() - 1;
        println!(
            "  {a} + 1 = {}, {a} * {a} = {}, {a}^-1 = {}",
            f.op(FieldOp::Add, a, Some(1))?,
            f.op(FieldOp::Mul, a, Some(a))?,
            f.inv(a)?
        );
    }
    Ok(())
}
