//! Write a QUBO in coordinate-list form, read it back and check that the
//! exhaustive solution is unchanged.

use qregress::{build_qubo, generate, solve_exhaustive, GenSpec, PrecisionVector, Qubo};

fn main() -> qregress::Result<()> {
    let p = PrecisionVector::new(vec![-1.0, 0.5, 1.0])?;
    let data = generate(&GenSpec::new(30, 3, p.clone()).with_seed(4).with_noise(0.3))?;
    let q = build_qubo(&data.dataset, &p)?;

    let coo = q.to_coo_string();
    println!("{}", coo.lines().take(5).collect::<Vec<_>>().join("\n"));
    println!("... {} lines", coo.lines().count());

    let back = Qubo::from_coo_str(&coo)?;
    let (a, b) = (solve_exhaustive(&q)?.best, solve_exhaustive(&back)?.best);
    println!("in-process {:?} {}", a.bits, a.energy);
    println!("re-imported {:?} {}", b.bits, b.energy);
    assert_eq!(a, b);
    Ok(())
}
