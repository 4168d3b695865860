//! Compile a tiny regression problem into a QUBO and print its pieces.

use qregress::{build_qubo, precision_matrix, Dataset, PrecisionVector};

fn main() -> qregress::Result<()> {
    let ds = Dataset::from_features(&[vec![1.0], vec![2.0], vec![3.0]], &[2.5, 3.0, 3.5])?;
    let p = PrecisionVector::new(vec![0.25, 0.5, 1.0])?;

    let pm = precision_matrix(&p, ds.d_plus_1())?;
    println!("precision matrix ({}x{}):", pm.rows(), pm.cols());
    for row in pm.to_rows() {
        println!("  {row:?}");
    }

    let q = build_qubo(&ds, &p)?;
    println!(
        "QUBO with M = {} variables, offset YᵀY = {}",
        q.m(),
        q.offset()
    );
    println!("linear term b = {:?}", q.b());
    for (i, j, v) in q.upper_triangle().into_iter().take(8) {
        println!("  coupling ({i},{j}) = {v}");
    }
    Ok(())
}
