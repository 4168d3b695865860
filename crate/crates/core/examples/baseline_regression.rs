//! Classical least squares on generated data, including a rank-deficient
//! design where the minimum-norm solution is returned.

use qregress::{generate, regression_error, solve_analytical, Dataset, GenSpec, PrecisionVector};

fn main() -> qregress::Result<()> {
    let p = PrecisionVector::new(vec![-1.0, 0.5, 1.0])?;
    let spec = GenSpec::new(500, 3, p).with_seed(1).with_noise(0.1);
    let data = generate(&spec)?;
    let w = solve_analytical(&data.dataset)?;
    println!("truth     {:?}", data.weights.as_slice());
    println!("estimate  {:?}", w.as_slice());
    println!("error     {:.4}", regression_error(&data.dataset, &w)?);

    // second feature duplicates the first
    let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
    let y: Vec<f64> = (0..5).map(|i| 2.0 * i as f64 + 1.0).collect();
    let ds = Dataset::from_features(&rows, &y)?;
    let w = solve_analytical(&ds)?;
    println!(
        "duplicated columns -> {:?} (error {:.2e})",
        w.as_slice(),
        regression_error(&ds, &w)?
    );
    Ok(())
}
