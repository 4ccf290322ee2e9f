//! Fit the jet-noise law `SPL = dp * A^n * k` to noisy level readings and
//! use it to size holes.

use leakscope::hydraulics::{fit_spl_model, spl_forward, spl_invert_area, SplSample};
use leakscope::model::{LeakClass, SplModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> leakscope::Result<()> {
    let truth = SplModel::new(1.5, 1.5e-3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut samples = Vec::new();
    for area in [5.06, 12.56, 31.65] {
        for dp in [3.0, 4.0, 5.0] {
            let z: f64 = rng.sample(StandardNormal);
            let spl = spl_forward(dp, area, &truth)? * (1.0 + 0.05 * z);
            samples.push(SplSample::new(dp, area, spl)?);
        }
    }
    let model = fit_spl_model(&samples)?;
    println!(
        "fitted n = {:.4}, k = {:.4e}, log rms {:.4} over {} samples",
        model.n, model.k, model.fit_residual_rms, model.sample_count
    );

    for spl in [0.05, 0.2, 1.0] {
        let area = spl_invert_area(spl, 4.0, &model)?;
        println!("{spl} kPa at 4 bar -> {area:.2} mm2 ({})", LeakClass::nearest(area).as_str());
    }

    let one_area: Vec<SplSample> = samples.iter().filter(|s| s.area_mm2 == 12.56).copied().collect();
    if let Err(e) = fit_spl_model(&one_area) {
        println!("single area: {e}");
    }
    Ok(())
}
