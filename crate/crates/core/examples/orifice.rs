//! Orifice hydraulics for the three calibrated nozzles.
//!
//! ```text
//! cargo run --example orifice
//! ```

use leakscope::hydraulics::{discharge_coefficient, jet_velocity, leak_flow};
use leakscope::model::{FluidSpec, LeakClass, NozzleSpec};

fn main() -> leakscope::Result<()> {
    let fuel = FluidSpec::fuel();
    println!("fluid: {} kg/m3, c = {} m/s", fuel.density_kg_m3, fuel.sound_speed_m_s);
    println!("class   area_mm2  dp_bar  v_jet_m_s  flow_l_min");
    for class in [LeakClass::Small, LeakClass::Medium, LeakClass::Large] {
        let nozzle = NozzleSpec::circular(class.nominal_area_mm2().expect("hole class"))?;
        for dp_bar in [3.0, 4.0, 5.0] {
            let dp = dp_bar * 1e5;
            let v = jet_velocity(dp, fuel.density_kg_m3)?;
            let q = leak_flow(nozzle.discharge_coefficient, nozzle.area_m2(), dp, fuel.density_kg_m3)?;
            println!(
                "{:<7} {:>8}  {dp_bar:>6}  {v:>9.2}  {:>10.2}",
                class.as_str(),
                nozzle.area_mm2,
                q * 60_000.0
            );
        }
    }

    // Back out C_d from a measured flow. A value above 1 is flagged.
    let measured = 9.5e-3 / 60.0;
    let c_d = discharge_coefficient(measured, 12.56e-6, fuel.density_kg_m3, 4e5)?;
    println!("measured 9.5 l/min through 12.56 mm2 at 4 bar: C_d = {:.3} (physical: {})", c_d.value, c_d.physical);
    Ok(())
}
