use mkm_core::calibration::s_series;
use mkm_core::frobenius::{FrobeniusPoint, ModelParams};
use mkm_core::periods::CycleTag;
use mkm_core::phase::phase_factor_infinity;
use mkm_core::scalar::{C64, Rat, Tol};
use mkm_core::symfrob::SymbolicModel;
use mkm_core::scalar::Field;

fn main() {
    let params = ModelParams::new(1, 1, Rat::from_i64(1)).unwrap();
    let model = SymbolicModel::build(&params).unwrap();
    let s = s_series(&model, 8).unwrap();
    let cp = ModelParams::new(1, 1, C64::new(1.0, 0.0)).unwrap();
    let pt = FrobeniusPoint::build(&cp, &[C64::new(0.05, 0.0), C64::new(0.03, 0.0)]).unwrap();
    for tag in [CycleTag::A(1), CycleTag::B(2)] {
        let rep = phase_factor_infinity(&pt, &model, &s, 25.0, tag, Tol::new(1e-9)).unwrap();
        println!("{tag:?}: int {:?} form {:?} resid {:.3e} qerr {:.3e}",
                 rep.integral, rep.form_value, rep.residual, rep.quad_error);
    }
}
