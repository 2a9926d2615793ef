use mkm_core::calibration::{s_series, w_form};
use mkm_core::frobenius::{flat_metric, FrobeniusPoint, ModelParams};
use mkm_core::mat::{bilinear, Mat};
use mkm_core::periods::{one_point_tower, RootTracker};
use mkm_core::phase::pairing_i0;
use mkm_core::scalar::{C64, Field, Rat};
use mkm_core::symfrob::SymbolicModel;

fn c(x: f64) -> C64 { C64::new(x, 0.0) }

fn main() {
    let params = ModelParams::new(1, 1, Rat::from_i64(1)).unwrap();
    let model = SymbolicModel::build(&params).unwrap();
    let s = s_series(&model, 8).unwrap();
    let w = w_form(&model, &s).unwrap();
    let cp = ModelParams::new(1, 1, c(1.0)).unwrap();
    let pt = FrobeniusPoint::build(&cp, &[c(0.05), c(0.03)]).unwrap();
    let g: Mat<C64> = flat_metric(1, 1);
    let ord = s.order();

    // evaluate candidate form values at lam
    let form = |lam: f64, variant: usize| -> C64 {
        let tr = RootTracker::init_standard(&pt, c(lam)).unwrap();
        let tow = one_point_tower(&pt, &tr, 0, -1, ord as i64).unwrap();
        let mut acc = c(0.0);
        for kk in 0..ord {
            for ll in 0..ord {
                if kk + ll + 1 > ord { continue; }
                let wkl = model.eval_mat(&w[kk][ll], &pt.tau, &pt.qtilde);
                let vl = tow.mode(ll as i64).to_vec();
                let vk = tow.mode(kk as i64).to_vec();
                let sgn = match variant {
                    0 => if (kk + ll) % 2 == 0 { 1.0 } else { -1.0 },
                    1 => 1.0,
                    _ => unreachable!(),
                };
                acc += bilinear(&g, &vk, &wkl.mul_vec(&vl)) * sgn;
            }
        }
        acc
    };
    let lam = 25.0;
    let h = 1e-4;
    let tr = RootTracker::init_standard(&pt, c(lam)).unwrap();
    let pair = pairing_i0(&pt, &tr, 0, 0);
    println!("integrand -(I0,I0) = {:?}", -pair);
    for variant in 0..2usize {
        let fd = (form(lam + h, variant) - form(lam - h, variant)) / c(2.0 * h);
        println!("variant {variant}: dW/dlam = {fd:?}, value = {:?}", form(lam, variant));
    }
}
