use ceo_core::model::*;
use ceo_core::spectra::*;
use ceo_core::units::TWO_PI;

fn main() {
    for (ee, eo) in [(0.41, 0.22), (0.5, 0.3), (0.6, 0.4), (0.41, 0.3)] {
        let cfg = SystemConfig {
            mode_e: ModeParams::new(TWO_PI * 11e6, ee, 0.0).unwrap(),
            mode_o: ModeParams::new(TWO_PI * 28e6, eo, 0.0).unwrap(),
            mode_t: ModeParams::new(TWO_PI * 28e6, 0.3, 0.0).unwrap(),
            mode_tm: ModeParams::new(TWO_PI * 28e6, 0.0, 0.0).unwrap(),
            pump: PumpParams { kappa_p: TWO_PI * 28e6, eta_p: 0.5, delta_p: 0.0,
                drive_amplitude: 9.437e8, g0: TWO_PI * 37.0, j_coupling: TWO_PI * 44e6 },
            bath: BathOccupancy { n_e_int: 0.07, n_e_wg: 0.0 },
        };
        let g = cfg.coupling_g();
        let c = cfg.cooperativity();
        let tm = build_transfer_matrices(&cfg, g).unwrap();
        let eng = ConvolutionEngine::new(&cfg, &tm, &[0.0], 200e-9).unwrap();
        let cm = eng.covariance_at(0.0).unwrap();
        let v13 = (cm.vtilde_13().powi(2) + cm.vtilde_14().powi(2)).sqrt();
        let duan = cm.vbar_11() + cm.vbar_33() - 2.0 * v13;
        println!("eta_e={ee} eta_o={eo} C={c:.4}: V11={:.4} V33={:.4} V13={:.4} Duan-={duan:.4}",
            cm.vbar_11(), cm.vbar_33(), v13);
        // unfiltered too
        let cu = quadrature_spectrum(&tm, 0.0).unwrap();
        println!("   unfiltered: V11={:.4} V33={:.4} V13={:.4}", cu[(0,0)], cu[(2,2)], cu[(0,2)]);
    }
}
