use nchp_core::boundary::*;
use nchp_core::hermitian::*;
use nchp_core::ncfunc::*;
use nchp_core::schwarz_pick::*;
use nchp_core::sampling;

fn main() {
    // debug 1: identity density
    let f = NCFunction::identity();
    let mut rng = sampling::sample_rng(300, 0);
    let v = sampling::positive_definite(&mut rng, 2);
    let alpha = sampling::gaussian_hermitian(&mut rng, 2);
    let probe = BoundaryProbe::new(alpha, v.clone(), Schedule::default(), 0.0).unwrap();
    let rep = estimate_c(&f, &probe).unwrap();
    println!("identity density: status {:?}, converged {}, residual {:.3e}, dev {:.3e}",
        rep.status, rep.converged, rep.residual,
        (&rep.limit - v.as_cmatrix()).fro_norm());
    println!("extrapolants len {}", rep.extrapolants.len());
    for (k, (y, val)) in rep.samples.iter().enumerate().take(3) {
        println!("  sample {k}: y={y:.3e} dev from v = {:.3e}", (val - v.as_cmatrix()).fro_norm());
    }

    // debug 2: second order margin at the scalar example
    let f = NCFunction::neg_inverse();
    let i_pt = HalfPlanePoint::scalar(c64(0.0, 1.0)).unwrap();
    let c = CMatrix::scalar(c64(0.1, 0.0));
    let b = CMatrix::scalar(c64(0.1, 0.0));
    let m12 = second_order_margin(&f, &i_pt, &i_pt, &i_pt, &c, &b).unwrap();
    let m11 = second_order_margin_e11(&f, &i_pt, &i_pt, &i_pt, &c, &b).unwrap();
    println!("second order e12: lhs {} rhs {} margin {}", m12.lhs, m12.rhs, m12.margin);
    println!("second order e11: lhs {} rhs {} margin {}", m11.lhs, m11.rhs, m11.margin);
    // scale dependence
    for s in [0.01f64, 0.05, 0.1, 0.3, 0.5] {
        let c = CMatrix::scalar(c64(s, 0.0));
        let b = CMatrix::scalar(c64(s, 0.0));
        let m12 = second_order_margin(&f, &i_pt, &i_pt, &i_pt, &c, &b).unwrap();
        let m11 = second_order_margin_e11(&f, &i_pt, &i_pt, &i_pt, &c, &b).unwrap();
        println!("s={s}: e12 margin {:+.6e}   e11 margin {:+.6e}", m12.margin, m11.margin);
    }
}
