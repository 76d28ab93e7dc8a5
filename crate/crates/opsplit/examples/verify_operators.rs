//! Sampling-based verification of averagedness constants.
//!
//! Every constructor and combinator in the crate tags its output with an
//! averagedness constant. This example checks those tags against the
//! defining inequality on random point pairs — and then shows the same
//! check *failing* when a constant is claimed that is sharper than the
//! operator actually is.
//!
//! Run with: `cargo run --example verify_operators`

use nalgebra::{dmatrix, dvector};
use opsplit::constants::{compose_constant, Alpha, Weights};
use opsplit::operators::{
    combine, compose, gradient_step, l1_prox_map, relax, verify_averaged, MonotoneLinear,
    SetDescriptor, SmoothFunction,
};

const PAIRS: usize = 10_000;
const SEED: u64 = 0;
const RADIUS: f64 = 10.0;

fn check(name: &str, t: &opsplit::operators::AveragedMap) {
    let report = verify_averaged(t, t.alpha(), PAIRS, SEED, RADIUS);
    println!(
        "  {name:<34} alpha = {:.6}  violations = {}  worst deficit = {:.2e}",
        t.alpha().get(),
        report.violations,
        report.max_violation
    );
    assert!(report.passed(), "{name} failed its own constant");
}

fn main() -> opsplit::Result<()> {
    println!("checking stored constants on {PAIRS} random pairs each:");

    // Projections onto convex sets are firmly nonexpansive (1/2-averaged).
    let ball = SetDescriptor::ball(dvector![1.0, -2.0], 3.0)?;
    let halfspace = SetDescriptor::halfspace(dvector![1.0, 1.0], 0.5)?;
    let boxset = SetDescriptor::box_set(dvector![-1.0, 0.0], dvector![2.0, 4.0])?;
    check("ball projector", &ball.projector());
    check("halfspace projector", &halfspace.projector());
    check("box projector", &boxset.projector());

    // So are proximity operators and resolvents.
    check("l1 prox (soft threshold)", &l1_prox_map(2, 0.7));
    let skew = MonotoneLinear::new(dmatrix![0.0, 1.0; -1.0, 0.0])?;
    check("resolvent of a skew map", &skew.resolvent_map(1.0)?);

    // A gradient step x - gamma*grad(g) is gamma/(2*beta)-averaged.
    let quadratic = SmoothFunction::quadratic(
        dmatrix![1.0, 0.5; 0.0, 1.0],
        dvector![1.0, -1.0],
    )?;
    check("gradient step (gamma = beta)", &gradient_step(&quadratic, quadratic.beta())?);

    // Combinators propagate constants through the calculus.
    let p_ball = ball.projector();
    let p_half = halfspace.projector();
    check("relaxed projector (lambda 1.3)", &relax(&p_ball, 1.3)?);
    check("composition of two projectors", &compose(&[p_ball.clone(), p_half.clone()])?);
    check(
        "combination (weights 0.3/0.7)",
        &combine(&Weights::new(vec![0.3, 0.7])?, &[p_ball.clone(), p_half.clone()])?,
    );

    // --- Falsification ----------------------------------------------------
    // Projectors onto the lines span(1,0) and span(1,1) do not commute;
    // their composite is exactly 2/3-averaged and *not* 0.6-averaged. The
    // sampler finds witnesses for the false claim and none for the true
    // constant.
    let line_x = SetDescriptor::affine(dmatrix![1.0; 0.0], dvector![0.0, 0.0])?;
    let line_diag = SetDescriptor::affine(dmatrix![1.0; 1.0], dvector![0.0, 0.0])?;
    let oblique = compose(&[line_x.projector(), line_diag.projector()])?;
    let claimed = compose_constant(&[Alpha::half(), Alpha::half()])?;
    assert_eq!(oblique.alpha(), claimed);

    let honest = verify_averaged(&oblique, claimed, PAIRS, SEED, RADIUS);
    let too_sharp = verify_averaged(&oblique, Alpha::new(0.6)?, PAIRS, SEED, RADIUS);
    println!("\noblique line projectors, composed:");
    println!(
        "  claimed 2/3 (sharp):  violations = {} of {PAIRS}",
        honest.violations
    );
    println!(
        "  claimed 0.6 (false):  violations = {} of {PAIRS}, worst deficit = {:.3e}",
        too_sharp.violations, too_sharp.max_violation
    );
    assert!(honest.passed());
    assert!(
        too_sharp.violations > 0,
        "the false constant must be falsified"
    );

    println!("\nall stored constants verified; the false claim was rejected.");
    Ok(())
}
