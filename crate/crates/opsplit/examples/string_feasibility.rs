//! String-averaged projections with the sharp averagedness constant.
//!
//! Two lines through the origin at a shallow angle, plus a disk around
//! their intersection. The operator runs the line projectors in series
//! (a "string"), the disk projector as a second string, and averages the
//! two results. Scoring each string with the composition rule and
//! averaging those scores gives alpha = 7/12; the older max-based score
//! for the same operator is 2/3. The gap buys real relaxation room:
//! lambda = 1.6 is legal under 7/12 (sup 12/7 ≈ 1.714) but forbidden
//! under 2/3 (sup 3/2).
//!
//! Run with: `cargo run --example string_feasibility`

use nalgebra::{dmatrix, dvector};
use opsplit::bench::feasibility_from_parts;
use opsplit::constants::{relaxation_ranges, relaxed_constant, Alpha, Epsilon};
use opsplit::iteration::{string_run, Schedule, ScheduleRule, StopRule};
use opsplit::operators::SetDescriptor;

fn main() -> opsplit::Result<()> {
    // A thin wedge: the x-axis, a line 0.3 radians above it, and a disk
    // of radius 2 around their only common point, the origin.
    let theta: f64 = 0.3;
    let sets = vec![
        SetDescriptor::affine(dmatrix![1.0; 0.0], dvector![0.0, 0.0])?,
        SetDescriptor::affine(dmatrix![theta.cos(); theta.sin()], dvector![0.0, 0.0])?,
        SetDescriptor::ball(dvector![0.0, 0.0], 2.0)?,
    ];
    let fixture = feasibility_from_parts(sets, Some(vec![vec![0, 1], vec![2]]), None, 0)?;

    let alpha = fixture.alpha;
    let legacy = fixture.alpha_legacy;
    println!("string operator: [[P0, P1], [P2]] with uniform weights");
    println!("  sharp constant   alpha  = {:.12} (7/12)", alpha.get());
    println!("  max-based bound  alpha' = {:.12} (2/3)", legacy.get());
    assert!((alpha.get() - 7.0 / 12.0).abs() < 1e-12);
    assert!((legacy.get() - 2.0 / 3.0).abs() < 1e-12);

    let eps = Epsilon::new(0.1)?;
    let sharp_cap = relaxation_ranges(alpha, eps).km_sup.value;
    let legacy_cap = relaxation_ranges(legacy, eps).km_sup.value;
    println!("  exact-iteration relaxation sup: sharp {sharp_cap:.6} vs legacy {legacy_cap:.6}");

    // lambda = 1.6 sits between the two caps: the relaxed operator is
    // still averaged under the sharp constant, and not certifiable at all
    // under the legacy one.
    let lambda = 1.6;
    let relaxed_sharp = relaxed_constant(alpha, lambda)?;
    println!(
        "  relax(T, {lambda}) is {:.12}-averaged by the sharp analysis (14/15)",
        relaxed_sharp.get()
    );
    assert!((relaxed_sharp.get() - 14.0 / 15.0).abs() < 1e-12);
    let refused = relaxed_constant(legacy, lambda);
    println!(
        "  the legacy analysis refuses it: {}",
        refused.as_ref().err().map_or_else(String::new, |e| e.to_string())
    );
    assert!(refused.is_err());

    // Run the iteration at the bold relaxation. The run validates
    // lambda against the sharp constant of the assembled operator.
    let maps = fixture.string_maps()?;
    let x0 = dvector![5.0, 4.0];
    let schedule = Schedule::classical(ScheduleRule::Constant(lambda))?;
    let stop = StopRule::max_iterations(8_000)?.with_residual_tolerance(1e-13)?;
    let trace = string_run(&maps, &fixture.weights, &schedule, &x0, &stop, &fixture.sets)?;

    println!("\nset distances along the run (max over the three sets):");
    let last = trace.set_distances.len() - 1;
    for &i in &[0usize, 10, 50, 100, 200, last] {
        let (index, dists) = &trace.set_distances[i.min(last)];
        let worst = dists.iter().copied().fold(0.0_f64, f64::max);
        println!("  n = {index:<5} max distance = {worst:.6e}");
    }
    let (_, final_dists) = trace.set_distances.last().expect("sets were tracked");
    let final_worst = final_dists.iter().copied().fold(0.0_f64, f64::max);
    assert!(
        final_worst < 1e-8,
        "the iterate should land in the intersection (max distance {final_worst:.3e})"
    );

    // The same problem under the legacy cap: the boldest constant
    // relaxation it can certify is below 1.5.
    let cautious = 1.45;
    assert!(cautious < legacy_cap);
    let schedule_cautious = Schedule::classical(ScheduleRule::Constant(cautious))?;
    let trace_cautious =
        string_run(&maps, &fixture.weights, &schedule_cautious, &x0, &stop, &fixture.sets)?;
    println!(
        "\niterations to residual 1e-13: lambda = {lambda} took {}, lambda = {cautious} took {}",
        trace.steps(),
        trace_cautious.steps()
    );
    assert!(trace.steps() <= trace_cautious.steps());

    // Sanity: the constants the fixture reports match the calculus
    // recomputed from scratch.
    let half = Alpha::half();
    let from_scratch = opsplit::constants::string_constant(
        &[vec![half, half], vec![half]],
        &fixture.weights,
    )?;
    assert!((from_scratch.get() - alpha.get()).abs() < 1e-15);

    println!("\nthe sharper score certified a relaxation the old bound disallows.");
    Ok(())
}
