use gedanken_core::bellstates::{correlation_closed, correlation_numeric, BellKind, MeasurementDirection};
use gedanken_core::qstate::{Direction, Plane, TOLERANCES};
use serde::Serialize;

use crate::args::BellArgs;
use crate::output::{check, usage, CliError, Outcome};

#[derive(Serialize)]
struct BellResult {
    kind: BellKind,
    plane: Option<Plane>,
    alice_axis: [f64; 3],
    bob_axis: [f64; 3],
    /// Angle between the axes, degrees.
    theta_deg: f64,
    closed_form: f64,
    numeric: f64,
    difference: f64,
}

fn axis(v: &[f64]) -> Result<Direction, CliError> {
    let arr: [f64; 3] = v.try_into().map_err(|_| usage("an axis needs three components"))?;
    Ok(Direction::new(arr)?)
}

pub fn run(args: &BellArgs) -> Result<Outcome, CliError> {
    let dirs = match (&args.a, &args.b) {
        (Some(a), Some(b)) => MeasurementDirection::new(axis(a)?, axis(b)?, None)?,
        _ => {
            let plane = args.plane.unwrap_or(Plane::Xz);
            let alpha = args.alpha.to_radians();
            MeasurementDirection::in_plane(plane, alpha, alpha + args.theta.to_radians())
        }
    };
    let closed = correlation_closed(args.kind, &dirs);
    let numeric = correlation_numeric(args.kind, &dirs)?;
    let result = BellResult {
        kind: args.kind,
        plane: dirs.plane,
        alice_axis: dirs.alice.components(),
        bob_axis: dirs.bob.components(),
        theta_deg: dirs.alice.dot(&dirs.bob).clamp(-1.0, 1.0).acos().to_degrees(),
        closed_form: closed,
        numeric,
        difference: numeric - closed,
    };
    let [ax, ay, az] = result.alice_axis;
    let [bx, by, bz] = result.bob_axis;
    let csv = format!(
        "kind,plane,ax,ay,az,bx,by,bz,closed_form,numeric,difference\n{},{},{ax},{ay},{az},{bx},{by},{bz},{closed},{numeric},{}\n",
        args.kind,
        dirs.plane.map_or("", Plane::name),
        result.difference
    );
    let checks = vec![
        check("numeric matches closed form", result.difference.abs() <= TOLERANCES.exact),
        check("correlation in [-1, 1]", closed.abs() <= 1.0 + TOLERANCES.exact),
    ];
    Ok(Outcome::new(result, csv, checks))
}
