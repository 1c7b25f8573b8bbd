use std::io::Write;

use anyhow::Result;
use graftlab::dynamics::{
    accumulation_analysis, counterexample_ratio, endpoint_cauchy_analysis, endpoint_descriptor,
    geodesic_tube_report, iterate_grafting, ray_trajectory, AccumulationReport, CauchyReport,
    CounterexampleReport, EndpointDescriptor, GeodesicTubeReport, GraftingTrajectory,
};
use graftlab::grafting::iteration_distance_bound;
use graftlab::hypgeom::HypLength;
use graftlab::numfmt::sci17;
use graftlab::Constants;
use serde::Serialize;

use crate::output::Sink;
use crate::scenario::{input_error, Mode, Scenario};

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Iterate {
        trajectory: GraftingTrajectory,
        /// `C (max support hi)^(1/8)` at every step.
        distance_bounds: Vec<f64>,
        cauchy: CauchyReport,
        endpoint: EndpointDescriptor,
        geodesic_tube: GeodesicTubeReport,
        /// Whether every weight is a positive multiple of `2 pi`, where the
        /// decay claims hold verbatim; otherwise they are the generalized ones.
        integral_lamination: bool,
    },
    Ray {
        trajectory: GraftingTrajectory,
        integral_lamination: bool,
    },
    Accumulation(AccumulationReport),
    Counterexample(CounterexampleReport),
}

fn integral(w: f64) -> bool {
    let m = w / std::f64::consts::TAU;
    m >= 1.0 - 1e-12 && (m - m.round()).abs() < 1e-12
}

/// Library precondition failures while simulating are input errors.
fn pre<T>(r: graftlab::Result<T>) -> Result<T> {
    r.map_err(|e| input_error(e.to_string()))
}

pub fn run(scenario: &Scenario, constants: &Constants, sink: &Sink) -> Result<Results> {
    let mode = scenario
        .mode
        .as_ref()
        .ok_or_else(|| input_error("simulate needs a `mode`"))?;
    let (k2, k3) = (constants.k2, constants.k3);
    let results = match mode {
        Mode::Iterate { steps } => {
            let st = scenario.state(constants.epsilon)?;
            let lam = scenario.multicurve()?;
            let tr = pre(iterate_grafting(&st, &lam, *steps, k2, k3))?;
            let distance_bounds = tr
                .steps
                .iter()
                .map(|s| iteration_distance_bound(&s.state, constants.c))
                .collect::<graftlab::Result<Vec<_>>>();
            let integral_lamination = lam.iter().all(|(_, w)| integral(w));
            sink.file("trajectory.csv", |b| tr.write_csv(b))?;
            Results::Iterate {
                distance_bounds: pre(distance_bounds)?,
                cauchy: pre(endpoint_cauchy_analysis(&tr, constants.c))?,
                endpoint: pre(endpoint_descriptor(tr.last(), &lam))?,
                geodesic_tube: pre(geodesic_tube_report(&st, &lam, constants))?,
                integral_lamination,
                trajectory: tr,
            }
        }
        Mode::Ray { s } => {
            let st = scenario.state(constants.epsilon)?;
            let lam = scenario.multicurve()?;
            let tr = pre(ray_trajectory(&st, &lam, s, k2, k3))?;
            sink.file("trajectory.csv", |b| tr.write_csv(b))?;
            let integral_lamination = lam.iter().all(|(_, w)| integral(w));
            Results::Ray {
                integral_lamination,
                trajectory: tr,
            }
        }
        Mode::Accumulation { steps } => {
            let lam = scenario.multicurve()?;
            let (id, t) = lam.iter().next().map(|(id, t)| (id.clone(), t)).unwrap();
            let st = scenario.state(constants.epsilon)?;
            let l0 = pre(st.interval(&id))?.hi;
            let r = pre(accumulation_analysis(
                pre(HypLength::new(l0))?,
                t,
                constants,
                *steps,
            ))?;
            sink.file("accumulation.csv", |b| {
                writeln!(b, "n,length,bound,partial_sum,combined_weight,slope")?;
                for n in 0..r.bounds.len() {
                    writeln!(
                        b,
                        "{},{},{},{},{},{}",
                        n + 1,
                        sci17(r.lengths[n]),
                        sci17(r.bounds[n]),
                        sci17(r.partial_sums[n]),
                        sci17(r.combined_weights[n]),
                        sci17(r.slopes[n])
                    )?;
                }
                Ok(())
            })?;
            Results::Accumulation(r)
        }
        Mode::Counterexample { l0, steps } => {
            let r = pre(counterexample_ratio(
                pre(HypLength::new(*l0))?,
                *steps,
                constants,
            ))?;
            sink.file("trajectory.csv", |b| r.trajectory.write_csv(b))?;
            sink.file("ratio.csv", |b| {
                writeln!(b, "step,ratio,control")?;
                for (k, (x, c)) in r.ratio.iter().zip(&r.control).enumerate() {
                    writeln!(b, "{k},{},{}", sci17(*x), sci17(*c))?;
                }
                Ok(())
            })?;
            Results::Counterexample(r)
        }
    };
    Ok(results)
}
