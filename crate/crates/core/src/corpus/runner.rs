//! Executes a scenario's tasks in dependency order.

use super::report::{Report, Residual, Status, TaskReport, SCHEMA_VERSION};
use super::scenario::{dependency_closure, load_scenario, Scenario, Task, TolClass, Tolerances};
use crate::cr::{build_chart, AdmissibleCoframe, Chart};
use crate::error::{Error, Result};
use crate::forms::{IndexedTensor, Slot, SlotKind, TensorDump};
use crate::immersion::{
    adapt_target_frame, codazzi_check, degeneracy_from_sff, ek_spaces, gauss_residuals,
    induced_connection_coefficients, polarization_check, second_fundamental_form,
    sff_covariant_derivatives, target_coframe, AdaptedFrameData, CRMapSpec, CodazziReport,
    DegeneracyProfile, InducedCoefficients, SffData,
};
use crate::jet::max_abs_all;
use crate::pseudoconformal::{
    chern_moser_tensor, cm_structure_residuals, deb_coefficients, pulled_back_phi_forms,
    CmComponents, CmResiduals, Deb, PhiForms,
};
use crate::pseudohermitian::{
    lee_identity_residual, webster_connection, webster_curvature, ConnectionData, CurvaturePack,
};
use crate::qframe::{
    adapted_qframe_along, maurer_cartan, piphi_dictionary_residual, validate_q_frame, TargetPhi,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::time::Instant;

/// Command-line adjustments to a scenario.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub order: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub dump_tensors: bool,
    /// Wall-clock times in the report; off by default so reports are byte-stable.
    pub timing: bool,
    /// Constant unitary applied to the normalized source coframe before anything else.
    pub rotation: Option<DMatrix<C64>>,
}

/// Seed and sample count of the randomized identity check.
const EX53_SEED: u64 = 53;
const EX53_SAMPLES: usize = 20;

/// Everything computed so far, filled in task order.
#[derive(Default)]
struct State {
    map: Option<CRMapSpec>,
    chart: Option<Chart>,
    cf: Option<AdmissibleCoframe>,
    conn: Option<ConnectionData>,
    pack: Option<CurvaturePack>,
    deb: Option<Deb>,
    phi: Option<PhiForms>,
    cm: Option<(CmResiduals, CmComponents)>,
    adapted: Option<AdaptedFrameData>,
    sff: Option<SffData>,
    codazzi: Option<CodazziReport>,
    induced: Option<InducedCoefficients>,
}

fn missing(what: &str) -> Error {
    Error::Invalid(format!("{what} not available"))
}

/// Collects residuals for one task against the effective tolerances.
struct Sink<'a> {
    tol: &'a Tolerances,
    task_tol: Option<f64>,
    out: Vec<Residual>,
    tensors: BTreeMap<String, TensorDump>,
    dump: bool,
    /// Set when the task passes only conditionally.
    flag: Option<String>,
    degeneracy: Option<DegeneracyProfile>,
}

impl Sink<'_> {
    fn check(&mut self, name: &str, value: f64, class: TolClass) {
        let t = self.task_tol.unwrap_or_else(|| self.tol.get(class));
        self.out.push(Residual {
            name: name.into(),
            value,
            tolerance: Some(t),
        });
    }

    fn info(&mut self, name: &str, value: f64) {
        self.out.push(Residual {
            name: name.into(),
            value,
            tolerance: None,
        });
    }

    fn tensor(&mut self, name: &str, t: impl FnOnce() -> TensorDump) {
        if self.dump {
            self.tensors.insert(name.into(), t());
        }
    }
}

fn matrix_dump(rows: &[Vec<C64>], slots: [Slot; 2]) -> TensorDump {
    let m = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    IndexedTensor::from_fn(slots.to_vec(), vec![m, k], |i| rows[i[0]][i[1]]).dump()
}

fn frame_dump(z: &DMatrix<C64>) -> TensorDump {
    TensorDump {
        signature: vec!["component".into(), "frame_vector".into()],
        dims: vec![z.nrows(), z.ncols()],
        data: (0..z.nrows())
            .flat_map(|i| (0..z.ncols()).map(move |j| [z[(i, j)].re, z[(i, j)].im]))
            .collect(),
    }
}

fn unbarred_down() -> Slot {
    Slot::down(SlotKind::Unbarred)
}

fn barred_down() -> Slot {
    Slot::down(SlotKind::Barred)
}

/// `Q = 4z₁² + z₁z₂ + 4z₂²` against `Q̃ = 4z₁² − z₁z₂ + 4z₂²`, whose difference of squared
/// moduli is `8(z₁z̄₂ + z̄₁z₂)(|z₁|² + |z₂|²)`.
fn ex53_data() -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let r = |x: f64| C64::new(x, 0.0);
    let q = DMatrix::from_row_slice(2, 2, &[r(4.0), r(0.5), r(0.5), r(4.0)]);
    let qt = DMatrix::from_row_slice(2, 2, &[r(4.0), r(-0.5), r(-0.5), r(4.0)]);
    let h = DMatrix::from_row_slice(2, 2, &[r(0.0), r(8.0), r(8.0), r(0.0)]);
    (q, qt, h)
}

struct Runner<'a> {
    scenario: &'a Scenario,
    order: usize,
    rotation: Option<&'a DMatrix<C64>>,
    state: State,
}

impl Runner<'_> {
    fn cf(&self) -> Result<&AdmissibleCoframe> {
        self.state.cf.as_ref().ok_or_else(|| missing("coframe"))
    }

    fn map(&self) -> Result<&CRMapSpec> {
        self.state.map.as_ref().ok_or_else(|| missing("map"))
    }

    fn run(&mut self, task: Task, s: &mut Sink) -> Result<()> {
        match task {
            Task::Chart => {
                let chart = build_chart(&self.scenario.source_spec(), self.order)?;
                let mut cf = AdmissibleCoframe::new(&chart)?;
                if let Some(u) = self.rotation {
                    cf = cf.rotated(u)?;
                }
                s.check(
                    "rho_on_chart",
                    max_abs_all([&chart.rho_residual()]),
                    TolClass::Structural,
                );
                s.check(
                    "coframe_duality",
                    cf.duality_residual(),
                    TolClass::Structural,
                );
                s.check("reeb", cf.reeb_residual(), TolClass::Structural);
                s.check("levi_normalized", cf.levi_residual(), TolClass::Structural);
                s.check("theta_real", cf.theta_imag(), TolClass::Structural);
                if let Some(m) = &self.state.map {
                    s.check(
                        "map_into_target",
                        m.sphere_residual(&cf),
                        TolClass::Structural,
                    );
                }
                self.state.chart = Some(chart);
                self.state.cf = Some(cf);
            }
            Task::Webster => {
                let cf = self.cf()?;
                let conn = webster_connection(cf)?;
                let pack = webster_curvature(&conn, cf)?;
                s.check(
                    "structure_equations",
                    conn.structure_residual(cf),
                    TolClass::Structural,
                );
                s.check(
                    "connection_skew",
                    conn.skew_residual(),
                    TolClass::Structural,
                );
                s.check(
                    "torsion_symmetry",
                    conn.torsion_symmetry_residual(),
                    TolClass::Structural,
                );
                s.check(
                    "curvature_decomposition",
                    pack.decomposition_residual,
                    TolClass::Structural,
                );
                let (lee, lee_bar) = lee_identity_residual(&pack, &conn, cf)?;
                s.check("lee_identity", lee, TolClass::Structural);
                s.check("lee_identity_conj", lee_bar, TolClass::Structural);
                s.info("scalar_curvature", pack.scalar.value_or_nan().norm());
                s.info("curvature_norm", pack.r.at_base().max_abs());
                s.info("w_norm", pack.w.at_base().max_abs());
                self.state.conn = Some(conn);
                self.state.pack = Some(pack);
            }
            Task::ChernMoser => {
                let cf = self.cf()?;
                let conn = self
                    .state
                    .conn
                    .as_ref()
                    .ok_or_else(|| missing("connection"))?;
                let pack = self
                    .state
                    .pack
                    .as_ref()
                    .ok_or_else(|| missing("curvature"))?;
                let deb = deb_coefficients(pack, conn, cf)?;
                let phi = pulled_back_phi_forms(conn, &deb, &cf.basis, &cf.ctx);
                let (r, comps) = cm_structure_residuals(&phi, pack, &deb, cf)?;
                let st = TolClass::Structural;
                s.check("phi_skew", phi.skew_residual(&cf.basis), st);
                s.check("eq_dtheta", r.eq_dtheta, st);
                s.check("eq_dtheta_alpha", r.eq_dtheta_alpha, st);
                s.check("eq_dphi_theta_slots", r.eq_dphi_theta_slots, st);
                s.check("phi_ba_extra", r.phi_ba_extra, st);
                s.check("phi_a_extra", r.phi_a_extra, st);
                s.check("s_symmetry", r.s_symmetry, st);
                s.check("s_trace", r.s_trace, st);
                s.check("v_trace", r.v_trace, st);
                s.check("v_trace_bar", r.v_trace_bar, st);
                s.check("p_trace", r.p_trace, st);
                s.check("v_cross", r.v_cross, TolClass::DualRoute);
                s.check("p_cross", r.p_cross, TolClass::DualRoute);
                s.check("e_dual", r.e_dual, TolClass::DualRoute);
                s.check("b_dual", r.b_dual, TolClass::DualRoute);
                let sp = chern_moser_tensor(pack)?;
                if self.scenario.expect_spherical {
                    s.check("s_norm", sp.max_abs(), st);
                } else {
                    s.info("s_norm", sp.max_abs());
                }
                s.tensor("S", || sp.dump());
                self.state.deb = Some(deb);
                self.state.phi = Some(phi);
                self.state.cm = Some((r, comps));
            }
            Task::Prop31 => {
                let (r, comps) = self
                    .state
                    .cm
                    .as_ref()
                    .ok_or_else(|| missing("Chern-Moser components"))?;
                s.check("s_slots_vs_projection", r.s_dual, TolClass::DualRoute);
                s.info("s_norm", r.s_norm);
                s.tensor("S_slots", || comps.s.dump());
            }
            Task::Sff => {
                let map = self.map()?;
                let cf = self.cf()?;
                let target = target_coframe(map, cf)?;
                let adapted = adapt_target_frame(map, cf, &target)?;
                let sff = second_fundamental_form(map, cf, &adapted)?;
                let p = &adapted.residuals;
                let st = TolClass::Structural;
                s.check("pullback_theta", p.theta, st);
                s.check("pullback_theta_alpha", p.theta_alpha, st);
                s.check("pullback_theta_normal", p.theta_normal, st);
                s.check("frame_unitary", p.unitary, st);
                s.check("omega_tangential", p.omega_tangential, st);
                s.check("tau_tangential", p.tau_tangential, st);
                s.check("tau_normal", p.tau_normal, st);
                s.check("sff_symmetry", sff.symmetry, st);
                s.check("sff_extra_components", sff.extra_components, st);
                s.check("sff_routes", sff.route_difference, st);
                s.info("sff_norm", sff.norm());
                s.tensor("omega", || sff.omega.at_base().dump());
                self.state.adapted = Some(adapted);
                self.state.sff = Some(sff);
            }
            Task::Ek => {
                let k = self.scenario.ek_order;
                let st = &mut self.state;
                let map = st.map.as_ref().ok_or_else(|| missing("map"))?;
                let cf = st.cf.as_ref().ok_or_else(|| missing("coframe"))?;
                let from_jets = ek_spaces(map, cf, k)?;
                let adapted = st
                    .adapted
                    .as_ref()
                    .ok_or_else(|| missing("adapted frame"))?;
                let sff = st
                    .sff
                    .as_mut()
                    .ok_or_else(|| missing("second fundamental form"))?;
                sff_covariant_derivatives(sff, cf, adapted, k)?;
                let from_sff = degeneracy_from_sff(sff, k);
                let mismatch = from_jets
                    .dims
                    .iter()
                    .zip(&from_sff.dims)
                    .filter(|(a, b)| a != b)
                    .count()
                    + from_jets.dims.len().abs_diff(from_sff.dims.len());
                s.check("dims_route_mismatch", mismatch as f64, TolClass::Exact);
                if let Some(want) = &self.scenario.expect_ek {
                    let off = from_jets.dims != want.dims
                        || from_jets.s0 != want.s0
                        || from_jets.k0 != want.k0;
                    s.check(
                        "pinned_profile_mismatch",
                        if off { 1.0 } else { 0.0 },
                        TolClass::Exact,
                    );
                }
                if from_jets.unstable || from_sff.unstable {
                    s.flag = Some("rank decision near threshold".into());
                } else if from_jets.truncated || from_sff.truncated {
                    s.flag = Some("jet budget exhausted; trailing dims are lower bounds".into());
                }
                s.degeneracy = Some(from_jets);
            }
            Task::Codazzi => {
                let cf = self.cf()?;
                let sff = self
                    .state
                    .sff
                    .as_ref()
                    .ok_or_else(|| missing("second fundamental form"))?;
                let adapted = self
                    .state
                    .adapted
                    .as_ref()
                    .ok_or_else(|| missing("adapted frame"))?;
                let r = codazzi_check(sff, cf, adapted)?;
                s.check("codazzi", r.residual, TolClass::DualRoute);
                s.check("dhat_dual", r.dhat_dual, TolClass::DualRoute);
                s.tensor("Dhat", || {
                    matrix_dump(
                        &r.dhat,
                        [unbarred_down(), Slot::up(SlotKind::NormalUnbarred)],
                    )
                });
                self.state.codazzi = Some(r);
            }
            Task::Gauss => {
                let sff = self
                    .state
                    .sff
                    .as_ref()
                    .ok_or_else(|| missing("second fundamental form"))?;
                let adapted = self
                    .state
                    .adapted
                    .as_ref()
                    .ok_or_else(|| missing("adapted frame"))?;
                let pack = self
                    .state
                    .pack
                    .as_ref()
                    .ok_or_else(|| missing("curvature"))?;
                let g = gauss_residuals(sff, pack, adapted)?;
                s.check("pseudohermitian", g.pseudohermitian, TolClass::Structural);
                s.check("pseudoconformal", g.pseudoconformal, TolClass::DualRoute);
                s.check("expanded", g.expanded, TolClass::DualRoute);
                s.info("s_hat_norm", g.s_hat_norm);
                s.info("pi_pi_norm", g.pi_pi_norm);
                s.info("pi_pi_traceless", g.pi_pi_traceless);
                s.info("pi_pi_flat_remainder", g.flat_decomposition);
            }
            Task::Induced => {
                let cf = self.cf()?;
                let st = &self.state;
                let sff = st
                    .sff
                    .as_ref()
                    .ok_or_else(|| missing("second fundamental form"))?;
                let adapted = st
                    .adapted
                    .as_ref()
                    .ok_or_else(|| missing("adapted frame"))?;
                let deb = st.deb.as_ref().ok_or_else(|| missing("D, E, B"))?;
                let (_, comps) = st
                    .cm
                    .as_ref()
                    .ok_or_else(|| missing("Chern-Moser components"))?;
                let codazzi = st.codazzi.as_ref().ok_or_else(|| missing("Codazzi data"))?;
                let ind = induced_connection_coefficients(sff, cf, deb, comps, adapted, codazzi)?;
                s.check("c_dual", ind.c_dual, TolClass::DualRoute);
                match (ind.f_dual, ind.a_dual) {
                    (Some(f), Some(a)) => {
                        s.check("f_dual", f, TolClass::DualRoute);
                        s.check("a_dual", a, TolClass::DualRoute);
                    }
                    _ => s.flag = Some("F and A need n >= 2 and a sphere target".into()),
                }
                if let Some(r) = ind.identity_residual {
                    s.check("v_identity", r, TolClass::DualRoute);
                }
                s.tensor("C", || {
                    matrix_dump(&ind.c, [unbarred_down(), barred_down()])
                });
                self.state.induced = Some(ind);
            }
            Task::Qframe => {
                let map = self.map()?;
                let cf = self.cf()?;
                let st = &self.state;
                let adapted = st
                    .adapted
                    .as_ref()
                    .ok_or_else(|| missing("adapted frame"))?;
                let frame = adapted_qframe_along(map, cf, adapted)?;
                let st_c = TolClass::Structural;
                s.check("frame_jets", frame.jet_residual()?, st_c);
                s.check("frame_adapted", frame.adaptedness_residual(map, cf)?, st_c);
                let z0 = frame.at_base();
                s.check("frame_at_base", validate_q_frame(&z0)?, st_c);
                let mc = maurer_cartan(&frame, cf)?;
                s.check("mc_flatness", mc.flatness_residual(cf), st_c);
                s.check("mc_su", mc.su_residual(&cf.basis), st_c);
                let direct = TargetPhi::direct(adapted, cf)?;
                s.check(
                    "dictionary_direct",
                    piphi_dictionary_residual(&mc, &direct, cf).max(),
                    st_c,
                );
                let phi = st.phi.as_ref().ok_or_else(|| missing("phi forms"))?;
                let sff = st
                    .sff
                    .as_ref()
                    .ok_or_else(|| missing("second fundamental form"))?;
                let ind = st
                    .induced
                    .as_ref()
                    .ok_or_else(|| missing("induced coefficients"))?;
                let codazzi = st.codazzi.as_ref().ok_or_else(|| missing("Codazzi data"))?;
                let chain = TargetPhi::from_induced(phi, ind, sff, codazzi, cf)?;
                s.check(
                    "dictionary_chain",
                    piphi_dictionary_residual(&mc, &chain, cf).max(),
                    st_c,
                );
                s.tensor("Z", || frame_dump(&z0));
            }
            Task::Ex53 => {
                let (q, qt, h) = ex53_data();
                let r = polarization_check(&q, &qt, Some(&h), EX53_SAMPLES, EX53_SEED)?;
                s.check("traceless_part", r.traceless_residual, TolClass::Exact);
                s.check("samples", r.sample_residual, TolClass::Exact);
                s.check(
                    "expected_h",
                    r.expected_residual.unwrap_or(f64::NAN),
                    TolClass::Exact,
                );
                s.info("seed", r.seed as f64);
                s.info("sample_count", r.samples as f64);
                s.tensor("h", || matrix_dump(&r.h, [unbarred_down(), barred_down()]));
            }
        }
        Ok(())
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Runs every requested task and its prerequisites. A task whose prerequisite failed is
/// reported as failed without running.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Report> {
    scenario.validate()?;
    let mut tol = Tolerances::default();
    let mut overrides = scenario.tolerances.clone();
    overrides.extend(opts.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
    let task_tol = tol.apply(&overrides)?;
    let order = opts.order.unwrap_or(scenario.jet_order);
    if order < 2 {
        return Err(Error::Invalid(format!("jet order {order} < 2")));
    }
    let t_all = Instant::now();
    let mut runner = Runner {
        scenario,
        order,
        rotation: opts.rotation.as_ref(),
        state: State {
            map: scenario.map_spec()?,
            ..State::default()
        },
    };
    let mut reports: Vec<TaskReport> = Vec::new();
    for task in dependency_closure(&scenario.tasks) {
        let t0 = Instant::now();
        let mut sink = Sink {
            tol: &tol,
            task_tol: task_tol.get(&task).copied(),
            out: Vec::new(),
            tensors: BTreeMap::new(),
            dump: opts.dump_tensors,
            flag: None,
            degeneracy: None,
        };
        let failed_dep = task.deps().iter().find(|d| {
            reports
                .iter()
                .any(|r| r.task == **d && r.status == Status::Fail)
        });
        let note = match failed_dep {
            Some(d) => Some(format!("not run: prerequisite `{d}` failed")),
            None => runner
                .run(task, &mut sink)
                .err()
                .map(|e| format!("error: {e}")),
        };
        let status = if note.is_some() || sink.out.iter().any(|r| !r.passes()) {
            Status::Fail
        } else if sink.flag.is_some() {
            Status::Flagged
        } else {
            Status::Pass
        };
        reports.push(TaskReport {
            task,
            status,
            residuals: sink.out,
            note: note.or(sink.flag),
            degeneracy: sink.degeneracy,
            tensors: sink.tensors,
            elapsed_ms: opts.timing.then(|| elapsed_ms(t0)),
        });
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        jet_order: order,
        tolerances: tol,
        task_tolerances: task_tol,
        passed: reports.iter().all(|r| r.status != Status::Fail),
        tasks: reports,
        elapsed_ms: opts.timing.then(|| elapsed_ms(t_all)),
    })
}

/// [`run`] on a built-in scenario name or a scenario file.
pub fn run_scenario(name_or_path: &str, opts: &RunOptions) -> Result<Report> {
    run(&load_scenario(name_or_path)?, opts)
}
