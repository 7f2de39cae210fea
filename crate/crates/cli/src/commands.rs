use std::collections::BTreeMap;
use std::path::Path;

use precsched::deadline_sched::{edf_ect, edf_ect_comm, witness_first, DeadlineInstance, DeadlineMode, WitnessSpec};
use precsched::gap_lab::{
    gen_model_gap_family, gen_tree_instance, tree_warning, verify_lifted_constraints, GapFamily, Scope,
    SingleMachineInstance,
};
use precsched::gen::{random_dag, rng, DagSpec};
use precsched::hierarchy_sched::{run_full, HierarchyParams, RunManifest, SolutionSource};
use precsched::list_sched::{graham_list, graham_list_comm};
use precsched::oracle::{
    lp_gap_report, opt_makespan_with, opt_min_discard, DiscardMode, GapReport, Model, OracleCaps, Strategy,
};
use precsched::rational::{self, Rational};
use precsched::sa_lp::{build_base_lp_with, export_lp, sa_lift, BaseLpOptions};
use precsched::schedule::validate;
use precsched::{Instance, Mode, Schedule};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::io::{emit, read};
use crate::{
    Algorithm, Command, DiscardArg, ExportLpArgs, FamilyArg, GapsArgs, GenCommand, ModelArg, OracleArgs, ReportArgs,
    ScheduleArgs, StrategyArg, ValidateArgs, VerifySaArgs,
};

pub fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Gen(g) => gen(g),
        Command::Schedule(a) => schedule(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Gaps(a) => gaps(a),
        Command::VerifySa(a) => verify_sa(a),
        Command::ExportLp(a) => export(a),
        Command::Report(a) => report(a),
    }
    .map(|()| 0)
}

fn canonical<T: Serialize>(v: &T) -> String {
    rational::to_canonical_json(v).expect("artifact serializes")
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(Instance::from_json(&read(path)?)?)
}

fn load_deadline(path: &Path) -> Result<DeadlineInstance, CliError> {
    Ok(DeadlineInstance::from_json(&read(path)?)?)
}

fn family(f: FamilyArg) -> GapFamily {
    match f {
        FamilyArg::Ab => GapFamily::Ab,
        FamilyArg::Bc => GapFamily::Bc,
    }
}

fn gen(cmd: GenCommand) -> Result<(), CliError> {
    match cmd {
        GenCommand::Gap { family: f, m, out } => {
            let inst = gen_model_gap_family(family(f), m)?;
            emit(out.as_deref(), &inst.to_json())
        }
        GenCommand::Tree { l, out } => {
            if l > 12 {
                return Err(CliError::Cap(format!("L = {l} > 12")));
            }
            if let Some(w) = tree_warning(l) {
                eprintln!("warning: {w}");
            }
            emit(out.as_deref(), &gen_tree_instance(l).to_json())
        }
        GenCommand::Witness { seed, intervals, machines, interval_len, witness_out, out } => {
            if intervals == 0 || interval_len == 0 {
                return Err(CliError::usage("intervals and interval length must be positive"));
            }
            let spec = WitnessSpec { intervals, machines: machines as usize, interval_len, ..WitnessSpec::default() };
            let (inst, placement) = witness_first(&spec, &mut rng(seed));
            if let Some(p) = witness_out {
                let mut s = Schedule::new(inst.horizon());
                let mut next = vec![0u32; inst.num_jobs()];
                for &(j, machine, slot) in &placement {
                    next[j] += 1;
                    s.assign(precsched::TaskRef::new(j, next[j]), machine, slot);
                }
                emit(Some(&p), &s.to_json(inst.instance()))?;
            }
            emit(out.as_deref(), &inst.to_json())
        }
        GenCommand::Dag { seed, jobs, max_size, machines, edge_percent, delay, out } => {
            let spec = DagSpec { jobs, max_size, machines: machines as usize, edge_percent, delay };
            emit(out.as_deref(), &random_dag(&spec, &mut rng(seed)).to_json())
        }
    }
}

/// Summary written next to every schedule.
#[derive(Serialize)]
struct ScheduleManifest<'a> {
    algorithm: &'static str,
    instance: String,
    mode: Mode,
    tasks: usize,
    scheduled: usize,
    discarded: usize,
    makespan: usize,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    window_violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hierarchy: Option<&'a RunManifest>,
}

/// Tasks placed outside their job's `[release, deadline]` window.
fn window_violations(inst: &DeadlineInstance, s: &Schedule) -> usize {
    s.assignment
        .iter()
        .filter(|(t, p)| p.slot < inst.release(t.job) || p.slot > inst.deadline(t.job))
        .count()
}

fn hierarchy_params(a: &ScheduleArgs) -> Result<HierarchyParams, CliError> {
    let h = &a.hierarchy;
    let source = match h.exact_level {
        Some(level) => SolutionSource::Exact { level },
        None => SolutionSource::Mixture { samples: h.samples, seed: h.seed },
    };
    let params = HierarchyParams {
        k: h.k,
        delta: h.delta.clone(),
        epsilon: h.epsilon.clone(),
        level_budget: h.level_budget,
        source,
    };
    params.check().map_err(CliError::usage)?;
    Ok(params)
}

fn schedule(a: ScheduleArgs) -> Result<(), CliError> {
    let mode: Mode = a.mode.into();
    let name = a.instance.display().to_string();
    let (inst, sched, windows, run) = match a.algo {
        Algorithm::Graham => {
            let inst = load_instance(&a.instance)?;
            let s = match mode {
                Mode::NoDelay => graham_list(&inst, None)?,
                Mode::Delay => graham_list_comm(&inst, None)?,
            };
            (inst, s, None, None)
        }
        Algorithm::EdfEct | Algorithm::EdfEctComm => {
            let d = load_deadline(&a.instance)?;
            let (trace, dmode) = if a.algo == Algorithm::EdfEct {
                (edf_ect(&d), DeadlineMode::NoDelay)
            } else {
                (edf_ect_comm(&d), DeadlineMode::Comm)
            };
            let w = window_violations(&d, &trace.schedule);
            (d.validation_instance(dmode), trace.schedule, Some(w), None)
        }
        Algorithm::Hierarchy => {
            let inst = load_instance(&a.instance)?;
            let params = hierarchy_params(&a)?;
            let run = run_full(&inst, mode, &params)?;
            (inst, run.schedule, None, Some(run.manifest))
        }
    };
    let check_mode = match a.algo {
        Algorithm::EdfEctComm => Mode::Delay,
        Algorithm::EdfEct => Mode::NoDelay,
        _ => mode,
    };
    let report = validate(&sched, &inst, check_mode)?;
    let manifest = ScheduleManifest {
        algorithm: match a.algo {
            Algorithm::Graham => "graham",
            Algorithm::EdfEct => "edf-ect",
            Algorithm::EdfEctComm => "edf-ect-comm",
            Algorithm::Hierarchy => "hierarchy",
        },
        instance: name,
        mode: check_mode,
        tasks: inst.total_tasks(),
        scheduled: sched.assignment.len(),
        discarded: sched.discarded.len(),
        makespan: sched.makespan(),
        valid: report.is_valid() && windows.unwrap_or(0) == 0,
        window_violations: windows,
        hierarchy: run.as_ref(),
    };
    emit(a.out.as_deref(), &sched.to_json(&inst))?;
    let m = canonical(&manifest);
    match a.manifest {
        Some(p) => emit(Some(&p), &m)?,
        None => eprintln!("{m}"),
    }
    if manifest.valid {
        Ok(())
    } else {
        Err(CliError::Failed("produced schedule is invalid".into()))
    }
}

fn validate_cmd(a: ValidateArgs) -> Result<(), CliError> {
    let mode: Mode = a.mode.into();
    let (inst, deadline) = if a.deadline {
        let d = load_deadline(&a.instance)?;
        let dmode = match mode {
            Mode::NoDelay => DeadlineMode::NoDelay,
            Mode::Delay => DeadlineMode::Comm,
        };
        (d.validation_instance(dmode), Some(d))
    } else {
        (load_instance(&a.instance)?, None)
    };
    let sched = Schedule::from_json(&read(&a.schedule)?, &inst)?;
    let report = validate(&sched, &inst, mode)?;
    let windows = deadline.as_ref().map(|d| window_violations(d, &sched)).unwrap_or(0);
    emit(None, &report.to_json(&inst))?;
    if windows > 0 {
        eprintln!("{windows} task(s) outside their window");
    }
    if report.is_valid() && windows == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} violation(s)", report.violations.len() + windows)))
    }
}

#[derive(Serialize)]
struct OracleEntry {
    value: usize,
    nodes: u64,
    witness: Value,
}

fn oracle(a: OracleArgs) -> Result<(), CliError> {
    let caps = OracleCaps { max_tasks: a.max_tasks, ..OracleCaps::default() };
    if let Some(path) = &a.smi {
        let smi = SingleMachineInstance::from_json(&read(path)?)?;
        let mode = match a.discard_mode {
            DiscardArg::FullJobs => DiscardMode::FullJobs,
            DiscardArg::PartialAllowed => DiscardMode::PartialAllowed,
        };
        let r = opt_min_discard(&smi, mode)?;
        let out = serde_json::json!({ "mode": mode, "value": r.value, "nodes": r.nodes, "placements": r.placements });
        return emit(a.out.as_deref(), &canonical(&out));
    }
    let inst = load_instance(a.instance.as_deref().expect("clap requires an instance"))?;
    let strategy = match a.strategy {
        StrategyArg::Slot => Strategy::SlotDfs,
        StrategyArg::Sequence => Strategy::SequenceDfs,
    };
    let models: &[Model] = match a.model {
        ModelArg::A => &[Model::A],
        ModelArg::B => &[Model::B],
        ModelArg::C => &[Model::C],
        ModelArg::All => &Model::ALL,
    };
    let mut out = BTreeMap::new();
    for &model in models {
        let r = opt_makespan_with(&inst, model, a.delays, strategy, &caps)?;
        let witness = serde_json::from_str(&r.witness.to_json(&inst)).expect("schedule JSON parses");
        out.insert(format!("{model:?}"), OracleEntry { value: r.value, nodes: r.nodes, witness });
    }
    emit(a.out.as_deref(), &canonical(&out))
}

#[derive(Serialize)]
struct GapTable {
    name: String,
    a: usize,
    b: usize,
    c: usize,
    #[serde(with = "rational::serde_str")]
    b_over_a: Rational,
    #[serde(with = "rational::serde_str")]
    c_over_b: Rational,
    #[serde(with = "rational::serde_str")]
    c_over_a: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp: Option<GapReport>,
}

fn ratio(num: usize, den: usize) -> Rational {
    if den == 0 {
        Rational::from_integer(0.into())
    } else {
        Rational::new((num as i64).into(), (den as i64).into())
    }
}

fn gaps(a: GapsArgs) -> Result<(), CliError> {
    let (inst, name) = match (&a.instance, a.family) {
        (Some(p), _) => (load_instance(p)?, p.display().to_string()),
        (None, Some(f)) => {
            let m = a.m.ok_or_else(|| CliError::usage("--m is required with --family"))?;
            let label = if f == FamilyArg::Ab { "AB" } else { "BC" };
            (gen_model_gap_family(family(f), m)?, format!("{label} m={m}"))
        }
        (None, None) => return Err(CliError::usage("need --family or --instance")),
    };
    let caps = OracleCaps::default();
    let mut v = [0usize; 3];
    for (i, &model) in Model::ALL.iter().enumerate() {
        v[i] = opt_makespan_with(&inst, model, false, Strategy::SlotDfs, &caps)?.value;
    }
    let lp = if a.lp { Some(lp_gap_report(&inst, 1..=v[2], false)?) } else { None };
    let table = GapTable {
        name,
        a: v[0],
        b: v[1],
        c: v[2],
        b_over_a: ratio(v[1], v[0]),
        c_over_b: ratio(v[2], v[1]),
        c_over_a: ratio(v[2], v[0]),
        lp,
    };
    if a.json {
        return emit(None, &canonical(&table));
    }
    let f = rational::format;
    let mut text = format!("{:<12} {:>4} {:>4} {:>4} {:>6} {:>6} {:>6}\n", "instance", "A", "B", "C", "B/A", "C/B", "C/A");
    text.push_str(&format!(
        "{:<12} {:>4} {:>4} {:>4} {:>6} {:>6} {:>6}",
        table.name,
        table.a,
        table.b,
        table.c,
        f(&table.b_over_a),
        f(&table.c_over_b),
        f(&table.c_over_a)
    ));
    if let Some(lp) = &table.lp {
        let show = |x: Option<usize>| x.map_or("-".to_string(), |t| t.to_string());
        text.push_str(&format!(
            "\nfirst feasible horizon: lp-migratory {} lp {} A {} B {} C {}",
            show(lp.first_lp_migratory),
            show(lp.first_lp),
            show(lp.first_a),
            show(lp.first_b),
            show(lp.first_c)
        ));
    }
    emit(None, &text)
}

fn verify_sa(a: VerifySaArgs) -> Result<(), CliError> {
    let l = a.l1 - 1;
    if let Some(w) = tree_warning(l) {
        eprintln!("warning: {w}");
    }
    let scope = if a.exhaustive {
        Scope::Exhaustive
    } else {
        Scope::Sampled { seed: a.seed, count: a.samples.expect("clap requires samples") }
    };
    let report = verify_lifted_constraints(l, &a.eps_prime, a.q as usize, scope)?;
    emit(a.out.as_deref(), &report.to_json())?;
    if report.families.all_passed() {
        Ok(())
    } else {
        Err(CliError::Failed("some lifted constraints failed".into()))
    }
}

fn export(a: ExportLpArgs) -> Result<(), CliError> {
    let inst = load_instance(&a.instance)?;
    if a.horizon == 0 {
        return Err(CliError::usage("horizon must be positive"));
    }
    let opts = BaseLpOptions { no_migration: !a.migratory, comm: a.comm, ..BaseLpOptions::default() };
    let base = build_base_lp_with(&inst, a.horizon, &opts);
    let text = match a.level {
        None => export_lp(&base.lp, Some(&inst)),
        Some(r) => {
            let lifted = sa_lift(&base.lp, r as usize).map_err(|e| CliError::Cap(e.to_string()))?;
            export_lp(&lifted.lp, None)
        }
    };
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct ReportRow {
    manifest: String,
    algorithm: Value,
    instance: Value,
    mode: Value,
    makespan: Value,
    discarded: Value,
    valid: Value,
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for p in &a.manifests {
        let v: Value = serde_json::from_str(&read(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        if !v.is_object() {
            return Err(CliError::Usage(format!("{}: not a manifest", p.display())));
        }
        let field = |k: &str| v.get(k).cloned().unwrap_or(Value::Null);
        rows.push(ReportRow {
            manifest: p.display().to_string(),
            algorithm: field("algorithm"),
            instance: field("instance"),
            mode: field("mode"),
            makespan: field("makespan"),
            discarded: field("discarded"),
            valid: field("valid"),
        });
    }
    let text = if a.json {
        canonical(&rows)
    } else {
        let cell = |v: &Value| match v {
            Value::Null => "-".to_string(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut s = format!(
            "{:<24} {:<14} {:<10} {:>8} {:>9} {:>5}  {}\n",
            "manifest", "algorithm", "mode", "makespan", "discarded", "valid", "instance"
        );
        for r in &rows {
            s.push_str(&format!(
                "{:<24} {:<14} {:<10} {:>8} {:>9} {:>5}  {}\n",
                r.manifest,
                cell(&r.algorithm),
                cell(&r.mode),
                cell(&r.makespan),
                cell(&r.discarded),
                cell(&r.valid),
                cell(&r.instance)
            ));
        }
        s.trim_end().to_string()
    };
    emit(a.out.as_deref(), &text)
}
