use gedanken_core::qstate::Amplitude;
use gedanken_core::wigner::{
    build_initial, contradiction_demo, ok_fail_expansion, relative_state_probability, rewrite_in_basis, standard_probability,
    write_ledgers_jsonl, Agent, ContradictionReport, Event, Expansion, Formalism, MeasurementChoice,
};
use serde::Serialize;

use crate::args::WignerArgs;
use crate::output::{check, usage, CliError, Outcome, RunManifest};

#[derive(Serialize)]
struct ProbabilityResult {
    formalism: Formalism,
    sequence: Vec<String>,
    conditions: Vec<String>,
    target: String,
    probability: f64,
}

#[derive(Serialize)]
struct ExpansionResult {
    rewrite: String,
    expansion: Expansion,
}

pub fn run(args: &WignerArgs, manifest: &RunManifest) -> Result<Outcome, CliError> {
    if let Some(n) = args.contradiction_demo {
        return demo(args, n, manifest);
    }
    if let Some(spec) = &args.expand {
        return expand(spec);
    }
    probability(args)
}

fn demo(args: &WignerArgs, n: usize, manifest: &RunManifest) -> Result<Outcome, CliError> {
    let seed = args.seed.ok_or_else(|| usage("randomized runs need --seed"))?;
    let formalism = args.formalism.unwrap_or(Formalism::SubjectiveCollapse);
    let (report, ledgers) = contradiction_demo(formalism, seed, n)?;
    let mut checks = vec![check("passed trials do not exceed trials", report.n_passed <= report.n_trials)];
    if formalism == Formalism::Standard {
        checks.push(check("standard formalism keeps records consistent", report.contradictions == 0));
    }
    let csv = summary_csv(&report);
    let mut outcome = Outcome::new(&report, csv, checks);
    if let Some(path) = &args.ledger {
        let mut buf = serde_json::to_vec(&serde_json::json!({ "manifest": manifest })).expect("manifest serializes");
        buf.push(b'\n');
        write_ledgers_jsonl(&ledgers, &mut buf)?;
        outcome.side_files.push((path.clone(), String::from_utf8(buf).expect("jsonl is utf-8")));
    }
    Ok(outcome)
}

fn summary_csv(r: &ContradictionReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "formalism,seed,n_trials,n_passed,contradictions,raw_frequency,conditioned_frequency,conditioned_std_error\n{},{},{},{},{},{},{},{}\n",
        r.formalism.map(|f| f.to_string()).unwrap_or_default(),
        r.seed.map(|s| s.to_string()).unwrap_or_default(),
        r.n_trials,
        r.n_passed,
        r.contradictions,
        r.raw_frequency,
        opt(r.conditioned_frequency),
        opt(r.conditioned_std_error)
    )
}

fn expand(spec: &str) -> Result<Outcome, CliError> {
    let state = build_initial();
    let expansion = if spec.trim().eq_ignore_ascii_case("ok-fail") {
        ok_fail_expansion(&state)
    } else {
        let choice: MeasurementChoice = spec.parse()?;
        rewrite_in_basis(&state, choice.agent, choice.basis)?
    };
    let back = expansion.reconstruct()?;
    let norm: f64 = expansion.components.iter().map(|c| c.amplitude.norm_sqr()).sum();
    let checks = vec![
        check("expansion is normalized", (norm - 1.0).abs() <= 1e-12),
        check("expansion reconstructs the state", back.equal_up_to_phase(state.psi(), 1e-12)),
    ];
    let mut csv = String::from("labels,re,im\n");
    for c in &expansion.components {
        let Amplitude { re, im } = c.amplitude;
        csv.push_str(&format!("{},{re},{im}\n", c.labels.join(" ")));
    }
    Ok(Outcome::new(ExpansionResult { rewrite: spec.trim().to_owned(), expansion }, csv, checks))
}

fn parse_all<T: std::str::FromStr<Err = gedanken_core::Error>>(items: &[String]) -> Result<Vec<T>, CliError> {
    items.iter().filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(CliError::from)).collect()
}

fn probability(args: &WignerArgs) -> Result<Outcome, CliError> {
    let target: Event = args
        .target
        .as_deref()
        .ok_or_else(|| usage("give --target, --expand or --contradiction-demo"))?
        .parse()?;
    let sequence: Vec<MeasurementChoice> = parse_all(&args.sequence)?;
    let conditions: Vec<Event> = parse_all(&args.cond)?;
    let formalism = args.formalism.unwrap_or(Formalism::Standard);
    let p = match formalism {
        Formalism::Standard => {
            for e in conditions.iter().chain([&target]) {
                if let Some(c) = sequence.iter().find(|c| c.agent == e.agent && c.basis != e.basis) {
                    return Err(usage(format!("{} measures {} in the sequence but the event {e} needs {}", c.agent, c.basis, e.basis)));
                }
            }
            let order: Vec<Agent> = sequence.iter().map(|c| c.agent).collect();
            standard_probability(&conditions, &target, &order)?
        }
        Formalism::RelativeState => relative_state_probability(&sequence, &conditions, &target)?,
        Formalism::SubjectiveCollapse => {
            return Err(usage("subjective collapse has no closed probability; use --contradiction-demo"));
        }
    };
    let checks = vec![check("probability in [0, 1]", (-1e-12..=1.0 + 1e-12).contains(&p))];
    let result = ProbabilityResult {
        formalism,
        sequence: sequence.iter().map(|c| format!("{}:{}", c.agent, c.basis)).collect(),
        conditions: conditions.iter().map(Event::to_string).collect(),
        target: target.to_string(),
        probability: p,
    };
    let csv = format!(
        "formalism,sequence,conditions,target,probability\n{},{},{},{},{}\n",
        formalism,
        result.sequence.join(" "),
        result.conditions.join(" "),
        result.target,
        p
    );
    Ok(Outcome::new(result, csv, checks))
}
