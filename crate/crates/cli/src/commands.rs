use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use mdpl_core::dsl::{check_domain, parse_domain, Diagnostic};
use mdpl_core::export::{graph_dump, to_dot};
use mdpl_core::model::DomainSpec;
use mdpl_core::pipeline::{compile, Compiled};
use mdpl_core::prism::emit::emit_with;
use mdpl_core::prism::props;
use mdpl_core::sim::{export_table, import_table, simulate, Executor};
use mdpl_core::solver::solve;
use mdpl_core::{bundled, Exec};
use serde_json::json;

use crate::{Command, Input, ModelOpts};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

fn model<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

fn io<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Check { input } => {
            let (path, d) = load(&input)?;
            let diags = check_domain(&d);
            report(&path, &diags);
            if diags.iter().any(Diagnostic::is_error) {
                return Err(model(anyhow!("{path}: domain has errors")));
            }
            println!("{path}: ok");
            Ok(())
        }
        Command::Compile {
            input,
            model: opts,
            dot,
            graph,
        } => cmd_compile(&input, &opts, dot, graph),
        Command::Solve {
            input,
            model: opts,
            label,
        } => cmd_solve(&input, &opts, label),
        Command::Simulate {
            input,
            model: opts,
            policy,
            label,
            trials,
            seed,
            fault,
            epsilon,
            max_steps,
        } => {
            let exec = match (fault, epsilon) {
                (Some(p), _) => Executor::faulty(p, seed),
                (None, Some(e)) => Executor::epsilon_greedy(e, seed),
                (None, None) => Executor::exact(seed),
            };
            cmd_simulate(&input, &opts, &policy, label, trials, exec, max_steps)
        }
        Command::Bundled { name: None } => {
            for (n, _) in bundled::DOMAINS {
                println!("{n}");
            }
            Ok(())
        }
        Command::Bundled { name: Some(n) } => {
            let text = bundled::get(&n).ok_or_else(|| io(anyhow!("no bundled domain `{n}`")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn report(path: &str, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{path}:{d}");
    }
}

fn load(input: &Input) -> Result<(String, DomainSpec), Failure> {
    let (path, text) = match input.domain.strip_prefix('@') {
        Some(name) => {
            let text =
                bundled::get(name).ok_or_else(|| io(anyhow!("no bundled domain `{name}`")))?;
            (input.domain.clone(), text.to_string())
        }
        None => {
            let text = fs::read_to_string(&input.domain)
                .with_context(|| format!("cannot read `{}`", input.domain))
                .map_err(io)?;
            (input.domain.clone(), text)
        }
    };
    match parse_domain(&text) {
        Ok(d) => Ok((path, d)),
        Err(diags) => {
            report(&path, &diags);
            Err(model(anyhow!("{path}: parse failed")))
        }
    }
}

fn exec_of(opts: &ModelOpts) -> Exec {
    if opts.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn build(input: &Input, opts: &ModelOpts) -> Result<(String, DomainSpec, Compiled), Failure> {
    let (path, d) = load(input)?;
    let diags = check_domain(&d);
    report(&path, &diags);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(model(anyhow!("{path}: domain has errors")));
    }
    let c = compile(&d, opts.objective.sense(), opts.cap, exec_of(opts)).map_err(model)?;
    Ok((path, d, c))
}

fn write(dir: &Path, file: String, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create `{}`", dir.display()))
        .map_err(io)?;
    let p = dir.join(file);
    fs::write(&p, contents)
        .with_context(|| format!("cannot write `{}`", p.display()))
        .map_err(io)?;
    Ok(p)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn value_json(v: f64) -> serde_json::Value {
    if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

fn cmd_compile(input: &Input, opts: &ModelOpts, dot: bool, graph: bool) -> Outcome {
    let (_, d, mut c) = build(input, opts)?;
    let name = d.name.to_string();
    let t = Instant::now();
    let prism = emit_with(&c.graph, &d, opts.mode, exec_of(opts)).map_err(model)?;
    write(&input.out, format!("{name}.prism"), &prism)?;
    c.timings.write = t.elapsed();
    write(
        &input.out,
        format!("{name}.props"),
        &props(&d, opts.objective.sense()),
    )?;
    if dot {
        write(&input.out, format!("{name}.dot"), &to_dot(&c.graph))?;
    }
    if graph {
        write(&input.out, format!("{name}.graph"), &graph_dump(&c.graph))?;
    }
    let stats = serde_json::to_value(c.stats).expect("stats serialize");
    write(&input.out, format!("{name}.stats.json"), &json_text(&stats))?;
    write(
        &input.out,
        format!("{name}.timings.json"),
        &json_text(&c.timings.to_json()),
    )?;
    let s = &c.stats;
    println!("domain:  {name}");
    println!("states:  {}", s.states);
    println!("actions: {}", s.actions);
    println!("choices: {}", s.choices);
    println!("edges:   {}", s.edges);
    let t = &c.timings;
    println!(
        "time:    build {:.3}s, refine {:.3}s, annotate {:.3}s, write {:.3}s",
        t.build.as_secs_f64(),
        t.refine.as_secs_f64(),
        t.annotate.as_secs_f64(),
        t.write.as_secs_f64()
    );
    Ok(())
}

fn cmd_solve(input: &Input, opts: &ModelOpts, label: Option<String>) -> Outcome {
    let (_, d, c) = build(input, opts)?;
    let name = d.name.to_string();
    let objective = opts.objective;
    let label = label.unwrap_or_else(|| objective.default_label().to_string());
    let r = solve(&c.graph, &d, objective, Some(&label), exec_of(opts)).map_err(model)?;
    let table = export_table(&r.policy, &c.graph);
    let policy = write(&input.out, format!("{name}.{objective}.policy.csv"), &table)?;
    let v = r.initial_value();
    let summary = json!({
        "domain": name,
        "objective": objective.as_str(),
        "label": label,
        "states": c.stats.states,
        "value": value_json(v),
        "iterations": r.iterations,
        "residual": r.residual,
        "policy_rows": r.policy.len(),
    });
    write(
        &input.out,
        format!("{name}.{objective}.solve.json"),
        &json_text(&summary),
    )?;
    println!("{objective} [F \"{label}\"] from the initial state: {v}");
    println!("policy: {}", policy.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    input: &Input,
    opts: &ModelOpts,
    policy: &Path,
    label: Option<String>,
    trials: u64,
    exec: Executor,
    max_steps: Option<usize>,
) -> Outcome {
    let (_, d, c) = build(input, opts)?;
    let name = d.name.to_string();
    let text = fs::read_to_string(policy)
        .with_context(|| format!("cannot read `{}`", policy.display()))
        .map_err(io)?;
    let p = import_table(&text, &c.graph, opts.objective).map_err(model)?;
    let label = label.unwrap_or_else(|| opts.objective.default_label().to_string());
    let r = simulate(
        &c.graph,
        &d,
        &p,
        &exec,
        &label,
        trials,
        max_steps,
        exec_of(opts),
    )
    .map_err(model)?;
    write(&input.out, format!("{name}.sim.csv"), &r.to_csv())?;
    write(
        &input.out,
        format!("{name}.sim.json"),
        &json_text(&r.to_json()),
    )?;
    print!("{r}");
    Ok(())
}
