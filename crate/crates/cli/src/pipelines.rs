//! Pipeline execution: each run writes its CSV artifacts, a JSON summary,
//! and (last) a manifest hashing every output. Outputs are deterministic for
//! a fixed config and seed; the manifest alone carries wall-clock timing.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use cplab_core::engine::{simulate, Configuration, Mode};
use cplab_core::experiments::{
    assemble_metastability, coupling_deficiency, estimate_growth_rate, estimate_survival,
    extinction_ensemble, plateau_fraction, Family,
};
use cplab_core::graph::{
    diameter, generate_random_regular, io as graph_io, neighborhood_ball, Graph, VertexSet,
};
use cplab_core::numfmt::sig12;
use cplab_core::oracle::{exact_mean_extinction, exact_transient};
use cplab_core::rng::{rng_from, substream};
use cplab_core::stats::{binomial_se, mean_se};
use cplab_core::structure::{classify_black_white, disjoint_short_paths, grey_closure};

use crate::config::{Pipeline, RunConfig};
use crate::manifest::{sha256_hex, Manifest, OutputFile};

const TAG_GRAPH: u64 = 0x6772_6170_6831;
const TAG_PICK: u64 = 0x7069_636b;

struct Workspace {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
    graph_hash: Option<String>,
}

impl Workspace {
    fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Workspace { dir, outputs: Vec::new(), graph_hash: None })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<String> {
        std::fs::write(self.dir.join(name), bytes)
            .with_context(|| format!("writing {name}"))?;
        let hash = sha256_hex(bytes);
        self.outputs.push(OutputFile { path: name.to_string(), sha256: hash.clone() });
        Ok(hash)
    }

    fn write_graph(&mut self, name: &str, g: &Graph) -> Result<String> {
        let hash = self.write(name, graph_io::to_edge_list_string(g).as_bytes())?;
        if self.graph_hash.is_none() {
            self.graph_hash = Some(hash.clone());
        }
        Ok(hash)
    }
}

fn generated_graph(rc: &RunConfig, index: u64, n: u32) -> Result<Graph> {
    generate_random_regular(n, rc.exp.d, substream(rc.exp.seed, TAG_GRAPH, index))
        .map_err(|e| anyhow!(e))
}

/// Runs the configured pipeline. All validation already happened; any error
/// here is a runtime failure (exit 2 at the boundary).
pub fn execute(rc: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let mut ws = Workspace::new(rc.out_dir.clone())?;
    let results = match rc.pipeline {
        Pipeline::Generate => run_generate(rc, &mut ws)?,
        Pipeline::Simulate => run_simulate(rc, &mut ws)?,
        Pipeline::Extinction => run_extinction(rc, &mut ws)?,
        Pipeline::Metastability => run_metastability(rc, &mut ws)?,
        Pipeline::Structure => run_structure(rc, &mut ws)?,
        Pipeline::OracleCheck => run_oracle_check(rc, &mut ws)?,
        Pipeline::Growth => run_growth(rc, &mut ws)?,
        Pipeline::Deficiency => run_deficiency(rc, &mut ws)?,
    };
    let summary = json!({
        "pipeline": rc.pipeline.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": rc.exp.seed,
        "config": rc.raw,
        "graph_hash": ws.graph_hash,
        "results": results,
    });
    ws.write("summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: rc.exp.seed,
        config: rc.raw.clone(),
        input_graph_hash: ws.graph_hash.clone(),
        outputs: std::mem::take(&mut ws.outputs),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&rc.out_dir)?;
    Ok(())
}

fn run_generate(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let diam = diameter(&g).map_err(|e| anyhow!(e))?;
    Ok(json!({
        "n": g.n(),
        "d": g.d(),
        "edges": g.edge_count(),
        "connected": g.connected(),
        "generator_attempts": g.generator_attempts(),
        "diameter": diam,
    }))
}

fn run_simulate(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let horizon = rc.exp.horizon;
    let checkpoints: Vec<f64> = (0..=50).map(|i| horizon * i as f64 / 50.0).collect();
    let init = Configuration::full(g.n() as usize);
    let (summary, field) = simulate(
        &g,
        rc.exp.lambda,
        &init,
        horizon,
        rc.mode,
        &checkpoints,
        substream(rc.exp.seed, 0x73696d, 0),
    )?;
    let mut csv = String::from("time,infected\n");
    for cp in &summary.checkpoints {
        writeln!(csv, "{},{}", sig12(cp.time), cp.infected).unwrap();
    }
    ws.write("trajectory.csv", csv.as_bytes())?;
    if let Some(field) = field {
        ws.write("field.csv", field.to_csv().as_bytes())?;
    }
    Ok(json!({
        "final_infected": summary.final_config.len(),
        "extinction_time": summary.extinction_time,
        "events": summary.events,
        "mode": match rc.mode { Mode::ActiveClock => "active-clock", Mode::FullField => "full-field" },
    }))
}

fn run_extinction(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let report =
        extinction_ensemble(&g, rc.exp.lambda, rc.exp.replicas, rc.exp.t_cap, rc.exp.seed)?;
    let mut csv = String::from("replica,tau,censored\n");
    for (i, s) in report.samples.iter().enumerate() {
        writeln!(csv, "{},{},{}", i, sig12(s.tau), s.censored).unwrap();
    }
    ws.write("samples.csv", csv.as_bytes())?;
    Ok(json!({
        "replicas": report.replicas,
        "uncensored": report.uncensored,
        "censored_fraction": report.censored_fraction,
        "mean": report.mean,
        "se": report.se,
        "ks": report.ks,
        "bootstrap_p": report.bootstrap_p,
        "t_cap": report.t_cap,
    }))
}

fn run_metastability(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    if rc.exp.n_grid.len() < 3 {
        bail!("metastability needs at least 3 sizes in n_grid to fit the growth slope");
    }
    let mut reports = Vec::new();
    for (i, &n) in rc.exp.n_grid.iter().enumerate() {
        let g = generated_graph(rc, i as u64, n)?;
        ws.write_graph(&format!("graph_n{n}.edges"), &g)?;
        let report = extinction_ensemble(
            &g,
            rc.exp.lambda,
            rc.exp.replicas,
            rc.exp.t_cap,
            substream(rc.exp.seed, 0x6d657461, i as u64),
        )?;
        let mut csv = String::from("replica,tau,censored\n");
        for (j, s) in report.samples.iter().enumerate() {
            writeln!(csv, "{},{},{}", j, sig12(s.tau), s.censored).unwrap();
        }
        ws.write(&format!("samples_n{n}.csv"), csv.as_bytes())?;
        reports.push((n, report));
    }
    let first = generated_graph(rc, 0, rc.exp.n_grid[0])?;
    let delta0 = plateau_fraction(&first, rc.exp.lambda, 32, 5.0, rc.exp.seed)?;
    let pairs: Vec<(u32, &cplab_core::experiments::EnsembleReport)> =
        reports.iter().map(|(n, r)| (*n, r)).collect();
    let full = assemble_metastability(
        rc.exp.d,
        rc.exp.lambda,
        rc.exp.t_cap,
        &pairs,
        Some(delta0),
        rc.exp.a_grid.clone(),
    )?;
    Ok(serde_json::to_value(&full)?)
}

fn run_structure(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let m = rc.exp.branch_depth;
    let set_size = (rc.exp.epsilon * f64::from(g.n())).floor() as usize;
    if set_size == 0 {
        bail!("epsilon {} gives an empty member set at n = {}", rc.exp.epsilon, g.n());
    }
    let admissible: Vec<u32> =
        (0..g.n()).filter(|&v| neighborhood_ball(&g, v, m).1).collect();
    if admissible.len() < set_size {
        bail!("only {} vertices have tree {m}-balls, need {set_size}", admissible.len());
    }
    let mut rng = rng_from(substream(rc.exp.seed, TAG_PICK, 0));
    let members = VertexSet::random_from_pool(&admissible, set_size, &mut rng);
    let coloring = classify_black_white(&g, &members, m).map_err(|e| anyhow!(e))?;
    ws.write("coloring.csv", coloring.to_csv().as_bytes())?;
    let closure = grey_closure(&g, &members, m).map_err(|e| anyhow!(e))?;
    // Path-system demonstration between the two halves of the member set.
    let half: Vec<u32> = members.iter().collect();
    let (lo, hi) = half.split_at(half.len() / 2);
    let max_len = 10;
    let paths = disjoint_short_paths(
        &g,
        &VertexSet::new(lo.to_vec()),
        &VertexSet::new(hi.to_vec()),
        max_len,
    );
    ws.write("paths.csv", paths.to_csv().as_bytes())?;
    let bound = coloring.branch_bound * coloring.white as u64;
    Ok(json!({
        "members": members.len(),
        "admissible": coloring.black + coloring.white,
        "black": coloring.black,
        "white": coloring.white,
        "inadmissible": coloring.inadmissible,
        "branch_depth": m,
        "branch_bound": coloring.branch_bound,
        "grey": closure.grey,
        "closure_size": closure.closure.len(),
        "grey_bound_ok": (closure.grey as u64) <= bound,
        "paths": paths.count(),
        "path_max_length": max_len,
    }))
}

fn run_oracle_check(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let lambda = rc.exp.lambda;
    let full = Configuration::full(g.n() as usize);
    let seedv = Configuration::singleton(0);
    let exact_mean = exact_mean_extinction(&g, lambda, &full)
        .map_err(|e| anyhow!(e))?
        .expected_extinction
        .unwrap();
    let exact_surv = exact_transient(&g, lambda, &seedv, rc.exp.horizon)
        .map_err(|e| anyhow!(e))?
        .survival_probability
        .unwrap();
    let taus: Vec<f64> = (0..rc.exp.replicas)
        .map(|r| {
            cplab_core::engine::extinction_time(
                &g,
                lambda,
                &full,
                rc.exp.t_cap,
                substream(rc.exp.seed, 0x6f72_6331, r as u64),
            )
            .map(|s| s.tau)
            .map_err(|e| anyhow!(e))
        })
        .collect::<Result<_>>()?;
    let (mc_mean, mean_se_v) = mean_se(&taus)?;
    let alive = (0..rc.exp.replicas)
        .filter(|&r| {
            let (s, _) = simulate(
                &g,
                lambda,
                &seedv,
                rc.exp.horizon,
                Mode::ActiveClock,
                &[],
                substream(rc.exp.seed, 0x6f72_6333, r as u64),
            )
            .expect("validated");
            !s.final_config.is_empty()
        })
        .count();
    let mc_surv = alive as f64 / rc.exp.replicas as f64;
    let surv_se = binomial_se(mc_surv, rc.exp.replicas);
    let rows = [
        ("mean_extinction_full", exact_mean, mc_mean, mean_se_v),
        ("survival_from_seed", exact_surv, mc_surv, surv_se),
    ];
    let mut csv = String::from("quantity,exact,estimate,se,z\n");
    let mut max_z = 0.0f64;
    for (name, exact, est, se) in rows {
        let z = if se > 0.0 { (est - exact) / se } else { 0.0 };
        max_z = max_z.max(z.abs());
        writeln!(csv, "{name},{},{},{},{}", sig12(exact), sig12(est), sig12(se), sig12(z))
            .unwrap();
    }
    ws.write("comparisons.csv", csv.as_bytes())?;
    Ok(json!({
        "exact_mean_extinction": exact_mean,
        "mc_mean_extinction": mc_mean,
        "mc_mean_se": mean_se_v,
        "exact_survival": exact_surv,
        "mc_survival": mc_surv,
        "mc_survival_se": surv_se,
        "max_abs_z": max_z,
        "all_within_3se": max_z <= 3.0,
    }))
}

fn run_growth(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let e = estimate_growth_rate(
        rc.exp.d,
        rc.exp.lambda,
        rc.exp.depth,
        rc.exp.horizon,
        rc.exp.replicas,
        rc.exp.seed,
    )?;
    let mut csv = String::from("time,mean,se,in_window\n");
    for i in 0..e.times.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            sig12(e.times[i]),
            sig12(e.means[i]),
            sig12(e.ses[i]),
            e.times[i] >= e.window.0
        )
        .unwrap();
    }
    ws.write("growth.csv", csv.as_bytes())?;
    let survival = estimate_survival(
        rc.exp.d,
        rc.exp.lambda,
        rc.exp.depth,
        rc.exp.horizon,
        rc.exp.replicas,
        substream(rc.exp.seed, 0x73757276, 0),
    )?;
    Ok(json!({
        "c_hat": e.c_hat,
        "c_se": e.c_se,
        "intercept": e.intercept,
        "window": e.window,
        "min_ratio": e.min_ratio,
        "max_ratio": e.max_ratio,
        "boundary_hit_fraction": e.boundary_hit_fraction,
        "depth": e.depth,
        "replicas": e.replicas,
        "survival": survival,
    }))
}

fn run_deficiency(rc: &RunConfig, ws: &mut Workspace) -> Result<serde_json::Value> {
    let g = generated_graph(rc, 0, rc.exp.n)?;
    ws.write_graph("graph.edges", &g)?;
    let mut csv = String::from("a,vertex,estimate,se\n");
    let mut per_a = Vec::new();
    for (i, &a) in rc.exp.a_grid.iter().enumerate() {
        let rep = coupling_deficiency(
            &g,
            rc.exp.lambda,
            a,
            &Family::Singletons,
            rc.exp.replicas,
            substream(rc.exp.seed, 0x646566, i as u64),
        )?;
        for m in &rep.members {
            writeln!(
                csv,
                "{},{},{},{}",
                sig12(a),
                m.vertex.unwrap_or(m.index as u32),
                sig12(m.estimate),
                sig12(m.se)
            )
            .unwrap();
        }
        per_a.push(json!({
            "a": a,
            "max_estimate": rep.max_estimate,
            "max_se": rep.max_se,
            "argmax_vertex": rep.argmax,
            "mean_fraction": rep.mean_fraction,
            "mean_fraction_se": rep.mean_fraction_se,
            "closed_form_lambda0": rep.closed_form_lambda0,
        }));
    }
    ws.write("deficiency.csv", csv.as_bytes())?;
    Ok(json!({ "per_a": per_a, "replicas": rc.exp.replicas }))
}
