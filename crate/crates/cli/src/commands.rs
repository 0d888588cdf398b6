use std::fs;
use std::path::Path;

use greedyprune::cost::{tflops_ratio, tokens_for_ratio, CostParams};
use greedyprune::harness::{
    compare, comparison_table, run_method, sweep_table, sweep_tau, Instance, Method, MethodParams,
};
use greedyprune::io::{
    checksum_hex, decode_tokens, planted_sidecar_path, read_planted_metadata, read_saliency_file, read_selection,
    write_planted_metadata, write_selection, write_token_file,
};
use greedyprune::report::{GridMap, Table};
use greedyprune::saliency::compute_saliency;
use greedyprune::synth::{generate_clustered, SynthParams};
use greedyprune::SaliencyVector;

use crate::cli::{
    Cli, Command, CompareArgs, FlopsArgs, GenArgs, InputArgs, MethodArg, PruneArgs, ReportFormat, SeedRuleArg,
    SelectorArgs, SweepArgs, VizArgs,
};
use crate::error::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prune(a) => prune(a),
        Command::Compare(a) => cmd_compare(a),
        Command::SweepTau(a) => cmd_sweep(a),
        Command::Flops(a) => flops(a),
        Command::Gen(a) => gen(a),
        Command::Viz(a) => viz(a),
    }
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Greedy => Method::Greedy,
        MethodArg::Topk => Method::Topk,
        MethodArg::Maxmin => Method::Maxmin,
        MethodArg::Random => Method::Random,
        MethodArg::Grid => Method::Grid,
        MethodArg::Exact => Method::Exact,
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("--grid expects WIDTHxHEIGHT, got {s:?}"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

struct Loaded {
    instance: Instance,
    checksum: String,
}

fn load(args: &InputArgs) -> Result<Loaded, CliError> {
    let bytes = fs::read(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let checksum = checksum_hex(&bytes);
    let (tokens, query) = decode_tokens(&bytes)?;
    let weights = match (&args.saliency_file, query) {
        (Some(path), _) => {
            let w = read_saliency_file(path)?;
            if w.len() != tokens.n() {
                return Err(CliError::usage(format!(
                    "--saliency-file has {} weights, token file has {} tokens",
                    w.len(),
                    tokens.n()
                )));
            }
            SaliencyVector::new(w)?
        }
        (None, Some(q)) => compute_saliency(&tokens, &q)?,
        (None, None) => return Err(CliError::usage("token file carries no query vector; pass --saliency-file")),
    };
    let mut instance = Instance::new(tokens, weights)?;
    let sidecar = match &args.planted {
        Some(p) => Some(p.clone()),
        None => Some(planted_sidecar_path(&args.input)).filter(|p| p.exists()),
    };
    if let Some(path) = sidecar {
        let meta = read_planted_metadata(&path)?;
        if meta.cluster_of.len() != instance.n() || meta.planted_critical.iter().any(|&i| i >= instance.n()) {
            return Err(CliError::usage(format!("{} does not describe this token file", path.display())));
        }
        instance.planted = Some(meta.planted_critical);
    }
    Ok(Loaded { instance, checksum })
}

fn method_params(s: &SelectorArgs, methods: &[Method]) -> Result<MethodParams, CliError> {
    if s.budget == 0 {
        return Err(CliError::usage("--budget must be at least 1"));
    }
    if !s.tau.is_finite() {
        return Err(CliError::usage("--tau must be finite"));
    }
    let grid = s.grid.as_deref().map(parse_grid).transpose()?;
    if methods.contains(&Method::Grid) && grid.is_none() {
        return Err(CliError::usage("method grid requires --grid WIDTHxHEIGHT"));
    }
    Ok(MethodParams {
        budget: s.budget,
        tau: s.tau,
        backfill: !s.no_backfill,
        seed: s.seed,
        grid,
        seed_rule: match s.seed_rule {
            SeedRuleArg::Lowest => greedyprune::baselines::SeedRule::LowestIndex,
            SeedRuleArg::MaxNorm => greedyprune::baselines::SeedRule::MaxNorm,
        },
        exact_cap: s.exact_cap,
        timing: !s.no_timing,
    })
}

fn check_grid(p: &MethodParams, n: usize) -> Result<(), CliError> {
    match p.grid {
        Some((w, h)) if w * h != n => Err(CliError::usage(format!("--grid {w}x{h} does not cover {n} tokens"))),
        _ => Ok(()),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn prune(a: PruneArgs) -> Result<(), CliError> {
    let m = method(a.method);
    let p = method_params(&a.selector, &[m])?;
    let loaded = load(&a.input)?;
    check_grid(&p, loaded.instance.n())?;
    let run = run_method(m, &loaded.instance, &p)?;
    let record = run.to_record(p.tau, &loaded.checksum);
    match &a.out {
        Some(path) => write_selection(path, &record)?,
        None => print!("{}", record.to_toml()?),
    }
    Ok(())
}

fn render(t: &Table, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => t.to_text(),
        ReportFormat::Tsv => t.to_tsv(),
    }
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let methods: Vec<Method> = a.methods.iter().copied().map(method).collect();
    if methods.is_empty() {
        return Err(CliError::usage("--methods is empty"));
    }
    let p = method_params(&a.selector, &methods)?;
    let loaded = load(&a.input)?;
    check_grid(&p, loaded.instance.n())?;
    let rows = compare(&loaded.instance, &methods, &p)?;
    write_out(None, &render(&comparison_table(&rows), a.format))
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.budget == 0 {
        return Err(CliError::usage("--budget must be at least 1"));
    }
    if let Some(t) = a.taus.iter().find(|t| !t.is_finite()) {
        return Err(CliError::usage(format!("--taus contains non-finite value {t}")));
    }
    let loaded = load(&a.input)?;
    let mut p = MethodParams::new(a.budget);
    p.backfill = !a.no_backfill;
    p.timing = false;
    let rows = sweep_tau(&loaded.instance, &a.taus, &p)?;
    write_out(None, &render(&sweep_table(&rows), a.format))
}

fn flops(a: FlopsArgs) -> Result<(), CliError> {
    let params = CostParams {
        total_layers: a.layers,
        prune_layer: a.prune_layer,
        text_len: a.text_len,
        orig_visual: a.visual,
        pruned_visual: a.pruned.unwrap_or(0),
        hidden_dim: a.hidden,
        ffn_dim: a.ffn,
    };
    match a.target {
        Some(target) => {
            let m = tokens_for_ratio(target, &params).map_err(|e| match e {
                greedyprune::Error::TargetUnachievable { .. } => CliError::Algorithm(e.to_string()),
                other => other.into(),
            })?;
            println!("{m}");
        }
        None => println!("{:.6}", tflops_ratio(&params)?),
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let params = SynthParams {
        seed: a.seed,
        n_clusters: a.clusters,
        per_cluster: a.per_cluster,
        dim: a.dim,
        intra_sim_min: a.intra,
        inter_sim_max: a.inter,
    };
    let inst = generate_clustered(&params)?;
    write_token_file(&a.out, &inst.tokens, Some(&inst.query))?;
    write_planted_metadata(planted_sidecar_path(&a.out), &inst.metadata(params))?;
    Ok(())
}

fn viz(a: VizArgs) -> Result<(), CliError> {
    let (w, h) = parse_grid(&a.grid)?;
    let record = read_selection(&a.selection)?;
    let bytes = fs::read(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let (tokens, _) = decode_tokens(&bytes)?;
    if checksum_hex(&bytes) != record.input_checksum {
        return Err(CliError::usage(format!(
            "{} was not computed from {} (checksum mismatch)",
            a.selection.display(),
            a.input.display()
        )));
    }
    let backfilled: Vec<usize> = record.backfilled_indices.iter().map(|&i| i as usize).collect();
    let retained: Vec<usize> =
        record.indices.iter().map(|&i| i as usize).filter(|i| backfilled.binary_search(i).is_err()).collect();
    let map = GridMap::new(w, h, tokens.n(), &retained, &backfilled)?;

    let with_ext = |ext: &str| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(ext);
        std::path::PathBuf::from(s)
    };
    let pgm = with_ext(".pgm");
    fs::write(&pgm, map.to_pgm(a.cell_px)).map_err(|e| CliError::Io(format!("{}: {e}", pgm.display())))?;
    let svg = with_ext(".svg");
    fs::write(&svg, map.to_svg(a.cell_px)).map_err(|e| CliError::Io(format!("{}: {e}", svg.display())))?;
    Ok(())
}
