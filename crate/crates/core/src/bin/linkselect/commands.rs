use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use linkselect::extensions::network::{parse_network, solve_network_few_long};
use linkselect::harness::{gnuplot_script, records_to_csv, BenchConfig, WeightDist};
use linkselect::hardness::{reduce as reduce_ss, SubsetSumInstance};
use linkselect::lp_bound::{preprocess_oversized, solve_lp};
use linkselect::model::{decision_string, parse_instance, Instance};
use linkselect::oracle::{exact_opt, DEFAULT_LIMIT};
use linkselect::{search, Error};

use crate::{BenchArgs, Dist, ExactArgs, LpArgs, NetworkArgs, ReduceArgs, SolveArgs};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| match e {
        Error::Parse { .. } => Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        },
        other => other.into(),
    })
}

fn line(out: &mut String, key: &str, v: f64) {
    // `+ 0.0` turns a negative zero from cancellation into plain zero.
    let _ = writeln!(out, "{key} {:.9}", v + 0.0);
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let instance = load_instance(&a.instance)?;
    let res = search::solve(&instance, a.epsilon)?;
    let best = &res.best;
    let point = res.best_point();

    let exact = if a.with_exact && instance.len() <= DEFAULT_LIMIT {
        Some(exact_opt(&instance, DEFAULT_LIMIT)?)
    } else {
        if a.with_exact {
            eprintln!("warning: {} packets exceed the exact limit {DEFAULT_LIMIT}; skipping", instance.len());
        }
        None
    };

    if let Some(path) = &a.trace {
        write(path, &point.trace.to_csv_mapped(Some(&point.kept)))?;
    }

    if a.json {
        let grid: Vec<_> = res
            .points
            .iter()
            .map(|p| {
                json!({
                    "capacity": p.capacity,
                    "lp_objective": p.lp_objective,
                    "forced_cost": p.forced_cost,
                    "lower_bound_term": p.lower_bound_term,
                    "capacity_cost": p.alg_solution.cost.capacity_cost,
                    "rejection_cost": p.alg_solution.cost.rejection_cost,
                    "total": p.alg_solution.cost.total,
                    "windows": p.trace.windows.len(),
                })
            })
            .collect();
        let mut doc = json!({
            "epsilon": a.epsilon,
            "capacity": point.capacity,
            "capacity_cost": best.cost.capacity_cost,
            "rejection_cost": best.cost.rejection_cost,
            "total": best.cost.total,
            "initial_left": best.initial_left,
            "decisions": best.decision_string(),
            "lp_best_bound": res.lp_best_bound(),
            "grid": grid,
        });
        if let Some(e) = &exact {
            doc["exact"] = json!({
                "total": e.total,
                "capacity_cost": e.capacity_cost,
                "rejection_cost": e.rejection_cost,
                "decisions": decision_string(&e.decisions),
            });
        }
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::usage(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }

    let mut out = String::new();
    line(&mut out, "capacity", point.capacity);
    line(&mut out, "capacity_cost", best.cost.capacity_cost);
    line(&mut out, "rejection_cost", best.cost.rejection_cost);
    line(&mut out, "total", best.cost.total);
    line(&mut out, "initial_left", best.initial_left);
    let _ = writeln!(out, "decisions {}", best.decision_string());
    line(&mut out, "lp_best_bound", res.lp_best_bound());
    if let Some(e) = &exact {
        line(&mut out, "opt_total", e.total);
        let ratio = if e.total > 0.0 { best.cost.total / e.total } else { 1.0 };
        line(&mut out, "ratio_vs_opt", ratio);
    }
    Ok(out)
}

pub fn lp(a: LpArgs) -> CmdResult {
    if !(a.capacity.is_finite() && a.capacity >= 0.0) {
        return Err(Failure::usage(format!("--capacity must be non-negative, got {}", a.capacity)));
    }
    let instance = load_instance(&a.instance)?;
    let pre = preprocess_oversized(&instance, a.capacity);
    let frac = solve_lp(&pre.sub_instance, a.capacity)?;
    let mut out = String::new();
    line(&mut out, "capacity", a.capacity);
    line(&mut out, "lp_objective", frac.objective);
    line(&mut out, "forced_cost", pre.forced_cost);
    line(&mut out, "lower_bound", frac.objective + pre.forced_cost);
    line(&mut out, "start_left", frac.left_trace[0]);
    out.push_str("index,direction,weight,y,fraction\n");
    let mut kept = pre.kept.iter().zip(&frac.y).peekable();
    for (pos, p) in instance.packets().iter().enumerate() {
        let y = match kept.peek() {
            Some((&k, &y)) if k == pos => {
                kept.next();
                y
            }
            _ => 0.0,
        };
        let _ = writeln!(out, "{},{},{:.9},{:.9},{:.9}", p.index, p.direction, p.weight, y, y / p.weight);
    }
    Ok(out)
}

pub fn exact(a: ExactArgs) -> CmdResult {
    if a.limit > DEFAULT_LIMIT {
        eprintln!("warning: limit {} above {DEFAULT_LIMIT}; enumeration grows as 2^t", a.limit);
    }
    let instance = load_instance(&a.instance)?;
    let r = exact_opt(&instance, a.limit)?;
    let mut out = String::new();
    line(&mut out, "total", r.total);
    line(&mut out, "capacity", r.capacity_cost);
    line(&mut out, "rejection", r.rejection_cost);
    line(&mut out, "initial_left", r.initial_left);
    let _ = writeln!(out, "decisions {}", decision_string(&r.decisions));
    Ok(out)
}

pub fn reduce(a: ReduceArgs) -> CmdResult {
    let ss = SubsetSumInstance::new(a.items, a.target)?;
    let red = reduce_ss(&ss);
    let mut out = String::new();
    match &a.output {
        Some(path) => write(path, &red.wps.to_text())?,
        None => out.push_str(&red.wps.to_text()),
    }
    line(&mut out, "threshold", red.threshold);
    Ok(out)
}

pub fn bench(a: BenchArgs) -> CmdResult {
    let mut config = match &a.config {
        Some(path) => {
            let text = read(path)?;
            BenchConfig::from_toml(&text).map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", path.display()),
            })?
        }
        None => {
            let seed = a.seed.ok_or_else(|| Failure::usage("inline bench needs an explicit --seed"))?;
            let weight_dist = match a.dist {
                Dist::UniformInt => {
                    if a.lo.fract() != 0.0 || a.hi.fract() != 0.0 || a.lo < 1.0 {
                        return Err(Failure::usage("uniform-int bounds must be positive integers"));
                    }
                    WeightDist::UniformInt {
                        lo: a.lo as u64,
                        hi: a.hi as u64,
                    }
                }
                Dist::UniformReal => WeightDist::UniformReal { lo: a.lo, hi: a.hi },
                Dist::PowerLaw => WeightDist::PowerLaw {
                    alpha: a.alpha,
                    lo: a.lo,
                    hi: a.hi,
                },
            };
            BenchConfig {
                epsilon: search::DEFAULT_EPSILON,
                oracle_limit: DEFAULT_LIMIT,
                seed,
                count: a.count,
                t: a.t,
                weight_dist,
                p_right: a.p_right,
                f: a.f,
                m: a.m,
            }
        }
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(eps) = a.epsilon {
        config.epsilon = eps;
    }
    if let Some(limit) = a.oracle_limit {
        config.oracle_limit = limit;
    }
    let records = config.run()?;
    if let Some(path) = &a.gnuplot {
        write(path, &gnuplot_script(&a.csv_name, config.epsilon))?;
    }
    Ok(records_to_csv(&records))
}

pub fn network(a: NetworkArgs) -> CmdResult {
    let text = read(&a.network)?;
    let net = parse_network(&text).map_err(|e| match e {
        Error::Parse { .. } => Failure {
            code: 2,
            message: format!("{}: {e}", a.network.display()),
        },
        other => other.into(),
    })?;
    let sol = solve_network_few_long(&net, a.epsilon, a.long_limit)?;
    if a.json {
        let mut s = serde_json::to_string_pretty(&sol).map_err(|e| Failure::usage(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }
    let mut out = String::new();
    line(&mut out, "total", sol.total);
    line(&mut out, "rejected_long_cost", sol.rejected_long_cost);
    let ids: Vec<String> = sol.accepted_long.iter().map(|k| (k + 1).to_string()).collect();
    let _ = writeln!(out, "accepted_long {}", ids.join(","));
    let _ = writeln!(out, "subsets {}", sol.subsets_tried);
    for l in &sol.per_link {
        let ids: Vec<String> = l.packets.iter().map(|k| (k + 1).to_string()).collect();
        let _ = writeln!(
            out,
            "link {} total {:.9} capacity_cost {:.9} rejection_cost {:.9} decisions {} packets {}",
            l.link,
            l.solution.cost.total + 0.0,
            l.solution.cost.capacity_cost + 0.0,
            l.solution.cost.rejection_cost + 0.0,
            l.solution.decision_string(),
            ids.join(",")
        );
    }
    Ok(out)
}
