use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkselect"))
}

fn run(args: &[&str]) -> Output {
    bin().env_remove("LINKSELECT_EPSILON").args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
        .parse()
        .unwrap()
}

#[test]
fn solve_empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e.wps", "wps v1\nf 1\nm 0\n");
    let o = run(&["solve", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "total"), 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "/nonexistent/x.wps"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.wps", "wps v1\nf 1\nm 0\n-> -3\n");
    let o = run(&["solve", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let ok = write(dir.path(), "ok.wps", "wps v1\nf 1\nm 0\n-> 1\n");
    assert_eq!(run(&["lp", &ok, "--capacity", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let big: String = "wps v1\nf 1\nm 0\n".to_string() + &"-> 1\n".repeat(25);
    let big = write(dir.path(), "big.wps", &big);
    assert_eq!(run(&["exact", &big]).status.code(), Some(3));
}

#[test]
fn reduce_prints_threshold() {
    let o = run(&["reduce-subset-sum", "--target", "3", "1", "2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("wps v1\nf 0.75\nm 0\n-> 1\n-> 2\n-> 3\n<- 3\n"));
    assert!(out.ends_with("threshold 5.250000000\n"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.wps");
    let o = run(&["reduce-subset-sum", "--target", "3", "1", "2", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), "threshold 5.250000000\n");
    assert!(std::fs::read_to_string(&path).unwrap().ends_with("<- 3\n"));
}

#[test]
fn hardness_instance_against_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.wps");
    run(&["reduce-subset-sum", "--target", "3", "1", "2", "3", "--output", path.to_str().unwrap()]);
    let p = path.to_str().unwrap();
    let exact = stdout(&run(&["exact", p]));
    assert_eq!(value(&exact, "total"), 5.25);
    let solve = stdout(&run(&["solve", p, "--epsilon", "0.05", "--with-exact"]));
    let total = value(&solve, "total");
    assert_eq!(value(&solve, "opt_total"), 5.25);
    assert!(total >= 5.25 - 1e-9 && total <= 1.05 * (1.0 + 3f64.sqrt()) * 5.25 + 1e-9);
}

#[test]
fn outputs_are_deterministic_and_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "i.wps", "wps v1\nf 1\nm 0.5\n-> 3\n-> 2.5\n<- 4\n-> 1\n-> 6\n<- 2\n");
    let a = run(&["solve", &p, "--json"]);
    let b = run(&["--threads", "1", "solve", &p, "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let cap = doc["capacity_cost"].as_f64().unwrap();
    let rej = doc["rejection_cost"].as_f64().unwrap();
    assert_eq!(cap + rej, doc["total"].as_f64().unwrap());
    let human = stdout(&run(&["solve", &p]));
    assert_eq!(format!("{:.9}", doc["total"].as_f64().unwrap()), format!("{:.9}", value(&human, "total")));
    assert!(!doc["grid"].as_array().unwrap().is_empty());
}

#[test]
fn epsilon_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "i.wps", "wps v1\nf 1\nm 0\n-> 1\n-> 7\n<- 3\n");
    let env = bin().env("LINKSELECT_EPSILON", "1").args(["solve", &p, "--json"]).output().unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(doc["epsilon"].as_f64(), Some(1.0));
    let flag = bin().env("LINKSELECT_EPSILON", "1").args(["solve", &p, "--json", "--epsilon", "0.5"]).output().unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&flag.stdout).unwrap();
    assert_eq!(doc["epsilon"].as_f64(), Some(0.5));
}

#[test]
fn trace_and_lp_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "i.wps", "wps v1\nf 1\nm 0\n-> 1\n-> 1\n");
    let trace = dir.path().join("t.csv");
    let o = run(&["solve", &p, "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("step,dir,weight,y,class,phase,decision,RL,RR,window_id\n"));

    let lp = stdout(&run(&["lp", &p, "--capacity", "1"]));
    assert_eq!(value(&lp, "lp_objective"), 1.0);
    assert!(lp.contains("1,->,1.000000000,1.000000000,1.000000000\n2,->,1.000000000,0.000000000,0.000000000\n"));
}

#[test]
fn bench_inline_and_config() {
    assert_eq!(run(&["bench", "--count", "2"]).status.code(), Some(1));
    let a = run(&["bench", "--seed", "3", "--count", "4", "--t", "6"]);
    let b = run(&["bench", "--seed", "3", "--count", "4", "--t", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("# linkselect-ratios v1\nseed,t,f,m,opt_total,lp_best_bound,alg_total,ratio_vs_opt,ratio_vs_lb\n3,6,"));
    assert_eq!(out.lines().count(), 6);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "seed = 10\ncount = 2\nt = 4\nf = 1.0\nm = 0.0\nweight_dist = { kind = \"power_law\", alpha = 2.0, lo = 1.0, hi = 9.0 }\n",
    );
    let plot = dir.path().join("p.gp");
    let o = run(&["bench", "--config", &cfg, "--gnuplot", plot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(2).unwrap().starts_with("10,4,"));
    assert!(std::fs::read_to_string(plot).unwrap().contains("ratios.csv"));
    let broken = write(dir.path(), "x.toml", "seed = 1\n");
    assert_eq!(run(&["bench", "--config", &broken]).status.code(), Some(2));
}

#[test]
fn network_command() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "n.net",
        "wpsnet v1\nf 50\nm 0\nlink a\nlink b\npacket 2 a:rev\npacket 8 a:fwd,b:fwd\n",
    );
    let o = run(&["network", &p]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("accepted_long 2\n"), "{out}");
    assert!(out.contains("link b "));
    let bad = write(dir.path(), "bad.net", "wpsnet v1\nf 1\nm 0\npacket 1 z:fwd\n");
    assert_eq!(run(&["network", &bad]).status.code(), Some(2));
    assert_eq!(run(&["network", &p, "--long-limit", "0"]).status.code(), Some(3));
}
