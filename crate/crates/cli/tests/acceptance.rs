//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one `PASS`/`FAIL` line; exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{corpus, fixture, load, random_instance, Instance, Shape, CORPUS};
use memsched_core::{
    alap, asap, check_schedule, mobility, oracle_optimal, schedule, Cycle, Location, MemoryBank, MemoryMap,
    OracleOutcome, Placement, Resource, Schedule, ScheduleEntry, SchedulerConfig, SfgGraph, VertexKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
/// stdout, stderr, exit code and `--out` files of one run.
type Run = (Vec<u8>, Vec<u8>, Option<i32>, Vec<(String, Vec<u8>)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, budget: Duration) -> Result<String, String> {
    let took = t.elapsed();
    ensure(took < budget, || format!("took {took:.2?}, budget {budget:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn read_phase(s: &Schedule, g: &SfgGraph) -> Cycle {
    s.entries()
        .iter()
        .filter(|e| matches!(&g.vertex(e.vertex.as_str()).unwrap().kind, VertexKind::Data { access, .. } if access.as_str() == "read"))
        .map(|e| e.end)
        .max()
        .unwrap_or(0)
}

fn c1_soundness() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shape = Shape {
        max_non_delay: 27,
        max_delays: 3,
    };
    let random: Vec<Instance> = (0..200).map(|i| random_instance(&mut rng, &shape, i)).collect();
    if let Some(big) = random.iter().find(|i| i.g.vertex_count() > 30) {
        return Err(format!("{} has {} vertices", big.label, big.g.vertex_count()));
    }
    let mut instances = corpus();
    instances.extend(random);
    let (mut ok, mut infeasible) = (0, 0);
    for inst in &instances {
        match schedule(&inst.g, &inst.m, &inst.cfg) {
            Ok(s) => {
                let v = check_schedule(&inst.g, &inst.m, &inst.cfg, &s);
                ensure(v.is_pass(), || format!("{}: {v}", inst.label))?;
                ok += 1;
            }
            Err(_) => infeasible += 1,
        }
    }
    ensure(CORPUS.len() <= ok, || "a fixture failed to schedule".into())?;
    let took = within(t, Duration::from_secs(10))?;
    Ok(format!("{ok} schedules checked, {infeasible} infeasible, {took}"))
}

fn oracle_latency(inst: &Instance) -> Result<Option<Cycle>, String> {
    match oracle_optimal(&inst.g, &inst.m, &inst.cfg).map_err(|e| format!("{}: {e}", inst.label))? {
        OracleOutcome::Optimal(s) => {
            let v = check_schedule(&inst.g, &inst.m, &inst.cfg, &s);
            ensure(v.is_pass(), || format!("{}: oracle schedule {v}", inst.label))?;
            Ok(Some(s.achieved_latency()))
        }
        OracleOutcome::Infeasible => Ok(None),
    }
}

fn c2_oracle() -> Outcome {
    let t = Instant::now();
    for (map, cfg, expected) in [("add_1port", "add_h4", 4), ("add_2port", "add_h3", 3)] {
        let inst = load("add", map, cfg);
        let list = schedule(&inst.g, &inst.m, &inst.cfg)
            .map_err(|e| e.to_string())?
            .achieved_latency();
        let best = oracle_latency(&inst)?;
        ensure(best == Some(expected) && list == expected, || {
            format!("{map}: list {list}, oracle {best:?}, expected {expected}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shape = Shape {
        max_non_delay: 10,
        max_delays: 2,
    };
    let (mut equal, mut both) = (0, 0);
    for i in 0..100 {
        let inst = random_instance(&mut rng, &shape, i);
        let best = oracle_latency(&inst)?;
        match (schedule(&inst.g, &inst.m, &inst.cfg), best) {
            (Ok(s), Some(b)) => {
                ensure(s.achieved_latency() >= b, || {
                    format!("{}: list {} below oracle {b}", inst.label, s.achieved_latency())
                })?;
                both += 1;
                equal += usize::from(s.achieved_latency() == b);
            }
            (Ok(s), None) => {
                return Err(format!(
                    "{}: list found {} but oracle none",
                    inst.label,
                    s.achieved_latency()
                ))
            }
            (Err(_), _) => {}
        }
    }
    let took = within(t, Duration::from_secs(60))?;
    Ok(format!(
        "adder 4/3 exact, {both} random pairs, {equal} at optimum, {took}"
    ))
}

fn star(n: usize, ports: u32) -> (SfgGraph, MemoryMap) {
    let mut b = SfgGraph::builder("star")
        .op("sum", "add")
        .write("out", "R")
        .edge("sum", "out");
    for i in 0..n {
        let id = format!("r{i:02}");
        b = b.read(&id, "S").edge(&id, "sum");
    }
    let m = MemoryMap::new(
        vec![MemoryBank::new("B0", ports, 1, 1, 4)],
        vec![Placement::memory("S", "B0", 0), Placement::register("R")],
        vec![],
    )
    .unwrap();
    (b.build().unwrap(), m)
}

fn c3_memory_bound() -> Outcome {
    let mut seen = Vec::new();
    for n in [4usize, 8, 16] {
        for p in [1u32, 2] {
            let (g, m) = star(n, p);
            let bound = n.div_ceil(p as usize) as Cycle;
            let s = schedule(&g, &m, &SchedulerConfig::new(32)).map_err(|e| e.to_string())?;
            ensure(s.achieved_latency() >= bound, || {
                format!("n={n} p={p}: latency {}", s.achieved_latency())
            })?;
            let reads = read_phase(&s, &g);
            ensure(reads == bound, || {
                format!("n={n} p={p}: reads end at {reads}, expected {bound}")
            })?;
            seen.push(format!("{n}/{p}:{reads}"));
        }
    }
    Ok(format!("read phase n/p:end {}", seen.join(" ")))
}

/// Reads plus multiplies of the FIR-4 kernel, small enough for the oracle.
fn fir4_products(map: &str) -> Instance {
    let mut inst = load("fir4", map, "fir4");
    let text: String = common::read_fixture("fir4.sfg")
        .lines()
        .filter(|l| {
            let id = l.split_whitespace().nth(1).unwrap_or("");
            let keep = |v: &str| v.starts_with('c') || v.starts_with('x') || v.starts_with('m') || v.starts_with('d');
            match l.split_whitespace().next() {
                Some("node") => keep(id),
                Some("edge") => keep(id) && keep(l.split_whitespace().nth(3).unwrap_or("")),
                _ => true,
            }
        })
        .map(|l| format!("{l}\n"))
        .collect();
    inst.g = memsched::format::parse_sfg(&text).unwrap();
    inst.m = MemoryMap::new(
        inst.m.banks().to_vec(),
        inst.m
            .placements()
            .iter()
            .filter(|p| p.symbol != "Y")
            .cloned()
            .collect(),
        vec![],
    )
    .unwrap();
    inst
}

fn c4_bank_splitting() -> Outcome {
    let mut phases = BTreeMap::new();
    for n in [4, 16] {
        let one = load(&format!("fir{n}"), &format!("fir{n}_1bank"), &format!("fir{n}"));
        let two = load(&format!("fir{n}"), &format!("fir{n}_2bank"), &format!("fir{n}"));
        let s1 = schedule(&one.g, &one.m, &one.cfg).map_err(|e| e.to_string())?;
        let s2 = schedule(&two.g, &two.m, &two.cfg).map_err(|e| e.to_string())?;
        let (r1, r2) = (read_phase(&s1, &one.g), read_phase(&s2, &two.g));
        let reads = 2 * n as Cycle;
        ensure(r1 == reads && r2 == reads / 2, || {
            format!("FIR-{n}: read phase {r1} -> {r2}, expected {reads} -> {}", reads / 2)
        })?;
        ensure(s2.achieved_latency() < s1.achieved_latency(), || {
            format!(
                "FIR-{n}: latency {} -> {}",
                s1.achieved_latency(),
                s2.achieved_latency()
            )
        })?;
        phases.insert(
            n,
            format!(
                "FIR-{n} reads {r1}->{r2} latency {}->{}",
                s1.achieved_latency(),
                s2.achieved_latency()
            ),
        );
    }
    let mut oracle_phase = Vec::new();
    for map in ["fir4_1bank", "fir4_2bank"] {
        let inst = fir4_products(map);
        match oracle_optimal(&inst.g, &inst.m, &inst.cfg).map_err(|e| e.to_string())? {
            OracleOutcome::Optimal(s) => oracle_phase.push(read_phase(&s, &inst.g)),
            OracleOutcome::Infeasible => return Err(format!("oracle found no schedule for {map}")),
        }
    }
    ensure(oracle_phase == [8, 4], || {
        format!("oracle FIR-4 read phase {oracle_phase:?}, expected [8, 4]")
    })?;
    Ok(format!("{}, {}, oracle FIR-4 reads 8->4", phases[&4], phases[&16]))
}

/// Latency of a vertex under its cycle-0 residence.
fn nominal(inst: &Instance, id: &str) -> Cycle {
    match &inst.g.vertex(id).unwrap().kind {
        VertexKind::Op { name, .. } => inst.cfg.op_latency.get(name).copied().unwrap_or(1),
        VertexKind::Data { symbol, access } => match &inst.m.placement(symbol).unwrap().location {
            Location::Register => 0,
            Location::Memory { bank, .. } => {
                let b = inst.m.bank(bank).unwrap();
                if access.as_str() == "read" {
                    b.read_latency
                } else {
                    b.write_latency
                }
            }
        },
        VertexKind::Delay { .. } => 0,
    }
}

/// Every source-to-sink path over edges between non-delay vertices.
fn all_paths(g: &SfgGraph) -> Vec<Vec<String>> {
    let live = |id: &str| !g.vertex(id).unwrap().kind.is_delay();
    let succs = |id: &str| -> Vec<String> {
        g.edges()
            .filter(|e| e.src.as_str() == id && live(e.dst.as_str()))
            .map(|e| e.dst.to_string())
            .collect()
    };
    let has_pred = |id: &str| g.edges().any(|e| e.dst.as_str() == id && live(e.src.as_str()));
    let mut paths = Vec::new();
    let mut stack: Vec<Vec<String>> = g
        .vertices()
        .filter(|v| live(v.id.as_str()) && !has_pred(v.id.as_str()))
        .map(|v| vec![v.id.to_string()])
        .collect();
    while let Some(path) = stack.pop() {
        let next = succs(path.last().unwrap());
        if next.is_empty() {
            paths.push(path);
            continue;
        }
        for n in next {
            let mut p = path.clone();
            p.push(n);
            stack.push(p);
        }
    }
    paths
}

fn c5_timing() -> Outcome {
    let mut vertices = 0;
    for inst in corpus() {
        let early = asap(&inst.g, &inst.m, &inst.cfg).map_err(|e| format!("{}: {e}", inst.label))?;
        let late = alap(&inst.g, &inst.m, &inst.cfg).map_err(|e| format!("{}: {e}", inst.label))?;
        // Longest prefix before v and longest suffix from v, over all paths.
        let mut prefix: BTreeMap<String, Cycle> = BTreeMap::new();
        let mut suffix: BTreeMap<String, Cycle> = BTreeMap::new();
        for path in all_paths(&inst.g) {
            let lat: Vec<Cycle> = path.iter().map(|v| nominal(&inst, v)).collect();
            let total: Cycle = lat.iter().sum();
            let mut before = 0;
            for (v, l) in path.iter().zip(&lat) {
                let p = prefix.entry(v.clone()).or_default();
                *p = (*p).max(before);
                let s = suffix.entry(v.clone()).or_default();
                *s = (*s).max(total - before);
                before += l;
            }
        }
        for (v, &a) in &early {
            let l = late[v];
            let id = v.as_str();
            ensure(a <= l, || format!("{}: {id} asap {a} > alap {l}", inst.label))?;
            ensure(a == prefix[id], || {
                format!("{}: {id} asap {a}, paths give {}", inst.label, prefix[id])
            })?;
            ensure(l == inst.cfg.horizon - suffix[id], || {
                format!(
                    "{}: {id} alap {l}, paths give {}",
                    inst.label,
                    inst.cfg.horizon - suffix[id]
                )
            })?;
            let slack = mobility(&late, id, a);
            ensure(slack == Some(i64::from(l) - i64::from(a)), || {
                format!("{}: {id} mobility {slack:?}", inst.label)
            })?;
            vertices += 1;
        }
    }
    Ok(format!("{vertices} vertices over {} fixtures", CORPUS.len()))
}

fn run_cli(args: &[&str], out: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_memsched"));
    cmd.args(args);
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    let o = cmd.output().unwrap();
    let mut files = Vec::new();
    if let Some(dir) = out {
        let mut names: Vec<_> = fs::read_dir(dir)
            .map(|d| d.map(|e| e.unwrap().path()).collect())
            .unwrap_or_default();
        names.sort();
        for p in names {
            files.push((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            ));
        }
    }
    (o.stdout, o.stderr, o.status.code(), files)
}

fn c6_determinism() -> Outcome {
    let f = |n: &str| fixture(n).display().to_string();
    let mut runs: Vec<Vec<String>> = Vec::new();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for &(s, m, c) in CORPUS {
        let base = vec![
            "schedule".to_string(),
            f(&format!("{s}.sfg")),
            f(&format!("{m}.map")),
            "--config".into(),
            f(&format!("{c}.cfg")),
        ];
        let mut gantt = base.clone();
        gantt.push("--gantt".into());
        runs.push(gantt);
        let dump = tmp.path().join(format!("{m}.dump"));
        let (stdout, ..) = run_cli(&base.iter().map(String::as_str).collect::<Vec<_>>(), None);
        fs::write(&dump, stdout).map_err(|e| e.to_string())?;
        let mut verify = base.clone();
        verify[0] = "verify".into();
        verify.extend(["--schedule".into(), dump.display().to_string()]);
        runs.push(verify);
    }
    for (s, maps) in [
        ("fir4", "fir4_1bank,fir4_2bank"),
        ("fir16", "fir16_1bank,fir16_2bank"),
        ("iir_biquad", "iir_biquad_1bank,iir_biquad_2bank"),
        ("mac4x4", "mac4x4_1bank,mac4x4_2bank"),
    ] {
        let maps: Vec<String> = maps.split(',').map(|m| f(&format!("{m}.map"))).collect();
        runs.push(vec![
            "explore".into(),
            f(&format!("{s}.sfg")),
            "--maps".into(),
            maps.join(","),
            "--horizons".into(),
            "10,20,40,80".into(),
            "--config".into(),
            f(&format!("{s}.cfg")),
        ]);
    }
    for (i, args) in runs.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = |tag: &str| (args[0] != "verify").then(|| tmp.path().join(format!("{tag}{i}")));
        let first = run_cli(&args, out("a").as_deref());
        let second = run_cli(&args, out("b").as_deref());
        ensure(first.2 == Some(0), || {
            format!(
                "`{}` exited {:?}: {}",
                args.join(" "),
                first.2,
                String::from_utf8_lossy(&first.1)
            )
        })?;
        ensure(first == second, || format!("`{}` differs between runs", args.join(" ")))?;
    }
    Ok(format!(
        "{} commands, stdout and --out files byte-identical",
        runs.len()
    ))
}

fn c7_dynamic() -> Outcome {
    let inst = load("dynamic", "dynamic", "dynamic");
    let s = schedule(&inst.g, &inst.m, &inst.cfg).map_err(|e| e.to_string())?;
    let verdict = check_schedule(&inst.g, &inst.m, &inst.cfg, &s);
    ensure(verdict.is_pass(), || format!("checker: {verdict}"))?;
    let t = &inst.m.transfers()[0];
    let (w0, w1) = (
        t.at_cycle,
        t.at_cycle
            + inst
                .m
                .bank(&t.from_bank)
                .unwrap()
                .read_latency
                .max(inst.m.bank(&t.to_bank).unwrap().write_latency),
    );
    let dma = s.dma().first().ok_or("no dma entry in schedule")?;
    ensure((dma.start, dma.end) == (w0, w1), || {
        format!("dma window {}..{}, expected {w0}..{w1}", dma.start, dma.end)
    })?;
    let mut seen = (0, 0);
    for e in s.entries() {
        let VertexKind::Data { symbol, .. } = &inst.g.vertex(e.vertex.as_str()).unwrap().kind else {
            continue;
        };
        if symbol != &t.symbol {
            continue;
        }
        ensure(e.end <= w0 || e.start >= w1, || {
            format!("{} at {}..{} overlaps transfer {w0}..{w1}", e.vertex, e.start, e.end)
        })?;
        let expected = if e.end <= w0 { &t.from_bank } else { &t.to_bank };
        ensure(e.resource == Resource::Bank(expected.clone()), || {
            format!("{} on {}, expected {expected}", e.vertex, e.resource)
        })?;
        if e.end <= w0 {
            seen.0 += 1
        } else {
            seen.1 += 1
        }
    }
    ensure(seen.0 > 0 && seen.1 > 0, || {
        format!("accesses before/after transfer: {seen:?}")
    })?;

    // Moving the late read into the window must be rejected.
    let moved: Vec<ScheduleEntry> = s
        .entries()
        .iter()
        .cloned()
        .map(|mut e| {
            if e.vertex.as_str() == "a1" {
                e.start = w0;
                e.end = w0 + 1;
                e.resource = Resource::Bank(t.from_bank.clone());
            }
            e
        })
        .collect();
    let bad = check_schedule(&inst.g, &inst.m, &inst.cfg, &Schedule::new(moved, s.dma().to_vec()));
    ensure(!bad.is_pass(), || "access inside the transfer window accepted".into())?;
    Ok(format!(
        "{} before on {}, {} after on {}, window {w0}..{w1} clear",
        seen.0, t.from_bank, seen.1, t.to_bank
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("soundness", c1_soundness),
        ("oracle equivalence", c2_oracle),
        ("memory-bound law", c3_memory_bound),
        ("bank splitting", c4_bank_splitting),
        ("asap/alap", c5_timing),
        ("determinism", c6_determinism),
        ("dynamic placement", c7_dynamic),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
