mod common;

use common::corpus;
use memsched::explore::{explore, Candidate};
use memsched::format::ConfigFile;
use memsched_core::{MemoryBank, MemoryMap};

fn with_ports(m: &MemoryMap, extra: u32) -> MemoryMap {
    let banks = m
        .banks()
        .iter()
        .map(|b| {
            MemoryBank::new(
                b.name.clone(),
                b.ports + extra,
                b.read_latency,
                b.write_latency,
                b.capacity,
            )
        })
        .collect();
    MemoryMap::new(banks, m.placements().to_vec(), m.transfers().to_vec()).unwrap()
}

/// On the fixtures, adding ports never lengthens the schedule. List
/// scheduling admits anomalies in general, so this is checked per fixture.
#[test]
fn more_ports_never_hurt_on_fixtures() {
    for inst in corpus() {
        let candidates: Vec<Candidate> = (0..3)
            .map(|extra| Candidate {
                label: format!("p+{extra}"),
                map: Ok(with_ports(&inst.m, extra)),
            })
            .collect();
        let base = ConfigFile {
            horizon: None,
            op_latency: inst.cfg.op_latency.clone(),
            fu_limits: inst.cfg.fu_limits.clone(),
        };
        let report = explore(&inst.g, &candidates, &base, &[inst.cfg.horizon]);
        assert_eq!(report.rows.len(), 3);
        let mut by_label = report.rows.clone();
        by_label.sort_by(|a, b| a.label.cmp(&b.label));
        for pair in by_label.windows(2) {
            let (fewer, more) = (pair[0].latency.unwrap(), pair[1].latency.unwrap());
            assert!(more <= fewer, "{}: {} -> {}", inst.label, fewer, more);
            assert!(pair[1].area > pair[0].area);
        }
    }
}

#[test]
fn report_is_sorted_and_stable() {
    let inst = common::load("fir16", "fir16_1bank", "fir16");
    let two = common::load("fir16", "fir16_2bank", "fir16");
    let candidates = vec![
        Candidate {
            label: "one".into(),
            map: Ok(inst.m.clone()),
        },
        Candidate {
            label: "two".into(),
            map: Ok(two.m.clone()),
        },
        Candidate {
            label: "broken".into(),
            map: Err("broken.map:1: unknown record".into()),
        },
    ];
    let base = ConfigFile::default();
    let report = explore(&inst.g, &candidates, &base, &[20, 40, 64]);
    let rendered = report.render();
    for _ in 0..4 {
        assert_eq!(explore(&inst.g, &candidates, &base, &[20, 40, 64]).render(), rendered);
    }
    let feasible: Vec<_> = report.rows.iter().take_while(|r| r.feasible()).collect();
    assert!(feasible
        .windows(2)
        .all(|w| (w[0].latency, w[0].area) <= (w[1].latency, w[1].area)));
    assert!(report.rows[feasible.len()..]
        .iter()
        .all(|r| !r.feasible() && r.reason.is_some()));
    assert_eq!(report.rows.len(), 9);
}
