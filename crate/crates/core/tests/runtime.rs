mod common;

use proptest::prelude::*;
use vekit::runtime::{parse_script, SimConfig, Simulation};

fn demo() -> Simulation {
    Simulation::load(&common::asset("demo.scene")).unwrap()
}

#[test]
fn demo_run_matches_the_golden_trace() {
    let script = parse_script(&String::from_utf8(common::read_asset("walk_push_crouch.script")).unwrap()).unwrap();
    let trace = demo().run(&script, &SimConfig::default()).unwrap();
    let golden = String::from_utf8(common::read_asset("demo.trace")).unwrap();
    assert!(trace.to_text() == golden, "trace differs from demo.trace");
    assert!(golden.ends_with(&format!("DIGEST {}\n", trace.digest())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_event_is_dispatched_in_order(events in proptest::collection::vec((0u64..40, 0usize..50), 0..60)) {
        let text: String = events.iter().map(|(f, k)| format!("{f} keyboard press K{k}\n")).collect();
        let script = parse_script(&text).unwrap();
        let mut expected = events.clone();
        expected.sort_by_key(|(f, _)| *f);
        let trace = demo().run(&script, &SimConfig { frames: 40, ..SimConfig::default() }).unwrap();
        prop_assert_eq!(trace.dispatched, events.len());
        let warnings: Vec<String> =
            expected.iter().map(|(f, k)| format!("frame {f}: no binding for keyboard key K{k}")).collect();
        prop_assert_eq!(trace.warnings, warnings);
    }

    #[test]
    fn runs_are_pure_functions_of_their_inputs(
        presses in proptest::collection::vec((0u64..60, 0usize..6, 1u64..30), 0..8),
    ) {
        let keys = ["W", "A", "S", "D", "Space", "C"];
        let mut lines: Vec<(u64, String)> = Vec::new();
        for (start, key, hold) in presses {
            lines.push((start, format!("{start} keyboard press {}", keys[key])));
            lines.push((start + hold, format!("{} keyboard release {}", start + hold, keys[key])));
        }
        let text: String = lines.iter().map(|(_, l)| format!("{l}\n")).collect();
        let script = parse_script(&text).unwrap();
        let config = SimConfig { frames: 90, ..SimConfig::default() };
        let a = demo().run(&script, &config).unwrap();
        let b = demo().run(&script, &config).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a.to_text(), b.to_text());
    }
}
