//! Load the demo scene, replay a scripted session and print the state
//! digest, with a frame listener counting grounded frames.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use vekit::runtime::{parse_script, FrameContext, FrameListener, SimConfig, Simulation};

struct GroundedFrames(Arc<AtomicUsize>);

impl FrameListener for GroundedFrames {
    fn frame_ended(&mut self, ctx: &mut FrameContext<'_>) {
        if ctx.registry.characters().iter().all(|c| c.grounded) {
            self.0.fetch_add(1, Ordering::Relaxed);
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    let mut sim = Simulation::load(&assets.join("demo.scene"))?;
    let script = parse_script(&std::fs::read_to_string(assets.join("walk_push_crouch.script"))?)?;

    let grounded = Arc::new(AtomicUsize::new(0));
    sim.register_listener(10, Box::new(GroundedFrames(grounded.clone())));

    let trace = sim.run(&script, &SimConfig::default())?;
    let pushes = trace.character_hits.iter().filter(|h| h.report.applied_impulse.length() > 0.0).count();
    println!("{} events dispatched, {} samples, {pushes} pushes", trace.dispatched, trace.samples.len());
    println!("grounded in {} of 600 frames", grounded.load(Ordering::Relaxed));
    for w in &trace.warnings {
        println!("warning: {w}");
    }
    let c = sim.registry.get(0)?;
    println!("character ends at {:.3}", c.position);
    println!("DIGEST {}", trace.digest());
    Ok(())
}
