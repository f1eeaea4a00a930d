//! Text rendering of a world and an executed trajectory.

use std::fmt::Write;

use gridforge::attributes::Shape;
use gridforge::splits::Example;
use gridforge::world::{check_sequence, execute, ActionSequence, Heading, Pose, SequenceFault, WorldState};

fn arrow(h: Heading) -> char {
    match h {
        Heading::North => '^',
        Heading::East => '>',
        Heading::South => 'v',
        Heading::West => '<',
    }
}

fn shape_mark(shape: Shape) -> char {
    match shape {
        Shape::Circle => 'O',
        Shape::Square => 'S',
        Shape::Cylinder => 'C',
    }
}

/// Cells show objects as color initial, shape mark and size ("rO2" is a red
/// circle of size 2), then the agent's heading arrow. The target is starred.
pub fn grid(world: &WorldState) -> String {
    let mut out = String::from("   ");
    for c in 0..world.grid_size {
        let _ = write!(out, " {c:<4}");
    }
    out.push('\n');
    for r in 0..world.grid_size {
        let _ = write!(out, "{r:>2} ");
        for c in 0..world.grid_size {
            let cell = gridforge::world::Cell::new(r, c);
            let object = match world.objects.get(&cell) {
                Some(o) => format!("{}{}{}", &o.color.as_str()[..1], shape_mark(o.shape), o.size),
                None => " . ".to_string(),
            };
            let agent = if world.agent.cell() == cell { arrow(world.agent.heading) } else { ' ' };
            let mark = if cell == world.target_cell { '*' } else { ' ' };
            let _ = write!(out, "{mark}{object}{agent}");
        }
        out.push('\n');
    }
    out
}

fn pose(p: &Pose) -> String {
    format!("({}, {}) facing {}", p.row, p.col, p.heading.as_str())
}

pub fn render(example: &Example, seq: &ActionSequence) -> String {
    let world = &example.world;
    let mut out = String::new();
    let _ = writeln!(out, "example {} [{}]", example.id, example.meta.split);
    let _ = writeln!(out, "command: {}", example.command);
    let _ = writeln!(out, "agent {}, target {} at {}", pose(&world.agent), example.meta.target, world.target_cell);
    out.push_str(&grid(world));
    let _ = writeln!(out, "actions ({}): {}", seq.len(), seq);
    match execute(world, seq) {
        Ok(exec) => {
            for (i, step) in exec.trajectory.iter().enumerate() {
                let _ = writeln!(out, "{:>4} {:<7} -> {}", i + 1, step.action.as_str(), pose(&step.agent));
            }
            out.push_str(&grid(&exec.final_state));
        }
        Err(err) => {
            let _ = writeln!(out, "execution failed: {err}");
        }
    }
    let (goal, manner) = match check_sequence(&example.frame, world, seq) {
        Ok(()) => ("satisfied", "satisfied"),
        Err(SequenceFault::Manner) => ("satisfied", "violated"),
        Err(_) => ("violated", "unchecked"),
    };
    let _ = writeln!(out, "goal: {goal}, manner: {manner}");
    out
}
