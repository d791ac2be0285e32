use rand::Rng;
use zxrl_core::rules::{allowed_actions, apply};
use zxrl_core::{Action, Diagram, NodeAction};

use crate::Trajectory;

/// Reward the greedy strategy assigns to `action`. Starting an unfuse is
/// charged the −1 its completion will cost.
fn effective_reward(d: &Diagram, action: &Action) -> (i32, Option<(Diagram, i32)>) {
    if matches!(action, Action::Node(_, NodeAction::StartUnfuse)) {
        return (-1, None);
    }
    let out = apply(d, action).expect("allowed action applies");
    (out.reward, Some((out.diagram, out.reward)))
}

/// Repeatedly applies a highest-reward action, breaking ties uniformly at
/// random, while that reward is non-negative and the budget lasts.
pub fn greedy<R: Rng + ?Sized>(d: &Diagram, max_steps: usize, rng: &mut R) -> Trajectory {
    let mut cur = d.clone();
    cur.clear_selection();
    let mut traj = Trajectory::start(&cur);
    while traj.steps < max_steps {
        let mut best = i32::MIN;
        let mut ties: Vec<(Action, Diagram, i32)> = Vec::new();
        for action in allowed_actions(&cur, false) {
            let (score, out) = effective_reward(&cur, &action);
            if score < best {
                continue;
            }
            if score > best {
                best = score;
                ties.clear();
            }
            if let Some((diagram, reward)) = out {
                ties.push((action, diagram, reward));
            }
        }
        if ties.is_empty() || best < 0 {
            break;
        }
        let (action, next, reward) = ties.swap_remove(rng.gen_range(0..ties.len()));
        cur = next;
        traj.steps += 1;
        traj.record(action, reward, &cur);
    }
    traj.final_diagram = cur;
    traj
}
