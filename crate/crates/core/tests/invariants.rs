//! Property-based invariants over the mechanical pieces: tensor algebra,
//! softmax weights, replay bookkeeping, schedules, and both environments
//! under arbitrary action sequences.

use manet::env::{combat, nav};
use manet::nn::tensor::{matmul, Tensor};
use manet::nn::Tape;
use manet::rl::{EpsilonSchedule, ReplayBuffer, Transition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tensor_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Tensor> {
    proptest::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |data| Tensor::new(&[rows, cols], data))
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..7, 1usize..7, 1usize..7)
}

proptest! {
    #[test]
    fn matmul_matches_the_naive_triple_loop((m, k, n) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rand_tensor = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
            use rand::Rng;
            Tensor::new(&[r, c], (0..r * c).map(|_| rng.random::<f64>() - 0.5).collect())
        };
        let a = rand_tensor(&mut rng, m, k);
        let b = rand_tensor(&mut rng, k, n);
        let c = matmul(&a, &b);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for t in 0..k {
                    acc += a.at2(i, t) * b.at2(t, j);
                }
                prop_assert!((c.at2(i, j) - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_is_an_involution(t in dims().prop_flat_map(|(m, k, _)| tensor_strategy(m, k))) {
        let back = t.transposed().transposed();
        prop_assert_eq!(back.shape(), t.shape());
        prop_assert_eq!(back.data(), t.data());
    }

    #[test]
    fn softmax_rows_are_stochastic_and_shift_invariant(
        t in dims().prop_flat_map(|(m, k, _)| tensor_strategy(m, k)),
        shift in -50.0f64..50.0,
    ) {
        let mut tape = Tape::new();
        let x = tape.constant(t.clone());
        let s = tape.softmax_rows(x);
        let sv = tape.value(s).clone();
        for r in 0..sv.rows() {
            let row = sv.row_slice(r);
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "row {r} sums to {sum}");
            prop_assert!(row.iter().all(|&w| w > 0.0 && w <= 1.0));
        }

        // Adding one constant to every logit leaves the weights unchanged.
        let shifted = Tensor::new(t.shape(), t.data().iter().map(|v| v + shift).collect());
        let mut tape2 = Tape::new();
        let x2 = tape2.constant(shifted);
        let s2 = tape2.softmax_rows(x2);
        for (a, b) in sv.data().iter().zip(tape2.value(s2).data()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn plogp_stays_in_its_analytic_range(p in proptest::collection::vec(0.0f64..=1.0, 1..30)) {
        let n = p.len();
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::new(&[1, n], p));
        let y = tape.plogp(x);
        // p ln p on [0, 1] is 0 at both ends with minimum -1/e.
        for &v in tape.value(y).data() {
            prop_assert!(v <= 0.0);
            prop_assert!(v >= -1.0 / std::f64::consts::E - 1e-12);
        }
    }

    #[test]
    fn replay_keeps_exactly_the_most_recent_items(
        tags in proptest::collection::vec(any::<i32>(), 0..120),
        capacity in 1usize..40,
    ) {
        let mut buf = ReplayBuffer::new(capacity);
        for &tag in &tags {
            buf.push(Transition { state: tag, action: 0usize, reward: 0.0, next_state: tag, terminal: false });
        }
        prop_assert_eq!(buf.len(), tags.len().min(capacity));
        let mut stored: Vec<i32> = (0..buf.len()).map(|i| buf.get(i).state).collect();
        let mut expected: Vec<i32> =
            tags[tags.len().saturating_sub(capacity)..].to_vec();
        stored.sort_unstable();
        expected.sort_unstable();
        prop_assert_eq!(stored, expected);
    }

    #[test]
    fn epsilon_schedule_is_monotone_and_bounded(
        start in 0.0f64..=1.0,
        end in 0.0f64..=1.0,
        decay in 1u64..1_000_000,
        a in 0u64..2_000_000,
        b in 0u64..2_000_000,
    ) {
        let s = EpsilonSchedule::new(start, end, decay).unwrap();
        let (lo, hi) = (start.min(end), start.max(end));
        for step in [a, b] {
            let v = s.value(step);
            prop_assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
        }
        let (first, later) = (a.min(b), a.max(b));
        if start >= end {
            prop_assert!(s.value(first) >= s.value(later) - 1e-15);
        } else {
            prop_assert!(s.value(first) <= s.value(later) + 1e-15);
        }
    }

    #[test]
    fn nav_episodes_obey_the_rules_under_arbitrary_actions(
        seed in any::<u64>(),
        actions in proptest::collection::vec(0usize..nav::NUM_ACTIONS, 1..250),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = nav::reset(&mut rng);
        let mut total = 0.0;
        for &a in &actions {
            let (next, reward, done) = nav::step(&state, nav::NavAction::from_index(a).unwrap()).unwrap();
            total += reward;

            // Rewards come from a three-value menu, bit for bit.
            let menu = [
                nav::STEP_PENALTY,
                nav::STEP_PENALTY + nav::WAYPOINT_BONUS,
                nav::STEP_PENALTY + nav::WAYPOINT_BONUS + nav::FINISH_BONUS,
            ];
            prop_assert!(menu.contains(&reward), "reward {reward} not in menu");

            prop_assert!((next.agent.row as usize) < nav::GRID);
            prop_assert!((next.agent.col as usize) < nav::GRID);
            prop_assert!(next.steps <= nav::MAX_STEPS);
            prop_assert_eq!(done, next.is_terminal());
            state = next;
            if done {
                break;
            }
        }
        prop_assert!(state.steps as usize >= actions.len().min(nav::MAX_STEPS as usize) || state.is_terminal());
        let best = nav::NUM_WAYPOINTS as f64 * nav::WAYPOINT_BONUS + nav::FINISH_BONUS;
        prop_assert!(total <= best);
    }

    #[test]
    fn combat_episodes_obey_the_rules_under_arbitrary_actions(
        seed in any::<u64>(),
        plans in proptest::collection::vec(
            proptest::collection::vec(0usize..combat::NUM_ACTIONS, combat::TEAM_SIZE),
            1..90,
        ),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = combat::reset(&mut rng);
        for plan in &plans {
            let mut actions = [combat::CombatAction::Noop; combat::TEAM_SIZE];
            for (slot, &a) in plan.iter().enumerate() {
                actions[slot] = combat::CombatAction::from_index(a).unwrap();
            }
            let healths_before: Vec<i32> =
                state.model.iter().chain(&state.bots).map(|u| u.health).collect();
            let (next, reward, done, outcome) = combat::step(&state, actions, &mut rng).unwrap();

            for (unit, &before) in next.model.iter().chain(&next.bots).zip(&healths_before) {
                prop_assert!(unit.health >= 0 && unit.health <= combat::MAX_HEALTH);
                prop_assert!(unit.health <= before, "healing is impossible");
                if unit.alive() {
                    prop_assert!(unit.row >= 0 && unit.row < combat::GRID);
                    prop_assert!(unit.col >= 0 && unit.col < combat::GRID);
                }
            }

            // No two live units share a cell.
            let mut cells: Vec<(i32, i32)> = next
                .model
                .iter()
                .chain(&next.bots)
                .filter(|u| u.alive())
                .map(|u| (u.row, u.col))
                .collect();
            let total = cells.len();
            cells.sort_unstable();
            cells.dedup();
            prop_assert_eq!(cells.len(), total, "two live units share a cell");

            prop_assert!(next.steps <= combat::MAX_STEPS);
            prop_assert!(reward.is_finite());
            prop_assert_eq!(done, outcome != combat::Outcome::Ongoing);
            state = next;
            if done {
                break;
            }
        }
    }
}
