use crate::negotiators::OfferHistory;

pub const STATE_DIM: usize = 7;
/// Exchanges of history visible in the state.
pub const HISTORY_LEN: usize = 3;

pub type RlState = [f64; STATE_DIM];

/// `[t_r, own_{t−2}, opp_{t−2}, own_{t−1}, opp_{t−1}, own_t, opp_t]`, with
/// zeros where nothing has been observed yet.
pub fn rl_state(t_r: f64, history: &OfferHistory) -> RlState {
    let mut s = [0.0; STATE_DIM];
    s[0] = t_r;
    let fill = |stream: &[f64], s: &mut RlState, col: usize| {
        for (slot, back) in (0..HISTORY_LEN).rev().enumerate() {
            if let Some(idx) = stream.len().checked_sub(back + 1) {
                s[1 + 2 * slot + col] = stream[idx];
            }
        }
    };
    fill(&history.own, &mut s, 0);
    fill(&history.opponent, &mut s, 1);
    s
}

/// Affine map of a raw policy output in `[−1, 1]` onto `[u_r, 1]`.
pub fn squash_action(raw: f64, reservation: f64) -> f64 {
    let raw = raw.clamp(-1.0, 1.0);
    reservation + (1.0 + raw) / 2.0 * (1.0 - reservation)
}
