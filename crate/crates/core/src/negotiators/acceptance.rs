use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ACCEPT_TIME: f64 = 0.99;

/// How many previous opponent offers `AC_time` compares against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    All,
    Last(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcceptancePolicy {
    Next,
    Time { t_acc: f64, window: Window },
    Combi { t_acc: f64, window: Window },
}

impl Default for AcceptancePolicy {
    fn default() -> Self {
        AcceptancePolicy::Combi {
            t_acc: DEFAULT_ACCEPT_TIME,
            window: Window::All,
        }
    }
}

impl AcceptancePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AcceptancePolicy::Next => Ok(()),
            AcceptancePolicy::Time { t_acc, window } | AcceptancePolicy::Combi { t_acc, window } => {
                if !(t_acc > 0.0 && t_acc <= 1.0) {
                    return Err(Error::Config(format!("t_acc {t_acc} outside (0, 1]")));
                }
                if window == Window::Last(0) {
                    return Err(Error::Config("acceptance window must be at least 1".into()));
                }
                Ok(())
            }
        }
    }
}

fn time_condition(t_r: f64, t_acc: f64, u_in: f64, window: Window, history: &[f64]) -> bool {
    if t_r < t_acc {
        return false;
    }
    let recent = match window {
        Window::All => history,
        Window::Last(w) => &history[history.len().saturating_sub(w)..],
    };
    recent.iter().all(|&u| u_in >= u)
}

/// `history` holds the self-utilities of the opponent's earlier offers,
/// oldest first, excluding the offer under consideration.
pub fn accept_decision(policy: &AcceptancePolicy, t_r: f64, u_in: f64, u_next: f64, history: &[f64]) -> bool {
    match *policy {
        AcceptancePolicy::Next => u_in >= u_next,
        AcceptancePolicy::Time { t_acc, window } => time_condition(t_r, t_acc, u_in, window, history),
        AcceptancePolicy::Combi { t_acc, window } => {
            u_in >= u_next || time_condition(t_r, t_acc, u_in, window, history)
        }
    }
}
