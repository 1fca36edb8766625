//! Gradient play on the bilinear game where player one minimizes `xy` over
//! `x` and player two minimizes `−xy` over `y`.
//!
//! The simultaneous update is a rotation scaled by `√(1 + η²)`, so every
//! nonzero start spirals outward.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Both partials evaluated at the old point.
    #[default]
    Simultaneous,
    /// `x` moves first, then `y` reacts to the new `x`.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameState {
    pub x: f64,
    pub y: f64,
    pub eta: f64,
    pub step: u64,
}

impl GameState {
    pub fn new(x: f64, y: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("learning rate must be > 0, got {eta}")));
        }
        Ok(GameState { x, y, eta, step: 0 })
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// `x' = x − η y`, `y' = y + η x`.
    pub fn step(&self) -> GameState {
        self.step_with(UpdateRule::Simultaneous)
    }

    pub fn step_with(&self, rule: UpdateRule) -> GameState {
        let (x, y) = match rule {
            UpdateRule::Simultaneous => (self.x - self.eta * self.y, self.y + self.eta * self.x),
            UpdateRule::Alternating => {
                let x = self.x - self.eta * self.y;
                (x, self.y + self.eta * x)
            }
        };
        GameState {
            x,
            y,
            eta: self.eta,
            step: self.step + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<GameState>,
}

impl Trajectory {
    pub fn radii(&self) -> Vec<f64> {
        self.states.iter().map(GameState::radius).collect()
    }

    pub fn final_state(&self) -> &GameState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Runs `n_steps` updates; the result holds `n_steps + 1` states.
pub fn simulate(initial: GameState, n_steps: usize, rule: UpdateRule) -> Trajectory {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial);
    let mut s = initial;
    for _ in 0..n_steps {
        s = s.step_with(rule);
        states.push(s);
    }
    Trajectory { states }
}

/// Quadrant index 0..4, or `None` on an axis.
pub fn quadrant(s: &GameState) -> Option<u8> {
    match (s.x.partial_cmp(&0.0)?, s.y.partial_cmp(&0.0)?) {
        (std::cmp::Ordering::Greater, std::cmp::Ordering::Greater) => Some(0),
        (std::cmp::Ordering::Less, std::cmp::Ordering::Greater) => Some(1),
        (std::cmp::Ordering::Less, std::cmp::Ordering::Less) => Some(2),
        (std::cmp::Ordering::Greater, std::cmp::Ordering::Less) => Some(3),
        _ => None,
    }
}

/// Number of times consecutive off-axis states change quadrant.
pub fn quadrant_changes(traj: &Trajectory) -> usize {
    let qs: Vec<u8> = traj.states.iter().filter_map(quadrant).collect();
    qs.windows(2).filter(|w| w[0] != w[1]).count()
}
