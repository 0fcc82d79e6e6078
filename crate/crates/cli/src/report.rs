use std::time::Duration;

use clap::ValueEnum;
use num_rational::Rational64;
use wmp_core::arena::{Arena, Objective};
use wmp_core::Player;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// `key=value` lines.
    Kv,
}

/// Outcome of `solve`.
pub struct RunReport {
    pub states: usize,
    pub actions: usize,
    pub observations: usize,
    pub objective: String,
    pub nu: Rational64,
    pub engine: String,
    pub winner: Option<Player>,
    /// Memory of the strategy Eve would use, when she wins.
    pub strategy_size: Option<usize>,
    pub wall_time: Duration,
    pub counts: Vec<(&'static str, usize)>,
}

impl RunReport {
    pub fn new(arena: &Arena, objective: &Objective, nu: Rational64) -> Self {
        RunReport {
            states: arena.num_states(),
            actions: arena.num_actions(),
            observations: arena.num_observations(),
            objective: format!("{}({})", objective.kind, objective.lmax.unwrap_or(0)),
            nu,
            engine: String::new(),
            winner: None,
            strategy_size: None,
            wall_time: Duration::ZERO,
            counts: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        let winner = self.winner.map_or("-".to_string(), |w| w.to_string());
        let strategy = self.strategy_size.map_or("-".to_string(), |s| s.to_string());
        let ms = format!("{:.3}", self.wall_time.as_secs_f64() * 1e3);
        match format {
            Format::Text => {
                let mut out = format!(
                    "arena: {} states, {} actions, {} observations\nobjective: {} at threshold {}\nengine: {}\nwinner: {}\nstrategy memory: {}\n",
                    self.states, self.actions, self.observations, self.objective, self.nu, self.engine, winner, strategy
                );
                for (k, v) in &self.counts {
                    out.push_str(&format!("{k}: {v}\n"));
                }
                out.push_str(&format!("time: {ms} ms\n"));
                out
            }
            Format::Kv => {
                let mut out = format!(
                    "states={}\nactions={}\nobservations={}\nobjective={}\nnu={}\nengine={}\nwinner={}\nstrategy_memory={}\n",
                    self.states, self.actions, self.observations, self.objective, self.nu, self.engine, winner, strategy
                );
                for (k, v) in &self.counts {
                    out.push_str(&format!("{}={v}\n", k.replace(' ', "_")));
                }
                out.push_str(&format!("time_ms={ms}\n"));
                out
            }
        }
    }
}
