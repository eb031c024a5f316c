use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{move_energy, EnergyError, EnergyProfile};
use crate::simulator::{effective_speed, SpeedConfig};
use crate::terrain::{CellGrid, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveCost {
    pub energy_j: f64,
    pub transit_s: f64,
}

const STAY: MoveCost = MoveCost {
    energy_j: 0.0,
    transit_s: 0.0,
};

/// Motion energy and transit time for every directed edge of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveCostTable {
    b_count: usize,
    costs: Vec<[Option<MoveCost>; 8]>,
}

impl MoveCostTable {
    pub fn get(&self, from: usize, dir: Direction) -> Option<MoveCost> {
        match dir.slot() {
            None => Some(STAY),
            Some(s) => self.costs[from][s],
        }
    }

    /// Cost of going from `from` to `to` in one epoch; `None` if not adjacent.
    pub fn between(&self, from: usize, to: usize) -> Option<MoveCost> {
        let b = self.b_count;
        let from_cell = crate::terrain::Cell::new(from / b, from % b);
        let to_cell = crate::terrain::Cell::new(to / b, to % b);
        Direction::between(from_cell, to_cell).and_then(|d| self.get(from, d))
    }

    pub fn energy(&self, from: usize, to: usize) -> Option<f64> {
        self.between(from, to).map(|c| c.energy_j)
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// Writes `a,b,a2,b2,energy_J,transit_time_s`, stay rows included.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EnergyError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["a", "b", "a2", "b2", "energy_J", "transit_time_s"])?;
        let b = self.b_count;
        for from in 0..self.costs.len() {
            let (fa, fb) = (from / b, from % b);
            for dir in Direction::ALL {
                let Some(cost) = self.get(from, dir) else { continue };
                let (da, db) = dir.offset();
                let (ta, tb) = (fa as isize + da, fb as isize + db);
                w.write_record([
                    fa.to_string(),
                    fb.to_string(),
                    ta.to_string(),
                    tb.to_string(),
                    cost.energy_j.to_string(),
                    cost.transit_s.to_string(),
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn build_move_costs(
    grid: &CellGrid,
    profile: &EnergyProfile,
    epoch_s: f64,
) -> Result<MoveCostTable, EnergyError> {
    build_move_costs_with(grid, profile, epoch_s, &SpeedConfig::default())
}

/// Builds the cost table. Every axis move must fit in one epoch; diagonal
/// and slope-slowed moves may overrun and are stretched by the simulator.
pub fn build_move_costs_with(
    grid: &CellGrid,
    profile: &EnergyProfile,
    epoch_s: f64,
    speed: &SpeedConfig,
) -> Result<MoveCostTable, EnergyError> {
    if !(epoch_s > 0.0 && epoch_s.is_finite()) {
        return Err(EnergyError::InvalidEpoch(epoch_s));
    }
    let mut costs = vec![[None; 8]; grid.len()];
    for (from, slots) in costs.iter_mut().enumerate() {
        for (dir, edge) in grid.edges_from(from) {
            let energy_j = move_energy(profile, edge.slope_deg, edge.distance_m)?;
            let v = effective_speed(profile, edge.slope_deg, speed)?;
            let transit_s = edge.distance_m / v;
            if !dir.is_diagonal() && transit_s > epoch_s * (1.0 + 1e-9) {
                return Err(EnergyError::EpochTooShort {
                    from: grid.cell(from),
                    to: grid.cell(edge.to),
                    transit_s,
                    epoch_s,
                });
            }
            slots[dir.slot().expect("move direction")] = Some(MoveCost { energy_j, transit_s });
        }
    }
    Ok(MoveCostTable {
        b_count: grid.b_count,
        costs,
    })
}
