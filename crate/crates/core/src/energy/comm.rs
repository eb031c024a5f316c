use serde::{Deserialize, Serialize};

use crate::terrain::{Cell, CellGrid};

/// Transmit power grows linearly with distance to the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommModel {
    pub base_station_cell: Cell,
    #[serde(rename = "p_tx0_W")]
    pub p_tx0_w: f64,
    pub beta: f64,
    pub d_ref_m: f64,
}

impl CommModel {
    /// Distance-independent transmit power.
    pub fn constant(p_tx0_w: f64) -> Self {
        Self {
            base_station_cell: Cell::new(0, 0),
            p_tx0_w,
            beta: 0.0,
            d_ref_m: 1.0,
        }
    }

    pub fn p_tx(&self, grid: &CellGrid, cell: Cell) -> f64 {
        if self.beta == 0.0 {
            return self.p_tx0_w;
        }
        let dist = grid.center_distance_m(cell, self.base_station_cell);
        self.p_tx0_w * (1.0 + self.beta * dist / self.d_ref_m)
    }
}
