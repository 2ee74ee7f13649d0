//! Incremental encoder with index, producing quadrature edges from the
//! mechanical angle trajectory.
//!
//! The shaft revolution is divided into `4 * lines` cells. Cell `k` has
//! channel levels `(A, B)` following the Gray sequence 00, 10, 11, 01 for
//! `k mod 4 = 0..3`, so A leads B when turning forward. The index output is
//! high while the shaft is in cell 0 and its rising edge is reported when
//! entering that cell from either side.

use crate::periph::QepEdge;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncoderEdge {
    pub tick: u64,
    pub edge: QepEdge,
}

#[derive(Clone, Debug)]
pub struct Encoder {
    lines: u32,
    /// Unwrapped cell index.
    cell: i64,
}

impl Encoder {
    pub fn new(lines: u32, initial_angle: f64) -> Self {
        let mut enc = Self { lines, cell: 0 };
        enc.cell = enc.cell_of(initial_angle);
        enc
    }

    pub fn counts_per_rev(&self) -> u32 {
        4 * self.lines
    }

    pub fn cell(&self) -> i64 {
        self.cell
    }

    fn cell_of(&self, angle: f64) -> i64 {
        (angle * self.counts_per_rev() as f64 / TAU).floor() as i64
    }

    fn boundary_angle(&self, cell: i64) -> f64 {
        cell as f64 * TAU / self.counts_per_rev() as f64
    }

    /// Edges crossed along a piecewise-linear trajectory of
    /// `(tick, unwrapped angle)` points, in time order. Crossing instants are
    /// interpolated within each segment.
    pub fn edges(&mut self, trajectory: &[(u64, f64)]) -> Vec<EncoderEdge> {
        let mut out = Vec::new();
        for seg in trajectory.windows(2) {
            self.segment(seg[0], seg[1], &mut out);
        }
        out
    }

    /// Appends the edges of one linear segment to `out`.
    pub fn segment(&mut self, from: (u64, f64), to: (u64, f64), out: &mut Vec<EncoderEdge>) {
        let (t0, a0) = from;
        let (t1, a1) = to;
        let target = self.cell_of(a1);
        let cpr = self.counts_per_rev() as i64;
        let tick_at = |angle: f64| -> u64 {
            if a1 == a0 {
                return t1;
            }
            let f = ((angle - a0) / (a1 - a0)).clamp(0.0, 1.0);
            t0 + ((t1 - t0) as f64 * f).round() as u64
        };
        while self.cell < target {
            let edge = match self.cell.rem_euclid(4) {
                0 => QepEdge::ARise,
                1 => QepEdge::BRise,
                2 => QepEdge::AFall,
                _ => QepEdge::BFall,
            };
            self.cell += 1;
            let tick = tick_at(self.boundary_angle(self.cell));
            out.push(EncoderEdge { tick, edge });
            if self.cell.rem_euclid(cpr) == 0 {
                out.push(EncoderEdge {
                    tick,
                    edge: QepEdge::IndexRise,
                });
            }
        }
        while self.cell > target {
            let edge = match self.cell.rem_euclid(4) {
                1 => QepEdge::AFall,
                2 => QepEdge::BFall,
                3 => QepEdge::ARise,
                _ => QepEdge::BRise,
            };
            let tick = tick_at(self.boundary_angle(self.cell));
            self.cell -= 1;
            out.push(EncoderEdge { tick, edge });
            if self.cell.rem_euclid(cpr) == 0 {
                out.push(EncoderEdge {
                    tick,
                    edge: QepEdge::IndexRise,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periph::{QepConfig, QepState};

    #[test]
    fn one_revolution_in_ten_ms() {
        // ω = 2π/0.01 rad/s for 10 ms at 200 MHz
        let mut enc = Encoder::new(1024, 0.0);
        let edges = enc.edges(&[(0, 0.0), (2_000_000, TAU)]);
        let quad = edges.iter().filter(|e| e.edge != QepEdge::IndexRise).count();
        assert_eq!(quad, 4096);
        assert_eq!(edges.iter().filter(|e| e.edge == QepEdge::IndexRise).count(), 1);
        assert!(edges.windows(2).all(|w| w[0].tick <= w[1].tick));
    }

    #[test]
    fn standstill_has_no_edges() {
        let mut enc = Encoder::new(1024, 0.3);
        assert!(enc.edges(&[(0, 0.3), (1000, 0.3)]).is_empty());
    }

    #[test]
    fn reversal_nets_out_through_decoder() {
        let mut enc = Encoder::new(1024, 0.0);
        let mut qep = QepState::new(QepConfig::default());
        let traj = [(0, 0.0), (1000, 1.0), (2000, 0.25)];
        for e in enc.edges(&traj) {
            qep.apply_edge(e.edge);
        }
        let expected = (0.25 * 4096.0 / TAU).floor() as u32;
        assert_eq!(qep.qposcnt(), expected);
        assert_eq!(qep.glitches(), 0);
    }

    #[test]
    fn reverse_through_zero_wraps() {
        let mut enc = Encoder::new(1024, 0.001);
        let mut qep = QepState::new(QepConfig::default());
        for e in enc.edges(&[(0, 0.001), (1000, -0.01)]) {
            qep.apply_edge(e.edge);
        }
        let cell = (-0.01 * 4096.0 / TAU).floor() as i64;
        assert_eq!(qep.qposcnt() as i64, cell.rem_euclid(4096));
    }
}
