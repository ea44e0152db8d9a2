//! Genealogy ingestion and the interval bookkeeping the likelihood uses.

mod data;
mod grid;
mod newick;

pub use data::CoalescentData;
pub use grid::{coalescent_factor, Interval, IntervalEnd, IntervalGrid};
pub use newick::{parse_newick, parse_newick_with_dates, DateSource, Genealogy, Node, TipDates};

/// Parse a genealogy and reduce it to [`CoalescentData`] in one step.
pub fn extract_coalescent_data(g: &Genealogy) -> crate::Result<CoalescentData> {
    CoalescentData::from_genealogy(g)
}

/// Build the interval grid, using the closed form when every sample was
/// taken at time 0.
pub fn build_interval_grid(d: &CoalescentData) -> IntervalGrid {
    if d.is_isochronous() {
        IntervalGrid::isochronous(d.coal_times()).expect("validated data")
    } else {
        IntervalGrid::build(d)
    }
}
