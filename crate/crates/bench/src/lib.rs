//! Benchmark fixtures shared by the criterion targets.

use thetalift::lfunc::{rankin_selberg_coeffs, LFunctionSpec};
use thetalift::quadfield::class_group;
use thetalift::verify::CurveData;
use thetalift::Result;

/// `L(s, f × θ(𝟙))` for 37a over `Q(√d)` with `prec` coefficients.
pub fn rankin_selberg_37a(d: i64, prec: usize) -> Result<LFunctionSpec> {
    rankin_selberg_coeffs(&CurveData::C37A.newform(prec)?, &class_group(d)?, 0, prec)
}
