use crate::error::{Error, Result};

/// Slack allowed on the argument-range checks, in bits.
const RANGE_TOL: f64 = 1e-12;

/// Bisection stops once the bracket is this narrow.
const BISECT_TOL: f64 = 1e-12;

/// `H_b(e) = -e log2 e - (1 - e) log2 (1 - e)`
pub fn binary_entropy(e: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(e) + term(1.0 - e)
}

fn fano_lhs(e: f64, log_rest: f64) -> f64 {
    binary_entropy(e) + e * log_rest
}

/// Smallest error rate `e ∈ [0, 1 - 1/card]` with
/// `H_b(e) + e log2(card - 1) >= h_y - i_xy`.
///
/// The left-hand side increases on that interval from 0 to `log2(card)`.
pub fn fano_error_lower_bound(h_y: f64, i_xy: f64, card: usize) -> Result<f64> {
    if card < 2 {
        return Err(Error::InvalidArgument(format!("card must be at least 2, got {card}")));
    }
    let log_card = (card as f64).log2();
    let in_range = i_xy.is_finite()
        && h_y.is_finite()
        && i_xy >= -RANGE_TOL
        && i_xy <= h_y + RANGE_TOL
        && h_y <= log_card + RANGE_TOL;
    if !in_range {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= i_xy <= h_y <= log2(card): h_y = {h_y}, i_xy = {i_xy}, card = {card}"
        )));
    }
    let residual = h_y - i_xy;
    let e_max = 1.0 - 1.0 / card as f64;
    if residual <= 0.0 {
        return Ok(0.0);
    }
    if residual >= log_card {
        return Ok(e_max);
    }
    let log_rest = ((card - 1) as f64).log2();
    // invariant: lhs(lo) < residual <= lhs(hi)
    let (mut lo, mut hi) = (0.0, e_max);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if fano_lhs(mid, log_rest) >= residual {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
