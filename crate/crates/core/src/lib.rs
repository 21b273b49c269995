//! Equilibria of a ledger market in which miners buy blockspace through a
//! Tullock contest and resell it to users via simultaneous first-price
//! auctions with reserves.
//!
//! The crate has two halves that are meant to be played against each other:
//! analytic constructions ([`ledger`], [`price_setting`], [`tullock`]) and a
//! brute-force [`oracle`] that evaluates payoffs from the game's definition and
//! searches for profitable deviations.

pub mod cli;
pub mod clearing;
pub mod demand;
pub mod error;
pub mod ledger;
pub mod oracle;
pub mod price_setting;
pub mod tullock;

pub use clearing::{canonical_clear, cleared_range, clearing_bounds, ClearingOutcome, SellerBook, SellerOffer};
pub use demand::{DemandCurve, InverseInterval};
pub use error::{Error, Result};
pub use ledger::{CandidateKind, EquilibriumCandidate, FixedPointConfig, LedgerMarket, WriteCost};
pub use oracle::{GridConfig, StrategyProfile, Verdict};
pub use price_setting::{PriceEquilibrium, PriceKind, PriceSettingInstance};
pub use tullock::{ContestShares, CostProfile};
