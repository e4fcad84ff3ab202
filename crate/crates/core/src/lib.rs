//! Energy and carbon accounting for online video services.
//!
//! The [`model`] module holds the closed-form energy equations on top of the
//! dimension-checked [`quantity`] types. [`scenario`] describes whole
//! services, [`report`] evaluates them and [`optimizer`] answers encoder,
//! ladder and CDN sizing questions.

pub mod model;
pub mod optimizer;
pub mod quantity;
pub mod report;
pub mod scenario;
pub mod units;
