//! The chapters of `book/` compiled as doc-tests, one module per chapter so
//! a failure names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/curves.md")]
pub mod curves {}
#[doc = include_str!("../../../book/src/bundles.md")]
pub mod bundles {}
#[doc = include_str!("../../../book/src/linking.md")]
pub mod linking {}
#[doc = include_str!("../../../book/src/selflinking.md")]
pub mod selflinking {}
#[doc = include_str!("../../../book/src/numerics.md")]
pub mod numerics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
