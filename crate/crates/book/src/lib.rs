//! Runs the code blocks of the guide in `book/` as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/regions.md")]
pub mod regions {}
#[doc = include_str!("../../../book/src/tensors.md")]
pub mod tensors {}
#[doc = include_str!("../../../book/src/stability.md")]
pub mod stability {}
#[doc = include_str!("../../../book/src/rotation.md")]
pub mod rotation {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
