//! tock-CSP to UPPAAL timed automata, with executable semantics for both
//! sides and a bounded trace comparison between them. The guide in `book/`
//! walks through each module.

pub mod csp;
pub mod explore;
pub mod semantics;
pub mod trace;
pub mod exec;
pub mod ta;
pub mod translate;
pub mod xml;
pub mod harness;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/tock-csp.md")]
    struct TockCsp;
    #[doc = include_str!("../../../book/src/semantics.md")]
    struct Semantics;
    #[doc = include_str!("../../../book/src/translation.md")]
    struct Translation;
    #[doc = include_str!("../../../book/src/execution.md")]
    struct Execution;
    #[doc = include_str!("../../../book/src/uppaal.md")]
    struct Uppaal;
    #[doc = include_str!("../../../book/src/checking.md")]
    struct Checking;
}
