pub mod fixtures;
pub mod oracle;
pub mod pipeline;
pub mod scenarios;
pub mod soundness;
