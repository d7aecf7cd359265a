pub mod agent;
pub mod corpus;
pub mod denoise;
pub mod layout;
pub mod snippet;
