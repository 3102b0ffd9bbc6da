pub mod case;
pub mod integral;
pub mod classifier;
pub mod poly;
pub mod monodromy;
pub mod picard_fuchs;
pub mod zero_lab;
pub mod ode;
