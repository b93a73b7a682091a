//! Built-in examples, scenario files, the suite runner and its reports.

pub mod maps;
pub mod report;
pub mod runner;
pub mod scenario;

pub use maps::{
    heisenberg, linear_embedding, perturbed_sphere, sphere_at, sphere_section, whitney_at_default,
    whitney_map,
};
pub use report::{Report, Residual, Status, TaskReport, SCHEMA_VERSION};
pub use runner::{run, run_scenario, RunOptions};
pub use scenario::{
    builtin_scenarios, dependency_closure, load_scenario, ExpectedProfile, Scenario, Task,
    Tolerances,
};
