//! Scenario files and the built-in corpus.

use super::maps::{
    heisenberg, linear_embedding, perturbed_sphere, sphere_at, sphere_section, whitney_at_default,
};
use crate::cr::HypersurfaceSpec;
use crate::error::{Error, Result};
use crate::immersion::CRMapSpec;
use crate::jet::PolynomialSpec;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Checks a scenario can request. The declaration order is a valid execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Chart,
    Webster,
    ChernMoser,
    Prop31,
    Sff,
    Ek,
    Codazzi,
    Gauss,
    Induced,
    Qframe,
    Ex53,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::Chart,
        Task::Webster,
        Task::ChernMoser,
        Task::Prop31,
        Task::Sff,
        Task::Ek,
        Task::Codazzi,
        Task::Gauss,
        Task::Induced,
        Task::Qframe,
        Task::Ex53,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Chart => "chart",
            Task::Webster => "webster",
            Task::ChernMoser => "chern_moser",
            Task::Prop31 => "prop31",
            Task::Sff => "sff",
            Task::Ek => "ek",
            Task::Codazzi => "codazzi",
            Task::Gauss => "gauss",
            Task::Induced => "induced",
            Task::Qframe => "qframe",
            Task::Ex53 => "ex53",
        }
    }

    pub fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Direct prerequisites.
    pub fn deps(self) -> &'static [Task] {
        match self {
            Task::Chart | Task::Ex53 => &[],
            Task::Webster => &[Task::Chart],
            Task::ChernMoser => &[Task::Webster],
            Task::Prop31 => &[Task::ChernMoser],
            Task::Sff => &[Task::Webster],
            Task::Ek | Task::Codazzi | Task::Gauss => &[Task::Sff],
            Task::Induced => &[Task::ChernMoser, Task::Codazzi],
            Task::Qframe => &[Task::Induced],
        }
    }

    pub fn needs_map(self) -> bool {
        matches!(
            self,
            Task::Sff | Task::Ek | Task::Codazzi | Task::Gauss | Task::Induced | Task::Qframe
        )
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `tasks` together with everything they depend on, in execution order.
pub fn dependency_closure(tasks: &[Task]) -> Vec<Task> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Task> = tasks.to_vec();
    while let Some(t) = stack.pop() {
        if out.insert(t) {
            stack.extend_from_slice(t.deps());
        }
    }
    out.into_iter().collect()
}

/// Tolerance classes. Task-level overrides live in [`Scenario::tolerances`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub structural: f64,
    pub dual_route: f64,
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: 1e-8,
            dual_route: 1e-7,
            exact: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TolClass {
    Structural,
    DualRoute,
    Exact,
}

impl Tolerances {
    pub fn get(&self, class: TolClass) -> f64 {
        match class {
            TolClass::Structural => self.structural,
            TolClass::DualRoute => self.dual_route,
            TolClass::Exact => self.exact,
        }
    }

    /// Applies `NAME=VAL` overrides whose name is a class; returns the task-level ones.
    pub fn apply(&mut self, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<Task, f64>> {
        let mut per_task = BTreeMap::new();
        for (k, &v) in overrides {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!(
                    "tolerance `{k}` must be positive, got {v}"
                )));
            }
            match k.as_str() {
                "structural" => self.structural = v,
                "dual_route" => self.dual_route = v,
                "exact" => self.exact = v,
                other => match Task::from_name(other) {
                    Some(t) => {
                        per_task.insert(t, v);
                    }
                    None => {
                        return Err(Error::Invalid(format!("unknown tolerance name `{other}`")))
                    }
                },
            }
        }
        Ok(per_task)
    }
}

/// Expected `E_k` profile pinned in a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedProfile {
    pub dims: Vec<usize>,
    pub s0: usize,
    pub k0: usize,
}

fn default_ek_order() -> usize {
    3
}

/// One run of the suite on a hypersurface and, optionally, a map out of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub source: HypersurfaceSpec,
    /// Defaults to the sphere through the image of the base point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<HypersurfaceSpec>,
    /// Components of the map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<PolynomialSpec>>,
    /// Replaces `source.base_point`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<C64>>,
    pub jet_order: usize,
    /// Highest `k` in the `E_k` filtration.
    #[serde(default = "default_ek_order")]
    pub ek_order: usize,
    pub tasks: Vec<Task>,
    /// Class names (`structural`, `dual_route`, `exact`) or task names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Also require `S = 0`.
    #[serde(default)]
    pub expect_spherical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_ek: Option<ExpectedProfile>,
}

impl Scenario {
    /// Parses JSON, reporting line and column on failure.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("scenario parse error: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn source_spec(&self) -> HypersurfaceSpec {
        let mut s = self.source.clone();
        if let Some(p) = &self.base_point {
            s.base_point = p.clone();
        }
        s
    }

    pub fn map_spec(&self) -> Result<Option<CRMapSpec>> {
        let Some(comps) = &self.map else {
            return Ok(None);
        };
        let source = self.source_spec();
        let m = match &self.target {
            Some(t) => CRMapSpec::new(source, t.clone(), comps.clone())?,
            None => CRMapSpec::into_sphere(source, comps.clone())?,
        };
        Ok(Some(m))
    }

    /// Lists every violated invariant at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.name.is_empty() {
            errs.push("name is empty".to_string());
        }
        if self.tasks.is_empty() {
            errs.push("no tasks requested".to_string());
        }
        if self.jet_order < 2 {
            errs.push(format!("jet_order {} < 2", self.jet_order));
        }
        if self.map.is_none() {
            for t in dependency_closure(&self.tasks) {
                if t.needs_map() {
                    errs.push(format!("task `{t}` requires a map"));
                }
            }
            if self.target.is_some() {
                errs.push("target given without a map".to_string());
            }
            if self.expect_ek.is_some() {
                errs.push("expect_ek given without a map".to_string());
            }
        }
        if let Err(e) = self.source_spec().validate() {
            errs.push(format!("source: {e}"));
        }
        if let Err(e) = self.map_spec() {
            errs.push(format!("map: {e}"));
        }
        if let Err(e) = Tolerances::default().apply(&self.tolerances) {
            errs.push(e.to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "scenario `{}`: {}",
                self.name,
                errs.join("; ")
            )))
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn intrinsic(name: &str, description: &str, source: HypersurfaceSpec, spherical: bool) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        source,
        target: None,
        map: None,
        base_point: None,
        jet_order: 6,
        ek_order: 3,
        tasks: vec![Task::Chart, Task::Webster, Task::ChernMoser, Task::Prop31],
        tolerances: BTreeMap::new(),
        expect_spherical: spherical,
        expect_ek: None,
    }
}

fn with_map(
    name: &str,
    description: &str,
    map: CRMapSpec,
    expect_ek: Option<ExpectedProfile>,
) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        source: map.source,
        target: None,
        map: Some(map.components),
        base_point: None,
        jet_order: 6,
        ek_order: 3,
        tasks: Task::ALL.into_iter().filter(|&t| t != Task::Ex53).collect(),
        tolerances: BTreeMap::new(),
        expect_spherical: true,
        expect_ek,
    }
}

/// The built-in corpus. All run at jet order 6.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let generic = [c(0.3, -0.2), c(0.1, 0.4)];
    let generic3 = [c(0.2, 0.1), c(-0.3, 0.2), c(0.1, -0.25)];
    let map = |r: Result<CRMapSpec>| r.expect("built-in map is valid");
    let flat_ek = |d| ExpectedProfile {
        dims: vec![1, 3, 3, 3],
        s0: d,
        k0: 1,
    };
    vec![
        intrinsic("heisenberg-basics", "|z|^2 - Im w = 0 in C^3 at the origin", heisenberg(2), true),
        intrinsic(
            "sphere-basics-n2",
            "unit sphere in C^3 at (0.3-0.2i, 0.1+0.4i, w)",
            sphere_at(&generic),
            true,
        ),
        intrinsic(
            "sphere-basics-n3",
            "unit sphere in C^4 at (0.2+0.1i, -0.3+0.2i, 0.1-0.25i, w)",
            sphere_at(&generic3),
            true,
        ),
        intrinsic(
            "perturbed-sphere",
            "|z|^2 + |w|^2 + 0.05(z1^2 zb2^2 + c.c.) = 1 at (0.3+0.2i, -0.25+0.35i, w)",
            perturbed_sphere(c(0.3, 0.2), c(-0.25, 0.35), 0.05),
            false,
        ),
        with_map(
            "linear-embedding-d1",
            "z -> (z, 0) from the sphere in C^3 at the generic point",
            map(linear_embedding(sphere_at(&generic), 1)),
            Some(flat_ek(1)),
        ),
        with_map(
            "linear-embedding-d2",
            "z -> (z, 0, 0) from the sphere in C^3 at the generic point",
            map(linear_embedding(sphere_at(&generic), 2)),
            Some(flat_ek(2)),
        ),
        with_map(
            "sphere-section-d1",
            "seeded linear isometry C^3 -> C^4 restricted to the sphere",
            map(sphere_section(sphere_at(&generic), 1)),
            Some(flat_ek(1)),
        ),
        with_map(
            "whitney",
            "Whitney map S^5 -> S^9 at (1/sqrt2, 0, 1/sqrt2)",
            map(whitney_at_default(2)),
            Some(ExpectedProfile {
                dims: vec![1, 3, 5, 5],
                s0: 0,
                k0: 2,
            }),
        ),
        Scenario {
            tasks: vec![Task::Ex53],
            ..intrinsic(
                "ex53-identity",
                "|Q|^2 - |Q~|^2 = (z,z) H(z,z) for Q = 4z1^2 + z1z2 + 4z2^2, Q~ = 4z1^2 - z1z2 + 4z2^2",
                heisenberg(2),
                false,
            )
        },
    ]
}

/// Built-in scenario by name, else a JSON file at that path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name_or_path)
    {
        return Ok(s);
    }
    let text = std::fs::read_to_string(name_or_path).map_err(|e| {
        Error::Invalid(format!(
            "`{name_or_path}` is neither a built-in scenario nor a readable file: {e}"
        ))
    })?;
    Scenario::from_json(&text)
}
