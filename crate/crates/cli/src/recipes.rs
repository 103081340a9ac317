//! Dataset recipes: the transforms and model shapes used in the worked
//! examples. The IBM and lynx series are not bundled; their recipes take a
//! user-supplied file and warn when its length differs from the published one.

use std::fmt::Display;
use std::str::FromStr;

use anyhow::{bail, Result};

use crate::config::SimModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    ModelA,
    ModelB,
    /// IBM common stock closing prices, analysed in first differences with
    /// zero shifts as a MAR(3; 4, 1, 1).
    Ibm,
    /// Canadian lynx trappings, analysed in natural logs as a MAR(2; 1, 2).
    Lynx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeDefaults {
    pub difference: bool,
    pub log: bool,
    pub fixed_shift: bool,
    pub orders: Vec<usize>,
    /// Length of the raw published series, when one is expected.
    pub expected_len: Option<usize>,
    pub model: Option<SimModel>,
}

impl Recipe {
    pub fn defaults(self) -> RecipeDefaults {
        match self {
            Recipe::ModelA => RecipeDefaults {
                difference: false,
                log: false,
                fixed_shift: false,
                orders: vec![1, 1],
                expected_len: None,
                model: Some(SimModel::A),
            },
            Recipe::ModelB => RecipeDefaults {
                difference: false,
                log: false,
                fixed_shift: false,
                orders: vec![2, 1, 1],
                expected_len: None,
                model: Some(SimModel::B),
            },
            Recipe::Ibm => RecipeDefaults {
                difference: true,
                log: false,
                fixed_shift: true,
                orders: vec![4, 1, 1],
                expected_len: Some(369),
                model: None,
            },
            Recipe::Lynx => RecipeDefaults {
                difference: false,
                log: true,
                fixed_shift: false,
                orders: vec![1, 2],
                expected_len: Some(111),
                model: None,
            },
        }
    }

    /// A warning when a raw input's length differs from the published one.
    pub fn length_warning(self, raw_len: usize) -> Option<String> {
        let expected = self.defaults().expected_len?;
        (raw_len != expected).then(|| {
            format!("recipe {self} expects {expected} raw observations, the input has {raw_len}")
        })
    }
}

impl FromStr for Recipe {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "model_a" | "a" => Ok(Recipe::ModelA),
            "model_b" | "b" => Ok(Recipe::ModelB),
            "ibm" => Ok(Recipe::Ibm),
            "lynx" => Ok(Recipe::Lynx),
            _ => bail!("recipe must be model_a, model_b, ibm or lynx, got {s:?}"),
        }
    }
}

impl Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Recipe::ModelA => "model_a",
            Recipe::ModelB => "model_b",
            Recipe::Ibm => "ibm",
            Recipe::Lynx => "lynx",
        })
    }
}
