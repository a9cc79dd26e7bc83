//! Built-in spaces, automata and elements.

use crate::error::{Error, Result};
use crate::simstruct::GroupAutomaton;
use crate::space::{Space, SpaceDoc};

pub const BINARY: &str = include_str!("../fixtures/binary.json");
pub const GOLDEN_MEAN: &str = include_str!("../fixtures/golden-mean.json");
pub const HOUGHTON_H2: &str = include_str!("../fixtures/houghton-H2.json");
pub const QAUT: &str = include_str!("../fixtures/qaut.json");
pub const KLEIN_FOUR: &str = include_str!("../fixtures/klein-four.json");
pub const ELEMENT_S: &str = include_str!("../fixtures/s.json");
pub const ELEMENT_G0: &str = include_str!("../fixtures/g0.json");
pub const GOLDEN_MEAN_MATRIX: &str = include_str!("../fixtures/golden-mean.matrix.json");

/// Names accepted by [`by_name`].
pub const SPACE_NAMES: &[&str] = &["binary", "golden-mean", "houghton-H2", "qaut"];

pub fn binary() -> Space {
    Space::parse(BINARY).expect("fixture")
}

pub fn golden_mean() -> Space {
    Space::parse(GOLDEN_MEAN).expect("fixture")
}

pub fn houghton_h2() -> Space {
    Space::parse(HOUGHTON_H2).expect("fixture")
}

pub fn qaut() -> Space {
    Space::parse(QAUT).expect("fixture")
}

pub fn klein_four() -> GroupAutomaton {
    GroupAutomaton::parse(KLEIN_FOUR).expect("fixture")
}

/// The space of `V_{d,r}`: a root with `r` children, every other vertex
/// with `d` children.
pub fn vdr(d: usize, r: usize) -> Result<Space> {
    if d < 2 || r < 1 {
        return Err(Error::Precondition(format!("V_{{d,r}} needs d >= 2 and r >= 1, got d={d}, r={r}")));
    }
    let doc = SpaceDoc {
        name: Some(format!("v{d}-{r}")),
        symbols: vec!["R".into(), "x".into()],
        children: [("R".to_string(), vec!["x".to_string(); r]), ("x".to_string(), vec!["x".to_string(); d])]
            .into_iter()
            .collect(),
        root: "R".into(),
        terminals: vec![],
        labels: None,
    };
    Space::from_doc(doc)
}

/// Look up a built-in space by name; `vD-R` builds `V_{D,R}`.
pub fn by_name(name: &str) -> Option<Space> {
    match name {
        "binary" => Some(binary()),
        "golden-mean" => Some(golden_mean()),
        "houghton-H2" => Some(houghton_h2()),
        "qaut" => Some(qaut()),
        _ => {
            let (d, r) = name.strip_prefix('v')?.split_once('-')?;
            vdr(d.parse().ok()?, r.parse().ok()?).ok()
        }
    }
}
