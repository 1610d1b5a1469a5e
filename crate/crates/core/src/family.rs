//! Update families: finite collections of finite rule sets in Z^2 \ {0}.

use crate::rational::isqrt;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("family has no rules")]
    Empty,
    #[error("rule {0} is empty")]
    EmptyRule(usize),
    #[error("rule {0} contains the origin")]
    OriginInRule(usize),
    #[error("malformed family file: {0}")]
    Parse(String),
}

/// A finite family of update rules. Each rule is a finite set of integer
/// offsets; a site becomes infected when some rule, translated to it, is
/// fully infected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateFamily {
    pub rules: Vec<Vec<(i64, i64)>>,
    #[serde(default)]
    pub name: Option<String>,
}

impl UpdateFamily {
    pub fn new(rules: Vec<Vec<(i64, i64)>>, name: Option<String>) -> Result<Self, FamilyError> {
        if rules.is_empty() {
            return Err(FamilyError::Empty);
        }
        for (i, r) in rules.iter().enumerate() {
            if r.is_empty() {
                return Err(FamilyError::EmptyRule(i));
            }
            if r.contains(&(0, 0)) {
                return Err(FamilyError::OriginInRule(i));
            }
        }
        let mut rules = rules;
        for r in &mut rules {
            r.sort_unstable();
            r.dedup();
        }
        Ok(UpdateFamily { rules, name })
    }

    /// Ceiling of the largest rule-element Euclidean norm; at least 1.
    pub fn radius(&self) -> i64 {
        let mut max_sq: i128 = 1;
        for r in &self.rules {
            for &(x, y) in r {
                let s = (x as i128) * (x as i128) + (y as i128) * (y as i128);
                max_sq = max_sq.max(s);
            }
        }
        let mut r = isqrt(max_sq);
        if r * r < max_sq {
            r += 1;
        }
        r as i64
    }

    /// L-infinity radius of the rule neighbourhood.
    pub fn linf_radius(&self) -> i64 {
        self.rules
            .iter()
            .flat_map(|r| r.iter())
            .map(|&(x, y)| x.abs().max(y.abs()))
            .max()
            .unwrap_or(1)
            .max(1)
    }

    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        let parsed: UpdateFamily =
            serde_json::from_str(text).map_err(|e| FamilyError::Parse(e.to_string()))?;
        UpdateFamily::new(parsed.rules, parsed.name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serialises")
    }

    /// Apply a lattice symmetry (given by its matrix rows) to every rule.
    pub fn transformed(&self, m: [[i64; 2]; 2]) -> UpdateFamily {
        let rules = self
            .rules
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&(x, y)| (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y))
                    .collect()
            })
            .collect();
        UpdateFamily::new(rules, self.name.clone()).expect("symmetry preserves validity")
    }
}

/// All 2-subsets of the four nearest neighbours.
pub fn two_neighbour() -> UpdateFamily {
    let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    let mut rules = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            rules.push(vec![dirs[i], dirs[j]]);
        }
    }
    UpdateFamily::new(rules, Some("2-neighbour".into())).unwrap()
}

/// Single nearest neighbour suffices.
pub fn one_neighbour() -> UpdateFamily {
    UpdateFamily::new(
        vec![vec![(1, 0)], vec![(-1, 0)], vec![(0, 1)], vec![(0, -1)]],
        Some("1-neighbour".into()),
    )
    .unwrap()
}

/// Duarte model: 2-subsets of {N, S, W}.
pub fn duarte() -> UpdateFamily {
    UpdateFamily::new(
        vec![
            vec![(0, 1), (0, -1)],
            vec![(0, 1), (-1, 0)],
            vec![(0, -1), (-1, 0)],
        ],
        Some("duarte".into()),
    )
    .unwrap()
}

/// Modified Duarte model {{W,N},{W,S}}: west plus one vertical neighbour.
pub fn modified_duarte() -> UpdateFamily {
    UpdateFamily::new(
        vec![vec![(-1, 0), (0, 1)], vec![(-1, 0), (0, -1)]],
        Some("modified-duarte".into()),
    )
    .unwrap()
}

/// The three-rule model {{W,N},{W,S},{S,E}}.
pub fn three_rule() -> UpdateFamily {
    UpdateFamily::new(
        vec![
            vec![(-1, 0), (0, 1)],
            vec![(-1, 0), (0, -1)],
            vec![(0, -1), (1, 0)],
        ],
        Some("three-rule".into()),
    )
    .unwrap()
}

/// Horizontal pair {{E,W}}: every direction stable.
pub fn horizontal_pair() -> UpdateFamily {
    UpdateFamily::new(vec![vec![(1, 0), (-1, 0)]], Some("horizontal-pair".into())).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert_eq!(UpdateFamily::new(vec![], None), Err(FamilyError::Empty));
        assert_eq!(
            UpdateFamily::new(vec![vec![]], None),
            Err(FamilyError::EmptyRule(0))
        );
        assert_eq!(
            UpdateFamily::new(vec![vec![(1, 0)], vec![(0, 0)]], None),
            Err(FamilyError::OriginInRule(1))
        );
    }

    #[test]
    fn radii() {
        assert_eq!(two_neighbour().radius(), 1);
        let f = UpdateFamily::new(vec![vec![(3, 4)]], None).unwrap();
        assert_eq!(f.radius(), 5);
        let g = UpdateFamily::new(vec![vec![(2, 2)]], None).unwrap();
        assert_eq!(g.radius(), 3); // ceil(sqrt(8))
        assert_eq!(g.linf_radius(), 2);
    }

    #[test]
    fn json_roundtrip() {
        let f = duarte();
        let f2 = UpdateFamily::from_json(&f.to_json()).unwrap();
        assert_eq!(f, f2);
        assert!(UpdateFamily::from_json("{\"rules\": [[[0,0]]]}").is_err());
        let ok = UpdateFamily::from_json("{\"rules\": [[[1,0],[0,-1]]]}").unwrap();
        assert_eq!(ok.rules.len(), 1);
    }
}
