//! Check presets compiled into the binary, one file per acceptance check.
//! The same files ship in `presets/checks/` for use with `--config`.

use crate::config::{parse_checks, parse_run_config, CheckEntry, ConfigError};

pub const CHECK_PRESETS: &[(&str, &str)] = &[
    (
        "classical_anchor",
        include_str!("../presets/checks/classical_anchor.json"),
    ),
    (
        "operator_limits",
        include_str!("../presets/checks/operator_limits.json"),
    ),
    (
        "oracle_crosscheck",
        include_str!("../presets/checks/oracle_crosscheck.json"),
    ),
    (
        "localization",
        include_str!("../presets/checks/localization.json"),
    ),
    (
        "localization_two_atom",
        include_str!("../presets/checks/localization_two_atom.json"),
    ),
    (
        "simplicity_positivity",
        include_str!("../presets/checks/simplicity_positivity.json"),
    ),
    (
        "sign_change",
        include_str!("../presets/checks/sign_change.json"),
    ),
    (
        "union_inequality",
        include_str!("../presets/checks/union_inequality.json"),
    ),
    (
        "simplicity_scan",
        include_str!("../presets/checks/simplicity_scan.json"),
    ),
    (
        "classical_limit",
        include_str!("../presets/checks/classical_limit.json"),
    ),
    (
        "seminorm_lemmas",
        include_str!("../presets/checks/seminorm_lemmas.json"),
    ),
    (
        "boundary_growth",
        include_str!("../presets/checks/boundary_growth.json"),
    ),
];

/// Every preset check, in the order above. A preset's own `seed` is applied
/// to its checks unless they set one.
pub fn check_entries() -> Result<Vec<CheckEntry>, ConfigError> {
    let mut out = Vec::new();
    for (file, text) in CHECK_PRESETS {
        let cfg = parse_run_config(text)
            .map_err(|e| ConfigError::at(e.pointer, format!("preset {file}: {}", e.message)))?;
        let mut values = cfg.checks.clone();
        if let Some(seed) = cfg.seed {
            for v in &mut values {
                if let Some(map) = v.as_object_mut() {
                    if map.get("check").and_then(|c| c.as_str()) == Some("seminorm_lemmas")
                        && !map.contains_key("seed")
                    {
                        map.insert("seed".into(), seed.into());
                    }
                }
            }
        }
        out.extend(parse_checks(&values, &format!("/presets/{file}/checks"))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_resolve() {
        let entries = check_entries().unwrap();
        assert_eq!(entries.len(), 13);
        let mut names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), entries.len());
        for e in &entries {
            e.spec.resolve(&e.pointer, 0, false).unwrap();
        }
    }
}
