//! Shipped rule bases. The files under `config/` are compiled in and can be
//! replaced at run time through the scenario's rule-base paths.

use crate::fuzzy::FuzzyRuleBase;

pub const AUTOPILOT_RULES: &str = include_str!("../config/autopilot.toml");
pub const DELTA_M_YAW_RULES: &str = include_str!("../config/delta_m_yaw.toml");
pub const TORQUE_CUT_RULES: &str = include_str!("../config/torque_cut.toml");
pub const ABS_RULES: &str = include_str!("../config/abs_modulator.toml");

fn shipped(text: &str) -> FuzzyRuleBase {
    FuzzyRuleBase::from_toml_str(text).expect("shipped rule base is valid")
}

pub fn autopilot_rules() -> FuzzyRuleBase {
    shipped(AUTOPILOT_RULES)
}

pub fn delta_m_yaw_rules() -> FuzzyRuleBase {
    shipped(DELTA_M_YAW_RULES)
}

pub fn torque_cut_rules() -> FuzzyRuleBase {
    shipped(TORQUE_CUT_RULES)
}

pub fn abs_rules() -> FuzzyRuleBase {
    shipped(ABS_RULES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rule_bases_load() {
        assert_eq!(autopilot_rules().inputs().len(), 2);
        assert_eq!(delta_m_yaw_rules().consequent_labels().len(), 9);
        assert_eq!(torque_cut_rules().inputs().len(), 1);
        assert_eq!(abs_rules().inputs()[1].terms().len(), 3);
    }

    #[test]
    fn delta_m_yaw_origin_fires_zero_only() {
        let rb = delta_m_yaw_rules();
        let act = rb.infer(&[0.0, 0.0]).unwrap();
        let z = rb.consequent_labels().iter().position(|l| l == "Z").unwrap();
        for (i, w) in act.0.iter().enumerate() {
            assert_eq!(*w, if i == z { 1.0 } else { 0.0 });
        }
    }
}
