//! Example domains shipped with the library.

/// `(name, source)` for every bundled domain.
pub const DOMAINS: &[(&str, &str)] = &[
    ("structure_t1", include_str!("../domains/structure_t1.mdpl")),
    ("structure_t2", include_str!("../domains/structure_t2.mdpl")),
    ("structure_t3", include_str!("../domains/structure_t3.mdpl")),
    ("structure_t4", include_str!("../domains/structure_t4.mdpl")),
    ("structure_t5", include_str!("../domains/structure_t5.mdpl")),
    ("agv_t1", include_str!("../domains/agv_t1.mdpl")),
    ("agv_t2", include_str!("../domains/agv_t2.mdpl")),
    ("agv_t3", include_str!("../domains/agv_t3.mdpl")),
    ("agv_t4", include_str!("../domains/agv_t4.mdpl")),
    ("agv_t5", include_str!("../domains/agv_t5.mdpl")),
    ("gripper_t1", include_str!("../domains/gripper_t1.mdpl")),
    ("gripper_t2", include_str!("../domains/gripper_t2.mdpl")),
    ("gripper_t3", include_str!("../domains/gripper_t3.mdpl")),
    ("gripper_t4", include_str!("../domains/gripper_t4.mdpl")),
    ("gripper_t5", include_str!("../domains/gripper_t5.mdpl")),
];

pub fn get(name: &str) -> Option<&'static str> {
    DOMAINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
