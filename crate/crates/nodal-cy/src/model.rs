//! The fully built threefold data: group, index-two subgroup, nodes, divisors and
//! the class-group model, built once per process.

use std::sync::OnceLock;

use crate::divisor_lattice::{ClassGroupModel, DivisorTable};
use crate::group_engine::{index_two_generators, standard_generators, Group, GroupElement, Subgroup, DEFAULT_CLOSURE_CAP};
use crate::threefold::NodeTable;
use crate::Result;

pub struct Model {
    pub group: Group,
    /// The index-two subgroup preserving the two rulings at every node.
    pub h: Subgroup,
    pub nodes: NodeTable,
    pub divisors: DivisorTable,
    pub classes: ClassGroupModel,
}

impl Model {
    pub fn build(cap: usize) -> Result<Model> {
        let gens: Vec<GroupElement> =
            standard_generators().iter().map(|m| m.to_element().map(|e| e.0)).collect::<Result<_>>()?;
        let group = Group::closure(&gens, cap)?;
        let h_gens: Vec<u32> = index_two_generators()
            .iter()
            .map(|m| m.to_element().and_then(|e| group.require_id(&e.0)))
            .collect::<Result<_>>()?;
        let h = Subgroup::generate(&group, &h_gens);
        let nodes = NodeTable::build(&group)?;
        let divisors = DivisorTable::build(&group, &nodes)?;
        let classes = ClassGroupModel::build(&group, &nodes, &divisors)?;
        Ok(Model { group, h, nodes, divisors, classes })
    }

    /// Shared instance with the default closure cap.
    pub fn global() -> &'static Model {
        static MODEL: OnceLock<Model> = OnceLock::new();
        MODEL.get_or_init(|| Model::build(DEFAULT_CLOSURE_CAP).expect("model construction"))
    }

    pub fn element(&self, notation: &str) -> Result<u32> {
        let m = crate::group_engine::parse_notation(notation)?;
        let (e, _) = m.to_element()?;
        self.group.require_id(&e)
    }

    pub fn subgroup(&self, notations: &[&str]) -> Result<Subgroup> {
        let ids: Vec<u32> = notations.iter().map(|s| self.element(s)).collect::<Result<_>>()?;
        Ok(Subgroup::generate(&self.group, &ids))
    }
}
