use std::collections::BTreeMap;

use serde_json::Value;

use crate::catalog::{Reference, SlotKind};
use crate::sb3::{Block, Field, Input, InputValue};

use super::{Anchor, Argument, BlockPlan, PlannedBlock, TemplatePatch};

struct Emitter {
    blocks: BTreeMap<String, Block>,
    counter: usize,
}

impl Emitter {
    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("t{}", self.counter)
    }

    /// Emits a stack; returns the first block's ID.
    fn sequence(&mut self, stack: &[PlannedBlock], container: Option<&str>) -> Option<String> {
        let mut first = None;
        let mut prev: Option<String> = None;
        for planned in stack {
            let parent = prev.as_deref().or(container);
            let id = self.block(planned, parent);
            if let Some(p) = &prev {
                self.blocks.get_mut(p).expect("emitted").next = Some(id.clone());
            }
            first.get_or_insert_with(|| id.clone());
            prev = Some(id);
        }
        first
    }

    fn block(&mut self, planned: &PlannedBlock, parent: Option<&str>) -> String {
        let id = self.fresh();
        let entry = &planned.entry;
        let mut block = Block {
            opcode: entry.opcode.clone(),
            parent: parent.map(str::to_string),
            top_level: parent.is_none(),
            ..Default::default()
        };
        if let Some(mutation) = &entry.mutation {
            block.extra.insert("mutation".into(), mutation.clone());
        }
        // Reserve the slot so children emitted below can point at it.
        self.blocks.insert(id.clone(), block);

        let mut inputs = BTreeMap::new();
        let mut fields = BTreeMap::new();
        for (slot_name, arg) in &planned.args {
            let slot = entry.slots.iter().find(|s| &s.name == slot_name).expect("slot from entry");
            match (slot.kind, arg) {
                (SlotKind::Condition, Argument::Expression(expr)) => {
                    let child = self.block(expr, Some(&id));
                    inputs.insert(slot_name.clone(), Input::block(child));
                }
                (_, Argument::Expression(expr)) => {
                    let child = self.block(expr, Some(&id));
                    let cover = InputValue::Primitive(vec![Value::from(slot.prim_code()), Value::from("")]);
                    inputs.insert(slot_name.clone(), Input::obscured(child, cover));
                }
                (SlotKind::Menu, Argument::Menu(value)) | (SlotKind::Menu, Argument::Literal(value)) => {
                    if let Some(shadow_opcode) = &slot.shadow {
                        let menu_id = self.fresh();
                        let mut menu = Block {
                            opcode: shadow_opcode.clone(),
                            parent: Some(id.clone()),
                            shadow: true,
                            ..Default::default()
                        };
                        menu.fields.insert(slot.menu_field().to_string(), Field::new(value.as_str()));
                        self.blocks.insert(menu_id.clone(), menu);
                        inputs.insert(slot_name.clone(), Input::shadow(InputValue::Block(menu_id)));
                    } else if let Some(prim) = slot.prim {
                        // Broadcast menus are inline primitives `[11, name, id]`.
                        let value = InputValue::Primitive(vec![
                            Value::from(prim),
                            Value::from(value.as_str()),
                            Value::from(value.as_str()),
                        ]);
                        inputs.insert(slot_name.clone(), Input::shadow(value));
                    } else {
                        let field = match slot.reference {
                            Some(Reference::Variable | Reference::List | Reference::Broadcast) => {
                                Field::with_id(value.as_str(), Value::Null)
                            }
                            None => Field::new(value.as_str()),
                        };
                        fields.insert(slot_name.clone(), field);
                    }
                }
                (_, Argument::Literal(text)) | (_, Argument::Menu(text)) => {
                    let prim = InputValue::Primitive(vec![Value::from(slot.prim_code()), Value::from(text.as_str())]);
                    inputs.insert(slot_name.clone(), Input::shadow(prim));
                }
            }
        }
        for (slot, stack) in planned.entry.substack_slots().zip(&planned.substacks) {
            if let Some(first) = self.sequence(stack, Some(&id)) {
                inputs.insert(slot.name.clone(), Input::block(first));
            }
        }
        let block = self.blocks.get_mut(&id).expect("reserved");
        block.inputs = inputs;
        block.fields = fields;
        id
    }
}

pub(super) fn emit(plan: &BlockPlan, anchor: Option<Anchor>) -> TemplatePatch {
    let mut emitter = Emitter { blocks: BTreeMap::new(), counter: 0 };
    let root = emitter.sequence(&plan.script, None).unwrap_or_default();
    let at = anchor.unwrap_or_default();
    if let Some(block) = emitter.blocks.get_mut(&root) {
        block.x = Some(at.x.into());
        block.y = Some(at.y.into());
    }
    TemplatePatch { target: String::new(), anchor, root, blocks: emitter.blocks }
}
