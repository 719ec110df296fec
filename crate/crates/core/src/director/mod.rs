pub mod fixtures;
pub mod generate;
pub mod grid;
pub mod instruction;
pub mod library;

pub use generate::{
    condition_grid, generate_condition_grid, generate_trial, validate_trial, Check, DirectorCondition,
    DirectorConfig, DirectorError, DirectorTrial, SpatialCondition, ValidationReport, VisualCondition,
};
pub use grid::{Cell, CellRef, Grid};
pub use instruction::{synthesize_instruction, Adjective, AdjectiveClass, Description, Instruction, Pov};
pub use library::{Item, ItemLibrary, Pattern};
