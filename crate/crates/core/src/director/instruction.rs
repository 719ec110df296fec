use super::library::{Item, Pattern};
use serde::{Deserialize, Serialize};

/// Conjunction of attribute terms naming a set of items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Description {
    pub category: String,
    /// Noun phrase for the category, e.g. "item of clothing".
    pub noun: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Pattern>,
}

impl Description {
    pub fn matches(&self, item: &Item) -> bool {
        item.categories.iter().any(|c| *c == self.category)
            && self.color.as_ref().is_none_or(|c| *c == item.color)
            && self.pattern.is_none_or(|p| p == item.pattern)
    }

    /// Shares the head category without satisfying every term.
    pub fn near_miss(&self, item: &Item) -> bool {
        item.categories.iter().any(|c| *c == self.category) && !self.matches(item)
    }

    pub fn has_modifiers(&self) -> bool {
        self.color.is_some() || self.pattern.is_some()
    }

    pub fn text(&self) -> String {
        let mods: Vec<&str> = self
            .color
            .as_deref()
            .into_iter()
            .chain(self.pattern.map(Pattern::modifier))
            .collect();
        if mods.is_empty() {
            self.noun.clone()
        } else {
            format!("{} {}", mods.join(", "), self.noun)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Adjective {
    None,
    SizeLargest,
    SizeSmallest,
    VTopmost,
    VBottommost,
    HLeftmost,
    HRightmost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdjectiveClass {
    None,
    Size,
    Vertical,
    Horizontal,
}

impl AdjectiveClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AdjectiveClass::None => "NONE",
            AdjectiveClass::Size => "SIZE",
            AdjectiveClass::Vertical => "VERTICAL",
            AdjectiveClass::Horizontal => "HORIZONTAL",
        }
    }
}

impl Adjective {
    pub const ALL: [Adjective; 7] = [
        Adjective::None,
        Adjective::SizeLargest,
        Adjective::SizeSmallest,
        Adjective::VTopmost,
        Adjective::VBottommost,
        Adjective::HLeftmost,
        Adjective::HRightmost,
    ];

    pub fn word(self) -> Option<&'static str> {
        match self {
            Adjective::None => None,
            Adjective::SizeLargest => Some("largest"),
            Adjective::SizeSmallest => Some("smallest"),
            Adjective::VTopmost => Some("topmost"),
            Adjective::VBottommost => Some("bottommost"),
            Adjective::HLeftmost => Some("leftmost"),
            Adjective::HRightmost => Some("rightmost"),
        }
    }

    pub fn class(self) -> AdjectiveClass {
        match self {
            Adjective::None => AdjectiveClass::None,
            Adjective::SizeLargest | Adjective::SizeSmallest => AdjectiveClass::Size,
            Adjective::VTopmost | Adjective::VBottommost => AdjectiveClass::Vertical,
            Adjective::HLeftmost | Adjective::HRightmost => AdjectiveClass::Horizontal,
        }
    }

    /// LEFTMOST and RIGHTMOST swap; everything else is unchanged.
    pub fn mirrored(self) -> Adjective {
        match self {
            Adjective::HLeftmost => Adjective::HRightmost,
            Adjective::HRightmost => Adjective::HLeftmost,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Adjective::None => "NONE",
            Adjective::SizeLargest => "SIZE_LARGEST",
            Adjective::SizeSmallest => "SIZE_SMALLEST",
            Adjective::VTopmost => "V_TOPMOST",
            Adjective::VBottommost => "V_BOTTOMMOST",
            Adjective::HLeftmost => "H_LEFTMOST",
            Adjective::HRightmost => "H_RIGHTMOST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pov {
    /// The director's point of view.
    Mine,
    /// The participant's point of view.
    Yours,
}

impl Pov {
    pub fn as_str(self) -> &'static str {
        match self {
            Pov::Mine => "MINE",
            Pov::Yours => "YOURS",
        }
    }

    pub fn flipped(self) -> Pov {
        match self {
            Pov::Mine => Pov::Yours,
            Pov::Yours => Pov::Mine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub description: Description,
    pub adjective: Adjective,
    pub pov: Pov,
    pub surface_text: String,
}

pub fn synthesize_instruction(description: Description, adjective: Adjective, pov: Pov) -> Instruction {
    let phrase = match adjective.word() {
        Some(w) => format!("{w} {}", description.text()),
        None => description.text(),
    };
    let whose = match pov {
        Pov::Mine => "my",
        Pov::Yours => "your",
    };
    Instruction {
        surface_text: format!("Please select the {phrase} from {whose} point of view"),
        description,
        adjective,
        pov,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(category: &str, noun: &str, color: Option<&str>, pattern: Option<Pattern>) -> Description {
        Description {
            category: category.into(),
            noun: noun.into(),
            color: color.map(Into::into),
            pattern,
        }
    }

    #[test]
    fn surface_text_examples() {
        let star = synthesize_instruction(desc("star", "star", None, None), Adjective::SizeLargest, Pov::Yours);
        assert_eq!(star.surface_text, "Please select the largest star from your point of view");
        let shirt = synthesize_instruction(
            desc("clothing", "item of clothing", Some("blue"), Some(Pattern::Plain)),
            Adjective::HRightmost,
            Pov::Mine,
        );
        assert_eq!(
            shirt.surface_text,
            "Please select the rightmost blue, non-striped item of clothing from my point of view"
        );
        let book = synthesize_instruction(desc("book", "book", Some("red"), None), Adjective::None, Pov::Mine);
        assert_eq!(book.surface_text, "Please select the red book from my point of view");
    }

    #[test]
    fn mirror_only_touches_horizontal() {
        for a in Adjective::ALL {
            assert_eq!(a.mirrored().mirrored(), a);
            assert_eq!(a.mirrored() != a, a.class() == AdjectiveClass::Horizontal);
        }
    }
}
