use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// An interned variable name. Cheap to copy and compare.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(u32);

struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static I: OnceLock<Mutex<Interner>> = OnceLock::new();
    I.get_or_init(|| {
        Mutex::new(Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

impl Var {
    pub fn new(name: &str) -> Var {
        let mut g = interner().lock().unwrap();
        if let Some(&id) = g.ids.get(name) {
            return Var(id);
        }
        // names live for the whole process; the set is small in practice
        let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
        let id = g.names.len() as u32;
        g.names.push(leaked);
        g.ids.insert(leaked, id);
        Var(id)
    }

    pub fn name(self) -> &'static str {
        interner().lock().unwrap().names[self.0 as usize]
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// by name, so map iteration order does not depend on interning order
impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.0 == other.0 {
            return std::cmp::Ordering::Equal;
        }
        self.name().cmp(other.name())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let a = Var::new("alpha");
        let b = Var::new("alpha");
        assert_eq!(a, b);
        assert_eq!(a.name(), "alpha");
        assert_ne!(a, Var::new("beta"));
    }

    #[test]
    fn ordering_follows_names() {
        let z = Var::new("zz_order");
        let a = Var::new("aa_order");
        assert!(a < z);
    }
}
