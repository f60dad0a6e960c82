//! Name-indexed collections of interchangeable strategies.

use crate::error::{Error, Result};

/// An ordered set of trait objects addressable by a stable name.
///
/// Registration order is preserved so listings are deterministic.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds `strategy` under `name`, replacing any previous entry with that name.
    pub fn register(&mut self, name: impl Into<String>, strategy: Box<T>) -> &mut Self {
        let name = name.into();
        if let Some(slot) = self.entries.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = strategy;
        } else {
            self.entries.push((name, strategy));
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.as_ref())
    }

    /// Like [`Registry::get`] but reports the available names on a miss.
    pub fn resolve(&self, name: &str) -> Result<&T> {
        self.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: self.kind,
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }
    struct Hello(&'static str);
    impl Greeter for Hello {
        fn greet(&self) -> String {
            self.0.to_string()
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register("a", Box::new(Hello("one")));
        reg.register("b", Box::new(Hello("two")));
        reg.register("a", Box::new(Hello("three")));
        assert_eq!(reg.names(), vec!["a", "b"]);
        assert_eq!(reg.get("a").unwrap().greet(), "three");
        assert!(reg.get("c").is_none());
        let err = reg.resolve("c").err().unwrap().to_string();
        assert!(err.contains("a, b"), "{err}");
    }
}
