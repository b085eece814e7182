//! Small named structures used as built-in templates and test fixtures.

use crate::relcore::{FiniteStructure, Signature, StructureBuilder};

/// The binary signature `{<}`.
pub fn lt_signature() -> Signature {
    Signature::new([("<", 2)]).unwrap()
}

/// The strict linear order on `n` points (transitive: all pairs `i < j`).
pub fn chain(n: usize) -> FiniteStructure {
    let mut b = StructureBuilder::new(lt_signature(), n);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            b.add(0, &[i, j]);
        }
    }
    b.build()
}

/// The directed cycle `0 -> 1 -> ... -> n-1 -> 0` over `{<}`.
pub fn directed_cycle(n: usize) -> FiniteStructure {
    let mut b = StructureBuilder::new(lt_signature(), n);
    for i in 0..n as u32 {
        b.add(0, &[i, (i + 1) % n as u32]);
    }
    b.build()
}

/// `n` points and no tuples over `{<}`.
pub fn antichain(n: usize) -> FiniteStructure {
    FiniteStructure::empty(lt_signature(), n)
}

/// The complete loopless graph on `n` vertices with symmetric edge relation `E`.
pub fn clique(n: usize) -> FiniteStructure {
    let mut b = StructureBuilder::new(Signature::new([("E", 2)]).unwrap(), n);
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if i != j {
                b.add(0, &[i, j]);
            }
        }
    }
    b.build()
}

/// `({0,1}; {1}, {x+y+z = 0 mod 2})` with symbols `One` and `Par`.
pub fn parity_a1() -> FiniteStructure {
    let sig = Signature::new([("One", 1), ("Par", 3)]).unwrap();
    let mut b = StructureBuilder::new(sig, 2);
    b.add(0, &[1]);
    for x in 0..2u32 {
        for y in 0..2u32 {
            for z in 0..2u32 {
                if (x + y + z) % 2 == 0 {
                    b.add(1, &[x, y, z]);
                }
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(chain(3).relation(0).len(), 3);
        assert_eq!(clique(3).relation(0).len(), 6);
        assert_eq!(directed_cycle(3).relation(0).len(), 3);
        assert_eq!(parity_a1().relation(1).len(), 4);
    }
}
