//! Small bitsets over dense vertex and edge ids.
//!
//! Graphs are capped at 64 vertices and 64 edges, so a `u64` per set
//! is enough. The two newtypes keep vertex and edge indices from
//! getting mixed up.

macro_rules! bitset_impl {
    ($name:ident) => {
        #[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u64);

        impl $name {
            pub const EMPTY: $name = $name(0);

            pub fn empty() -> Self {
                $name(0)
            }

            pub fn full(n: usize) -> Self {
                debug_assert!(n <= 64);
                if n == 64 {
                    $name(u64::MAX)
                } else {
                    $name((1u64 << n) - 1)
                }
            }

            pub fn singleton(i: usize) -> Self {
                $name(1u64 << i)
            }

            pub fn insert(&mut self, i: usize) {
                debug_assert!(i < 64);
                self.0 |= 1u64 << i;
            }

            pub fn remove(&mut self, i: usize) {
                self.0 &= !(1u64 << i);
            }

            pub fn contains(&self, i: usize) -> bool {
                i < 64 && (self.0 >> i) & 1 == 1
            }

            pub fn len(&self) -> usize {
                self.0.count_ones() as usize
            }

            pub fn is_empty(&self) -> bool {
                self.0 == 0
            }

            pub fn union(&self, other: Self) -> Self {
                $name(self.0 | other.0)
            }

            pub fn intersect(&self, other: Self) -> Self {
                $name(self.0 & other.0)
            }

            pub fn minus(&self, other: Self) -> Self {
                $name(self.0 & !other.0)
            }

            /// Complement inside a universe of `n` elements.
            pub fn complement(&self, n: usize) -> Self {
                $name(Self::full(n).0 & !self.0)
            }

            pub fn is_subset(&self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            pub fn is_disjoint(&self, other: Self) -> bool {
                self.0 & other.0 == 0
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                let bits = self.0;
                (0..64).filter(move |i| (bits >> i) & 1 == 1)
            }

            pub fn min_elem(&self) -> Option<usize> {
                if self.0 == 0 {
                    None
                } else {
                    Some(self.0.trailing_zeros() as usize)
                }
            }

            /// All subsets of this set, in increasing bit order.
            pub fn subsets(&self) -> Vec<Self> {
                let mask = self.0;
                let mut out = Vec::with_capacity(1 << self.len());
                let mut sub = 0u64;
                loop {
                    out.push($name(sub));
                    if sub == mask {
                        break;
                    }
                    sub = (sub.wrapping_sub(mask)) & mask;
                }
                out.sort_unstable();
                out
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                let mut s = Self::empty();
                for i in iter {
                    s.insert(i);
                }
                s
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}{{", stringify!($name))?;
                let mut first = true;
                for i in self.iter() {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", i)?;
                    first = false;
                }
                write!(f, "}}")
            }
        }
    };
}

bitset_impl!(VertexSet);
bitset_impl!(EdgeSet);
