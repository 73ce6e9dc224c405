use core::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $inner:ty, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
        #[cfg_attr(feature = "serde", serde(transparent))]
        pub struct $name(pub $inner);

        impl $name {
            pub fn get(self) -> $inner {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Network element identifier, unique within a topology.
    NodeId, u32, "n"
);
id_type!(LinkId, u32, "l");
id_type!(
    /// Cells are numbered from 1, matching the usual "Cell 1 / Cell 2" naming.
    CellId, u32, "c"
);
id_type!(UeId, u32, "ue");
id_type!(TaskId, u64, "t");
