pub mod bits;
pub mod circuit;
pub mod gadgets;
pub mod hashing;
pub mod protocol;
pub mod shufflenet;
pub mod sortnet;
pub mod twopc;
