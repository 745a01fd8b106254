//! Certified feasibility of linear matrix inequalities 𝒜(X) = b, X ⪰ 0.

pub mod linalg;
pub mod rational;
pub mod poly;
pub mod sdp;
pub mod frontend;
pub mod pipeline;
pub mod certifier;
pub mod baseline;
