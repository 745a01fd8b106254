//! Rigorous certification of the fixed system's solution.

pub mod interval;
pub mod rur;
pub mod upoly;
pub mod krawczyk;
pub mod newton;
pub mod dual;
pub mod psd;
pub mod recover;
pub mod cert;
pub mod hybrid;

pub use cert::{replay, Certificate, ReplayError, Route, Status};
pub use hybrid::{certify_from_frontend, certify_hybrid, CertifyError, CertifyOpts};
