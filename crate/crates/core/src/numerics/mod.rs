//! Numerical building blocks shared by the scattering, asymptotic and PDE layers.

pub mod gamma;
pub mod interp;
pub mod mat2;
pub mod ode;
pub mod quad;
pub mod spectral;
pub mod spline;
