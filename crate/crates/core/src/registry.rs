//! Name-keyed registries of interchangeable algorithm implementations.
//!
//! Every strategy family (singular-value estimation, scalar minimization,
//! nullspace extraction, linear solves, eigen solves, Poisson solvers) is a
//! trait; implementations register a constructor under a stable name and are
//! picked at runtime from configuration or CLI flags.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::coupling::svd::{DenseSvd, InverseIteration, SingularValueEstimator};
use crate::error::{Error, Result};
use crate::fd::eigen::{DenseSymmetric, FdEigenSolver, ShiftInvertSubspace};
use crate::fd::solve::{ChainCondensation, ConjugateGradient, LinearSolver};
use crate::poisson::{FdPoisson, PoissonSolver, SpectralPoisson};
use crate::spectral::minimize::{Brent, GoldenSection, ScalarMinimizer};
use crate::spectral::nullspace::{BlockInverseIteration, NullspaceMethod, PivotedQr, SvdNullspace};

type Constructor<T> = fn() -> Box<T>;

struct Entry<T: ?Sized> {
    summary: &'static str,
    make: Constructor<T>,
}

pub struct Registry<T: ?Sized> {
    family: &'static str,
    entries: BTreeMap<&'static str, Entry<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Self {
            family,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, summary: &'static str, make: Constructor<T>) {
        let previous = self.entries.insert(name, Entry { summary, make });
        assert!(previous.is_none(), "{} strategy `{name}` registered twice", self.family);
    }

    pub fn family(&self) -> &'static str {
        self.family
    }

    pub fn create(&self, name: &str) -> Result<Box<T>> {
        match self.entries.get(name) {
            Some(entry) => Ok((entry.make)()),
            None => Err(Error::UnknownStrategy {
                family: self.family,
                name: name.to_string(),
                available: self.names().collect::<Vec<_>>().join(", "),
            }),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// `(name, one-line summary)` pairs, sorted by name.
    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(n, e)| (*n, e.summary)).collect()
    }
}

pub fn singular_value_estimators() -> &'static Registry<dyn SingularValueEstimator> {
    static REG: OnceLock<Registry<dyn SingularValueEstimator>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn SingularValueEstimator> = Registry::new("singular-value");
        r.register("dense-svd", "full dense SVD of T(k)", || Box::new(DenseSvd));
        r.register(
            "inverse-iteration",
            "power iteration for sigma_max, banded-LU inverse iteration for sigma_min",
            || Box::new(InverseIteration::default()),
        );
        r
    })
}

pub fn scalar_minimizers() -> &'static Registry<dyn ScalarMinimizer> {
    static REG: OnceLock<Registry<dyn ScalarMinimizer>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn ScalarMinimizer> = Registry::new("minimizer");
        r.register("brent", "bounded golden-section search with parabolic steps", || {
            Box::new(Brent::default())
        });
        r.register("golden", "plain bounded golden-section search", || {
            Box::new(GoldenSection::default())
        });
        r
    })
}

pub fn nullspace_methods() -> &'static Registry<dyn NullspaceMethod> {
    static REG: OnceLock<Registry<dyn NullspaceMethod>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn NullspaceMethod> = Registry::new("nullspace");
        r.register("svd", "right singular vectors below the rank threshold", || {
            Box::new(SvdNullspace)
        });
        r.register("qr", "column-pivoted QR of the transposed matrix", || Box::new(PivotedQr));
        r.register(
            "inverse-iteration",
            "block inverse iteration on T^T T with a banded LU",
            || Box::new(BlockInverseIteration::default()),
        );
        r
    })
}

pub fn linear_solvers() -> &'static Registry<dyn LinearSolver> {
    static REG: OnceLock<Registry<dyn LinearSolver>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn LinearSolver> = Registry::new("linear-solver");
        r.register(
            "condensed",
            "direct: eliminate edge chains, envelope Cholesky on node unknowns",
            || Box::new(ChainCondensation),
        );
        r.register("cg", "Jacobi-preconditioned conjugate gradients", || {
            Box::new(ConjugateGradient::default())
        });
        r
    })
}

pub fn fd_eigen_solvers() -> &'static Registry<dyn FdEigenSolver> {
    static REG: OnceLock<Registry<dyn FdEigenSolver>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn FdEigenSolver> = Registry::new("eigen-solver");
        r.register("dense", "dense symmetric eigendecomposition", || Box::new(DenseSymmetric::default()));
        r.register(
            "shift-invert",
            "shift-invert subspace iteration with Rayleigh-Ritz",
            || Box::new(ShiftInvertSubspace::default()),
        );
        r
    })
}

pub fn poisson_solvers() -> &'static Registry<dyn PoissonSolver> {
    static REG: OnceLock<Registry<dyn PoissonSolver>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn PoissonSolver> = Registry::new("poisson");
        r.register("fd", "sparse finite differences", || Box::new(FdPoisson));
        r.register("spectral", "eigenmode expansion", || Box::new(SpectralPoisson));
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_list_alternatives() {
        let err = scalar_minimizers().create("newton").err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("brent") && msg.contains("golden"), "{msg}");
    }

    #[test]
    fn every_family_has_entries() {
        assert!(singular_value_estimators().contains("dense-svd"));
        assert!(nullspace_methods().contains("qr"));
        assert!(linear_solvers().contains("condensed"));
        assert!(fd_eigen_solvers().contains("dense"));
        assert_eq!(poisson_solvers().names().collect::<Vec<_>>(), ["fd", "spectral"]);
    }
}
