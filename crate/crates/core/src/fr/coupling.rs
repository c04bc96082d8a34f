use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::scalar::Real;

pub const MAX_ORDER: usize = 64;

/// Gaussian coupling between wave-vector components,
/// `g[i][j] = exp(-(i - j)^2 / (2 sigma^2))`, together with its Cholesky
/// factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T> {
    order: usize,
    sigma: f64,
    g: Vec<T>,
    chol: Vec<T>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn new(order: usize, sigma: f64) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidConfig(format!(
                "coupling order {order} outside 1..={MAX_ORDER}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "g_sigma must be > 0, got {sigma}"
            )));
        }
        let mut g = vec![T::zero(); order * order];
        for i in 0..order {
            for j in 0..order {
                let d = i as f64 - j as f64;
                g[i * order + j] = T::lit((-(d * d) / (2.0 * sigma * sigma)).exp());
            }
        }
        let chol = cholesky(&g, order)?;
        Ok(Self {
            order,
            sigma,
            g,
            chol,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.g[i * self.order + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[T] {
        &self.g
    }

    /// Row-major lower-triangular factor `L` with `g = L L^T`.
    pub fn cholesky_factor(&self) -> &[T] {
        &self.chol
    }

    /// `delta^T g delta`, evaluated as `|L^T delta|^2`.
    #[inline]
    pub fn quadratic_form(&self, delta: &[T]) -> T {
        let n = self.order;
        debug_assert_eq!(delta.len(), n);
        let mut acc = T::zero();
        for k in 0..n {
            let mut z = T::zero();
            for (i, &d) in delta.iter().enumerate().skip(k) {
                z += self.chol[i * n + k] * d;
            }
            acc += z * z;
        }
        acc
    }
}

type CacheKey = (TypeId, usize, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Coupling matrix of order `m` with unit sigma, memoized per `(T, m)`.
pub fn coupling_matrix<T: Real>(m: usize) -> Result<Arc<CouplingMatrix<T>>> {
    coupling_matrix_with_sigma(m, 1.0)
}

pub fn coupling_matrix_with_sigma<T: Real>(m: usize, sigma: f64) -> Result<Arc<CouplingMatrix<T>>> {
    let key = (TypeId::of::<T>(), m, sigma.to_bits());
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(hit
            .clone()
            .downcast::<CouplingMatrix<T>>()
            .expect("keyed by type"));
    }
    let g = Arc::new(CouplingMatrix::<T>::new(m, sigma)?);
    cache()
        .lock()
        .expect("cache lock")
        .insert(key, g.clone() as Arc<dyn Any + Send + Sync>);
    Ok(g)
}
