//! Two-dimensional regression target functions.
//!
//! The canonical catalog holds 54 analytic functions with ids 1..=54. Each
//! function is evaluated in its native domain units; normalization happens in
//! [`crate::dataset`]. Custom functions can be added through
//! [`FunctionRegistry::register_custom`] and receive ids from
//! [`FIRST_CUSTOM_ID`] upward.

use std::f64::consts::{E, PI};
use std::fmt;
use std::ops::Index;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub const CATALOG_SIZE: usize = 54;
pub const FIRST_CUSTOM_ID: u32 = 1001;

pub type Evaluator = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub type Domain = [Interval; 2];

fn validate_domain(domain: &Domain) -> Result<()> {
    for (d, iv) in domain.iter().enumerate() {
        if !(iv.lo < iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite() {
            return Err(Error::InvalidDomain {
                dimension: d + 1,
                lo: iv.lo,
                hi: iv.hi,
            });
        }
    }
    Ok(())
}

#[derive(Clone)]
pub struct FunctionSpec {
    pub id: u32,
    pub name: String,
    pub domain: Domain,
    evaluator: Evaluator,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl FunctionSpec {
    /// Evaluates the function, rejecting points outside the domain.
    pub fn evaluate(&self, x: [f64; 2]) -> Result<f64> {
        for (d, (&v, iv)) in x.iter().zip(&self.domain).enumerate() {
            if !iv.contains(v) {
                return Err(Error::DomainViolation {
                    function: self.name.clone(),
                    coordinate: d + 1,
                    value: v,
                    lo: iv.lo,
                    hi: iv.hi,
                });
            }
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub fn evaluate_unchecked(&self, x: [f64; 2]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn is_custom(&self) -> bool {
        self.id >= FIRST_CUSTOM_ID
    }

    /// Name with whitespace replaced, for file names.
    pub fn slug(&self) -> String {
        self.name
            .chars()
            .map(|c| if c.is_whitespace() || c == '/' { '_' } else { c })
            .collect()
    }
}

/// The canonical 54-function catalog, indexed by function id (1-based).
#[derive(Debug, Clone)]
pub struct Catalog {
    specs: Vec<FunctionSpec>,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&FunctionSpec> {
        let idx = (id as usize).checked_sub(1)?;
        self.specs.get(idx)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FunctionSpec> {
        self.specs.iter()
    }

    pub fn by_name(&self, name: &str) -> Option<&FunctionSpec> {
        self.specs.iter().find(|s| s.name == name)
    }
}

impl Index<usize> for Catalog {
    type Output = FunctionSpec;

    /// Looks a function up by its id, not by vector position.
    fn index(&self, id: usize) -> &FunctionSpec {
        u32::try_from(id)
            .ok()
            .and_then(|id| self.get(id))
            .unwrap_or_else(|| panic!("function id {id} is not in the catalog (1..={CATALOG_SIZE})"))
    }
}

impl<'a> IntoIterator for &'a Catalog {
    type Item = &'a FunctionSpec;
    type IntoIter = std::slice::Iter<'a, FunctionSpec>;

    fn into_iter(self) -> Self::IntoIter {
        self.specs.iter()
    }
}

/// Returns the shared canonical catalog.
pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let specs = CATALOG_TABLE
            .iter()
            .enumerate()
            .map(|(i, &(name, domain, f))| FunctionSpec {
                id: i as u32 + 1,
                name: name.to_string(),
                domain,
                evaluator: Arc::new(f),
            })
            .collect();
        Catalog { specs }
    })
}

/// Catalog plus user-registered functions.
///
/// Registration takes `&mut self`; finish registering before sharing the
/// registry across threads.
#[derive(Debug, Clone, Default)]
pub struct FunctionRegistry {
    custom: Vec<FunctionSpec>,
}

impl FunctionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_custom<F>(&mut self, name: &str, domain: Domain, evaluator: F) -> Result<FunctionSpec>
    where
        F: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    {
        validate_domain(&domain)?;
        if catalog().by_name(name).is_some() || self.custom.iter().any(|s| s.name == name) {
            return Err(Error::DuplicateFunction(name.to_string()));
        }
        let spec = FunctionSpec {
            id: FIRST_CUSTOM_ID + self.custom.len() as u32,
            name: name.to_string(),
            domain,
            evaluator: Arc::new(evaluator),
        };
        self.custom.push(spec.clone());
        Ok(spec)
    }

    pub fn get(&self, id: u32) -> Result<&FunctionSpec> {
        catalog()
            .get(id)
            .or_else(|| self.custom.iter().find(|s| s.id == id))
            .ok_or(Error::UnknownFunction(id))
    }

    pub fn custom(&self) -> &[FunctionSpec] {
        &self.custom
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionSpec> {
        catalog().iter().chain(self.custom.iter())
    }
}

/// Renders the catalog manifest as CSV (`id,name,x1_lo,x1_hi,x2_lo,x2_hi`).
pub fn manifest_csv<'a>(specs: impl IntoIterator<Item = &'a FunctionSpec>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "name", "x1_lo", "x1_hi", "x2_lo", "x2_hi"])
        .expect("in-memory write");
    for s in specs {
        w.write_record([
            s.id.to_string(),
            s.name.clone(),
            s.domain[0].lo.to_string(),
            s.domain[0].hi.to_string(),
            s.domain[1].lo.to_string(),
            s.domain[1].hi.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

const fn sym(r: f64) -> Domain {
    [Interval::new(-r, r), Interval::new(-r, r)]
}

const fn rect(a: f64, b: f64, c: f64, d: f64) -> Domain {
    [Interval::new(a, b), Interval::new(c, d)]
}

type Entry = (&'static str, Domain, fn([f64; 2]) -> f64);

#[rustfmt::skip]
const CATALOG_TABLE: [Entry; CATALOG_SIZE] = [
    ("Ackley", sym(32.768), ackley),
    ("Beale", sym(4.5), beale),
    ("Bird", sym(2.0 * PI), bird),
    ("Bohachevsky 1", sym(100.0), bohachevsky1),
    ("Booth", sym(10.0), booth),
    ("Branin", rect(-5.0, 10.0, 0.0, 15.0), branin),
    ("Brent", sym(10.0), brent),
    ("Bukin 6", rect(-15.0, -5.0, -3.0, 3.0), bukin6),
    ("Cross-in-Tray", sym(10.0), cross_in_tray),
    ("Deckkers-Aarts", sym(20.0), deckkers_aarts),
    ("Dixon-Price", sym(10.0), dixon_price),
    ("Drop-Wave", sym(5.12), drop_wave),
    ("Egg Crate", sym(5.0), egg_crate),
    ("Eggholder", sym(512.0), eggholder),
    ("El-Attar-Vidyasagar-Dutta", sym(500.0), el_attar),
    ("Exponential", sym(1.0), exponential),
    ("Giunta", sym(1.0), giunta),
    ("Goldstein-Price", sym(2.0), goldstein_price),
    ("Griewank", sym(600.0), griewank),
    ("Easom", sym(10.0), easom),
    ("Holder Table", sym(10.0), holder_table),
    ("Hosaki", rect(0.0, 5.0, 0.0, 6.0), hosaki),
    ("Jennrich-Sampson", sym(1.0), jennrich_sampson),
    ("Leon", sym(1.2), leon),
    ("Levy 13", sym(10.0), levy13),
    ("Himmelblau", sym(5.0), himmelblau),
    ("Matyas", sym(10.0), matyas),
    ("McCormick", rect(-1.5, 4.0, -3.0, 4.0), mccormick),
    ("Michalewicz", rect(0.0, PI, 0.0, PI), michalewicz),
    ("Mishra 3", sym(10.0), mishra3),
    ("Levy", sym(10.0), levy),
    ("Parsopoulos", sym(5.0), parsopoulos),
    ("Pen Holder", sym(11.0), pen_holder),
    ("Periodic", sym(10.0), periodic),
    ("Powell Sum", sym(1.0), powell_sum),
    ("Qing", sym(500.0), qing),
    ("Quartic", sym(1.28), quartic),
    ("Rastrigin", sym(5.12), rastrigin),
    ("Rosenbrock", sym(2.048), rosenbrock),
    ("Rotated Hyper-Ellipsoid", sym(65.536), rotated_hyper_ellipsoid),
    ("Salomon", sym(100.0), salomon),
    ("Schaffer 2", sym(100.0), schaffer2),
    ("Schwefel 2.22", sym(10.0), schwefel_2_22),
    ("Schaffer 4", sym(100.0), schaffer4),
    ("Schwefel", sym(500.0), schwefel),
    ("Schwefel 2.20", sym(100.0), schwefel_2_20),
    ("Schwefel 2.21", sym(100.0), schwefel_2_21),
    ("Six-Hump Camel", rect(-3.0, 3.0, -2.0, 2.0), six_hump_camel),
    ("Sphere", sym(5.12), sphere),
    ("Styblinski-Tang", sym(5.0), styblinski_tang),
    ("Sum Squares", sym(10.0), sum_squares),
    ("Three-Hump Camel", sym(5.0), three_hump_camel),
    ("Trid", sym(4.0), trid),
    ("Zakharov", rect(-5.0, 10.0, -5.0, 10.0), zakharov),
];

fn sq(v: f64) -> f64 {
    v * v
}

fn ackley([x, y]: [f64; 2]) -> f64 {
    let r = (0.5 * (x * x + y * y)).sqrt();
    let c = 0.5 * ((2.0 * PI * x).cos() + (2.0 * PI * y).cos());
    -20.0 * (-0.2 * r).exp() - c.exp() + E + 20.0
}

fn beale([x, y]: [f64; 2]) -> f64 {
    sq(1.5 - x + x * y) + sq(2.25 - x + x * y * y) + sq(2.625 - x + x * y.powi(3))
}

fn bird([x, y]: [f64; 2]) -> f64 {
    x.sin() * sq(1.0 - y.cos()).exp() + y.cos() * sq(1.0 - x.sin()).exp() + sq(x - y)
}

fn bohachevsky1([x, y]: [f64; 2]) -> f64 {
    x * x + 2.0 * y * y - 0.3 * (3.0 * PI * x).cos() - 0.4 * (4.0 * PI * y).cos() + 0.7
}

fn booth([x, y]: [f64; 2]) -> f64 {
    sq(x + 2.0 * y - 7.0) + sq(2.0 * x + y - 5.0)
}

fn branin([x, y]: [f64; 2]) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    sq(y - b * x * x + c * x - 6.0) + 10.0 * (1.0 - t) * x.cos() + 10.0
}

fn brent([x, y]: [f64; 2]) -> f64 {
    sq(x + 10.0) + sq(y + 10.0) + (-x * x - y * y).exp()
}

fn bukin6([x, y]: [f64; 2]) -> f64 {
    100.0 * (y - 0.01 * x * x).abs().sqrt() + 0.01 * (x + 10.0).abs()
}

fn cross_in_tray([x, y]: [f64; 2]) -> f64 {
    let r = (x * x + y * y).sqrt();
    let inner = (x.sin() * y.sin() * (100.0 - r / PI).abs().exp()).abs() + 1.0;
    -0.0001 * inner.powf(0.1)
}

fn deckkers_aarts([x, y]: [f64; 2]) -> f64 {
    let r2 = x * x + y * y;
    1e5 * x * x + y * y - r2 * r2 + 1e-5 * r2.powi(4)
}

fn dixon_price([x, y]: [f64; 2]) -> f64 {
    sq(x - 1.0) + 2.0 * sq(2.0 * y * y - x)
}

fn drop_wave([x, y]: [f64; 2]) -> f64 {
    let r2 = x * x + y * y;
    -(1.0 + (12.0 * r2.sqrt()).cos()) / (0.5 * r2 + 2.0)
}

fn egg_crate([x, y]: [f64; 2]) -> f64 {
    x * x + y * y + 25.0 * (sq(x.sin()) + sq(y.sin()))
}

fn eggholder([x, y]: [f64; 2]) -> f64 {
    -(y + 47.0) * (y + x / 2.0 + 47.0).abs().sqrt().sin() - x * (x - (y + 47.0)).abs().sqrt().sin()
}

fn el_attar([x, y]: [f64; 2]) -> f64 {
    sq(x * x + y - 10.0) + sq(x + y * y - 7.0) + sq(x * x + y.powi(3) - 1.0)
}

fn exponential([x, y]: [f64; 2]) -> f64 {
    -(-0.5 * (x * x + y * y)).exp()
}

fn giunta(x: [f64; 2]) -> f64 {
    0.6 + x
        .iter()
        .map(|&v| {
            let a = 16.0 / 15.0 * v - 1.0;
            a.sin() + sq(a.sin()) + (4.0 * a).sin() / 50.0
        })
        .sum::<f64>()
}

fn goldstein_price([x, y]: [f64; 2]) -> f64 {
    let a = 1.0 + sq(x + y + 1.0) * (19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y);
    let b = 30.0
        + sq(2.0 * x - 3.0 * y) * (18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y);
    a * b
}

fn griewank([x, y]: [f64; 2]) -> f64 {
    1.0 + (x * x + y * y) / 4000.0 - x.cos() * (y / 2f64.sqrt()).cos()
}

fn easom([x, y]: [f64; 2]) -> f64 {
    -x.cos() * y.cos() * (-(sq(x - PI) + sq(y - PI))).exp()
}

fn holder_table([x, y]: [f64; 2]) -> f64 {
    let r = (x * x + y * y).sqrt();
    -(x.sin() * y.cos() * (1.0 - r / PI).abs().exp()).abs()
}

fn hosaki([x, y]: [f64; 2]) -> f64 {
    let p = 1.0 - 8.0 * x + 7.0 * x * x - 7.0 / 3.0 * x.powi(3) + 0.25 * x.powi(4);
    p * y * y * (-y).exp()
}

fn jennrich_sampson([x, y]: [f64; 2]) -> f64 {
    (1..=10)
        .map(|i| {
            let i = i as f64;
            sq(2.0 + 2.0 * i - ((i * x).exp() + (i * y).exp()))
        })
        .sum()
}

fn leon([x, y]: [f64; 2]) -> f64 {
    100.0 * sq(y - x.powi(3)) + sq(1.0 - x)
}

fn levy13([x, y]: [f64; 2]) -> f64 {
    sq((3.0 * PI * x).sin())
        + sq(x - 1.0) * (1.0 + sq((3.0 * PI * y).sin()))
        + sq(y - 1.0) * (1.0 + sq((2.0 * PI * y).sin()))
}

fn himmelblau([x, y]: [f64; 2]) -> f64 {
    sq(x * x + y - 11.0) + sq(x + y * y - 7.0)
}

fn matyas([x, y]: [f64; 2]) -> f64 {
    0.26 * (x * x + y * y) - 0.48 * x * y
}

fn mccormick([x, y]: [f64; 2]) -> f64 {
    (x + y).sin() + sq(x - y) - 1.5 * x + 2.5 * y + 1.0
}

fn michalewicz(x: [f64; 2]) -> f64 {
    -x.iter()
        .enumerate()
        .map(|(i, &v)| v.sin() * ((i as f64 + 1.0) * v * v / PI).sin().powi(20))
        .sum::<f64>()
}

fn mishra3([x, y]: [f64; 2]) -> f64 {
    (x * x + y).abs().sqrt().cos().abs().sqrt() + 0.01 * (x + y)
}

fn levy([x, y]: [f64; 2]) -> f64 {
    let w1 = 1.0 + (x - 1.0) / 4.0;
    let w2 = 1.0 + (y - 1.0) / 4.0;
    sq((PI * w1).sin())
        + sq(w1 - 1.0) * (1.0 + 10.0 * sq((PI * w1 + 1.0).sin()))
        + sq(w2 - 1.0) * (1.0 + sq((2.0 * PI * w2).sin()))
}

fn parsopoulos([x, y]: [f64; 2]) -> f64 {
    sq(x.cos()) + sq(y.sin())
}

fn pen_holder([x, y]: [f64; 2]) -> f64 {
    let r = (x * x + y * y).sqrt();
    let g = (x.cos() * y.cos() * (1.0 - r / PI).abs().exp()).abs();
    -(-1.0 / g).exp()
}

fn periodic([x, y]: [f64; 2]) -> f64 {
    1.0 + sq(x.sin()) + sq(y.sin()) - 0.1 * (-x * x - y * y).exp()
}

fn powell_sum([x, y]: [f64; 2]) -> f64 {
    x.abs().powi(2) + y.abs().powi(3)
}

fn qing([x, y]: [f64; 2]) -> f64 {
    sq(x * x - 1.0) + sq(y * y - 2.0)
}

fn quartic([x, y]: [f64; 2]) -> f64 {
    x.powi(4) + 2.0 * y.powi(4)
}

fn rastrigin(x: [f64; 2]) -> f64 {
    20.0 + x.iter().map(|&v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

fn rosenbrock([x, y]: [f64; 2]) -> f64 {
    100.0 * sq(y - x * x) + sq(x - 1.0)
}

fn rotated_hyper_ellipsoid([x, y]: [f64; 2]) -> f64 {
    x * x + (x * x + y * y)
}

fn salomon([x, y]: [f64; 2]) -> f64 {
    let r = (x * x + y * y).sqrt();
    1.0 - (2.0 * PI * r).cos() + 0.1 * r
}

fn schaffer2([x, y]: [f64; 2]) -> f64 {
    0.5 + (sq((x * x - y * y).sin()) - 0.5) / sq(1.0 + 0.001 * (x * x + y * y))
}

fn schwefel_2_22([x, y]: [f64; 2]) -> f64 {
    x.abs() + y.abs() + x.abs() * y.abs()
}

fn schaffer4([x, y]: [f64; 2]) -> f64 {
    0.5 + (sq((x * x - y * y).abs().sin().cos()) - 0.5) / sq(1.0 + 0.001 * (x * x + y * y))
}

fn schwefel(x: [f64; 2]) -> f64 {
    418.9829 * 2.0 - x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<f64>()
}

fn schwefel_2_20([x, y]: [f64; 2]) -> f64 {
    x.abs() + y.abs()
}

fn schwefel_2_21([x, y]: [f64; 2]) -> f64 {
    x.abs().max(y.abs())
}

fn six_hump_camel([x, y]: [f64; 2]) -> f64 {
    (4.0 - 2.1 * x * x + x.powi(4) / 3.0) * x * x + x * y + (-4.0 + 4.0 * y * y) * y * y
}

fn sphere([x, y]: [f64; 2]) -> f64 {
    x * x + y * y
}

fn styblinski_tang(x: [f64; 2]) -> f64 {
    0.5 * x.iter().map(|&v| v.powi(4) - 16.0 * v * v + 5.0 * v).sum::<f64>()
}

fn sum_squares([x, y]: [f64; 2]) -> f64 {
    x * x + 2.0 * y * y
}

fn three_hump_camel([x, y]: [f64; 2]) -> f64 {
    2.0 * x * x - 1.05 * x.powi(4) + x.powi(6) / 6.0 + x * y + y * y
}

fn trid([x, y]: [f64; 2]) -> f64 {
    sq(x - 1.0) + sq(y - 1.0) - x * y
}

fn zakharov([x, y]: [f64; 2]) -> f64 {
    let s = 0.5 * x + y;
    x * x + y * y + s * s + s.powi(4)
}
