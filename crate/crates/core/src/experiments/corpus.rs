//! Embedding corpora: CSV I/O, z-scoring, k-means, and a synthetic
//! Gaussian-mixture generator standing in for real item embeddings.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{ActionSpace, Catalog};
use crate::preference::UtilityFunction;
use crate::{rng_from_seed, SimRng};

/// Lloyd iterations cap.
pub const KMEANS_MAX_ITER: usize = 50;

/// Standardized items with their k-means clustering.
#[derive(Debug, Clone)]
pub struct Corpus {
    /// `N × d`, every column with mean 0 and population variance 1
    /// (constant columns are left at 0).
    pub items: DMatrix<f64>,
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `k × d`; row `j` is the mean of the items assigned to cluster `j`.
    pub centroids: DMatrix<f64>,
    /// Column means and standard deviations removed by standardization.
    pub column_means: DVector<f64>,
    pub column_stds: DVector<f64>,
    /// Lloyd iterations actually run.
    pub iterations: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.items.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.items.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.items.ncols()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn centroid(&self, j: usize) -> DVector<f64> {
        self.centroids.row(j).transpose()
    }

    /// Discrete action space over the standardized items.
    pub fn action_space(&self) -> Result<ActionSpace> {
        Ok(ActionSpace::discrete(Catalog::from_matrix(&self.items, None)?))
    }

    /// Cosine utility around a cluster centroid, ranging over `[−scale, scale]`.
    pub fn user_utility(&self, cluster: usize, scale: f64) -> Result<UtilityFunction> {
        if cluster >= self.k {
            return Err(Error::Corpus(format!(
                "cluster {cluster} out of range (k = {})",
                self.k
            )));
        }
        let pref = self.centroid(cluster);
        if pref.norm() == 0.0 {
            return Err(Error::Corpus(format!(
                "centroid of cluster {cluster} is the zero vector"
            )));
        }
        Ok(UtilityFunction::RescaledCosine { pref, scale })
    }
}

/// Read a headerless, comma-separated numeric CSV.
pub fn read_corpus_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    let mut dim = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Corpus(format!("row {}: {e}", i + 1)))?;
        match dim {
            None => dim = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(Error::Corpus(format!(
                    "row {} has {} columns, expected {d}",
                    i + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Corpus(format!("row {}, column {}: `{cell}` is not a number", i + 1, j + 1)))?;
            if !v.is_finite() {
                return Err(Error::Corpus(format!(
                    "row {}, column {}: non-finite value",
                    i + 1,
                    j + 1
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    let dim = dim
        .filter(|d| *d > 0)
        .ok_or_else(|| Error::Corpus("corpus is empty".into()))?;
    Ok(DMatrix::from_row_slice(rows, dim, &values))
}

/// Write rows as headerless CSV with round-trip float formatting.
pub fn write_corpus_csv(path: &Path, items: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(items.len() * 20);
    for i in 0..items.nrows() {
        for j in 0..items.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&items[(i, j)].to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Column-wise z-scoring with population variance. Returns the scaled
/// matrix, the column means and the column standard deviations.
pub fn standardize(items: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let n = items.nrows() as f64;
    let mut out = items.clone();
    let mut means = DVector::zeros(items.ncols());
    let mut stds = DVector::zeros(items.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let std = (col.norm_squared() / n).sqrt();
        if std > 0.0 {
            col /= std;
        }
        means[j] = mean;
        stds[j] = std;
    }
    (out, means, stds)
}

fn sq_dist(items: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, j: usize) -> f64 {
    items
        .row(i)
        .iter()
        .zip(centers.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// k-means++ seeding: first center uniform, the rest drawn with
/// probability proportional to squared distance to the nearest center.
fn kmeans_pp(items: &DMatrix<f64>, k: usize, rng: &mut SimRng) -> DMatrix<f64> {
    let n = items.nrows();
    let mut centers = DMatrix::zeros(k, items.ncols());
    let first = rng.random_range(0..n);
    centers.set_row(0, &items.row(first));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(items, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in dist.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.set_row(c, &items.row(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(items, i, &centers, c));
        }
    }
    centers
}

fn nearest_center(items: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    (0..centers.nrows())
        .map(|j| (j, sq_dist(items, i, centers, j)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Assign every row to its nearest center. An empty cluster steals the
/// row farthest from its current center.
fn assign(items: &DMatrix<f64>, centers: &DMatrix<f64>) -> Vec<usize> {
    let k = centers.nrows();
    let mut labels = Vec::with_capacity(items.nrows());
    let mut dists = Vec::with_capacity(items.nrows());
    for i in 0..items.nrows() {
        let (j, d) = nearest_center(items, i, centers);
        labels.push(j);
        dists.push(d);
    }
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..items.nrows())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]));
        if let Some(i) = donor {
            sizes[labels[i]] -= 1;
            labels[i] = j;
            sizes[j] = 1;
            dists[i] = 0.0;
        }
    }
    labels
}

fn means(items: &DMatrix<f64>, labels: &[usize], k: usize) -> DMatrix<f64> {
    let mut sums = DMatrix::zeros(k, items.ncols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += items.row(i);
        counts[l] += 1;
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            let mut row = sums.row_mut(j);
            row /= c as f64;
        }
    }
    sums
}

/// Lloyd's algorithm from k-means++ seeds. Stops when assignments repeat or
/// after [`KMEANS_MAX_ITER`] rounds; centroids are always the means of the
/// final assignment. Returns `(assignments, centroids, iterations)`.
pub fn kmeans(items: &DMatrix<f64>, k: usize, seed: u64) -> Result<(Vec<usize>, DMatrix<f64>, usize)> {
    if k == 0 || items.nrows() < k {
        return Err(Error::Corpus(format!(
            "k-means needs 1 <= k <= N (k = {k}, N = {})",
            items.nrows()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut centers = kmeans_pp(items, k, &mut rng);
    let mut labels = assign(items, &centers);
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        centers = means(items, &labels, k);
        let next = assign(items, &centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    let centers = means(items, &labels, k);
    Ok((labels, centers, iterations))
}

/// Standardize a matrix and cluster it.
pub fn cluster_corpus(raw: &DMatrix<f64>, k: usize, seed: u64) -> Result<Corpus> {
    let (items, column_means, column_stds) = standardize(raw);
    let (assignments, centroids, iterations) = kmeans(&items, k, seed)?;
    Ok(Corpus {
        items,
        k,
        assignments,
        centroids,
        column_means,
        column_stds,
        iterations,
    })
}

/// Read, standardize and cluster a corpus CSV.
pub fn ingest_corpus(path: &Path, k: usize, seed: u64) -> Result<Corpus> {
    let raw = read_corpus_csv(path)?;
    cluster_corpus(&raw, k, seed)
}

/// Spread of the mixture centers per coordinate; points have unit noise.
pub const MIXTURE_CENTER_SCALE: f64 = 10.0;

/// Gaussian mixture with `k_true` components: centers drawn from
/// `N(0, 10² I)`, points `center + N(0, I)`, components assigned round-robin.
/// Returns the items and their true component labels.
pub fn synthetic_mixture(n: usize, d: usize, k_true: usize, seed: u64) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if k_true == 0 || d == 0 || n < 10 * k_true {
        return Err(Error::Corpus(format!(
            "synthetic corpus needs d >= 1, k >= 1 and N >= 10k (N = {n}, d = {d}, k = {k_true})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let centers = DMatrix::from_fn(k_true, d, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        MIXTURE_CENTER_SCALE * z
    });
    let labels: Vec<usize> = (0..n).map(|i| i % k_true).collect();
    let items = DMatrix::from_fn(n, d, |i, j| {
        let z: f64 = StandardNormal.sample(&mut rng);
        centers[(labels[i], j)] + z
    });
    Ok((items, labels))
}

/// Write a synthetic mixture to `path`; returns the true labels.
pub fn make_synthetic_corpus(n: usize, d: usize, k_true: usize, seed: u64, path: &Path) -> Result<Vec<usize>> {
    let (items, labels) = synthetic_mixture(n, d, k_true, seed)?;
    write_corpus_csv(path, &items)?;
    Ok(labels)
}
