#include "signeq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace signeq {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction of a symmetric matrix to tridiagonal form, with
// accumulation of the orthogonal transform in z (JAMA/EISPACK tred2).
void tred2(std::vector<double>& z, std::size_t n, std::vector<double>& d,
           std::vector<double>& e) {
    for (std::size_t j = 0; j < n; j++) d[j] = z[(n - 1) * n + j];

    for (std::size_t i = n - 1; i > 0; i--) {
        double scale = 0.0, h = 0.0;
        for (std::size_t k = 0; k < i; k++) scale += std::fabs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; j++) {
                d[j] = z[(i - 1) * n + j];
                z[i * n + j] = 0.0;
                z[j * n + i] = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; k++) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; j++) e[j] = 0.0;

            for (std::size_t j = 0; j < i; j++) {
                f = d[j];
                z[j * n + i] = f;
                g = e[j] + z[j * n + j] * f;
                for (std::size_t k = j + 1; k < i; k++) {
                    g += z[k * n + j] * d[k];
                    e[k] += z[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; j++) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; j++) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; j++) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k < i; k++)
                    z[k * n + j] -= f * e[k] + g * d[k];
                d[j] = z[(i - 1) * n + j];
                z[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for (std::size_t i = 0; i < n - 1; i++) {
        z[(n - 1) * n + i] = z[i * n + i];
        z[i * n + i] = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; k++) d[k] = z[k * n + (i + 1)] / h;
            for (std::size_t j = 0; j <= i; j++) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; k++) g += z[k * n + (i + 1)] * z[k * n + j];
                for (std::size_t k = 0; k <= i; k++) z[k * n + j] -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; k++) z[k * n + (i + 1)] = 0.0;
    }
    for (std::size_t j = 0; j < n; j++) {
        d[j] = z[(n - 1) * n + j];
        z[(n - 1) * n + j] = 0.0;
    }
    z[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal matrix, updating eigenvectors in z
// (JAMA/EISPACK tql2). Throws after 50 iterations on any eigenvalue.
void tql2(std::vector<double>& z, std::size_t n, std::vector<double>& d,
          std::vector<double>& e) {
    for (std::size_t i = 1; i < n; i++) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; l++) {
        tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::fabs(e[m]) <= eps * tst1) break;
            m++;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 50) throw EigNonConvergence(iter);
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = hypot2(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; i++) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = c, c3 = c;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii > l; ii--) {
                    const std::size_t i = ii - 1;
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot2(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (std::size_t k = 0; k < n; k++) {
                        h = z[k * n + (i + 1)];
                        z[k * n + (i + 1)] = s * z[k * n + i] + c * h;
                        z[k * n + i] = c * z[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::fabs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

// LAPACK backend for large matrices; the tridiagonal QL path above stays as
// the small-matrix solver and as the reference the tests cross-check against.
extern "C" void dsyev_(const char* jobz, const char* uplo, const int* n, double* a,
                       const int* lda, double* w, double* work, const int* lwork, int* info);

void lapack_eig(std::vector<double>& z, std::size_t n, std::vector<double>& d) {
    // dsyev is column-major; a symmetric input makes the layouts agree
    const int ni = static_cast<int>(n);
    int lwork = -1, info = 0;
    double wkopt = 0.0;
    dsyev_("V", "U", &ni, z.data(), &ni, d.data(), &wkopt, &lwork, &info);
    lwork = static_cast<int>(wkopt);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dsyev_("V", "U", &ni, z.data(), &ni, d.data(), work.data(), &lwork, &info);
    if (info != 0) throw EigNonConvergence(info);
    // columns of the column-major result are eigenvectors; transpose back
    // into row-major so z[r * n + c] indexes eigenvector c as elsewhere
    std::vector<double> zt(n * n);
    for (std::size_t c = 0; c < n; c++)
        for (std::size_t r = 0; r < n; r++) zt[r * n + c] = z[c * n + r];
    z.swap(zt);
}

constexpr std::size_t lapack_threshold = 128;

bool values_all_distinct(const std::vector<double>& values) {
    const double scale = std::max(max_abs(values), 1.0);
    for (std::size_t i = 1; i < values.size(); i++)
        if (values[i] - values[i - 1] <= EigBasis::distinct_tol * scale) return false;
    return true;
}

} // namespace

EigBasis sym_eig(const TensorPtr& a, EigSource source) {
    if (a->ndim() != 2 || a->rows() != a->cols())
        throw std::invalid_argument("sym_eig: matrix must be square");
    const std::size_t n = a->rows();
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = i + 1; j < n; j++)
            if (std::fabs(a->at(i, j) - a->at(j, i)) >= 1e-8)
                throw std::invalid_argument("sym_eig: matrix not symmetric");

    std::vector<double> z = a->data;
    std::vector<double> d(n), e(n, 0.0);
    if (n == 1) {
        d[0] = z[0];
        z[0] = 1.0;
    } else if (n >= lapack_threshold) {
        lapack_eig(z, n, d);
    } else {
        tred2(z, n, d, e);
        tql2(z, n, d, e);
    }

    // sort ascending, reordering columns
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

    EigBasis basis;
    basis.source = source;
    basis.values.resize(n);
    basis.vectors = Tensor::create({n, n});
    for (std::size_t c = 0; c < n; c++) {
        basis.values[c] = d[order[c]];
        for (std::size_t r = 0; r < n; r++) basis.vectors->at(r, c) = z[r * n + order[c]];
    }
    basis.all_distinct = values_all_distinct(basis.values);
    return basis;
}

TensorPtr laplacian(const Graph& g, LaplacianVariant variant) {
    auto l = Tensor::zeros({g.n, g.n});
    const auto deg = g.degrees();
    if (variant == LaplacianVariant::unnormalized) {
        for (std::size_t i = 0; i < g.n; i++) l->at(i, i) = static_cast<double>(deg[i]);
        for (const auto& [i, j] : g.edges) {
            l->at(i, j) = -1.0;
            l->at(j, i) = -1.0;
        }
    } else {
        // L_sym = I - D^{-1/2} A D^{-1/2}; isolated nodes keep a zero row
        std::vector<double> dinv(g.n, 0.0);
        for (std::size_t i = 0; i < g.n; i++)
            if (deg[i] > 0) dinv[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]));
        for (std::size_t i = 0; i < g.n; i++)
            if (deg[i] > 0) l->at(i, i) = 1.0;
        for (const auto& [i, j] : g.edges) {
            const double v = -dinv[i] * dinv[j];
            l->at(i, j) = v;
            l->at(j, i) = v;
        }
    }
    return l;
}

EigBasis laplacian_eigvecs(const Graph& g, std::size_t k, LaplacianVariant variant) {
    if (k > g.n) throw std::invalid_argument("laplacian_eigvecs: k > n");
    EigBasis full = sym_eig(laplacian(g, variant), variant == LaplacianVariant::unnormalized
                                                      ? EigSource::laplacian
                                                      : EigSource::normalized_laplacian);
    EigBasis out;
    out.source = full.source;
    out.values.assign(full.values.begin(), full.values.begin() + k);
    out.vectors = Tensor::create({g.n, k});
    for (std::size_t r = 0; r < g.n; r++)
        for (std::size_t c = 0; c < k; c++) out.vectors->at(r, c) = full.vectors->at(r, c);
    // distinctness of the *used* eigenvalues, including the gap to the next one
    std::vector<double> used(full.values.begin(),
                             full.values.begin() + std::min(g.n, k + 1));
    out.all_distinct = [&] {
        const double scale = std::max(max_abs(used), 1.0);
        for (std::size_t i = 1; i < used.size(); i++)
            if (used[i] - used[i - 1] <= EigBasis::distinct_tol * scale) return false;
        return true;
    }();
    return out;
}

TensorPtr covariance(const TensorPtr& x) {
    const std::size_t n = x->rows(), k = x->cols();
    std::vector<double> mean(k, 0.0);
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < k; j++) mean[j] += x->at(i, j);
    for (auto& m : mean) m /= static_cast<double>(n);
    auto cov = Tensor::zeros({k, k});
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t a = 0; a < k; a++) {
            const double xa = x->at(i, a) - mean[a];
            for (std::size_t b = 0; b < k; b++)
                cov->at(a, b) += xa * (x->at(i, b) - mean[b]);
        }
    return cov;
}

Frame pca_frame(const TensorPtr& x, double tol) {
    auto cov = covariance(x);
    EigBasis eig = sym_eig(cov, EigSource::covariance);
    const std::size_t k = eig.values.size();
    double trace = 0;
    for (double v : eig.values) trace += v;
    for (std::size_t i = 1; i < k; i++)
        if (eig.values[i] - eig.values[i - 1] <= tol * trace) throw DegenerateCovariance();

    Frame frame;
    frame.rotation = Tensor::create({k, k});
    frame.variances.resize(k);
    for (std::size_t c = 0; c < k; c++) { // flip to descending variance
        const std::size_t src = k - 1 - c;
        frame.variances[c] = eig.values[src];
        for (std::size_t r = 0; r < k; r++) frame.rotation->at(r, c) = eig.vectors->at(r, src);
    }
    return frame;
}

} // namespace signeq
