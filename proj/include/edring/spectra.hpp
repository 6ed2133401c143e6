#ifndef EDRING_SPECTRA_HPP
#define EDRING_SPECTRA_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "edring/operators.hpp"
#include "edring/symmetry.hpp"

namespace edring {

struct no_convergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOpts {
    int dense_crossover = 2000;   // dense diagonalization below this dimension
    double residual_tol = 1e-8;   // eigenpair residual, relative to scale
    double degeneracy_abs_tol = 1e-9;
    double degeneracy_rel_tol = 1e-8;
    double kernel_rel_tol = 1e-9;  // |lambda| <= this * scale counts as zero
    int max_iterations = 1200;     // Lanczos steps per pass
    int max_restarts = 60;
    unsigned seed = 12345;
    bool use_blocking = true;

    double degeneracy_tol(double scale) const {
        return std::max(degeneracy_abs_tol, degeneracy_rel_tol * scale);
    }
};

struct EigResult {
    std::vector<double> values;  // ascending
    DMat vectors;                // orthonormal columns, same order
    std::string method;
    int iterations = 0;
};

using ApplyFn = std::function<DVec(const DVec&)>;

namespace detail {

// Smallest k >= count such that values[k-1] and values[k] are separated by
// more than deg_tol (full degenerate clusters are never split). Returns
// values.size() if no separation point exists.
inline std::size_t closure_cut(const std::vector<double>& values, std::size_t count,
                               double deg_tol) {
    if (values.size() <= count) return values.size();
    std::size_t k = count;
    while (k < values.size() && values[k] - values[k - 1] <= deg_tol) ++k;
    return k;
}

inline DVec random_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    DVec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
    return v;
}

inline void orthogonalize(DVec& v, const std::vector<DVec>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const DVec& b : basis) v -= b.dot(v) * b;
}

// Deflated Lanczos with full reorthogonalization. Converged eigenvectors are
// deflated so repeated passes resolve degenerate multiplets one copy at a
// time. With require_closure the returned set is closed under the degeneracy
// grouping rule (an extra separated value must be found, or the space
// exhausted, before the bottom cluster is declared complete).
// With until_second_level the pass loop instead terminates once the smallest
// value accepted by a whole pass is separated from the bottom cluster;
// deflation guarantees each pass converges the smallest not-yet-found
// eigenvalue first, so a pass that opens above the cluster certifies the
// cluster is exhausted. (A single separated acceptance is not enough: one
// pass can deliver a new bottom copy and a separated value together.)
inline EigResult lanczos_lowest(const ApplyFn& apply, int dim, std::size_t count,
                                const SolverOpts& opts, double scale,
                                bool require_closure = true,
                                bool until_second_level = false) {
    EigResult out;
    out.method = "lanczos";
    if (dim == 0) { out.vectors = DMat(0, 0); return out; }
    const double tol = opts.residual_tol * std::max(scale, 1.0);
    const double deg_tol = opts.degeneracy_tol(scale);
    const double breakdown = 1e-13 * std::max(scale, 1.0);
    std::mt19937_64 rng(opts.seed);

    std::vector<DVec> conv_vecs;
    std::vector<double> conv_vals;
    std::optional<double> last_pass_min;  // smallest value accepted by the last pass

    int restarts = 0;
    while (true) {
        if (conv_vals.size() >= static_cast<std::size_t>(dim)) break;
        if (until_second_level) {
            std::size_t k = conv_vals.empty()
                                ? 0
                                : closure_cut(conv_vals, 1, deg_tol);
            if (k > 0 && k < conv_vals.size() && last_pass_min &&
                *last_pass_min > conv_vals[k - 1])
                break;
        } else if (conv_vals.size() >= count) {
            std::size_t k = closure_cut(conv_vals, count, deg_tol);
            if (!require_closure || k < conv_vals.size()) break;
        }
        if (restarts++ > opts.max_restarts)
            throw no_convergence("lanczos: restart cap exceeded (dim=" +
                                 std::to_string(dim) + ")");

        // one Lanczos pass on the deflated operator
        std::vector<DVec> krylov;
        std::vector<double> alpha, beta;
        DVec v = random_vector(dim, rng);
        orthogonalize(v, conv_vecs);
        double nrm = v.norm();
        if (nrm < 1e-12) continue;
        v /= nrm;
        krylov.push_back(v);

        const int m_cap = std::min<int>(dim - static_cast<int>(conv_vecs.size()),
                                        opts.max_iterations);
        bool invariant = false;
        std::size_t accepted_this_pass = 0;
        last_pass_min.reset();

        auto harvest = [&](bool exact) {
            const int m = static_cast<int>(alpha.size());
            if (m == 0) return;
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                tri(i, i) = alpha[i];
                if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
            const double beta_last = beta.size() >= static_cast<std::size_t>(m)
                                         ? beta[m - 1] : 0.0;
            for (int r = 0; r < m; ++r) {
                const double est = exact ? 0.0
                                         : std::abs(beta_last * es.eigenvectors()(m - 1, r));
                if (est > tol) break;  // accept a contiguous bottom set only
                DVec y = DVec::Zero(dim);
                for (int i = 0; i < m; ++i)
                    y += cplx(es.eigenvectors()(i, r)) * krylov[i];
                orthogonalize(y, conv_vecs);
                double yn = y.norm();
                if (yn < 1e-8) continue;  // already captured
                y /= yn;
                const double theta = es.eigenvalues()[r];
                DVec res = apply(y) - theta * y;
                if (res.norm() > tol * 2.0 && !exact) break;
                conv_vecs.push_back(y);
                conv_vals.push_back(theta);
                ++accepted_this_pass;
                if (!last_pass_min || theta < *last_pass_min) last_pass_min = theta;
            }
        };

        for (int j = 0; j < m_cap; ++j) {
            DVec w = apply(krylov[j]);
            out.iterations++;
            if (j > 0) w -= beta[j - 1] * krylov[j - 1];
            double a = std::real(krylov[j].dot(w));
            alpha.push_back(a);
            w -= cplx(a) * krylov[j];
            orthogonalize(w, krylov);
            orthogonalize(w, conv_vecs);
            double b = w.norm();
            if (b <= breakdown) {
                invariant = true;
                break;
            }
            beta.push_back(b);
            // convergence probe on the bottom Ritz value
            if ((j + 1) % 15 == 0 || j + 1 == m_cap) {
                const int m = static_cast<int>(alpha.size());
                Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
                for (int i = 0; i < m; ++i) {
                    tri(i, i) = alpha[i];
                    if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esv(tri);
                const double est = std::abs(b * esv.eigenvectors()(m - 1, 0));
                if (est <= 0.2 * tol) break;
            }
            krylov.push_back(w / b);
        }
        harvest(invariant);

        // keep converged set sorted (later passes can interleave values)
        std::vector<std::size_t> order(conv_vals.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return conv_vals[a] < conv_vals[b];
        });
        std::vector<DVec> sv;
        std::vector<double> sl;
        sv.reserve(order.size());
        for (std::size_t idx : order) {
            sv.push_back(std::move(conv_vecs[idx]));
            sl.push_back(conv_vals[idx]);
        }
        conv_vecs = std::move(sv);
        conv_vals = std::move(sl);

        if (accepted_this_pass > 0) restarts = 0;
    }

    std::size_t k = conv_vals.size();
    if (until_second_level)
        k = conv_vals.size();
    else if (require_closure)
        k = std::min(conv_vals.size(), closure_cut(conv_vals, count, deg_tol));
    else
        k = std::min(conv_vals.size(), std::max(count, std::size_t(0)));
    out.values.assign(conv_vals.begin(), conv_vals.begin() + k);
    out.vectors = DMat(dim, k);
    for (std::size_t i = 0; i < k; ++i) out.vectors.col(i) = conv_vecs[i];
    return out;
}

inline EigResult dense_lowest(const DMat& a, std::size_t count, const SolverOpts& opts,
                              double scale) {
    EigResult out;
    out.method = "dense";
    const int dim = static_cast<int>(a.rows());
    if (dim == 0) { out.vectors = DMat(0, 0); return out; }
    DMat h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<DMat> es(h);
    std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + dim);
    std::size_t k = closure_cut(vals, std::min<std::size_t>(count, dim),
                                opts.degeneracy_tol(scale));
    out.values.assign(vals.begin(), vals.begin() + k);
    out.vectors = es.eigenvectors().leftCols(k);
    return out;
}

}  // namespace detail

// Lowest `count` eigenpairs, closed under the degeneracy grouping rule.
inline EigResult lowest_eigenpairs(const SparseOperator& h, std::size_t count,
                                   const SolverOpts& opts = {}) {
    const int dim = static_cast<int>(h.rows());
    const double scale = h.scale();
    if (scale == 0.0) {
        // zero operator: eigenvalue 0 with full multiplicity
        EigResult out;
        out.method = "trivial";
        out.values.assign(dim, 0.0);
        out.vectors = DMat::Identity(dim, dim);
        return out;
    }
    if (dim <= opts.dense_crossover)
        return detail::dense_lowest(h.dense(), count, opts, scale);
    ApplyFn apply = [&h](const DVec& v) { return DVec(h.mat * v); };
    return detail::lanczos_lowest(apply, dim, count, opts, scale);
}

// Lowest eigenpairs extended until at least two distinct levels are resolved
// (or the operator is exhausted). Gap quantities need the full first excited
// level, not just the bottom cluster.
inline EigResult lowest_two_levels(const SparseOperator& h, const SolverOpts& opts = {}) {
    const int dim = static_cast<int>(h.rows());
    const double scale = h.scale();
    if (dim == 0 || scale == 0.0) return lowest_eigenpairs(h, 1, opts);
    const double deg_tol = opts.degeneracy_tol(scale);
    if (dim <= opts.dense_crossover) {
        // one full decomposition; keep through the first excited cluster
        EigResult out;
        out.method = "dense";
        DMat hd = 0.5 * (h.dense() + h.dense().adjoint());
        Eigen::SelfAdjointEigenSolver<DMat> es(hd);
        std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + dim);
        std::size_t k1 = detail::closure_cut(vals, 1, deg_tol);  // ground-cluster end
        std::size_t k = k1 < vals.size() ? detail::closure_cut(vals, k1 + 1, deg_tol) : k1;
        out.values.assign(vals.begin(), vals.begin() + k);
        out.vectors = es.eigenvectors().leftCols(k);
        return out;
    }
    ApplyFn apply = [&h](const DVec& v) { return DVec(h.mat * v); };
    return detail::lanczos_lowest(apply, dim, 2, opts, scale, true, true);
}

// Minimum eigenvalue only. Skips the degeneracy-closure requirement, so a
// single Ritz value suffices even when the bottom cluster is huge (PSD
// certificates over large kernels).
inline double min_eigenvalue(const SparseOperator& h, const SolverOpts& opts = {}) {
    const int dim = static_cast<int>(h.rows());
    const double scale = h.scale();
    if (dim == 0 || scale == 0.0) return 0.0;
    if (dim <= opts.dense_crossover) {
        DMat m = 0.5 * (h.dense() + h.dense().adjoint());
        Eigen::SelfAdjointEigenSolver<DMat> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    ApplyFn apply = [&h](const DVec& v) { return DVec(h.mat * v); };
    EigResult r = detail::lanczos_lowest(apply, dim, 1, opts, scale, false);
    if (r.values.empty()) throw no_convergence("min_eigenvalue: no Ritz value");
    return r.values.front();
}

// Largest eigenvalue of a hermitian operator given matrix-free (used for
// overlap-operator norms).
inline double largest_eigenvalue(const ApplyFn& apply, int dim, double scale,
                                 const SolverOpts& opts = {}) {
    if (dim == 0) return 0.0;
    if (scale == 0.0) return 0.0;
    ApplyFn neg = [&apply](const DVec& v) { return DVec(-apply(v)); };
    EigResult r = detail::lanczos_lowest(neg, dim, 1, opts, scale, false);
    if (r.values.empty()) throw no_convergence("largest_eigenvalue: no Ritz value");
    return -r.values.front();
}

// ---------------------------------------------------------------------------

struct SpectralSummary {
    int n = 0;
    double E0 = 0.0;
    std::optional<double> E1;  // absent when the sector has one distinct level
    int q_n = 0;               // ground multiplicity
    int kernel_dim = 0;        // multiplicity of eigenvalue 0 within tolerance
    DMat ground_basis;         // full-sector coordinates, orthonormal columns
    std::vector<double> low_values;  // computed bottom of the spectrum, sorted
    double scale = 0.0;
    std::string method;
    int iterations = 0;
};

namespace detail {

struct BlockEig {
    const DipoleBlock* block;
    EigResult eig;
};

}  // namespace detail

// Spectral data of the spec's Hamiltonian on sector n. Uses dipole blocking
// when H commutes with V.
inline SpectralSummary spectral_summary(const HamiltonianSpec& spec, int n,
                                        const SolverOpts& opts = {}) {
    SectorPtr sector = enumerate_sector(spec.L, n, spec.statistics);
    SparseOperator h = assemble_hamiltonian(spec, sector);
    const double scale = h.scale();
    const double deg_tol = opts.degeneracy_tol(scale);
    const int dim = static_cast<int>(sector->dim());

    SpectralSummary out;
    out.n = n;
    out.scale = scale;

    std::vector<double> values;          // merged, sorted
    std::vector<std::pair<int, int>> src;  // (block idx in list, col) per value
    std::vector<detail::BlockEig> beigs;
    std::vector<DipoleBlock> blocks;

    const bool blocked = opts.use_blocking && dim > 1 && commutes_with_dipole(h);
    if (blocked) {
        blocks = symmetry_block_decompose(h);
        out.method = "blocked";
        for (auto& b : blocks) {
            if (b.op.rows() == 0) continue;
            EigResult e = lowest_two_levels(b.op, opts);
            out.iterations += e.iterations;
            beigs.push_back({&b, std::move(e)});
        }
    } else {
        EigResult e = lowest_two_levels(h, opts);
        out.method = e.method;
        out.iterations = e.iterations;
        blocks.clear();
        beigs.push_back({nullptr, std::move(e)});
    }

    for (std::size_t bi = 0; bi < beigs.size(); ++bi)
        for (std::size_t c = 0; c < beigs[bi].eig.values.size(); ++c) {
            values.push_back(beigs[bi].eig.values[c]);
            src.emplace_back(static_cast<int>(bi), static_cast<int>(c));
        }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    if (values.empty()) {  // dim == 0 sector
        out.ground_basis = DMat(0, 0);
        return out;
    }

    const double e0 = values[order[0]];
    out.E0 = e0;
    // second distinct level: smallest computed value separated from E0
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (values[order[i]] - e0 > deg_tol) {
            out.E1 = values[order[i]];
            break;
        }
    }
    // ground cluster and kernel
    std::vector<std::pair<int, int>> ground_src;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (values[order[i]] - e0 <= deg_tol)
            ground_src.push_back(src[order[i]]);
        else
            break;
    }
    out.q_n = static_cast<int>(ground_src.size());
    const double kern_tol = opts.kernel_rel_tol * std::max(scale, 1.0);
    for (std::size_t i = 0; i < order.size(); ++i)
        if (std::abs(values[order[i]]) <= kern_tol) ++out.kernel_dim;

    out.ground_basis = DMat::Zero(dim, ground_src.size());
    for (std::size_t g = 0; g < ground_src.size(); ++g) {
        const auto& be = beigs[ground_src[g].first];
        const DVec col = be.eig.vectors.col(ground_src[g].second);
        if (be.block) {
            for (std::size_t r = 0; r < be.block->full_indices.size(); ++r)
                out.ground_basis(be.block->full_indices[r], g) = col[r];
        } else {
            out.ground_basis.col(g) = col;
        }
    }

    for (std::size_t i = 0; i < order.size(); ++i)
        out.low_values.push_back(values[order[i]]);
    return out;
}

struct GapReport {
    int n0 = 0;
    std::optional<double> neutral_gap;  // E1 - E0 at n0
    double delta_plus = 0.0;            // E_{n0+1}^(0) - E_{n0}^(0)
    double delta_minus = 0.0;           // E_{n0-1}^(0) - E_{n0}^(0)
    double charge_gap = 0.0;            // delta_plus + delta_minus
};

inline GapReport gap_report(const HamiltonianSpec& spec, int n0,
                            const SolverOpts& opts = {}) {
    if (n0 < 1) throw std::invalid_argument("gap_report requires n0 >= 1");
    SpectralSummary below = spectral_summary(spec, n0 - 1, opts);
    SpectralSummary at = spectral_summary(spec, n0, opts);
    SpectralSummary above = spectral_summary(spec, n0 + 1, opts);
    GapReport g;
    g.n0 = n0;
    if (at.E1) g.neutral_gap = *at.E1 - at.E0;
    g.delta_plus = above.E0 - at.E0;
    g.delta_minus = below.E0 - at.E0;
    g.charge_gap = g.delta_plus + g.delta_minus;
    return g;
}

}  // namespace edring

#endif
