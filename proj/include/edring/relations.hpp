#ifndef EDRING_RELATIONS_HPP
#define EDRING_RELATIONS_HPP

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "edring/spectra.hpp"

namespace edring {

struct hypothesis_violated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RelationTols {
    double slack_rel = 1e-8;  // verdict: pass iff slack >= -slack_rel * scale
    double psd_rel = 1e-10;   // positivity hypothesis / PSD checks
    double block_offdiag = 1e-12;
    double trace_abs = 1e-9;
};

struct RelationReport {
    std::string relation_id;
    int L = 0;
    int n = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // lhs - rhs
    bool pass = false;
    std::string label;   // "", "outside-hypotheses", "vacuous", ...
    std::string detail;
    double scale = 0.0;
};

// Caches sectors, assembled Hamiltonians and spectral summaries for one spec.
class ModelContext {
  public:
    ModelContext(HamiltonianSpec spec, SolverOpts opts = {}, RelationTols tols = {})
        : spec_(std::move(spec)), opts_(opts), tols_(tols) {}

    const HamiltonianSpec& spec() const { return spec_; }
    const SolverOpts& opts() const { return opts_; }
    const RelationTols& tols() const { return tols_; }
    int m0() const { return spec_.m0(); }
    int m1() const { return spec_.m1(); }

    SectorPtr sector(int n) {
        auto it = sectors_.find(n);
        if (it != sectors_.end()) return it->second;
        SectorPtr s = enumerate_sector(spec_.L, n, spec_.statistics);
        sectors_.emplace(n, s);
        return s;
    }

    const SparseOperator& hamiltonian(int n) {
        auto it = hams_.find(n);
        if (it != hams_.end()) return it->second;
        return hams_.emplace(n, assemble_hamiltonian(spec_, sector(n))).first->second;
    }

    const SpectralSummary& summary(int n) {
        auto it = summaries_.find(n);
        if (it != summaries_.end()) return it->second;
        return summaries_.emplace(n, spectral_summary(spec_, n, opts_)).first->second;
    }

    // Annihilation maps a_x : sector n -> sector n-1, built once per (n, x).
    const SparseOperator& annihilator(int n, int x) {
        auto key = std::make_pair(n, x);
        auto it = anns_.find(key);
        if (it != anns_.end()) return it->second;
        return anns_.emplace(key, annihilation_matrix(x, sector(n), sector(n - 1)))
            .first->second;
    }

    // Largest scale among the Hamiltonians touched so far (slack tolerances).
    double scale(int n) { return hamiltonian(n).scale(); }

    // memo for the positivity certificates, keyed by (sector, m_floor)
    std::map<std::pair<int, int>, double>& psd_cache() { return psd_cache_; }

  private:
    HamiltonianSpec spec_;
    SolverOpts opts_;
    RelationTols tols_;
    std::map<int, SectorPtr> sectors_;
    std::map<int, SparseOperator> hams_;
    std::map<int, SpectralSummary> summaries_;
    std::map<std::pair<int, int>, SparseOperator> anns_;
    std::map<std::pair<int, int>, double> psd_cache_;
};

// ---------------------------------------------------------------------------
// Positivity hypotheses
// ---------------------------------------------------------------------------

// Minimum eigenvalue of each m-body part with m > m_floor, on the given
// sector. Returns the most negative value found (0 if no parts).
inline double min_part_eigenvalue(ModelContext& ctx, int n, int m_floor) {
    auto key = std::make_pair(n, m_floor);
    auto hit = ctx.psd_cache().find(key);
    if (hit != ctx.psd_cache().end()) return hit->second;
    double worst = 0.0;
    std::vector<int> ms;
    for (const auto& t : ctx.spec().terms) ms.push_back(t.m);
    if (ctx.spec().pseudopotential) ms.push_back(2);
    if (ctx.spec().mu != 0.0) ms.push_back(1);
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    for (int m : ms) {
        if (m <= m_floor) continue;
        SparseOperator part = assemble_part(ctx.spec(), m, ctx.sector(n));
        if (part.scale() == 0.0) continue;
        worst = std::min(worst, min_eigenvalue(part, ctx.opts()));
    }
    ctx.psd_cache().emplace(key, worst);
    return worst;
}

inline void require_psd_parts(ModelContext& ctx, int n, int m_floor) {
    for (int s : {n, n + 1}) {
        double worst = min_part_eigenvalue(ctx, s, m_floor);
        double tol = ctx.tols().psd_rel * std::max(ctx.scale(s), 1.0);
        if (worst < -tol)
            throw hypothesis_violated("H^(m) for m > " + std::to_string(m_floor) +
                                      " has negative eigenvalue " + std::to_string(worst) +
                                      " on sector n=" + std::to_string(s));
    }
}

// ---------------------------------------------------------------------------
// Overlap operators and Gram matrices
// ---------------------------------------------------------------------------

struct GramBlockData {
    int gamma = 0;   // in [1:L]
    DMat G;          // q x q
    DMat F;          // q x q, G = 1 -+ F
    double min_eig_F = 0.0;
    double trace_F = 0.0;
};

struct GramReport {
    int n = 0;
    DMat gram;              // (q_n * L) x (q_n * L), index (alpha, x) alpha-major
    double norm_gram = 0.0;
    double norm_G = 0.0;
    double norm_F = 0.0;
    std::vector<GramBlockData> blocks;
    double max_offblock = 0.0;  // only meaningful when blocks are present
};

// G^(n)_{alpha x, beta y} = <a_x^dag phi_alpha, a_y^dag phi_beta> over the
// computed orthonormal ground basis of H_n.
inline GramReport gram_matrix(ModelContext& ctx, int n) {
    const SpectralSummary& s = ctx.summary(n);
    SectorPtr high = ctx.sector(n + 1);
    const int L = ctx.spec().L;
    const int q = s.q_n;
    const int dim_high = static_cast<int>(high->dim());
    DMat z(dim_high, q * L);
    for (int x = 1; x <= L; ++x) {
        // a_x^dag : n -> n+1 is the adjoint of a_x : n+1 -> n
        const SparseOperator& ann = ctx.annihilator(n + 1, x);
        for (int a = 0; a < q; ++a)
            z.col(a * L + (x - 1)) = ann.mat.adjoint() * s.ground_basis.col(a);
    }
    GramReport g;
    g.n = n;
    g.gram = z.adjoint() * z;
    Eigen::SelfAdjointEigenSolver<DMat> es(g.gram, Eigen::EigenvaluesOnly);
    g.norm_gram = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
    return g;
}

// ||G_n|| and ||F_n||: ground/excited-space compressions of
// M = sum_x a_x^dag P_n a_x on sector n+1.
inline std::pair<double, double> overlap_norms(ModelContext& ctx, int n) {
    const SpectralSummary& low = ctx.summary(n);
    const SpectralSummary& high = ctx.summary(n + 1);
    SectorPtr hs = ctx.sector(n + 1);
    const int L = ctx.spec().L;
    const int dim_high = static_cast<int>(hs->dim());
    const DMat& phi = low.ground_basis;    // dim_n x q_n
    const DMat& psi = high.ground_basis;   // dim_{n+1} x q_{n+1}

    // norm_G: largest eigenvalue of the q_{n+1} x q_{n+1} matrix
    // <psi_i, M psi_j> = sum_x (phi^dag a_x psi)^dag (phi^dag a_x psi)
    DMat s = DMat::Zero(psi.cols(), psi.cols());
    for (int x = 1; x <= L; ++x) {
        const SparseOperator& ann = ctx.annihilator(n + 1, x);
        DMat y = phi.adjoint() * (ann.mat * psi);  // q_n x q_{n+1}
        s += y.adjoint() * y;
    }
    double norm_G = 0.0;
    if (s.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<DMat> es(s, Eigen::EigenvaluesOnly);
        norm_G = es.eigenvalues().maxCoeff();
    }

    // norm_F: largest eigenvalue of Pperp M Pperp, matrix-free
    double norm_F = 0.0;
    if (psi.cols() < dim_high) {
        auto project_out = [&psi](DVec v) -> DVec {
            if (psi.cols() > 0) v -= psi * (psi.adjoint() * v);
            return v;
        };
        ApplyFn apply = [&](const DVec& v) -> DVec {
            DVec pv = project_out(v);
            DVec acc = DVec::Zero(pv.size());
            for (int x = 1; x <= ctx.spec().L; ++x) {
                const SparseOperator& ann = ctx.annihilator(n + 1, x);
                DVec w = ann.mat * pv;                    // sector n
                DVec pw = phi.cols() > 0 ? DVec(phi * (phi.adjoint() * w))
                                         : DVec(DVec::Zero(w.size()));
                acc += ann.mat.adjoint() * pw;
            }
            return project_out(acc);
        };
        const double scale = n + 1.0;  // M <= (n+1) * identity on sector n+1
        if (dim_high <= ctx.opts().dense_crossover) {
            DMat m = DMat::Zero(dim_high, dim_high);
            for (int x = 1; x <= L; ++x) {
                const SparseOperator& ann = ctx.annihilator(n + 1, x);
                DMat ax_phi = ann.mat.adjoint() * phi;  // dim_high x q_n
                m += ax_phi * ax_phi.adjoint();
            }
            DMat pperp = DMat::Identity(dim_high, dim_high) - psi * psi.adjoint();
            DMat f = pperp * m * pperp;
            Eigen::SelfAdjointEigenSolver<DMat> es(f, Eigen::EigenvaluesOnly);
            norm_F = std::max(0.0, es.eigenvalues().maxCoeff());
        } else {
            norm_F = std::max(0.0, largest_eigenvalue(apply, dim_high, scale, ctx.opts()));
        }
    }
    return {norm_G, norm_F};
}

// ---------------------------------------------------------------------------
// Relation checks
// ---------------------------------------------------------------------------

inline RelationReport make_report(ModelContext& ctx, const std::string& id, int n,
                                  double lhs, double rhs, double scale,
                                  const std::string& label = "",
                                  const std::string& detail = "") {
    RelationReport r;
    r.relation_id = id;
    r.L = ctx.spec().L;
    r.n = n;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = lhs - rhs;
    r.scale = scale;
    r.pass = r.slack >= -ctx.tols().slack_rel * std::max(scale, 1.0);
    r.label = label;
    r.detail = detail;
    return r;
}

// Minimum eigenvalue of H_{n+1} - 1/(n+1-m0) sum_x a_x^dag H_n a_x >= 0
// (up to tolerance) whenever all H^(m) with m > m0 are PSD.
inline RelationReport verify_key_lemma(ModelContext& ctx, int n) {
    const int m0 = ctx.m0();
    require_psd_parts(ctx, n, m0);
    const SparseOperator& h_low = ctx.hamiltonian(n);
    const SparseOperator& h_high = ctx.hamiltonian(n + 1);
    SparseOperator lifted = lift_operator(h_low, ctx.sector(n + 1));
    SpMat diff = SpMat(h_high.mat - SpMat(cplx(1.0 / (n + 1 - m0)) * lifted.mat));
    SparseOperator d(ctx.sector(n + 1), ctx.sector(n + 1), std::move(diff));
    double min_eig = 0.0;
    if (d.scale() > 0.0) min_eig = min_eigenvalue(d, ctx.opts());
    const double scale = std::max(ctx.scale(n), ctx.scale(n + 1));
    RelationReport r = make_report(ctx, "key_lemma", n, min_eig, 0.0, scale);
    r.pass = min_eig >= -ctx.tols().psd_rel * std::max(scale, 1.0);
    return r;
}

// (I)  E_{n+1}^(0) >= (n+1)/(n+1-m0) E_n^(0) + Gap_n/(n+1-m0) (n+1 - ||G_n||)
inline RelationReport verify_relation_I(ModelContext& ctx, int n) {
    const int m0 = ctx.m0();
    require_psd_parts(ctx, n, m0);
    const SpectralSummary& low = ctx.summary(n);
    const SpectralSummary& high = ctx.summary(n + 1);
    auto [norm_G, norm_F] = overlap_norms(ctx, n);
    (void)norm_F;
    std::string label;
    double gap = 0.0;
    if (low.E1)
        gap = *low.E1 - low.E0;
    else
        label = "single-level";
    const double rhs = (n + 1.0) / (n + 1.0 - m0) * low.E0 +
                       gap / (n + 1.0 - m0) * (n + 1.0 - norm_G);
    const double scale = std::max(ctx.scale(n), ctx.scale(n + 1));
    RelationReport r = make_report(ctx, "relation_I", n, high.E0, rhs, scale, label);
    r.detail = "norm_G=" + std::to_string(norm_G);
    return r;
}

// (II)  E_{n+1}^(1) >= (n+1 - ||F_n||)/(n+1-m0) E_n^(1)
inline RelationReport verify_relation_II(ModelContext& ctx, int n) {
    const int m0 = ctx.m0();
    require_psd_parts(ctx, n, m0);
    const SpectralSummary& low = ctx.summary(n);
    const SpectralSummary& high = ctx.summary(n + 1);
    const double scale = std::max(ctx.scale(n), ctx.scale(n + 1));
    if (!low.E1 || !high.E1) {
        RelationReport r = make_report(ctx, "relation_II", n, 0.0, 0.0, scale, "vacuous");
        r.pass = true;
        return r;
    }
    auto [norm_G, norm_F] = overlap_norms(ctx, n);
    (void)norm_G;
    const double rhs = (n + 1.0 - norm_F) / (n + 1.0 - m0) * (*low.E1);
    RelationReport r = make_report(ctx, "relation_II", n, *high.E1, rhs, scale);
    r.detail = "norm_F=" + std::to_string(norm_F);
    return r;
}

// Corollary: Delta^+_{n0} >= E_{n0}^(0)/n0 + (n0+1-||G_{n0}||)/n0 Gap_{n0},
// for m0 >= 1 and H^(m) >= 0 for all m >= 2.
inline RelationReport verify_corollary_cngap(ModelContext& ctx, int n0) {
    if (ctx.m0() < 1)
        throw hypothesis_violated("corollary requires m_0 >= 1");
    require_psd_parts(ctx, n0, 1);
    const SpectralSummary& at = ctx.summary(n0);
    const SpectralSummary& above = ctx.summary(n0 + 1);
    auto [norm_G, norm_F] = overlap_norms(ctx, n0);
    (void)norm_F;
    std::string label;
    double gap = 0.0;
    if (at.E1)
        gap = *at.E1 - at.E0;
    else
        label = "single-level";
    const double lhs = above.E0 - at.E0;
    const double rhs = at.E0 / n0 + (n0 + 1.0 - norm_G) / n0 * gap;
    const double scale = std::max(ctx.scale(n0), ctx.scale(n0 + 1));
    RelationReport r = make_report(ctx, "corollary_cngap", n0, lhs, rhs, scale, label);
    r.detail = "norm_G=" + std::to_string(norm_G);
    return r;
}

// Charge-vs-neutral gap domination in the FQHS setting:
//   E_{n+1}^(0) >= n_q/(n_q+1-m0) Gap_{n_q}        (fermions)
//   E_{n+1}^(0) >= (n_q-p)/(n_q+1-m0) Gap_{n_q}    (bosons)
// Hypotheses: L = ell q^2 with ell >= 3, droppable for p=1, q=2.
inline RelationReport verify_thm_main(ModelContext& ctx, const FillingSpec& f, int n) {
    const int L = ctx.spec().L;
    const int nq = f.n_q(L);
    if (n < nq)
        throw hypothesis_violated("thm_main requires n >= n_q");
    const int m0 = ctx.m0();
    require_psd_parts(ctx, n, m0);
    const SpectralSummary& at_nq = ctx.summary(nq);
    const SpectralSummary& above = ctx.summary(n + 1);
    std::string label;
    const int ell = f.ell(L);
    const bool in_hyp = (ell >= 3) || (f.p == 1 && f.q == 2);
    if (!in_hyp) label = "outside-hypotheses";
    if (at_nq.kernel_dim != f.q) {
        label = label.empty() ? "kernel-dim-mismatch" : label + ",kernel-dim-mismatch";
    }
    double gap = at_nq.E1 ? (*at_nq.E1 - at_nq.E0) : 0.0;
    const double coeff = (ctx.spec().statistics == Statistics::fermion)
                             ? static_cast<double>(nq) / (nq + 1.0 - m0)
                             : static_cast<double>(nq - f.p) / (nq + 1.0 - m0);
    const double rhs = coeff * gap;
    const double scale = std::max(ctx.scale(nq), ctx.scale(n + 1));
    RelationReport r = make_report(ctx, "thm_main", n, above.E0, rhs, scale, label);
    r.detail = "n_q=" + std::to_string(nq) + " gap_nq=" + std::to_string(gap);
    return r;
}

// ---------------------------------------------------------------------------
// Kernel reference state and Gram block decomposition
// ---------------------------------------------------------------------------

struct KernelStructure {
    DVec phi;                 // reference V-eigenvector, deterministic gauge
    int d_phi = 0;            // dipole class of phi (D mod L)
    std::vector<DVec> translates;  // T^j phi, j = 0..q-1
    double periodicity_residual = 0.0;  // ||T^q phi - phi||
    double span_residual = 0.0;         // distance of translates from kernel
    std::vector<double> v_eigen_residuals;  // vs exp(2 pi i (d_phi/L + j p/q))
};

// Selects phi from ker H_{n_q}: diagonalize V on the kernel, take the
// eigenvector in the smallest dipole class, fix its global phase so the
// largest-magnitude coordinate is real positive.
inline KernelStructure kernel_structure(ModelContext& ctx, const FillingSpec& f) {
    const int L = ctx.spec().L;
    const int nq = f.n_q(L);
    const SpectralSummary& s = ctx.summary(nq);
    if (s.kernel_dim != f.q || s.q_n != f.q)
        throw hypothesis_violated("kernel of H_{n_q} is not q-dimensional (dim=" +
                                  std::to_string(s.kernel_dim) + ", q=" +
                                  std::to_string(f.q) + ")");
    SectorPtr sector = ctx.sector(nq);
    const DMat& kern = s.ground_basis;  // dim x q

    // V restricted to the kernel
    DVec vdiag(sector->dim());
    for (std::size_t i = 0; i < sector->dim(); ++i)
        vdiag[i] = std::polar(1.0, 2.0 * M_PI * dipole_of(sector->state(i)) / L);
    DMat vk = kern.adjoint() * vdiag.asDiagonal() * kern;
    Eigen::ComplexEigenSolver<DMat> es(vk);

    // dipole class of each V-eigenvector from its eigenvalue phase
    int best = -1, best_class = L;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        double ang = std::arg(es.eigenvalues()[j]);
        int cls = static_cast<int>(std::llround(ang * L / (2.0 * M_PI)));
        cls = ((cls % L) + L) % L;
        if (cls < best_class) {
            best_class = cls;
            best = j;
        }
    }
    KernelStructure k;
    k.d_phi = best_class;
    DVec phi = kern * es.eigenvectors().col(best);
    phi /= phi.norm();
    // deterministic gauge
    int imax = 0;
    for (int i = 1; i < phi.size(); ++i)
        if (std::abs(phi[i]) > std::abs(phi[imax])) imax = i;
    phi *= std::polar(1.0, -std::arg(phi[imax]));
    k.phi = phi;

    SparseOperator t = translation_matrix(sector);
    DVec cur = phi;
    for (int j = 0; j < f.q; ++j) {
        k.translates.push_back(cur);
        cur = t.mat * cur;
    }
    k.periodicity_residual = (cur - phi).norm();

    // translates must stay in the kernel
    for (const DVec& v : k.translates) {
        DVec proj = kern * (kern.adjoint() * v);
        k.span_residual = std::max(k.span_residual, (v - proj).norm());
    }
    // V-eigenvalue formula for the translates
    for (int j = 0; j < f.q; ++j) {
        cplx expect = std::polar(1.0, 2.0 * M_PI * (static_cast<double>(k.d_phi) / L +
                                                    static_cast<double>(j) * f.p / f.q));
        DVec vv = vdiag.asDiagonal() * k.translates[j];
        k.v_eigen_residuals.push_back((vv - expect * k.translates[j]).norm());
    }
    return k;
}

// q x q Gram blocks G(gamma) in the translate basis, with the structure
// checks G(gamma) = 1 -+ F(gamma), F(gamma) PSD, and (bosons, commensurate)
// tr F(gamma) = p.
inline GramReport gram_blocks(ModelContext& ctx, const FillingSpec& f) {
    const int L = ctx.spec().L;
    const int nq = f.n_q(L);
    const int q = f.q;
    KernelStructure k = kernel_structure(ctx, f);
    SectorPtr high = ctx.sector(nq + 1);

    // columns of z: a_x^dag T^{k-1} phi, index (k, x) k-major
    DMat z(static_cast<int>(high->dim()), q * L);
    for (int kk = 1; kk <= q; ++kk)
        for (int x = 1; x <= L; ++x) {
            const SparseOperator& ann = ctx.annihilator(nq + 1, x);
            z.col((kk - 1) * L + (x - 1)) = ann.mat.adjoint() * k.translates[kk - 1];
        }
    DMat gram = z.adjoint() * z;

    GramReport g;
    g.n = nq;
    g.gram = gram;
    Eigen::SelfAdjointEigenSolver<DMat> es(gram, Eigen::EigenvaluesOnly);
    g.norm_gram = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;

    // off-block entries: (k n_q + x) mod L must match
    auto block_of = [&](int kk, int x) {
        return ((static_cast<long long>(kk) * nq + x - 1) % L + L) % L;  // 0-based
    };
    for (int kk = 1; kk <= q; ++kk)
        for (int x = 1; x <= L; ++x)
            for (int kk2 = 1; kk2 <= q; ++kk2)
                for (int x2 = 1; x2 <= L; ++x2)
                    if (block_of(kk, x) != block_of(kk2, x2))
                        g.max_offblock = std::max(
                            g.max_offblock,
                            std::abs(gram((kk - 1) * L + x - 1, (kk2 - 1) * L + x2 - 1)));

    const bool fermion = ctx.spec().statistics == Statistics::fermion;
    for (int gamma = 1; gamma <= L; ++gamma) {
        GramBlockData b;
        b.gamma = gamma;
        b.G = DMat(q, q);
        for (int kk = 1; kk <= q; ++kk)
            for (int kk2 = 1; kk2 <= q; ++kk2) {
                const int x = site_mod(gamma - static_cast<long long>(nq) * kk, L);
                const int x2 = site_mod(gamma - static_cast<long long>(nq) * kk2, L);
                b.G(kk - 1, kk2 - 1) = gram((kk - 1) * L + x - 1, (kk2 - 1) * L + x2 - 1);
            }
        b.F = fermion ? DMat(DMat::Identity(q, q) - b.G)
                      : DMat(b.G - DMat::Identity(q, q));
        Eigen::SelfAdjointEigenSolver<DMat> fes(0.5 * (b.F + b.F.adjoint()),
                                                Eigen::EigenvaluesOnly);
        b.min_eig_F = fes.eigenvalues().minCoeff();
        b.trace_F = std::real(b.F.trace());
        g.blocks.push_back(std::move(b));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Weerasinghe comparison and iterated gap sum
// ---------------------------------------------------------------------------

// Delta = 1/4 sum_s sum_{k: s-k integer} |F(k)|^2
inline double weerasinghe_delta(const PseudopotentialSpec& pp) {
    double delta = 0.0;
    for (int two_s = 1; two_s <= 2 * pp.L; ++two_s)
        for (const auto& [two_k, Fk] : pp.F)
            if ((two_s - two_k) % 2 == 0) delta += std::norm(Fk);
    return delta / 4.0;
}

// Gap_{n_q+1} <= 4p/(q-p) Delta (fermions) or 4p/(q+p) Delta (bosons).
inline RelationReport weerasinghe_bound(ModelContext& ctx, const FillingSpec& f) {
    if (!ctx.spec().pseudopotential)
        throw hypothesis_violated("weerasinghe bound needs a pseudopotential spec");
    const PseudopotentialSpec& pp = *ctx.spec().pseudopotential;
    const int L = ctx.spec().L;
    const int nq = f.n_q(L);
    const double delta = weerasinghe_delta(pp);
    const double coeff = (ctx.spec().statistics == Statistics::fermion)
                             ? 4.0 * f.p / (f.q - f.p)
                             : 4.0 * f.p / (f.q + f.p);
    const SpectralSummary& s1 = ctx.summary(nq + 1);
    const SpectralSummary& s0 = ctx.summary(nq);
    const double gap1 = s1.E1 ? (*s1.E1 - s1.E0) : 0.0;
    const double gap0 = s0.E1 ? (*s0.E1 - s0.E0) : 0.0;
    const double scale = ctx.scale(nq + 1);
    // pass iff Gap_{n_q+1} <= coeff * Delta, i.e. slack = bound - gap >= 0
    RelationReport r = make_report(ctx, "weerasinghe", nq + 1, coeff * delta, gap1, scale);
    r.detail = "Delta=" + std::to_string(delta) + " gap_nq=" + std::to_string(gap0);
    return r;
}

struct IteratedGapSum {
    double sum = 0.0;
    std::vector<std::pair<int, double>> per_k;  // (k, (||F^(k)|| - m0)/(k+1))
    std::vector<double> norms_F;
};

// sum_{k=m_1}^{n_max} (||F^(k)|| - m0)/(k+1)
inline IteratedGapSum iterated_gap_sum(ModelContext& ctx, int n_max) {
    IteratedGapSum out;
    const int m0 = ctx.m0();
    for (int k = ctx.m1(); k <= n_max; ++k) {
        auto [norm_G, norm_F] = overlap_norms(ctx, k);
        (void)norm_G;
        const double term = (norm_F - m0) / (k + 1.0);
        out.per_k.emplace_back(k, term);
        out.norms_F.push_back(norm_F);
        out.sum += term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// FQHS structure checks (zero-energy lemma, incompressibility)
// ---------------------------------------------------------------------------

inline RelationReport verify_zero_energy(ModelContext& ctx, const FillingSpec& f, int n) {
    const SpectralSummary& s = ctx.summary(n);
    const double scale = ctx.scale(n);
    RelationReport r = make_report(ctx, "zero_energy", n, 0.0, std::abs(s.E0), scale);
    r.pass = std::abs(s.E0) <= ctx.opts().kernel_rel_tol * std::max(scale, 1.0);
    r.slack = -std::abs(s.E0);
    r.detail = "n_q=" + std::to_string(f.n_q(ctx.spec().L));
    return r;
}

inline RelationReport verify_incompressibility(ModelContext& ctx, const FillingSpec& f,
                                               int n) {
    const SpectralSummary& s = ctx.summary(n);
    const double scale = ctx.scale(n);
    const int L = ctx.spec().L;
    const bool size_ok = (ctx.spec().statistics == Statistics::fermion)
                             ? (L * f.p >= f.q * f.q)
                             : (L * f.p >= (1 + f.p) * f.q * f.q);
    RelationReport r = make_report(ctx, "incompressibility", n,
                                   static_cast<double>(s.kernel_dim == 0 ? 1 : 0), 1.0,
                                   scale, size_ok ? "" : "outside-hypotheses");
    r.pass = (s.kernel_dim == 0);
    r.slack = s.E0;
    r.detail = "kernel_dim=" + std::to_string(s.kernel_dim);
    return r;
}

}  // namespace edring

#endif
