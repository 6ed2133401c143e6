#ifndef EDRING_OPERATORS_HPP
#define EDRING_OPERATORS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "edring/basis.hpp"

namespace edring {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using DMat = Eigen::MatrixXcd;
using DVec = Eigen::VectorXcd;

struct dimension_mismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct non_hermitian_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Sector-to-sector sparse linear map. Entries are stored compressed
// column-major, so the coordinate list is deterministically ordered.
struct SparseOperator {
    SectorPtr domain;
    SectorPtr codomain;
    SpMat mat;  // codomain->dim() x domain->dim()

    SparseOperator() = default;
    SparseOperator(SectorPtr dom, SectorPtr codom, SpMat m)
        : domain(std::move(dom)), codomain(std::move(codom)), mat(std::move(m)) {
        mat.makeCompressed();
    }

    std::size_t rows() const { return codomain->dim(); }
    std::size_t cols() const { return domain->dim(); }

    DVec apply(const DVec& v) const { return mat * v; }
    DMat dense() const { return DMat(mat); }

    SparseOperator adjoint() const {
        return SparseOperator(codomain, domain, SpMat(mat.adjoint()));
    }

    // max absolute entry; the operator "scale" used by all residual tolerances
    double scale() const {
        double s = 0.0;
        for (int k = 0; k < mat.outerSize(); ++k)
            for (SpMat::InnerIterator it(mat, k); it; ++it)
                s = std::max(s, std::abs(it.value()));
        return s;
    }

    double hermiticity_residual() const {
        SpMat d = SpMat(mat - SpMat(mat.adjoint()));
        double r = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (SpMat::InnerIterator it(d, k); it; ++it)
                r = std::max(r, std::abs(it.value()));
        return r;
    }
};

inline SparseOperator zero_operator(SectorPtr dom, SectorPtr codom) {
    SpMat m(static_cast<int>(codom->dim()), static_cast<int>(dom->dim()));
    return SparseOperator(std::move(dom), std::move(codom), std::move(m));
}

inline SparseOperator identity_operator(SectorPtr sector) {
    SpMat m(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
    m.setIdentity();
    return SparseOperator(sector, sector, std::move(m));
}

inline double max_abs_entry(const SpMat& m) {
    double s = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            s = std::max(s, std::abs(it.value()));
    return s;
}

// ---------------------------------------------------------------------------
// Elementary creation/annihilation action on occupation states.
//
// Fermion basis convention: the state with occupied set {x_1 < ... < x_n} is
// a_{x_1}^dag ... a_{x_n}^dag |vac>, so a_x / a_x^dag pick up the sign
// (-1)^{#occupied sites with label < x}.
// ---------------------------------------------------------------------------

struct AppliedOp {
    double coeff;
    FockState state;
};

inline int fermi_sign_below(const FockState& s, int x) {
    int c = 0;
    for (int y = 1; y < x; ++y) c += s.occ[y - 1];
    return (c % 2 == 0) ? 1 : -1;
}

inline std::optional<AppliedOp> apply_annihilation(int x, const FockState& s,
                                                   Statistics stats) {
    const int nx = s.occ[x - 1];
    if (nx == 0) return std::nullopt;
    AppliedOp out{1.0, s};
    out.state.occ[x - 1] = nx - 1;
    if (stats == Statistics::fermion)
        out.coeff = fermi_sign_below(s, x);
    else
        out.coeff = std::sqrt(static_cast<double>(nx));
    return out;
}

inline std::optional<AppliedOp> apply_creation(int x, const FockState& s,
                                               Statistics stats) {
    const int nx = s.occ[x - 1];
    if (stats == Statistics::fermion && nx == 1) return std::nullopt;
    AppliedOp out{1.0, s};
    out.state.occ[x - 1] = nx + 1;
    if (stats == Statistics::fermion)
        out.coeff = fermi_sign_below(s, x);
    else
        out.coeff = std::sqrt(static_cast<double>(nx + 1));
    return out;
}

// a_x as a sparse map from sector n to sector n-1 (same L, statistics).
inline SparseOperator annihilation_matrix(int x, SectorPtr from, SectorPtr to) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (std::size_t j = 0; j < from->dim(); ++j) {
        auto r = apply_annihilation(x, from->state(j), from->statistics());
        if (!r) continue;
        auto i = to->index_of(r->state);
        if (!i) continue;  // outside codomain (e.g. dipole-restricted)
        trips.emplace_back(static_cast<int>(*i), static_cast<int>(j), r->coeff);
    }
    SpMat m(static_cast<int>(to->dim()), static_cast<int>(from->dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(from, to, std::move(m));
}

inline SparseOperator creation_matrix(int x, SectorPtr from, SectorPtr to) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (std::size_t j = 0; j < from->dim(); ++j) {
        auto r = apply_creation(x, from->state(j), from->statistics());
        if (!r) continue;
        auto i = to->index_of(r->state);
        if (!i) continue;
        trips.emplace_back(static_cast<int>(*i), static_cast<int>(j), r->coeff);
    }
    SpMat m(static_cast<int>(to->dim()), static_cast<int>(from->dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(from, to, std::move(m));
}

// ---------------------------------------------------------------------------
// m-body terms and Hamiltonian specs
// ---------------------------------------------------------------------------

// One coefficient W of a^dag_{x_1}..a^dag_{x_m} a_{y_m}..a_{y_1}
struct MBodyEntry {
    std::vector<int> x;  // creation sites x_1..x_m
    std::vector<int> y;  // annihilation sites y_1..y_m
    cplx w;
};

struct MBodyTerm {
    int m = 0;
    std::vector<MBodyEntry> entries;
};

// Truncated/torus pseudopotential data. F is keyed by the integer 2k.
struct PseudopotentialSpec {
    int L = 0;
    Statistics statistics = Statistics::boson;
    std::map<int, cplx> F;  // 2k -> F(k), 0 <= 2k <= 2L

    void validate() const {
        for (const auto& [two_k, v] : F) {
            (void)v;
            if (two_k < 0 || two_k > 2 * L)
                throw std::invalid_argument("pseudopotential key 2k outside [0, 2L]");
        }
    }
};

struct HamiltonianSpec {
    int L = 0;
    Statistics statistics = Statistics::fermion;
    std::vector<MBodyTerm> terms;
    std::optional<PseudopotentialSpec> pseudopotential;
    double mu = 0.0;         // adds mu * N
    bool symmetrize = true;  // hermitize W input; strict mode rejects instead

    // min/max m across all parts, mu counting as a 1-body part
    int m0() const {
        int m = std::numeric_limits<int>::max();
        for (const auto& t : terms) m = std::min(m, t.m);
        if (pseudopotential) m = std::min(m, 2);
        if (mu != 0.0) m = std::min(m, 1);
        return m == std::numeric_limits<int>::max() ? 0 : m;
    }
    int m1() const {
        int m = 0;
        for (const auto& t : terms) m = std::max(m, t.m);
        if (pseudopotential) m = std::max(m, 2);
        if (mu != 0.0) m = std::max(m, 1);
        return m;
    }
};

// Raw (unsymmetrized) matrix of one m-body term on a sector.
inline SparseOperator assemble_term_raw(const MBodyTerm& term, SectorPtr sector) {
    const Statistics st = sector->statistics();
    std::vector<Eigen::Triplet<cplx>> trips;
    for (std::size_t j = 0; j < sector->dim(); ++j) {
        for (const auto& e : term.entries) {
            if (static_cast<int>(e.x.size()) != term.m ||
                static_cast<int>(e.y.size()) != term.m)
                throw std::invalid_argument("m-body entry arity mismatch");
            // apply a_{y_1}, ..., a_{y_m}, then a^dag_{x_m}, ..., a^dag_{x_1}
            cplx amp = e.w;
            FockState s = sector->state(j);
            bool dead = false;
            for (int k = 0; k < term.m && !dead; ++k) {
                auto r = apply_annihilation(e.y[k], s, st);
                if (!r) { dead = true; break; }
                amp *= r->coeff;
                s = std::move(r->state);
            }
            for (int k = term.m - 1; k >= 0 && !dead; --k) {
                auto r = apply_creation(e.x[k], s, st);
                if (!r) { dead = true; break; }
                amp *= r->coeff;
                s = std::move(r->state);
            }
            if (dead || amp == cplx(0.0)) continue;
            auto i = sector->index_of(s);
            if (!i) continue;
            trips.emplace_back(static_cast<int>(*i), static_cast<int>(j), amp);
        }
    }
    SpMat m(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(sector, sector, std::move(m));
}

inline SparseOperator hermitize(const SparseOperator& a, bool symmetrize,
                                double rel_tol = 1e-12) {
    if (symmetrize) {
        SpMat h = SpMat(cplx(0.5) * (a.mat + SpMat(a.mat.adjoint())));
        return SparseOperator(a.domain, a.codomain, std::move(h));
    }
    const double scale = a.scale();
    if (a.hermiticity_residual() > rel_tol * std::max(scale, 1.0))
        throw non_hermitian_input("assembled operator is not hermitian");
    return a;
}

// Matrix of sum of spec.terms (plus mu*N) on the sector.
inline SparseOperator assemble_mbody(const HamiltonianSpec& spec, SectorPtr sector) {
    if (spec.L != sector->L())
        throw dimension_mismatch("spec.L != sector.L");
    if (spec.statistics != sector->statistics())
        throw dimension_mismatch("statistics mismatch");
    SpMat acc(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
    for (const auto& t : spec.terms)
        acc = SpMat(acc + assemble_term_raw(t, sector).mat);
    SparseOperator raw(sector, sector, std::move(acc));
    SparseOperator h = hermitize(raw, spec.symmetrize);
    if (spec.mu != 0.0) {
        SpMat id(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
        id.setIdentity();
        h.mat = SpMat(h.mat + SpMat(cplx(spec.mu * sector->n()) * id));
    }
    return h;
}

// Pair annihilator Q_s = sum_{0<=k<=L, s-k integer} F(k) a_{(s-k) mod L} a_{(s+k) mod L}
// as a map from sector n to sector n-2. s is passed as the integer 2s.
inline SparseOperator pair_annihilator(const PseudopotentialSpec& pp, int two_s,
                                       SectorPtr from, SectorPtr to) {
    const Statistics st = from->statistics();
    const int L = pp.L;
    std::vector<Eigen::Triplet<cplx>> trips;
    for (std::size_t j = 0; j < from->dim(); ++j) {
        for (const auto& [two_k, Fk] : pp.F) {
            if ((two_s - two_k) % 2 != 0) continue;  // s - k must be integral
            if (Fk == cplx(0.0)) continue;
            const int u = site_mod((two_s - two_k) / 2, L);
            const int v = site_mod((two_s + two_k) / 2, L);
            // operator a_u a_v: v acts first
            auto r1 = apply_annihilation(v, from->state(j), st);
            if (!r1) continue;
            auto r2 = apply_annihilation(u, r1->state, st);
            if (!r2) continue;
            auto i = to->index_of(r2->state);
            if (!i) continue;
            trips.emplace_back(static_cast<int>(*i), static_cast<int>(j),
                               Fk * r1->coeff * r2->coeff);
        }
    }
    SpMat m(static_cast<int>(to->dim()), static_cast<int>(from->dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(from, to, std::move(m));
}

// H = sum_{s in (1/2)[1,2L]} Q_s^dag Q_s restricted to the sector.
inline SparseOperator assemble_pseudopotential(const PseudopotentialSpec& pp,
                                               SectorPtr sector) {
    if (pp.L != sector->L())
        throw dimension_mismatch("pseudopotential L != sector.L");
    pp.validate();
    const int n = sector->n();
    const int d = static_cast<int>(sector->dim());
    if (n < 2) {
        SpMat z(d, d);
        return SparseOperator(sector, sector, std::move(z));
    }
    SectorPtr lower = enumerate_sector(sector->L(), n - 2, sector->statistics());
    SpMat acc(d, d);
    for (int two_s = 1; two_s <= 2 * pp.L; ++two_s) {
        SparseOperator q = pair_annihilator(pp, two_s, sector, lower);
        acc = SpMat(acc + SpMat(SpMat(q.mat.adjoint()) * q.mat));
    }
    return SparseOperator(sector, sector, std::move(acc));
}

// Full Hamiltonian (terms + mu*N + pseudopotential) on a sector.
inline SparseOperator assemble_hamiltonian(const HamiltonianSpec& spec,
                                           SectorPtr sector) {
    SparseOperator h = assemble_mbody(spec, sector);
    if (spec.pseudopotential) {
        PseudopotentialSpec pp = *spec.pseudopotential;
        if (pp.L != spec.L)
            throw dimension_mismatch("pseudopotential L != spec.L");
        SparseOperator q = assemble_pseudopotential(pp, sector);
        h.mat = SpMat(h.mat + q.mat);
    }
    return h;
}

// The m-body part H^(m) of the spec on a sector (hypothesis checks need the
// decomposition, not just the sum).
inline SparseOperator assemble_part(const HamiltonianSpec& spec, int m,
                                    SectorPtr sector) {
    SpMat acc(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
    for (const auto& t : spec.terms)
        if (t.m == m) acc = SpMat(acc + assemble_term_raw(t, sector).mat);
    SparseOperator part = hermitize(SparseOperator(sector, sector, std::move(acc)),
                                    spec.symmetrize);
    if (m == 1 && spec.mu != 0.0) {
        SpMat id(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
        id.setIdentity();
        part.mat = SpMat(part.mat + SpMat(cplx(spec.mu * sector->n()) * id));
    }
    if (m == 2 && spec.pseudopotential) {
        SparseOperator q = assemble_pseudopotential(*spec.pseudopotential, sector);
        part.mat = SpMat(part.mat + q.mat);
    }
    return part;
}

// ---------------------------------------------------------------------------
// Exact operator identities
// ---------------------------------------------------------------------------

// Max-entry residual of N A = m A + sum_xi a_xi^dag A a_xi on the sector.
inline double verify_number_commute(const MBodyTerm& term, SectorPtr sector) {
    const int n = sector->n();
    const int L = sector->L();
    SparseOperator a = assemble_term_raw(term, sector);
    SpMat lhs = SpMat(cplx(static_cast<double>(n)) * a.mat);
    SpMat rhs = SpMat(cplx(static_cast<double>(term.m)) * a.mat);
    if (n >= 1) {
        SectorPtr lower = enumerate_sector(L, n - 1, sector->statistics());
        SparseOperator a_low = assemble_term_raw(term, lower);
        for (int x = 1; x <= L; ++x) {
            SparseOperator ann = annihilation_matrix(x, sector, lower);
            rhs = SpMat(rhs + SpMat(SpMat(ann.mat.adjoint()) *
                                    SpMat(a_low.mat * ann.mat)));
        }
    }
    return max_abs_entry(SpMat(lhs - rhs));
}

// Max-entry residual of H^(m)_{n+1} = 1/(n+1-m) sum_x a_x^dag H^(m)_n a_x.
inline double verify_lift_identity(const MBodyTerm& term, int L, int n,
                                   Statistics stats) {
    if (n < term.m)
        throw std::invalid_argument("lift identity requires n >= m");
    SectorPtr low = enumerate_sector(L, n, stats);
    SectorPtr high = enumerate_sector(L, n + 1, stats);
    SparseOperator a_low = assemble_term_raw(term, low);
    SparseOperator a_high = assemble_term_raw(term, high);
    SpMat rhs(static_cast<int>(high->dim()), static_cast<int>(high->dim()));
    for (int x = 1; x <= L; ++x) {
        SparseOperator ann = annihilation_matrix(x, high, low);
        rhs = SpMat(rhs + SpMat(SpMat(ann.mat.adjoint()) *
                                SpMat(a_low.mat * ann.mat)));
    }
    rhs = SpMat(cplx(1.0 / (n + 1 - term.m)) * rhs);
    return max_abs_entry(SpMat(a_high.mat - rhs));
}

// sum_x a_x^dag B a_x lifted to sector n+1, for any B on sector n.
inline SparseOperator lift_operator(const SparseOperator& b, SectorPtr high) {
    SectorPtr low = b.domain;
    const int L = low->L();
    SpMat acc(static_cast<int>(high->dim()), static_cast<int>(high->dim()));
    for (int x = 1; x <= L; ++x) {
        SparseOperator ann = annihilation_matrix(x, high, low);
        acc = SpMat(acc + SpMat(SpMat(ann.mat.adjoint()) * SpMat(b.mat * ann.mat)));
    }
    return SparseOperator(high, high, std::move(acc));
}

}  // namespace edring

#endif
