#ifndef EDRING_SYMMETRY_HPP
#define EDRING_SYMMETRY_HPP

#include <array>
#include <stdexcept>
#include <vector>

#include "edring/operators.hpp"

namespace edring {

struct not_symmetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// U- and V-eigendata of a state with particle number n and dipole value d.
struct SymmetryEigendata {
    int n = 0;
    int d = 0;  // D-eigenvalue (integer, not reduced)
    cplx u_phase{1.0, 0.0};
    cplx v_phase{1.0, 0.0};
};

inline SymmetryEigendata symmetry_eigendata(int L, int n, int d) {
    SymmetryEigendata e;
    e.n = n;
    e.d = d;
    e.u_phase = std::polar(1.0, 2.0 * M_PI * n / L);
    e.v_phase = std::polar(1.0, 2.0 * M_PI * d / L);
    return e;
}

// Many-body translation T with T^dag a_x T = a_{(x-1) mod L}: the occupied
// multiset S maps to S+1 (mod L, representatives in [1:L]). Bosons get
// coefficient 1; fermions the re-normal-ordering sign, which for a cyclic
// shift is (-1)^{n-1} when site L is occupied and +1 otherwise.
inline SparseOperator translation_matrix(SectorPtr sector) {
    const int L = sector->L();
    const int n = sector->n();
    std::vector<Eigen::Triplet<cplx>> trips;
    for (std::size_t j = 0; j < sector->dim(); ++j) {
        const FockState& s = sector->state(j);
        FockState t{std::vector<int>(L, 0)};
        for (int x = 1; x <= L; ++x) t.occ[x % L] = s.occ[x - 1];
        double sign = 1.0;
        if (sector->statistics() == Statistics::fermion && s.occ[L - 1] == 1 &&
            (n - 1) % 2 == 1)
            sign = -1.0;
        auto i = sector->index_of(t);
        if (!i) continue;  // dipole-restricted sector: T maps out of the class
        trips.emplace_back(static_cast<int>(*i), static_cast<int>(j), sign);
    }
    SpMat m(static_cast<int>(sector->dim()), static_cast<int>(sector->dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(sector, sector, std::move(m));
}

// U = exp(2 pi i N / L), V = exp(2 pi i D / L); both diagonal in the
// occupation basis.
inline std::pair<SparseOperator, SparseOperator> uv_matrices(SectorPtr sector) {
    const int L = sector->L();
    const int d = static_cast<int>(sector->dim());
    const cplx u_phase = std::polar(1.0, 2.0 * M_PI * sector->n() / L);
    SpMat u(d, d), v(d, d);
    std::vector<Eigen::Triplet<cplx>> ut, vt;
    for (int j = 0; j < d; ++j) {
        ut.emplace_back(j, j, u_phase);
        vt.emplace_back(j, j, std::polar(1.0, 2.0 * M_PI * dipole_of(sector->state(j)) / L));
    }
    u.setFromTriplets(ut.begin(), ut.end());
    v.setFromTriplets(vt.begin(), vt.end());
    return {SparseOperator(sector, sector, std::move(u)),
            SparseOperator(sector, sector, std::move(v))};
}

// Max-entry residuals of VT - UTV, UT - TU, UV - VU on the sector.
inline std::array<double, 3> verify_symmetry_algebra(int L, int n, Statistics stats) {
    SectorPtr sector = enumerate_sector(L, n, stats);
    SparseOperator t = translation_matrix(sector);
    auto [u, v] = uv_matrices(sector);
    auto comm = [](const SpMat& a, const SpMat& b) { return SpMat(a * b); };
    double r1 = max_abs_entry(SpMat(comm(v.mat, t.mat) - SpMat(u.mat * comm(t.mat, v.mat))));
    double r2 = max_abs_entry(SpMat(comm(u.mat, t.mat) - comm(t.mat, u.mat)));
    double r3 = max_abs_entry(SpMat(comm(u.mat, v.mat) - comm(v.mat, u.mat)));
    return {r1, r2, r3};
}

// Indices of the full-sector basis grouped by dipole class D mod L,
// preserving the basis order within each class.
inline std::vector<std::vector<int>> dipole_class_indices(const SectorBasis& sector) {
    std::vector<std::vector<int>> cls(sector.L());
    for (std::size_t i = 0; i < sector.dim(); ++i)
        cls[dipole_of(sector.state(i)) % sector.L()].push_back(static_cast<int>(i));
    return cls;
}

struct DipoleBlock {
    int dipole_class;
    std::vector<int> full_indices;  // block row/col -> full-sector index
    SparseOperator op;
};

// Diagonal blocks of H in the dipole-class-ordered basis. Requires
// [H, V] = 0 up to tolerance; V is diagonal so the commutator check reduces
// to H having no entries between different classes.
inline std::vector<DipoleBlock> symmetry_block_decompose(const SparseOperator& h,
                                                         double rel_tol = 1e-12) {
    const SectorBasis& sector = *h.domain;
    if (h.domain != h.codomain)
        throw std::invalid_argument("block decomposition needs a square sector operator");
    const int L = sector.L();
    std::vector<int> class_of(sector.dim());
    for (std::size_t i = 0; i < sector.dim(); ++i)
        class_of[i] = dipole_of(sector.state(i)) % L;

    const double tol = rel_tol * std::max(h.scale(), 1.0);
    for (int k = 0; k < h.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(h.mat, k); it; ++it)
            if (class_of[it.row()] != class_of[it.col()] &&
                std::abs(it.value()) > tol)
                throw not_symmetric("operator does not commute with V");

    auto cls = dipole_class_indices(sector);
    std::vector<DipoleBlock> blocks;
    for (int c = 0; c < L; ++c) {
        std::vector<int> pos(sector.dim(), -1);
        for (std::size_t r = 0; r < cls[c].size(); ++r) pos[cls[c][r]] = static_cast<int>(r);
        std::vector<Eigen::Triplet<cplx>> trips;
        for (int col : cls[c])
            for (SpMat::InnerIterator it(h.mat, col); it; ++it)
                if (class_of[it.row()] == c)
                    trips.emplace_back(pos[it.row()], pos[col], it.value());
        SectorPtr block_basis = enumerate_sector(L, sector.n(), sector.statistics(), c);
        SpMat m(static_cast<int>(cls[c].size()), static_cast<int>(cls[c].size()));
        m.setFromTriplets(trips.begin(), trips.end());
        blocks.push_back(DipoleBlock{c, cls[c],
                                     SparseOperator(block_basis, block_basis, std::move(m))});
    }
    return blocks;
}

inline bool commutes_with_dipole(const SparseOperator& h, double rel_tol = 1e-12) {
    const SectorBasis& sector = *h.domain;
    const int L = sector.L();
    std::vector<int> class_of(sector.dim());
    for (std::size_t i = 0; i < sector.dim(); ++i)
        class_of[i] = dipole_of(sector.state(i)) % L;
    const double tol = rel_tol * std::max(h.scale(), 1.0);
    for (int k = 0; k < h.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(h.mat, k); it; ++it)
            if (class_of[it.row()] != class_of[it.col()] &&
                std::abs(it.value()) > tol)
                return false;
    return true;
}

}  // namespace edring

#endif
