#include <catch2/catch_amalgamated.hpp>

#include "edring/spectra.hpp"
#include "edring/symmetry.hpp"
#include "test_support.hpp"

using namespace edring;

TEST_CASE("translation is unitary and has the right period") {
    for (Statistics st : {Statistics::fermion, Statistics::boson})
        for (int n = 1; n <= 4; ++n) {
            auto s = enumerate_sector(6, n, st);
            DMat t = translation_matrix(s).dense();
            const int d = static_cast<int>(s->dim());
            CHECK((t.adjoint() * t - DMat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-14);
            // T^L = (-1)^{(n-1) n} = identity: each particle crosses the seam
            // once with sign (-1)^{n-1}, and (n-1) n is always even
            DMat tl = DMat::Identity(d, d);
            for (int k = 0; k < 6; ++k) tl = t * tl;
            CHECK((tl - DMat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-13);
        }
}

TEST_CASE("translation conjugates annihilation operators by one site") {
    for (Statistics st : {Statistics::fermion, Statistics::boson}) {
        auto hi = enumerate_sector(5, 3, st);
        auto lo = enumerate_sector(5, 2, st);
        DMat t_hi = translation_matrix(hi).dense();
        DMat t_lo = translation_matrix(lo).dense();
        for (int x = 1; x <= 5; ++x) {
            DMat lhs = t_lo.adjoint() *
                       annihilation_matrix(x, hi, lo).dense() * t_hi;
            DMat rhs = annihilation_matrix(site_mod(x - 1, 5), hi, lo).dense();
            INFO(to_string(st) << " x=" << x);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13);
        }
    }
}

TEST_CASE("weyl algebra residuals vanish on all small sectors") {
    for (Statistics st : {Statistics::fermion, Statistics::boson})
        for (int n = 0; n <= 4; ++n) {
            auto res = verify_symmetry_algebra(6, n, st);
            CHECK(res[0] <= 1e-12);
            CHECK(res[1] <= 1e-12);
            CHECK(res[2] <= 1e-12);
        }
}

TEST_CASE("U and V are diagonal unitaries with the defining phases") {
    auto s = enumerate_sector(5, 3, Statistics::boson);
    auto [u, v] = uv_matrices(s);
    for (std::size_t i = 0; i < s->dim(); ++i) {
        cplx uphase = u.dense()(i, i);
        cplx vphase = v.dense()(i, i);
        CHECK(std::abs(uphase - std::polar(1.0, 2 * M_PI * 3 / 5.0)) <= 1e-14);
        CHECK(std::abs(vphase - std::polar(1.0, 2 * M_PI * dipole_of(s->state(i)) / 5.0)) <=
              1e-14);
    }
}

TEST_CASE("block decomposition reproduces the full spectrum") {
    HamiltonianSpec spec;
    spec.L = 6;
    spec.statistics = Statistics::boson;
    PseudopotentialSpec pp;
    pp.L = 6;
    pp.statistics = Statistics::boson;
    pp.F[0] = 1.0;
    pp.F[1] = 1.0;
    spec.pseudopotential = pp;
    auto s = enumerate_sector(6, 3, Statistics::boson);
    SparseOperator h = assemble_hamiltonian(spec, s);
    REQUIRE(commutes_with_dipole(h));

    Eigen::SelfAdjointEigenSolver<DMat> full(h.dense(), Eigen::EigenvaluesOnly);
    std::vector<double> merged;
    std::size_t total = 0;
    for (const auto& b : symmetry_block_decompose(h)) {
        total += b.op.rows();
        if (b.op.rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<DMat> es(b.op.dense(), Eigen::EigenvaluesOnly);
        for (int i = 0; i < es.eigenvalues().size(); ++i)
            merged.push_back(es.eigenvalues()[i]);
    }
    REQUIRE(total == s->dim());
    std::sort(merged.begin(), merged.end());
    for (std::size_t i = 0; i < merged.size(); ++i)
        CHECK(merged[i] == Catch::Approx(full.eigenvalues()[i]).margin(1e-10));
}

TEST_CASE("block decomposition rejects operators that break the symmetry") {
    HamiltonianSpec spec;
    spec.L = 5;
    spec.statistics = Statistics::boson;
    MBodyTerm t;
    t.m = 1;
    t.entries.push_back({{1}, {2}, cplx(1.0, 0.0)});  // hops change D mod L
    spec.terms.push_back(t);
    auto s = enumerate_sector(5, 2, Statistics::boson);
    SparseOperator h = assemble_hamiltonian(spec, s);
    CHECK_FALSE(commutes_with_dipole(h));
    CHECK_THROWS_AS(symmetry_block_decompose(h), not_symmetric);
}

TEST_CASE("translation commutes with translation-invariant hamiltonians") {
    HamiltonianSpec spec;
    spec.L = 6;
    spec.statistics = Statistics::fermion;
    PseudopotentialSpec pp;
    pp.L = 6;
    pp.statistics = Statistics::fermion;
    pp.F[1] = 1.0;
    pp.F[3] = 0.5;
    spec.pseudopotential = pp;
    for (int n = 2; n <= 4; ++n) {
        auto s = enumerate_sector(6, n, Statistics::fermion);
        DMat h = assemble_hamiltonian(spec, s).dense();
        DMat t = translation_matrix(s).dense();
        CHECK((h * t - t * h).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()));
    }
}
