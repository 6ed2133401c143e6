#include <catch2/catch_amalgamated.hpp>

#include "edring/spectra.hpp"
#include "test_support.hpp"

using namespace edring;

namespace {

HamiltonianSpec boson_half(int L) {
    HamiltonianSpec spec;
    spec.L = L;
    spec.statistics = Statistics::boson;
    PseudopotentialSpec pp;
    pp.L = L;
    pp.statistics = Statistics::boson;
    pp.F[0] = 1.0;
    pp.F[1] = 1.0;
    spec.pseudopotential = pp;
    return spec;
}

}  // namespace

TEST_CASE("number operator spectrum: one exactly degenerate level") {
    HamiltonianSpec spec;
    spec.L = 5;
    spec.statistics = Statistics::boson;
    spec.mu = 1.0;  // H = N
    for (int n = 0; n <= 3; ++n) {
        SpectralSummary s = spectral_summary(spec, n);
        CHECK(s.E0 == Catch::Approx(static_cast<double>(n)));
        CHECK_FALSE(s.E1.has_value());
        CHECK(s.q_n == static_cast<int>(enumerate_sector(5, n, Statistics::boson)->dim()));
        CHECK(s.kernel_dim == (n == 0 ? s.q_n : 0));
    }
}

TEST_CASE("zero hamiltonian: full kernel") {
    HamiltonianSpec spec;
    spec.L = 5;
    spec.statistics = Statistics::fermion;
    MBodyTerm t;
    t.m = 1;
    t.entries.push_back({{1}, {1}, cplx(0.0, 0.0)});
    spec.terms.push_back(t);
    SpectralSummary s = spectral_summary(spec, 2);
    CHECK(s.E0 == 0.0);
    CHECK(s.kernel_dim == 10);
    CHECK(s.q_n == 10);
    CHECK_FALSE(s.E1.has_value());
}

TEST_CASE("dense solver matches the naive full diagonalization") {
    std::mt19937_64 rng(21);
    for (Statistics st : {Statistics::fermion, Statistics::boson})
        for (int rep = 0; rep < 5; ++rep) {
            HamiltonianSpec spec = testgen::random_psd_spec(rng, 5, st, 1, 2);
            for (int n = 1; n <= 3; ++n) {
                SpectralSummary s = spectral_summary(spec, n);
                DMat ref = naive::hamiltonian(spec, n);
                auto rs = naive::diagonalize(
                    ref, SolverOpts{}.degeneracy_tol(s.scale),
                    SolverOpts{}.kernel_rel_tol * std::max(1.0, s.scale));
                INFO(to_string(st) << " rep=" << rep << " n=" << n);
                CHECK(s.E0 == Catch::Approx(rs.E0).margin(1e-9 * std::max(1.0, s.scale)));
                if (s.E1 && rs.E1)
                    CHECK(*s.E1 ==
                          Catch::Approx(*rs.E1).margin(1e-9 * std::max(1.0, s.scale)));
                CHECK(s.E1.has_value() == rs.E1.has_value());
                CHECK(s.kernel_dim == rs.kernel_dim);
            }
        }
}

TEST_CASE("blocked and unblocked paths agree") {
    HamiltonianSpec spec = boson_half(8);
    SolverOpts blocked;
    SolverOpts flat;
    flat.use_blocking = false;
    for (int n = 2; n <= 5; ++n) {
        SpectralSummary a = spectral_summary(spec, n, blocked);
        SpectralSummary b = spectral_summary(spec, n, flat);
        INFO("n=" << n);
        CHECK(a.E0 == Catch::Approx(b.E0).margin(1e-9));
        REQUIRE(a.E1.has_value() == b.E1.has_value());
        if (a.E1) CHECK(*a.E1 == Catch::Approx(*b.E1).margin(1e-9));
        CHECK(a.q_n == b.q_n);
        CHECK(a.kernel_dim == b.kernel_dim);
    }
}

TEST_CASE("forced lanczos path agrees with the dense path") {
    HamiltonianSpec spec = boson_half(8);
    SolverOpts dense;
    SolverOpts sparse;
    sparse.dense_crossover = 1;  // force the iterative path everywhere
    sparse.use_blocking = false;
    for (int n : {4, 5}) {
        SpectralSummary a = spectral_summary(spec, n, dense);
        SpectralSummary b = spectral_summary(spec, n, sparse);
        INFO("n=" << n);
        CHECK(b.method == "lanczos");
        CHECK(a.E0 == Catch::Approx(b.E0).margin(1e-7));
        REQUIRE(a.E1.has_value());
        REQUIRE(b.E1.has_value());
        CHECK(*a.E1 == Catch::Approx(*b.E1).margin(1e-7));
        CHECK(a.q_n == b.q_n);
        CHECK(a.kernel_dim == b.kernel_dim);
    }
}

TEST_CASE("ground basis columns are orthonormal eigenvectors") {
    HamiltonianSpec spec = boson_half(8);
    SpectralSummary s = spectral_summary(spec, 4);
    auto sector = enumerate_sector(8, 4, Statistics::boson);
    SparseOperator h = assemble_hamiltonian(spec, sector);
    const int q = static_cast<int>(s.ground_basis.cols());
    REQUIRE(q == s.q_n);
    DMat overlap = s.ground_basis.adjoint() * s.ground_basis;
    CHECK((overlap - DMat::Identity(q, q)).cwiseAbs().maxCoeff() <= 1e-10);
    for (int c = 0; c < q; ++c) {
        DVec r = h.mat * s.ground_basis.col(c) - s.E0 * s.ground_basis.col(c);
        CHECK(r.norm() <= 1e-8 * std::max(1.0, s.scale));
    }
}

TEST_CASE("starved iteration budget raises no_convergence") {
    HamiltonianSpec spec = boson_half(8);
    SolverOpts opts;
    opts.dense_crossover = 1;
    opts.use_blocking = false;
    opts.max_iterations = 1;
    opts.max_restarts = 0;
    CHECK_THROWS_AS(spectral_summary(spec, 4, opts), no_convergence);
}

TEST_CASE("gap report combines adjacent sectors") {
    HamiltonianSpec spec = boson_half(8);
    GapReport g = gap_report(spec, 4);
    REQUIRE(g.neutral_gap.has_value());
    CHECK(*g.neutral_gap == Catch::Approx(1.0).margin(1e-9));
    CHECK(g.delta_plus == Catch::Approx(2.0).margin(1e-9));
    CHECK(g.delta_minus == Catch::Approx(0.0).margin(1e-9));
    CHECK(g.charge_gap == Catch::Approx(2.0).margin(1e-9));
    CHECK_THROWS_AS(gap_report(spec, 0), std::invalid_argument);
}

TEST_CASE("min_eigenvalue agrees with dense bottom eigenvalue") {
    std::mt19937_64 rng(31);
    HamiltonianSpec spec = testgen::random_psd_spec(rng, 5, Statistics::boson, 1, 2);
    auto sector = enumerate_sector(5, 3, Statistics::boson);
    SparseOperator h = assemble_hamiltonian(spec, sector);
    Eigen::SelfAdjointEigenSolver<DMat> es(h.dense(), Eigen::EigenvaluesOnly);
    SolverOpts forced;
    forced.dense_crossover = 1;
    CHECK(min_eigenvalue(h, forced) ==
          Catch::Approx(es.eigenvalues().minCoeff()).margin(1e-7 * std::max(1.0, h.scale())));
}
