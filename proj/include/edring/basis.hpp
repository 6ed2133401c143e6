#ifndef EDRING_BASIS_HPP
#define EDRING_BASIS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace edring {

enum class Statistics { fermion, boson };

inline const char* to_string(Statistics s) {
    return s == Statistics::fermion ? "fermion" : "boson";
}

// Site labels run 1..L. site_mod maps any integer onto a representative in [1:L].
inline int site_mod(long long x, int L) {
    long long r = (x - 1) % L;
    if (r < 0) r += L;
    return static_cast<int>(r + 1);
}

// Occupation configuration of L sites; occ[x-1] is the occupation of site x.
struct FockState {
    std::vector<int> occ;

    int L() const { return static_cast<int>(occ.size()); }
    bool operator==(const FockState& o) const { return occ == o.occ; }
};

inline int number_of(const FockState& s) {
    int n = 0;
    for (int v : s.occ) n += v;
    return n;
}

// D = sum_x x * N_x, not reduced mod L.
inline int dipole_of(const FockState& s) {
    int d = 0;
    for (int x = 1; x <= s.L(); ++x) d += x * s.occ[x - 1];
    return d;
}

namespace detail {

// Packs an occupation vector into a 64-bit key for O(1) index lookup.
// bits_per_site must satisfy L * bits <= 64 and occ[x] < 2^bits.
inline int bits_per_site_for(int L, int n, Statistics stats) {
    int bits = 1;
    if (stats == Statistics::boson) {
        while ((1 << bits) <= n) ++bits;
    }
    if (L * bits > 64)
        throw std::invalid_argument("sector too large to key: L*bits_per_site > 64");
    return bits;
}

inline std::uint64_t pack_occ(const std::vector<int>& occ, int bits) {
    std::uint64_t key = 0;
    for (int v : occ) key = (key << bits) | static_cast<std::uint64_t>(v);
    return key;
}

}  // namespace detail

// All n-particle occupation configurations on L ring sites, ordered
// lexicographically descending on the occupation vector. Immutable after
// construction. dipole_class, when set, restricts to states with
// D mod L == dipole_class.
class SectorBasis {
  public:
    SectorBasis(int L, int n, Statistics stats,
                std::optional<int> dipole_class = std::nullopt)
        : L_(L), n_(n), stats_(stats), dipole_class_(dipole_class) {
        if (L < 1) throw std::invalid_argument("L must be >= 1");
        if (n < 0) throw std::invalid_argument("n must be >= 0");
        if (stats == Statistics::fermion && n > L)
            throw std::invalid_argument("fermion sector requires n <= L");
        if (dipole_class && (*dipole_class < 0 || *dipole_class >= L))
            throw std::invalid_argument("dipole_class out of [0, L-1]");
        bits_ = detail::bits_per_site_for(L, n, stats);
        std::vector<int> occ(L, 0);
        const int cap = (stats == Statistics::fermion) ? 1 : n;
        generate(occ, 0, n, cap);
        index_.reserve(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i)
            index_.emplace(detail::pack_occ(states_[i].occ, bits_), i);
    }

    int L() const { return L_; }
    int n() const { return n_; }
    Statistics statistics() const { return stats_; }
    std::optional<int> dipole_class() const { return dipole_class_; }
    std::size_t dim() const { return states_.size(); }
    const FockState& state(std::size_t i) const { return states_[i]; }
    const std::vector<FockState>& states() const { return states_; }

    std::optional<std::size_t> index_of(const FockState& s) const {
        auto it = index_.find(detail::pack_occ(s.occ, bits_));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

  private:
    void generate(std::vector<int>& occ, int site, int remaining, int cap) {
        if (site == L_) {
            if (remaining != 0) return;
            if (dipole_class_) {
                FockState s{occ};
                if (dipole_of(s) % L_ != *dipole_class_) return;
                states_.push_back(std::move(s));
            } else {
                states_.push_back(FockState{occ});
            }
            return;
        }
        // descending occupation first -> lexicographic descending order
        for (int v = std::min(remaining, cap); v >= 0; --v) {
            occ[site] = v;
            generate(occ, site + 1, remaining - v, cap);
        }
        occ[site] = 0;
    }

    int L_, n_;
    Statistics stats_;
    std::optional<int> dipole_class_;
    int bits_;
    std::vector<FockState> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

using SectorPtr = std::shared_ptr<const SectorBasis>;

inline SectorPtr enumerate_sector(int L, int n, Statistics stats,
                                  std::optional<int> dipole_class = std::nullopt) {
    return std::make_shared<const SectorBasis>(L, n, stats, dipole_class);
}

// Commensurate filling data: n_q = p L / q must be integral.
struct FillingSpec {
    int p = 1;
    int q = 2;

    int n_q(int L) const {
        long long num = static_cast<long long>(p) * L;
        if (num % q != 0)
            throw std::invalid_argument("filling p/q not commensurate with L");
        return static_cast<int>(num / q);
    }
    // L = ell q^2 when commensurate in the strong sense; 0 if not.
    int ell(int L) const { return (L % (q * q) == 0) ? L / (q * q) : 0; }
};

}  // namespace edring

#endif
