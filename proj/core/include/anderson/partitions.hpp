#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "anderson/errors.hpp"
#include "anderson/lattice.hpp"

namespace anderson {

using Rational = boost::multiprecision::cpp_rational;

// Υ_N = {1, …, N, N+2, …, 2N+1}
std::vector<int> upsilon(int N);

struct Partition {
    std::vector<std::vector<int>> blocks;  // each sorted; blocks ordered by smallest element
    std::vector<bool> tadpole;             // block == {i, i+1}

    bool tadpole_free() const;
    std::string str() const;
};

// All partitions of Υ_N into even blocks; guard N <= 6.
std::vector<Partition> enumerate_partitions(int N);

// Number of partitions of an n-set into even blocks (closed recurrence, for cross-checks).
std::uint64_t even_partition_count(int n);

template <class Scalar>
struct CumulantTable {
    std::vector<Scalar> c;  // c[l] = c_{2l}, c[0] unused (= 0)

    const Scalar& operator[](int l) const { return c.at(static_cast<std::size_t>(l)); }
    int l_max() const { return static_cast<int>(c.size()) - 1; }
};

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// m[l] = m_{2l} (m[0] = 1). With odd moments zero,
// m_n = Σ_{k even} C(n-1, k-1) c_k m_{n-k}, solved for c_n.
template <class Scalar>
CumulantTable<Scalar> cumulants_from_moments(const std::vector<Scalar>& m, int l_max) {
    if (static_cast<int>(m.size()) <= l_max) throw PreconditionError("cumulants_from_moments: too few moments");
    if (m[1] != Scalar(1)) throw PreconditionError("cumulants_from_moments: need m_2 = 1");
    CumulantTable<Scalar> t;
    t.c.assign(static_cast<std::size_t>(l_max) + 1, Scalar(0));
    for (int l = 1; l <= l_max; ++l) {
        const int n = 2 * l;
        Scalar acc = m[static_cast<std::size_t>(l)];
        for (int k = 2; k < n; k += 2) {
            Scalar b(static_cast<long long>(std::llround(binomial(n - 1, k - 1))));
            acc -= b * t.c[static_cast<std::size_t>(k / 2)] * m[static_cast<std::size_t>((n - k) / 2)];
        }
        t.c[static_cast<std::size_t>(l)] = acc;
    }
    return t;
}

// Smallest c with |c_{2l}| <= (c l)^{2l+1} for all tabulated l.
double cumulant_growth_constant(const CumulantTable<double>& t);

// E ∏_{i} ω_{x_i} for positions x_i: product over coincidence classes of m_{|class|}.
template <class Scalar>
Scalar joint_moment(const std::vector<Site>& x, const std::vector<Scalar>& m) {
    std::map<Site, int> mult;
    for (const Site& s : x) ++mult[s];
    Scalar r(1);
    for (const auto& [s, k] : mult) {
        if (k % 2 != 0) return Scalar(0);
        if (static_cast<std::size_t>(k / 2) >= m.size()) throw PreconditionError("joint_moment: moment table too short");
        r *= m[static_cast<std::size_t>(k / 2)];
    }
    return r;
}

template <class Scalar>
struct TadpoleCheck {
    Scalar lhs{0};
    Scalar rhs{0};
    bool equal = false;
    int tadpole_sets = 0;       // collections of disjoint tadpoles visited on the left
    int tadpole_free_used = 0;  // tadpole-free partitions with all deltas satisfied
};

// Both sides of the tadpole identity for positions indexed by Υ_N (positions[j] is x at the
// j-th element of Υ_N). m[l] = m_{2l}. Guard N <= 4.
template <class Scalar>
TadpoleCheck<Scalar> tadpole_cancellation_check(int N, const std::vector<Site>& positions, const std::vector<Scalar>& m,
                                                const std::vector<Partition>& partitions) {
    if (N < 1 || N > 4) throw GuardError("tadpole_cancellation_check: need 1 <= N <= 4");
    const auto ups = upsilon(N);
    if (positions.size() != ups.size()) throw PreconditionError("tadpole_cancellation_check: one position per index");
    auto pos = [&](int label) {
        for (std::size_t j = 0; j < ups.size(); ++j)
            if (ups[j] == label) return positions[j];
        throw PreconditionError("tadpole_cancellation_check: label outside Υ_N");
    };
    int l_max = static_cast<int>(ups.size()) / 2;
    auto cum = cumulants_from_moments(m, std::min<int>(l_max, static_cast<int>(m.size()) - 1));

    TadpoleCheck<Scalar> out;
    // tadpole pairs {i, i+1} with both ends in Υ_N
    std::vector<std::pair<int, int>> pairs;
    for (int i : ups)
        for (int j : ups)
            if (j == i + 1) pairs.emplace_back(i, j);
    const std::size_t P = pairs.size();
    for (std::uint32_t mask = 0; mask < (1u << P); ++mask) {
        std::vector<bool> used(static_cast<std::size_t>(2 * N + 2), false);
        bool disjoint = true;
        int k = 0;
        bool deltas = true;
        for (std::size_t p = 0; p < P; ++p) {
            if (!(mask & (1u << p))) continue;
            auto [a, b] = pairs[p];
            if (used[static_cast<std::size_t>(a)] || used[static_cast<std::size_t>(b)]) {
                disjoint = false;
                break;
            }
            used[static_cast<std::size_t>(a)] = used[static_cast<std::size_t>(b)] = true;
            ++k;
            if (!(pos(a) == pos(b))) deltas = false;
        }
        if (!disjoint) continue;
        ++out.tadpole_sets;
        if (!deltas) continue;
        std::vector<Site> rest;
        for (int i : ups)
            if (!used[static_cast<std::size_t>(i)]) rest.push_back(pos(i));
        Scalar term = joint_moment(rest, m);
        if (k % 2 == 0)
            out.lhs += term;
        else
            out.lhs -= term;
    }
    for (const Partition& p : partitions) {
        if (!p.tadpole_free()) continue;
        Scalar prod(1);
        bool ok = true;
        for (const auto& blk : p.blocks) {
            const Site s0 = pos(blk.front());
            for (int i : blk)
                if (!(pos(i) == s0)) ok = false;
            if (!ok) break;
            prod *= cum[static_cast<int>(blk.size()) / 2];
        }
        if (!ok) continue;
        ++out.tadpole_free_used;
        out.rhs += prod;
    }
    if constexpr (std::is_floating_point_v<Scalar>) {
        out.equal = std::abs(out.lhs - out.rhs) <= 1e-12 * (1.0 + std::abs(out.lhs) + std::abs(out.rhs));
    } else {
        out.equal = out.lhs == out.rhs;
    }
    return out;
}

// Even-block partitions of {0, …, n-1}; guard n <= 12.
std::vector<std::vector<std::vector<int>>> even_partitions_of(int n);

// Σ over even-block partitions of ∏_blocks c_{|block|} δ(positions in the block coincide).
template <class Scalar>
Scalar partition_sum_moment(const std::vector<Site>& x, const CumulantTable<Scalar>& cum) {
    Scalar total(0);
    for (const auto& p : even_partitions_of(static_cast<int>(x.size()))) {
        Scalar prod(1);
        bool ok = true;
        for (const auto& blk : p) {
            for (int i : blk)
                if (!(x[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(blk.front())])) ok = false;
            if (!ok || static_cast<int>(blk.size()) / 2 > cum.l_max()) {
                ok = false;
                break;
            }
            prod *= cum[static_cast<int>(blk.size()) / 2];
        }
        if (ok) total += prod;
    }
    return total;
}

// All set partitions (coincidence patterns) of {0, …, n-1} as class labels in restricted-growth form.
std::vector<std::vector<int>> coincidence_patterns(int n);

// Distinct sites per class label: class c ↦ (c, 0, 0) scaled apart.
std::vector<Site> positions_from_pattern(const std::vector<int>& pattern);

}  // namespace anderson
