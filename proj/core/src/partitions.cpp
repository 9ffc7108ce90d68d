#include "anderson/partitions.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace anderson {

std::vector<int> upsilon(int N) {
    std::vector<int> u;
    for (int i = 1; i <= N; ++i) u.push_back(i);
    for (int i = N + 2; i <= 2 * N + 1; ++i) u.push_back(i);
    return u;
}

bool Partition::tadpole_free() const {
    return std::none_of(tadpole.begin(), tadpole.end(), [](bool t) { return t; });
}

std::string Partition::str() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        os << (b ? "," : "") << '{';
        for (std::size_t i = 0; i < blocks[b].size(); ++i) os << (i ? "," : "") << blocks[b][i];
        os << '}';
    }
    os << '}';
    return os.str();
}

namespace {

// Even-block partitions of `labels`; the smallest remaining label opens each new block.
void even_blocks(std::vector<int> rest, std::vector<std::vector<int>>& current,
                 const std::function<void(const std::vector<std::vector<int>>&)>& emit) {
    if (rest.empty()) {
        emit(current);
        return;
    }
    const int first = rest.front();
    std::vector<int> others(rest.begin() + 1, rest.end());
    const std::size_t m = others.size();
    for (std::size_t size = 1; size <= m; size += 2) {
        std::vector<bool> pick(m, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
        do {
            std::vector<int> block{first}, remain;
            for (std::size_t i = 0; i < m; ++i) (pick[i] ? block : remain).push_back(others[i]);
            current.push_back(block);
            even_blocks(remain, current, emit);
            current.pop_back();
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
}

}  // namespace

std::vector<std::vector<std::vector<int>>> even_partitions_of(int n) {
    if (n < 0 || n > 12) throw GuardError("even_partitions_of: need 0 <= n <= 12");
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(i);
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<std::vector<int>> current;
    even_blocks(labels, current, [&](const auto& p) { out.push_back(p); });
    return out;
}

std::vector<Partition> enumerate_partitions(int N) {
    if (N < 1 || N > 6) throw GuardError("enumerate_partitions: need 1 <= N <= 6");
    std::vector<Partition> out;
    std::vector<std::vector<int>> current;
    even_blocks(upsilon(N), current, [&](const std::vector<std::vector<int>>& blocks) {
        Partition p;
        p.blocks = blocks;
        for (const auto& b : p.blocks) p.tadpole.push_back(b.size() == 2 && b[1] == b[0] + 1);
        out.push_back(std::move(p));
    });
    return out;
}

std::uint64_t even_partition_count(int n) {
    if (n < 0 || n % 2 != 0) return n == 0 ? 1 : 0;
    std::vector<std::uint64_t> a(static_cast<std::size_t>(n) + 1, 0);
    a[0] = 1;
    for (int k = 2; k <= n; k += 2) {
        std::uint64_t s = 0;
        for (int j = 1; j < k; j += 2)
            s += static_cast<std::uint64_t>(std::llround(binomial(k - 1, j))) * a[static_cast<std::size_t>(k - 1 - j)];
        a[static_cast<std::size_t>(k)] = s;
    }
    return a[static_cast<std::size_t>(n)];
}

double cumulant_growth_constant(const CumulantTable<double>& t) {
    double c = 0.0;
    for (int l = 1; l <= t.l_max(); ++l) {
        double v = std::abs(t[l]);
        if (v > 0.0) c = std::max(c, std::pow(v, 1.0 / (2 * l + 1)) / l);
    }
    return c;
}

std::vector<std::vector<int>> coincidence_patterns(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int i, int classes) {
        if (i == n) {
            out.push_back(cur);
            return;
        }
        for (int c = 0; c <= classes; ++c) {
            cur[static_cast<std::size_t>(i)] = c;
            rec(i + 1, std::max(classes, c + 1));
        }
    };
    if (n == 0) return {{}};
    rec(0, 0);
    return out;
}

std::vector<Site> positions_from_pattern(const std::vector<int>& pattern) {
    std::vector<Site> s;
    s.reserve(pattern.size());
    for (int c : pattern) s.push_back(Site{c, 2 * c, -c});
    return s;
}

}  // namespace anderson
