#include "anderson/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anderson/errors.hpp"

namespace anderson {

std::string Site::str() const {
    std::ostringstream os;
    os << '(' << x << ',' << y << ',' << z << ')';
    return os.str();
}

std::size_t SiteHash::operator()(const Site& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::int64_t c : {s.x, s.y, s.z}) {
        h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

std::int64_t sup_norm(const Site& s) {
    return std::max({std::abs(s.x), std::abs(s.y), std::abs(s.z)});
}

std::int64_t l1_norm(const Site& s) { return std::abs(s.x) + std::abs(s.y) + std::abs(s.z); }

double euclidean_norm(const Site& s) {
    return std::sqrt(static_cast<double>(s.x * s.x + s.y * s.y + s.z * s.z));
}

const std::array<Site, 6>& unit_vectors() {
    static const std::array<Site, 6> units{Site::unit(0, 1), Site::unit(0, -1), Site::unit(1, 1),
                                           Site::unit(1, -1), Site::unit(2, 1), Site::unit(2, -1)};
    return units;
}

std::size_t Box::size() const {
    auto side = static_cast<std::size_t>(2 * radius + 1);
    return side * side * side;
}

std::vector<Site> Box::sites() const {
    std::vector<Site> out;
    out.reserve(size());
    for (int i = -radius; i <= radius; ++i)
        for (int j = -radius; j <= radius; ++j)
            for (int k = -radius; k <= radius; ++k) out.push_back(center + Site{i, j, k});
    return out;
}

std::vector<Site> boundary(const Box& b) {
    std::vector<Site> out;
    for (const Site& s : b.sites()) {
        if (sup_distance(s, b.center) == b.radius) out.push_back(s);
    }
    return out;
}

Region::Region(const Box& b) : Region(b.sites()) {}

Region::Region(std::vector<Site> sites) : sites_(std::move(sites)) {
    index_.reserve(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        if (!index_.emplace(sites_[i], i).second)
            throw PreconditionError("Region: duplicate site " + sites_[i].str());
    }
}

Region Region::cuboid(const Site& lo, const Site& hi) {
    std::vector<Site> s;
    for (auto i = lo.x; i <= hi.x; ++i)
        for (auto j = lo.y; j <= hi.y; ++j)
            for (auto k = lo.z; k <= hi.z; ++k) s.push_back({i, j, k});
    return Region(std::move(s));
}

std::ptrdiff_t Region::index(const Site& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<Site> Region::boundary() const {
    std::vector<Site> out;
    for (const Site& s : sites_) {
        for (const Site& e : unit_vectors()) {
            if (!contains(s + e)) {
                out.push_back(s);
                break;
            }
        }
    }
    return out;
}

std::int64_t Region::depth(const Site& s) const {
    if (!contains(s)) return 0;
    for (std::int64_t r = 1;; ++r) {
        for (std::int64_t i = -r; i <= r; ++i)
            for (std::int64_t j = -r; j <= r; ++j)
                for (std::int64_t k = -r; k <= r; ++k) {
                    Site d{i, j, k};
                    if (sup_norm(d) == r && !contains(s + d)) return r;
                }
    }
}

Momentum::Momentum(double a, double b, double c) : p{reduce(a), reduce(b), reduce(c)} {}

double Momentum::reduce(double x) {
    double r = x - std::floor(x + 0.5);
    return r;
}

double dispersion(const Momentum& p) {
    double s = 0.0;
    for (double c : p.p) {
        double v = std::sin(std::numbers::pi * c);
        s += v * v;
    }
    return 2.0 * s;
}

cplx torus_quadrature(const MomentumFn& f, const TorusGrid& grid) {
    CompensatedSum<cplx> acc;
    for (int i = 0; i < grid.M; ++i)
        for (int j = 0; j < grid.M; ++j)
            for (int k = 0; k < grid.M; ++k) {
                Momentum q = grid.momentum(i, j, k);
                cplx v = f(q);
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                    std::ostringstream os;
                    os << "torus_quadrature: non-finite integrand at p = (" << q[0] << ", " << q[1]
                       << ", " << q[2] << ")";
                    throw DomainError(os.str());
                }
                acc.add(v);
            }
    return acc.value() * grid.weight();
}

namespace {

bool ladder_monotone(const std::vector<LadderStep>& steps) {
    // A rung whose change is already at roundoff cannot meaningfully break monotonicity.
    for (std::size_t i = 2; i < steps.size(); ++i) {
        double floor = 1e-13 * std::abs(steps[i].value);
        if (steps[i].diff > 10.0 * steps[i - 1].diff + floor) return false;
    }
    return true;
}

}  // namespace

LadderResult quadrature_ladder(const MomentumFn& f, int M0, int levels, double rel_tol) {
    if (M0 < 1 || levels < 1) throw PreconditionError("quadrature_ladder: M0 and levels must be >= 1");
    LadderResult res;
    int M = M0;
    for (int l = 0; l < levels; ++l, M *= 2) {
        cplx v = torus_quadrature(f, TorusGrid{M, true});
        double d = res.steps.empty() ? std::nan("") : std::abs(v - res.steps.back().value);
        res.steps.push_back({M, v, d});
    }
    if (res.steps.size() >= 2) {
        const auto& last = res.steps.back();
        res.converged = last.diff <= rel_tol * std::max(std::abs(last.value), 1e-300);
    }
    res.monotone = ladder_monotone(res.steps);
    return res;
}

double dispersion_quadrature(const std::function<double(double)>& g, int M) {
    if (M < 2 || M % 2 != 0) throw PreconditionError("dispersion_quadrature: M must be even and >= 2");
    const int h = M / 2;
    TorusGrid grid{M, true};
    std::vector<double> s(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        double v = std::sin(std::numbers::pi * grid.point(j));
        s[static_cast<std::size_t>(j)] = 2.0 * v * v;
    }
    CompensatedSum<double> acc;
    for (int i = 0; i < h; ++i) {
        for (int j = i; j < h; ++j) {
            const double sij = s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j)];
            const double diag = g(sij + s[static_cast<std::size_t>(j)]);
            double tail = 0.0;
            for (int k = j + 1; k < h; ++k) tail += g(sij + s[static_cast<std::size_t>(k)]);
            // multiplicities of the orbit of (i, j, k) under axis permutations
            double w = (i == j) ? (diag + 3.0 * tail) : (3.0 * diag + 6.0 * tail);
            if (!std::isfinite(w)) throw DomainError("dispersion_quadrature: non-finite integrand");
            acc.add(w);
        }
    }
    return 8.0 * acc.value() * grid.weight();
}

LadderResult dispersion_ladder(const std::function<double(double)>& g, int M0, int M_max,
                               double rel_tol) {
    LadderResult res;
    for (int M = M0; M <= M_max; M *= 2) {
        double v = dispersion_quadrature(g, M);
        double d = res.steps.empty() ? std::nan("") : std::abs(v - res.steps.back().value.real());
        res.steps.push_back({M, v, d});
        if (res.steps.size() >= 2 && d <= rel_tol * std::abs(v)) {
            res.converged = true;
            break;
        }
    }
    res.monotone = ladder_monotone(res.steps);
    return res;
}

GridField dispersion_field(const TorusGrid& grid) {
    GridField F(grid);
    std::vector<double> s(static_cast<std::size_t>(grid.M));
    for (int j = 0; j < grid.M; ++j) {
        double v = std::sin(std::numbers::pi * grid.point(j));
        s[static_cast<std::size_t>(j)] = 2.0 * v * v;
    }
    for (int i = 0; i < grid.M; ++i)
        for (int j = 0; j < grid.M; ++j)
            for (int k = 0; k < grid.M; ++k)
                F.at(i, j, k) = s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(j)] +
                                s[static_cast<std::size_t>(k)];
    return F;
}

cplx FourierTable::operator()(const Site& w) const {
    if (sup_norm(w) > R_) throw PreconditionError("FourierTable: offset " + w.str() + " outside table");
    const std::int64_t W = 2 * R_ + 1;
    return data_[static_cast<std::size_t>(((w.x + R_) * W + (w.y + R_)) * W + (w.z + R_))];
}

namespace {

// phase[(w + R) * M + j] = e^{i 2π w p_j}
std::vector<cplx> phase_table(const TorusGrid& grid, int R) {
    const int W = 2 * R + 1;
    std::vector<cplx> ph(static_cast<std::size_t>(W) * grid.M);
    for (int w = -R; w <= R; ++w)
        for (int j = 0; j < grid.M; ++j)
            ph[static_cast<std::size_t>(w + R) * grid.M + j] =
                std::polar(1.0, 2.0 * std::numbers::pi * w * grid.point(j));
    return ph;
}

}  // namespace

FourierTable fourier_coefficients(const GridField& F, int R) {
    if (R < 0) throw PreconditionError("fourier_coefficients: negative radius");
    const int M = F.grid.M;
    const int W = 2 * R + 1;
    const auto ph = phase_table(F.grid, R);
    auto P = [&](int w, int j) { return ph[static_cast<std::size_t>(w) * M + j]; };

    std::vector<cplx> t1(static_cast<std::size_t>(M) * M * W);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            const cplx* row = &F.values[(static_cast<std::size_t>(i) * M + j) * M];
            cplx* out = &t1[(static_cast<std::size_t>(i) * M + j) * W];
            for (int w = 0; w < W; ++w) {
                cplx s = 0.0;
                for (int k = 0; k < M; ++k) s += P(w, k) * row[k];
                out[w] = s;
            }
        }
    std::vector<cplx> t2(static_cast<std::size_t>(M) * W * W, 0.0);
    for (int i = 0; i < M; ++i)
        for (int wy = 0; wy < W; ++wy)
            for (int wz = 0; wz < W; ++wz) {
                cplx s = 0.0;
                for (int j = 0; j < M; ++j)
                    s += P(wy, j) * t1[(static_cast<std::size_t>(i) * M + j) * W + wz];
                t2[(static_cast<std::size_t>(i) * W + wy) * W + wz] = s;
            }
    std::vector<cplx> out(static_cast<std::size_t>(W) * W * W);
    const double wt = F.grid.weight();
    for (int wx = 0; wx < W; ++wx)
        for (int wy = 0; wy < W; ++wy)
            for (int wz = 0; wz < W; ++wz) {
                CompensatedSum<cplx> acc;
                for (int i = 0; i < M; ++i)
                    acc.add(P(wx, i) * t2[(static_cast<std::size_t>(i) * W + wy) * W + wz]);
                out[(static_cast<std::size_t>(wx) * W + wy) * W + wz] = acc.value() * wt;
            }
    return FourierTable(R, std::move(out));
}

GridField synthesize_on_grid(const std::vector<std::pair<Site, cplx>>& coefficients,
                             const TorusGrid& grid) {
    GridField F(grid);
    if (coefficients.empty()) return F;
    std::int64_t R64 = 0;
    for (const auto& [k, c] : coefficients) R64 = std::max(R64, sup_norm(k));
    const int R = static_cast<int>(R64);
    const int W = 2 * R + 1;
    const int M = grid.M;
    const auto ph = phase_table(grid, R);
    auto P = [&](int w, int j) { return ph[static_cast<std::size_t>(w) * M + j]; };

    // dense coefficient cube, then one axis at a time
    std::vector<cplx> cube(static_cast<std::size_t>(W) * W * W, 0.0);
    for (const auto& [k, c] : coefficients)
        cube[(static_cast<std::size_t>(k.x + R) * W + static_cast<std::size_t>(k.y + R)) * W +
             static_cast<std::size_t>(k.z + R)] += c;
    std::vector<cplx> t1(static_cast<std::size_t>(W) * W * M, 0.0);  // (wx, wy, k)
    for (int a = 0; a < W; ++a)
        for (int b = 0; b < W; ++b) {
            const cplx* in = &cube[(static_cast<std::size_t>(a) * W + b) * W];
            cplx* out = &t1[(static_cast<std::size_t>(a) * W + b) * M];
            for (int c = 0; c < W; ++c) {
                if (in[c] == cplx(0.0)) continue;
                for (int k = 0; k < M; ++k) out[k] += in[c] * P(c, k);
            }
        }
    std::vector<cplx> t2(static_cast<std::size_t>(W) * M * M, 0.0);  // (wx, j, k)
    for (int a = 0; a < W; ++a)
        for (int b = 0; b < W; ++b) {
            const cplx* in = &t1[(static_cast<std::size_t>(a) * W + b) * M];
            for (int j = 0; j < M; ++j) {
                const cplx pj = P(b, j);
                cplx* out = &t2[(static_cast<std::size_t>(a) * M + j) * M];
                for (int k = 0; k < M; ++k) out[k] += pj * in[k];
            }
        }
    for (int a = 0; a < W; ++a)
        for (int i = 0; i < M; ++i) {
            const cplx pi = P(a, i);
            for (int j = 0; j < M; ++j) {
                const cplx* in = &t2[(static_cast<std::size_t>(a) * M + j) * M];
                for (int k = 0; k < M; ++k) F.at(i, j, k) += pi * in[k];
            }
        }
    return F;
}

}  // namespace anderson
