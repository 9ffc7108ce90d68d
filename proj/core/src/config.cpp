#include "anderson/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "anderson/errors.hpp"

namespace anderson {

namespace pt = boost::property_tree;

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::GreenDecay: return "green-decay";
        case ExperimentKind::SelfEnergy: return "selfenergy";
        case ExperimentKind::ExpansionCheck: return "expansion-check";
        case ExperimentKind::Wegner: return "wegner";
        case ExperimentKind::Localization: return "localization";
        case ExperimentKind::Dipole: return "dipole";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::GreenDecay, ExperimentKind::SelfEnergy, ExperimentKind::ExpansionCheck,
                   ExperimentKind::Wegner, ExperimentKind::Localization, ExperimentKind::Dipole})
        if (to_string(k) == s) return k;
    throw PreconditionError("unknown experiment kind '" + s + "'");
}

namespace {

DensityKind density_from_string(const std::string& s) {
    for (auto k : {DensityKind::Uniform, DensityKind::RaisedCosine, DensityKind::SqrtBump})
        if (to_string(k) == s) return k;
    throw PreconditionError("unknown density '" + s + "'");
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_floating_point_v<T>)
            s += num(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

template <class T>
std::vector<T> split_list(const std::string& s) {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(","));
    std::vector<T> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (p.empty()) continue;
        if constexpr (std::is_floating_point_v<T>)
            out.push_back(std::stod(p));
        else
            out.push_back(static_cast<T>(std::stoll(p)));
    }
    return out;
}

// ptree's get(key, fallback) quietly returns the fallback when the value does not parse
template <class T>
T read(const pt::ptree& tree, const char* key, T fallback) {
    if (!tree.get_optional<std::string>(key)) return fallback;
    return tree.get<T>(key);
}

}  // namespace

ExperimentConfig default_config(ExperimentKind k) {
    ExperimentConfig c;
    c.kind = k;
    switch (k) {
        case ExperimentKind::GreenDecay:
            c.E = -0.5;
            c.radius = 6;
            break;
        case ExperimentKind::SelfEnergy:
            c.lambda = 0.05;
            c.E = -0.1;
            break;
        case ExperimentKind::ExpansionCheck:
            c.lambda = 0.1;
            c.E = -0.05;
            c.eps = 1e-3;
            c.L = 2;
            c.N = 4;
            c.samples = 3;
            break;
        case ExperimentKind::Wegner:
            c.lambda = 0.3;
            c.side = 8;
            c.center = -0.05;
            c.widths = {0.02, 0.04, 0.08};
            c.samples = 500;
            break;
        case ExperimentKind::Localization:
            c.lambda = 0.2;
            c.nu = 0.5;
            c.L_ladder = {4, 6, 8, 10};
            c.samples = 200;
            break;
        case ExperimentKind::Dipole:
            c.potential = "dipole";
            c.lambda = 0.1;
            c.energies = {-0.02, -0.03, -0.05, -0.1};
            break;
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw PreconditionError(std::string("config: ") + e.what());
    }
    int version = 0;
    try {
        version = read(tree, "schema_version", kConfigSchemaVersion);
    } catch (const pt::ptree_bad_data&) {
        throw PreconditionError("config: schema_version is not an integer");
    }
    if (version != kConfigSchemaVersion)
        throw PreconditionError("config: unsupported schema_version " + std::to_string(version));
    const auto kind = tree.get_optional<std::string>("run.kind");
    if (!kind) throw PreconditionError("config: [run] kind is required");
    ExperimentConfig c = default_config(experiment_kind_from_string(*kind));

    try {
        c.out = read(tree, "run.out", c.out);
        c.potential = read(tree, "model.potential", c.potential);
        if (auto d = tree.get_optional<std::string>("model.density")) c.density = density_from_string(*d);
        c.lambda = read(tree, "model.lambda", c.lambda);

        if (auto e = tree.get_optional<std::string>("energy.E")) {
            if (boost::trim_copy(*e) == "auto")
                c.E.reset();
            else
                c.E = std::stod(*e);
        }
        if (auto e = tree.get_optional<std::string>("energy.energies")) c.energies = split_list<double>(*e);
        c.eps = read(tree, "energy.eps", c.eps);
        c.nu = read(tree, "energy.nu", c.nu);

        c.L = read(tree, "geometry.L", c.L);
        c.side = read(tree, "geometry.side", c.side);
        if (auto l = tree.get_optional<std::string>("geometry.L_ladder")) c.L_ladder = split_list<int>(*l);
        c.radius = read(tree, "geometry.radius", c.radius);
        c.wall_L = read(tree, "geometry.wall_L", c.wall_L);
        c.slab_L = read(tree, "geometry.slab_L", c.slab_L);
        c.slab_Lt = read(tree, "geometry.slab_Lt", c.slab_Lt);

        c.M = read(tree, "numerics.M", c.M);
        c.tol = read(tree, "numerics.tol", c.tol);
        c.max_iter = read(tree, "numerics.max_iter", c.max_iter);
        c.N = read(tree, "numerics.N", c.N);
        c.tadpole_N = read(tree, "numerics.tadpole_N", c.tadpole_N);
        if (auto cs = tree.get_optional<std::string>("numerics.C_star")) {
            if (boost::trim_copy(*cs) == "none")
                c.C_star.reset();
            else
                c.C_star = std::stod(*cs);
        }

        c.samples = read(tree, "sampling.samples", c.samples);
        c.seed = read(tree, "sampling.seed", c.seed);
        c.center = read(tree, "sampling.center", c.center);
        if (auto w = tree.get_optional<std::string>("sampling.widths")) c.widths = split_list<double>(*w);
        c.threads = read(tree, "sampling.threads", c.threads);
    } catch (const pt::ptree_bad_data& e) {
        throw PreconditionError(std::string("config: bad value: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw PreconditionError("config: malformed number in a list or energy");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw PreconditionError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "schema_version = " << c.schema_version << "\n\n";
    os << "[run]\nkind = " << to_string(c.kind) << "\nout = " << c.out << "\n\n";
    os << "[model]\npotential = " << c.potential << "\ndensity = " << to_string(c.density)
       << "\nlambda = " << num(c.lambda) << "\n\n";
    os << "[energy]\nE = " << (c.E ? num(*c.E) : std::string("auto")) << "\nenergies = " << join(c.energies)
       << "\neps = " << num(c.eps) << "\nnu = " << num(c.nu) << "\n\n";
    os << "[geometry]\nL = " << c.L << "\nside = " << c.side << "\nL_ladder = " << join(c.L_ladder)
       << "\nradius = " << c.radius << "\nwall_L = " << c.wall_L << "\nslab_L = " << c.slab_L
       << "\nslab_Lt = " << c.slab_Lt << "\n\n";
    os << "[numerics]\nM = " << c.M << "\ntol = " << num(c.tol) << "\nmax_iter = " << c.max_iter << "\nN = " << c.N
       << "\ntadpole_N = " << c.tadpole_N << "\nC_star = " << (c.C_star ? num(*c.C_star) : std::string("none"))
       << "\n\n";
    os << "[sampling]\nsamples = " << c.samples << "\nseed = " << c.seed << "\ncenter = " << num(c.center)
       << "\nwidths = " << join(c.widths) << "\nthreads = " << c.threads << "\n";
    return os.str();
}

void check_desk_guards(const ExperimentConfig& c, bool unsafe) {
    if (unsafe) return;
    auto fail = [](const std::string& what) {
        throw GuardError(what + " exceeds the desk limit; pass --unsafe-override to run anyway");
    };
    if (c.L > kDeskMaxL) fail("L = " + std::to_string(c.L));
    if (c.side > 2 * kDeskMaxL + 1) fail("side = " + std::to_string(c.side));
    for (int L : c.L_ladder)
        if (L > kDeskMaxL) fail("ladder L = " + std::to_string(L));
    if (c.samples > kDeskMaxSamples) fail("samples = " + std::to_string(c.samples));
}

SingleSitePotential make_potential(const ExperimentConfig& c) {
    if (c.potential == "delta") return SingleSitePotential::delta();
    if (c.potential == "exponential") return SingleSitePotential::exponential(1.0, 2.0, false);
    if (c.potential == "alternating") return SingleSitePotential::exponential(1.0, 2.0, true);
    if (c.potential == "dipole") return SingleSitePotential::dipole();
    if (c.potential == "cell-dipole")
        return SingleSitePotential::nonoverlapping({{Site{0, 0, 0}, 1.0}, {Site{1, 0, 0}, -1.0}}, {2, 1, 1},
                                                   {Site{0, 0, 0}, Site{1, 0, 0}});
    throw PreconditionError("config: unknown potential '" + c.potential + "'");
}

Region make_region(const ExperimentConfig& c) {
    if (c.side > 0) return Region::cuboid(Site{0, 0, 0}, Site{c.side - 1, c.side - 1, c.side - 1});
    return Region(Box{Site{0, 0, 0}, c.L});
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace anderson
