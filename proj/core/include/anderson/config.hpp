#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anderson/lattice.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

enum class ExperimentKind { GreenDecay, SelfEnergy, ExpansionCheck, Wegner, Localization, Dipole };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kDeskMaxL = 16;
inline constexpr int kDeskMaxSamples = 10000;

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    ExperimentKind kind = ExperimentKind::GreenDecay;

    // model
    // delta | exponential | alternating | cell-dipole | dipole
    std::string potential = "delta";
    DensityKind density = DensityKind::Uniform;
    double lambda = 0.05;

    // energies
    std::optional<double> E;       // unset: derived from the threshold where the experiment allows it
    std::vector<double> energies;  // dipole energy grid
    double eps = 0.0;
    double nu = 0.5;

    // geometry
    int L = 2;                     // box radius; side 2L + 1
    int side = 0;                  // > 0 selects the cuboid [0, side-1]³ instead of a centred box
    std::vector<int> L_ladder;
    int radius = 6;                // Green table radius
    int wall_L = 200;
    int slab_L = 12;
    int slab_Lt = 60;

    // numerics
    int M = 128;
    double tol = 1e-10;
    int max_iter = 200;
    int N = 4;                     // expansion order
    int tadpole_N = 3;

    // sampling
    int samples = 200;
    std::uint64_t seed = 20240917;
    double center = -0.05;
    std::vector<double> widths;
    int threads = 1;

    // diagnostics
    std::optional<double> C_star;  // C(E*) for the N-selection printout

    std::string out = "results";
};

ExperimentConfig default_config(ExperimentKind k);
// INI file with a top-level schema_version and [run], [model], [energy], [geometry],
// [numerics], [sampling] sections. Keys left out keep the defaults for the file's kind.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);
// Fully resolved config in the same format; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& c);

// L <= 16 and samples <= 10⁴ unless `unsafe`; throws GuardError.
void check_desk_guards(const ExperimentConfig& c, bool unsafe);

SingleSitePotential make_potential(const ExperimentConfig& c);
Region make_region(const ExperimentConfig& c);

// 64-bit FNV-1a, lowercase hex.
std::string fnv1a_hex(const std::string& data);

}  // namespace anderson
