#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anderson/config.hpp"
#include "anderson/green.hpp"
#include "anderson/hamiltonian.hpp"
#include "anderson/potentials.hpp"
#include "anderson/selfenergy.hpp"

namespace anderson {

using ojson = nlohmann::ordered_json;

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& os) const;
};

// Round-trip decimal text for a double ("%.17g").
std::string format_number(double x);

struct RunLedger {
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_count = 0;  // samples use streams 0 … stream_count-1 of master_seed
    int threads = 1;
    std::vector<std::pair<std::string, double>> timings;  // seconds per stage
    ojson certificates = ojson::object();

    ojson to_json() const;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<Table> tables;
    ojson summary = ojson::object();
    RunLedger ledger;
    std::vector<std::string> warnings;
};

// Admissibility threshold for the variant of u (E enters only for the non-overlapping case).
double variant_threshold(const SingleSitePotential& u, double lambda, double E);

// λ^{4-ν}-below-threshold energy used by the localization experiment.
double localization_energy(const SingleSitePotential& u, double lambda, double nu);

struct LocalizationOptions {
    double lambda = 0.2;
    double E = 0.0;
    SingleSitePotential u = SingleSitePotential::delta();
    DisorderDensity rho = DisorderDensity::uniform();
    std::vector<int> Ls{4, 6, 8, 10};
    int samples = 200;
    std::uint64_t seed = 0;
    int threads = 1;
    int bootstrap = 400;
};

struct LocalizationRow {
    int L = 0;
    double median = 0.0, q25 = 0.0, q75 = 0.0;
    int used = 0, skipped = 0;
    double skip_rate() const { return used + skipped ? static_cast<double>(skipped) / (used + skipped) : 0.0; }
};

struct LocalizationResult {
    std::vector<LocalizationRow> rows;
    // values[s][k]: max_{w ∈ ∂Λ_L} |R(0, w)| for sample s at Ls[k]; negative when skipped
    std::vector<std::vector<double>> values;
    DecayFit fit;                 // exponential fit of the medians against L
    double rate_stderr = 0.0;     // bootstrap over samples
    double significance = 0.0;    // rate / rate_stderr
    bool strictly_decreasing = false;
    double max_skip_rate = 0.0;
    double predicted_delta = 0.0;  // √(E0 - E - E*)/(√6 π) with E* = λ^{4-ν}/2
};

// Every L uses the same couplings for a given sample, so the boxes are nested restrictions
// of one realization.
LocalizationResult localization_experiment(const LocalizationOptions& opt, double nu = 0.5);

struct DipoleEnergyRow {
    double E = 0.0;
    cplx A = 0.0, B = 0.0;
    bool A_bound = false, B_bound = false;  // |A| < λ², |B| < 14λ²
    double residual = 0.0;
    double contraction = 0.0;
    int iterations = 0;
};

struct DipoleReport {
    double lambda = 0.0;
    double E_d = 0.0;
    double E_m_exact = 0.0;
    double E_finite = 0.0;        // 1D chain of 2·wall_L + 1 sites
    double measured_c = 0.0;      // (E_m_exact + 2λ²)/λ³
    double slab_energy = 0.0;
    double slab_residual = 0.0;
    double slab_chain = 0.0;      // chain at the slab's L
    std::vector<DipoleEnergyRow> rows;
};

DipoleReport dipole_report(double lambda, const std::vector<double>& energies, int wall_L, int slab_L, int slab_Lt,
                           const TorusGrid& grid, const SolverOptions& opt);

// N with (4N)⁴ = √E*/(C λ²), E* = λ^{4-ν}/2.
double n_selection(double lambda, double nu, double C_star);

RunResult run_green_decay(const ExperimentConfig& c);
RunResult run_selfenergy(const ExperimentConfig& c);
RunResult run_expansion_check(const ExperimentConfig& c);
RunResult run_wegner(const ExperimentConfig& c);
RunResult run_localization(const ExperimentConfig& c);
RunResult run_dipole(const ExperimentConfig& c);
RunResult run_experiment(const ExperimentConfig& c);

// <dir>/config.ini, one CSV per table, summary.json with the ledger.
void write_outputs(const RunResult& r, const std::string& dir);

}  // namespace anderson
