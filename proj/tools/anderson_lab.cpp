#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "anderson/config.hpp"
#include "anderson/errors.hpp"
#include "anderson/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int threads = 0;
    bool unsafe = false;
    bool dump = false;
};

int run(anderson::ExperimentKind kind, const CommonFlags& f) {
    using namespace anderson;
    ExperimentConfig c = f.config.empty() ? default_config(kind) : load_config(f.config);
    if (c.kind != kind)
        throw PreconditionError("config " + f.config + " is for '" + to_string(c.kind) + "', not '" +
                                to_string(kind) + "'");
    if (f.seed_set) c.seed = f.seed;
    if (f.threads > 0) c.threads = f.threads;
    c.out = f.out.empty() ? c.out + "/" + to_string(kind) : f.out;
    if (f.dump) {
        std::cout << to_ini(c);
        return 0;
    }
    check_desk_guards(c, f.unsafe);

    if (c.C_star && (kind == ExperimentKind::Localization || kind == ExperimentKind::ExpansionCheck)) {
        std::cout << "N-selection diagnostic: (4N)^4 = sqrt(E*)/(C lambda^2) gives N = "
                  << format_number(n_selection(c.lambda, c.nu, *c.C_star)) << " for C = " << format_number(*c.C_star)
                  << "\n";
    }
    RunResult r = run_experiment(c);
    write_outputs(r, c.out);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << r.summary.dump(2) << "\n" << "wrote " << c.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anderson-lab: numerical experiments for alloy-type random Schroedinger operators on Z^3"};
    app.require_subcommand(1);
    CommonFlags flags;

    struct Sub {
        const char* name;
        anderson::ExperimentKind kind;
        const char* help;
    };
    const Sub subs[] = {
        {"green", anderson::ExperimentKind::GreenDecay, "free lattice Green function table, envelope and decay fit"},
        {"selfenergy", anderson::ExperimentKind::SelfEnergy, "solve the self-energy fixed point with certificates"},
        {"expand", anderson::ExperimentKind::ExpansionCheck, "telescoping identity and tadpole cancellation checks"},
        {"wegner", anderson::ExperimentKind::Wegner, "Monte Carlo eigenvalue counts in shrinking intervals"},
        {"localize", anderson::ExperimentKind::Localization, "boundary resolvent decay over a box ladder"},
        {"dipole", anderson::ExperimentKind::Dipole, "dipole self-energy bounds and wall ground state"},
    };
    anderson::ExperimentKind chosen = anderson::ExperimentKind::GreenDecay;
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", flags.config, "INI config file")->check(CLI::ExistingFile);
        sc->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { flags.seed = v, flags.seed_set = true; }, "master seed");
        sc->add_option("--out", flags.out, "output directory");
        sc->add_option("--threads", flags.threads, "worker threads for sample loops")->check(CLI::PositiveNumber);
        sc->add_flag("--unsafe-override", flags.unsafe, "lift the desk-size guards");
        sc->add_flag("--dump-config", flags.dump, "print the resolved config and exit");
        const auto kind = s.kind;
        sc->callback([&chosen, kind] { chosen = kind; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        return run(chosen, flags);
    } catch (const anderson::InadmissibleError& e) {
        std::cerr << "inadmissible: " << e.what() << "\n";
        return 2;
    } catch (const anderson::GuardError& e) {
        std::cerr << "inadmissible: " << e.what() << "\n";
        return 2;
    } catch (const anderson::NonconvergenceError& e) {
        std::cerr << "nonconvergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
