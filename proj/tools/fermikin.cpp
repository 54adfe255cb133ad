// fermikin command-line driver: run, trace, verify, norm.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fermikin/config.hpp"
#include "fermikin/error.hpp"
#include "fermikin/run.hpp"
#include "fermikin/transport.hpp"

using namespace fermikin;

namespace
{

constexpr int usage_exit = 2;

RunConfig load(std::string const& path, std::optional<int> steps, std::optional<std::uint64_t> seed)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path + "'");
    std::stringstream text;
    text << in.rdbuf();
    RunConfig config = parse_config_text(text.str(), path);
    if (steps)
        config.time.steps = *steps;
    if (seed)
        config.seed = *seed;
    validate(config);
    return config;
}

Vec3 parse_triplet(std::string const& text, std::string const& flag)
{
    Vec3 v;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &v.x, &v.y, &v.z, &extra) != 3)
        throw ParseError(flag + ": expected three comma-separated numbers, got '" + text + "'");
    return v;
}

int trace(std::optional<std::string> const& config_path,
          std::string const& x_text,
          std::string const& v_text,
          double duration,
          int samples,
          std::optional<std::string> const& output)
{
    Domain domain = Domain::full_space();
    if (config_path)
        domain = build_setup(load(*config_path, std::nullopt, std::nullopt)).domain;
    PhaseState const start{parse_triplet(x_text, "--x"), parse_triplet(v_text, "--v")};
    if (!contains(domain, start.x))
        throw ValidationError("trace.x", "start point lies outside the domain " + domain.describe());
    if (samples < 1 || !(duration >= 0))
        throw ValidationError("trace.samples", "need samples >= 1 and a nonnegative duration");

    std::ofstream file;
    if (output)
    {
        file.open(*output);
        if (!file)
            throw IoError("cannot write '" + *output + "'");
    }
    std::ostream& out = output ? file : std::cout;
    out << "t,x,y,z,vx,vy,vz,reflection_count\n";
    out.precision(17);
    for (int k = 0; k <= samples; ++k)
    {
        double const t = duration * k / samples;
        Flight const f = advance(domain, start, t);
        out << t << ',' << f.state.x.x << ',' << f.state.x.y << ',' << f.state.x.z << ',' << f.state.v.x << ','
            << f.state.v.y << ',' << f.state.v.z << ',' << f.log.reflection_count << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deterministic Boltzmann-Fermi-Dirac solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output = "";
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run a simulation and write diagnostics");
    run->add_option("--config", config_path, "Configuration file")->required();
    run->add_option("--output", output, "Output directory (overrides [output] directory)");
    run->add_option("--steps", steps, "Number of steps (overrides [time] steps)");
    run->add_option("--seed", seed, "Random seed (overrides [run] seed)");

    auto* verify = app.add_subcommand("verify", "Run the invariant and property checks on a configuration");
    verify->add_option("--config", config_path, "Configuration file")->required();
    verify->add_option("--steps", steps, "Number of steps for the time-stepping checks");
    verify->add_option("--seed", seed, "Random seed");

    auto* norm_cmd = app.add_subcommand("norm", "Print the kernel norm B for a configuration");
    norm_cmd->add_option("--config", config_path, "Configuration file")->required();

    std::optional<std::string> trace_config;
    std::optional<std::string> trace_output;
    std::string x_text = "0,0,0";
    std::string v_text = "1,0,0";
    double duration = 1.0;
    int samples = 100;
    auto* tr = app.add_subcommand("trace", "Dump one trajectory as CSV");
    tr->add_option("--config", trace_config, "Configuration file (domain section is used)");
    tr->add_option("--x", x_text, "Start position x,y,z");
    tr->add_option("--v", v_text, "Start velocity vx,vy,vz");
    tr->add_option("--time", duration, "Duration");
    tr->add_option("--samples", samples, "Number of intervals");
    tr->add_option("--output", trace_output, "CSV file (default: stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return usage_exit;
    }

    try
    {
        if (*run)
        {
            RunConfig config = load(config_path, steps, seed);
            if (!output.empty())
                config.output.directory = output;
            RunSummary const s = run_simulation(config, config.output.directory, &std::cerr);
            std::cout << "wrote " << config.output.directory << "\n"
                      << "B = " << s.l1_norm << ", steps = " << s.final_state.step_count
                      << ", max relative mass drift " << s.max_mass_drift << ", energy drift "
                      << s.max_energy_drift << ", max clamp defect " << s.max_clamp_defect << '\n';
            return 0;
        }
        if (*verify)
        {
            RunConfig const config = load(config_path, steps, seed);
            auto const results = run_verify_suite(config, &std::cerr);
            bool all = true;
            std::cout << "check                                        result  detail\n";
            for (auto const& r : results)
            {
                char line[160];
                std::snprintf(line, sizeof line, "%-44s %-7s ", r.name.c_str(), r.passed ? "PASS" : "FAIL");
                std::cout << line << r.detail << '\n';
                all = all && r.passed;
            }
            std::cout << (all ? "all checks passed" : "some checks FAILED") << '\n';
            return all ? 0 : static_cast<int>(ErrorCategory::Numerical);
        }
        if (*norm_cmd)
        {
            RunSetup const setup = build_setup(load(config_path, std::nullopt, std::nullopt));
            std::printf("%.17g\n", setup.l1_norm);
            return 0;
        }
        return trace(trace_config, x_text, v_text, duration, samples, trace_output);
    }
    catch (Error const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    }
    catch (std::exception const& e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return static_cast<int>(ErrorCategory::Internal);
    }
}
