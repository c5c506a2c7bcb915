// cfsynth: bounded finite-time feedback synthesis for canonical systems.

#include "cfsynth/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace cfs::cli;

    CLI::App app{"Bounded finite-time feedback synthesis for canonical systems"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    Context ctx;
    std::string config;
    std::string out = ".";
    std::string format = "csv";
    std::string expectations;
    unsigned long long seed = 0;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
        if (needs_config)
            opt->required();
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--format", format, "trajectory format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        sub->add_flag("--plot", ctx.plot, "also write SVG plots");
        sub->add_option("--seed", seed, "seed for random perturbations (overrides the config)");
    };

    auto* synth = app.add_subcommand("synth", "F, F1, a0, c, Delta and the comparison matrix");
    common(synth, true);
    auto* delta = app.add_subcommand("delta", "admissible perturbation bound");
    common(delta, true);
    auto* simulate = app.add_subcommand("simulate", "closed-loop trajectory with CSV/JSON and SVG output");
    common(simulate, true);
    auto* sweep = app.add_subcommand("sweep", "settling times over perturbation scales");
    common(sweep, true);
    auto* verify = app.add_subcommand("verify", "certificate for a config, or for the pendulum presets");
    common(verify, false);
    verify->add_option("--expectations", expectations, "reference numbers (default: bundled file)")
        ->check(CLI::ExistingFile);

    PendulumOptions pendulum;
    double k0 = 0.0;
    double length = 0.0;
    double a0 = 0.0;
    double level = 0.0;
    std::string mode = "algebraic";
    auto* pend = app.add_subcommand("pendulum", "coupled-pendulum presets");
    common(pend, false);
    pend->add_option("case", pendulum.which, "case1 (unknown stiffness) or case2 (unknown length)")
        ->required()
        ->check(CLI::IsMember({"case1", "case2"}));
    auto* k0_opt = pend->add_option("--k0", k0, "realized stiffness, case1");
    auto* length_opt = pend->add_option("--length", length, "realized length, case2");
    auto* c_opt = pend->add_option("--c", level, "ellipsoid level, at most the computed radius");
    auto* a0_opt = pend->add_option("--a0", a0, "override a0 (default a0_max)");
    pend->add_option("--mode", mode, "theta handling")
        ->check(CLI::IsMember({"algebraic", "augmented"}))
        ->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        // Usage errors count as configuration errors.
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }

    if (!config.empty())
        ctx.config = config;
    ctx.out = out;
    ctx.format = format == "json" ? Format::Json : Format::Csv;
    if (!expectations.empty())
        ctx.expectations = expectations;

    auto seeded = [&](CLI::App* sub) {
        if (sub->count("--seed"))
            ctx.seed = seed;
    };

    if (synth->parsed())
        return seeded(synth), cmd_synth(ctx);
    if (delta->parsed())
        return seeded(delta), cmd_delta(ctx);
    if (simulate->parsed())
        return seeded(simulate), cmd_simulate(ctx);
    if (sweep->parsed())
        return seeded(sweep), cmd_sweep(ctx);
    if (verify->parsed())
        return seeded(verify), cmd_verify(ctx);
    if (pend->parsed())
    {
        if (*k0_opt)
            pendulum.k0 = k0;
        if (*length_opt)
            pendulum.length = length;
        if (*c_opt)
            pendulum.c = level;
        if (*a0_opt)
            pendulum.a0 = a0;
        pendulum.mode = cfs::simulation_mode_from_string(mode);
        return cmd_pendulum(ctx, pendulum);
    }
    return exit_config;
}
