#include "cfsynth/cli.hpp"

#include "cfsynth/pendulum.hpp"
#include "cfsynth/plot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <system_error>

namespace cfs::cli
{
namespace
{

using json = nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& ptr)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(ptr + "/" + key, "required field missing");
    return obj.at(key);
}

double as_number(const json& v, const std::string& ptr)
{
    if (!v.is_number())
        throw ConfigError(ptr, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& ptr)
{
    if (!v.is_number_integer())
        throw ConfigError(ptr, "expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& ptr)
{
    if (!v.is_string())
        throw ConfigError(ptr, "expected a string");
    return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& ptr)
{
    if (!v.is_array())
        throw ConfigError(ptr, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = as_number(v[i], ptr + "/" + std::to_string(i));
    return out;
}

Matrix as_matrix(const json& v, int n, const std::string& ptr)
{
    if (!v.is_array() || v.size() != static_cast<std::size_t>(n))
        throw ConfigError(ptr, "expected " + std::to_string(n) + " rows");
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
    {
        const std::string row_ptr = ptr + "/" + std::to_string(i);
        const Vector row = as_vector(v[i], row_ptr);
        if (row.size() != n)
            throw ConfigError(row_ptr, "expected " + std::to_string(n) + " columns");
        out.row(i) = row.transpose();
    }
    return out;
}

template <class Fn>
auto rethrow_as_config(const std::string& ptr, Fn&& fn) -> decltype(fn())
{
    try
    {
        return fn();
    }
    catch (const DomainError& e)
    {
        throw ConfigError(ptr, e.what());
    }
}

Family family_of(const std::string& name, const std::string& ptr)
{
    if (name == "saturating")
        return Family::SaturatingState;
    return rethrow_as_config(ptr, [&] { return family_from_string(name); });
}

PerturbationConfig parse_perturbation(const json& p, int n, const std::string& ptr)
{
    PerturbationConfig out;
    if (!p.is_object())
        throw ConfigError(ptr, "expected an object");
    const char* kind_key = p.contains("kind") ? "kind" : (p.contains("mask") ? "mask" : nullptr);
    if (kind_key)
    {
        const std::string kp = ptr + "/" + kind_key;
        out.kind = rethrow_as_config(kp, [&] { return mask_kind_from_string(as_string(p.at(kind_key), kp)); });
    }
    if (p.contains("delta"))
    {
        const json& d = p.at("delta");
        if (d.is_string())
        {
            if (d.get<std::string>() != "margin")
                throw ConfigError(ptr + "/delta", "expected a number or \"margin\"");
        }
        else
        {
            out.delta = as_number(d, ptr + "/delta");
            if (!(*out.delta >= 0.0) || !std::isfinite(*out.delta))
                throw ConfigError(ptr + "/delta", "must be finite and nonnegative");
        }
    }
    if (p.contains("family"))
    {
        out.family = as_string(p.at("family"), ptr + "/family");
        if (out.family != "random" && out.family != "none")
            family_of(out.family, ptr + "/family");
    }
    const json* terms = nullptr;
    std::string terms_ptr;
    if (p.contains("params") && p.at("params").contains("terms"))
    {
        terms = &p.at("params").at("terms");
        terms_ptr = ptr + "/params/terms";
    }
    else if (p.contains("terms"))
    {
        terms = &p.at("terms");
        terms_ptr = ptr + "/terms";
    }
    if (terms)
    {
        if (!terms->is_array())
            throw ConfigError(terms_ptr, "expected an array");
        for (std::size_t i = 0; i < terms->size(); ++i)
        {
            const json& t = (*terms)[i];
            const std::string tp = terms_ptr + "/" + std::to_string(i);
            TermConfig term;
            // Rows and columns are one-based in the file.
            term.row = as_int(field(t, "row", tp), tp + "/row") - 1;
            term.col = as_int(field(t, "col", tp), tp + "/col") - 1;
            if (term.row < 0 || term.row >= n)
                throw ConfigError(tp + "/row", "out of range 1.." + std::to_string(n));
            if (term.col < 0 || term.col >= n)
                throw ConfigError(tp + "/col", "out of range 1.." + std::to_string(n));
            if (t.contains("family"))
                term.family = family_of(as_string(t.at("family"), tp + "/family"), tp + "/family");
            if (t.contains("amplitude"))
                term.amplitude = as_number(t.at("amplitude"), tp + "/amplitude");
            if (t.contains("omega"))
                term.omega = as_number(t.at("omega"), tp + "/omega");
            if (t.contains("phase"))
                term.phase = as_number(t.at("phase"), tp + "/phase");
            if (t.contains("state"))
            {
                term.state = as_int(t.at("state"), tp + "/state") - 1;
                if (term.state < 0 || term.state >= n)
                    throw ConfigError(tp + "/state", "out of range 1.." + std::to_string(n));
            }
            out.terms.push_back(term);
        }
    }
    return out;
}

IntegratorConfig parse_integrator(const json& v, const std::string& ptr)
{
    IntegratorConfig out;
    if (!v.is_object())
        throw ConfigError(ptr, "expected an object");
    if (v.contains("method"))
    {
        std::string name = as_string(v.at("method"), ptr + "/method");
        if (name == "rk45")
            name = "rk45-adaptive";
        else if (name == "rk4")
            name = "rk4-fixed";
        out.method = rethrow_as_config(ptr + "/method", [&] { return integrator_method_from_string(name); });
    }
    const std::pair<const char*, double*> numeric[] = {{"rtol", &out.rtol},
                                                       {"atol", &out.atol},
                                                       {"max_step", &out.max_step},
                                                       {"theta_stop", &out.theta_stop},
                                                       {"t_max", &out.t_max}};
    for (const auto& [key, target] : numeric)
        if (v.contains(key))
            *target = as_number(v.at(key), ptr + "/" + key);
    rethrow_as_config(ptr, [&] {
        out.validate();
        return 0;
    });
    return out;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v); // no "-0"
    return buf;
}

struct Streams
{
    std::ostream& out;
    std::ostream& err;
};

Streams streams(const Context& ctx)
{
    return {ctx.stdout_stream ? *ctx.stdout_stream : std::cout,
            ctx.stderr_stream ? *ctx.stderr_stream : std::cerr};
}

RunConfig config_from_context(const Context& ctx)
{
    if (!ctx.config)
        throw ConfigError("", "--config is required for this command");
    RunConfig config = load_run_config(*ctx.config);
    if (ctx.seed)
        config.seed = *ctx.seed;
    return config;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

void emit_json(const Context& ctx, const std::string& name, const json& j)
{
    std::filesystem::create_directories(ctx.out);
    write_atomic(ctx.out / name, dump(j));
    streams(ctx).out << dump(j);
}

// Wraps a command body, mapping exceptions to exit codes.
template <class Fn>
int guarded(const Context& ctx, Fn&& fn)
{
    auto [out, err] = streams(ctx);
    (void)out;
    try
    {
        return fn();
    }
    catch (const ConfigError& e)
    {
        err << "config error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": "
            << std::string(e.what()).substr(e.pointer().size() + 2) << '\n';
        return exit_config;
    }
    catch (const nlohmann::json::exception& e)
    {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const DomainError& e)
    {
        err << "domain error: " << e.what() << '\n';
        return exit_domain;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    }
}

void check_initial_point(const SynthesisArtifacts& art, const Vector& x0)
{
    if (x0.size() != art.dim())
        throw ConfigError("/x0", "expected " + std::to_string(art.dim()) + " entries");
    const double theta0 = solve_theta(art, x0);
    if (theta0 > art.c)
        throw DomainError("initial point outside solvability ellipsoid: theta(x0) = " +
                          format_double(theta0) + " > c = " + format_double(art.c));
}

void write_trajectory(const Context& ctx, const std::string& stem, const Trajectory& traj)
{
    std::filesystem::create_directories(ctx.out);
    if (ctx.format == Format::Csv)
        write_atomic(ctx.out / (stem + ".csv"), trajectory_csv(traj));
    else
        write_atomic(ctx.out / (stem + ".json"), dump(trajectory_json(traj)));
    if (ctx.plot)
    {
        write_atomic(ctx.out / (stem + "_theta.svg"), render_svg(theta_plot(traj)));
        write_atomic(ctx.out / (stem + "_control.svg"), render_svg(control_norm_plot(traj)));
        write_atomic(ctx.out / (stem + "_phase.svg"), render_svg(phase_plot(traj)));
    }
}

bool k_is_zero(const Matrix& K)
{
    return K.size() == 0 || K.cwiseAbs().maxCoeff() == 0.0;
}

} // namespace

json number(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

json matrix_json(const Matrix& M)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(number(M(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

RunConfig parse_run_config(const json& doc)
{
    if (!doc.is_object())
        throw ConfigError("", "expected a JSON object");
    RunConfig out;
    const json& blocks = field(doc, "blocks", "");
    if (!blocks.is_array() || blocks.empty())
        throw ConfigError("/blocks", "expected a nonempty array of block sizes");
    for (std::size_t i = 0; i < blocks.size(); ++i)
        out.blocks.push_back(as_int(blocks[i], "/blocks/" + std::to_string(i)));
    const BlockStructure structure =
        rethrow_as_config("/blocks", [&] { return BlockStructure(out.blocks); });
    if (structure.largest() > max_block_size)
        throw ConfigError("/blocks", "block sizes above " + std::to_string(max_block_size) +
                                         " are not supported");
    const int n = structure.dim();

    out.K = doc.contains("K") ? as_matrix(doc.at("K"), n, "/K") : Matrix::Zero(n, n);
    rethrow_as_config("/K", [&] { return CanonicalSystem::make(structure, out.K); });

    if (doc.contains("perturbation"))
        out.perturbation = parse_perturbation(doc.at("perturbation"), n, "/perturbation");
    else
        out.perturbation.family = "none";

    if (doc.contains("gamma"))
        out.gamma = as_number(doc.at("gamma"), "/gamma");
    if (!(out.gamma > 0.0 && out.gamma < 1.0))
        throw ConfigError("/gamma", "must lie in (0, 1)");

    if (doc.contains("c"))
    {
        const json& c = doc.at("c");
        if (c.is_string())
        {
            if (c.get<std::string>() != "auto")
                throw ConfigError("/c", "expected a number or \"auto\"");
        }
        else
        {
            out.c = as_number(c, "/c");
            if (!(*out.c > 0.0))
                throw ConfigError("/c", "must be positive");
        }
    }
    if (doc.contains("a0"))
    {
        const json& a0 = doc.at("a0");
        if (a0.is_string())
        {
            if (a0.get<std::string>() != "max")
                throw ConfigError("/a0", "expected a number or \"max\"");
        }
        else
        {
            out.a0 = as_number(a0, "/a0");
            if (!(*out.a0 > 0.0) || !std::isfinite(*out.a0))
                throw ConfigError("/a0", "must be positive and finite");
        }
    }
    if (doc.contains("x0"))
    {
        out.x0 = as_vector(doc.at("x0"), "/x0");
        if (out.x0->size() != n)
            throw ConfigError("/x0", "expected " + std::to_string(n) + " entries");
    }
    if (doc.contains("integrator"))
        out.integrator = parse_integrator(doc.at("integrator"), "/integrator");
    if (doc.contains("mode"))
        out.mode = rethrow_as_config(
            "/mode", [&] { return simulation_mode_from_string(as_string(doc.at("mode"), "/mode")); });
    if (doc.contains("seed"))
    {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("/seed", "expected a nonnegative integer");
        out.seed = s.get<unsigned long long>();
    }
    if (doc.contains("sweep"))
    {
        const json& sw = doc.at("sweep");
        const std::string ptr = sw.is_object() ? "/sweep/scales" : "/sweep";
        const Vector scales = as_vector(sw.is_object() ? field(sw, "scales", "/sweep") : sw, ptr);
        if (scales.size() == 0)
            throw ConfigError(ptr, "expected at least one scale");
        out.sweep_scales.assign(scales.data(), scales.data() + scales.size());
        for (std::size_t i = 0; i < out.sweep_scales.size(); ++i)
            if (!(std::abs(out.sweep_scales[i]) <= 1.0))
                throw ConfigError(ptr + "/" + std::to_string(i), "scales must lie in [-1, 1]");
    }
    return out;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file " + path.string());
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

Resolved resolve(const RunConfig& config)
{
    const BlockStructure blocks(config.blocks);
    const CanonicalSystem system = CanonicalSystem::make(blocks, config.K);
    const PerturbationConfig& pc = config.perturbation;
    const Mask mask = build_perturbation_mask(blocks, pc.kind);
    const int n1 = blocks.largest();
    std::vector<std::string> warnings;

    // Support of the realized perturbation.
    Mask support = Mask::Constant(blocks.dim(), blocks.dim(), false);
    if (pc.family == "random" || (pc.family != "none" && pc.terms.empty()))
        support = mask;
    else if (pc.family != "none")
        for (std::size_t i = 0; i < pc.terms.size(); ++i)
        {
            const TermConfig& t = pc.terms[i];
            if (!mask(t.row, t.col))
                throw ConfigError("/perturbation/terms/" + std::to_string(i),
                                  "entry (" + std::to_string(t.row + 1) + "," +
                                      std::to_string(t.col + 1) + ") is outside the " +
                                      to_string(pc.kind) + " mask");
            support(t.row, t.col) = true;
        }
    if (pc.family == "random" && !pc.terms.empty())
        warnings.push_back("random family ignores the listed terms");

    // F, F1 and the comparison matrix do not depend on c or a0.
    const SynthesisArtifacts probe = synthesize(system, {1.0, config.gamma, 1.0});
    const double rho = robustness_bound(probe, support, pc.kind).rho_gtilde;
    const MarginMode mode = margin_mode(pc.kind);

    double c = 0.0;
    std::optional<double> delta = pc.delta;
    if (config.c)
    {
        c = *config.c;
    }
    else
    {
        if (!delta && mode == MarginMode::SuperdiagonalGlobal)
            delta = delta_margin(config.gamma, rho, mode, 1.0, n1);
        if (!delta)
            throw ConfigError("/c", "\"auto\" needs a numeric perturbation delta in the general mode");
        if (*delta * rho > 0.0 && std::isfinite(*delta))
            c = domain_radius(config.gamma, *delta, rho, n1);
        else if (k_is_zero(config.K))
            c = std::numeric_limits<double>::infinity();
        else
            throw ConfigError("/c", "\"auto\" is unbounded without a perturbation; give c explicitly");
    }
    if (!std::isfinite(c) && !k_is_zero(config.K))
        throw ConfigError("/c", "an unbounded domain requires K = 0");

    const SynthesisArtifacts art = synthesize(system, {c, config.gamma, config.a0});
    if (art.a0 > art.a0_bound * (1.0 + 1e-12))
        warnings.push_back("a0 = " + format_double(art.a0) + " exceeds a0_max = " +
                           format_double(art.a0_bound) + "; the control bound is not certified");
    RobustnessBound bound = robustness_bound(art, support, pc.kind);
    if (!delta)
        delta = bound.delta;
    if (std::isfinite(bound.delta) && *delta > bound.delta * (1.0 + 1e-12))
        warnings.push_back("declared delta = " + format_double(*delta) +
                           " exceeds the certified margin " + format_double(bound.delta));

    const double d = std::isfinite(*delta) ? *delta : 0.0;
    std::optional<PerturbationSpec> pert;
    if (pc.family == "none" || d == 0.0)
    {
        pert = PerturbationSpec::zero(blocks, pc.kind);
    }
    else if (pc.family == "random")
    {
        pert = random_perturbation(blocks, pc.kind, d, config.seed);
    }
    else
    {
        const Family fallback = family_of(pc.family, "/perturbation/family");
        std::vector<PerturbationTerm> terms;
        auto add = [&](const TermConfig& t) {
            PerturbationTerm term;
            term.row = t.row;
            term.col = t.col;
            term.family = t.family.value_or(fallback);
            term.amplitude = t.amplitude.value_or(d);
            term.omega = t.omega;
            term.phase = t.phase;
            term.state = t.state;
            terms.push_back(term);
        };
        if (pc.terms.empty())
        {
            for (int m = 0; m < mask.rows(); ++m)
                for (int j = 0; j < mask.cols(); ++j)
                    if (mask(m, j))
                        add(TermConfig{m, j, std::nullopt, std::nullopt, 1.0, 0.0, j});
        }
        else
        {
            for (const auto& t : pc.terms)
                add(t);
        }
        pert = rethrow_as_config("/perturbation",
                                 [&] { return builtin_perturbation(blocks, pc.kind, d, terms); });
    }
    return Resolved{config, art, bound, *pert, d, std::move(warnings)};
}

json provenance(const Resolved& r)
{
    return json{{"version", version},
                {"a0", number(r.art.a0)},
                {"a0_max", number(r.art.a0_bound)},
                {"c", number(r.art.c)},
                {"Delta", number(r.bound.delta)},
                {"delta_declared", number(r.delta)},
                {"gamma", r.art.gamma},
                {"seed", r.config.seed}};
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::ostringstream os;
    const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
    const int r = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().u.size());
    os << 't';
    for (int i = 1; i <= n; ++i)
        os << ",x" << i;
    os << ",theta";
    for (int i = 1; i <= r; ++i)
        os << ",u" << i;
    os << ",theta_dot\n";
    for (const auto& s : traj.samples)
    {
        os << format_double(s.t);
        for (int i = 0; i < n; ++i)
            os << ',' << format_double(s.x(i));
        os << ',' << format_double(s.theta);
        for (int i = 0; i < r; ++i)
            os << ',' << format_double(s.u(i));
        os << ',' << format_double(s.theta_dot) << '\n';
    }
    return os.str();
}

json trajectory_json(const Trajectory& traj)
{
    json samples = json::array();
    for (const auto& s : traj.samples)
        samples.push_back({{"t", s.t},
                           {"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
                           {"theta", s.theta},
                           {"u", std::vector<double>(s.u.data(), s.u.data() + s.u.size())},
                           {"theta_dot", number(s.theta_dot)}});
    return json{{"mode", to_string(traj.mode)}, {"terminal", to_string(traj.terminal)}, {"samples", samples}};
}

json summary_json(const Trajectory& traj, double gamma)
{
    const TrajectorySummary s = summarize(traj, gamma);
    json violations = json::array();
    for (const auto& v : traj.violations)
        violations.push_back({{"t", v.t}, {"row", v.row + 1}, {"col", v.col + 1}, {"value", v.value}});
    return json{{"T", number(s.settling_time)},
                {"max_u_norm", s.max_u_norm},
                {"min_theta_dot", number(s.min_theta_dot)},
                {"max_theta_dot", number(s.max_theta_dot)},
                {"terminal", to_string(s.terminal)},
                {"theta0", s.theta0},
                {"bound", s.time_bound},
                {"mode", to_string(traj.mode)},
                {"accepted_steps", traj.accepted_steps},
                {"rejected_steps", traj.rejected_steps},
                {"delta_limit", number(traj.delta_limit)},
                {"violation_count", traj.violation_count},
                {"violations", violations}};
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DomainError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw DomainError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::filesystem::remove(tmp);
        throw DomainError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

int cmd_synth(const Context& ctx)
{
    return guarded(ctx, [&] {
        const Resolved r = resolve(config_from_context(ctx));
        json report = provenance(r);
        report["command"] = "synth";
        report["blocks"] = r.config.blocks;
        report["mask"] = to_string(r.config.perturbation.kind);
        report["F"] = matrix_json(r.art.F);
        report["F_inverse"] = matrix_json(r.art.Finv);
        report["F1"] = matrix_json(r.art.F1);
        report["rho_gtilde"] = number(r.bound.rho_gtilde);
        report["gtilde"] = matrix_json(r.bound.gtilde);
        report["margin_mode"] = to_string(r.bound.mode);
        json notes = json::array();
        if (r.config.blocks.size() == 1 && r.config.blocks[0] == 1 && k_is_zero(r.config.K))
            notes.push_back("scalar case: theta(x) = |x| / sqrt(a0)");
        if (!std::isfinite(r.bound.delta))
            notes.push_back("empty perturbation support: Delta is unbounded");
        report["notes"] = notes;
        report["warnings"] = r.warnings;
        emit_json(ctx, "synth.json", report);
        return int(exit_ok);
    });
}

int cmd_delta(const Context& ctx)
{
    return guarded(ctx, [&] {
        const Resolved r = resolve(config_from_context(ctx));
        json report = provenance(r);
        report["command"] = "delta";
        report["mask"] = to_string(r.config.perturbation.kind);
        report["margin_mode"] = to_string(r.bound.mode);
        report["rho_gtilde"] = number(r.bound.rho_gtilde);
        report["gtilde"] = matrix_json(r.bound.gtilde);
        report["admissible"] = !std::isfinite(r.bound.delta) || r.delta <= r.bound.delta * (1.0 + 1e-12);
        report["warnings"] = r.warnings;
        emit_json(ctx, "delta.json", report);
        return int(exit_ok);
    });
}

int cmd_simulate(const Context& ctx)
{
    return guarded(ctx, [&] {
        const Resolved r = resolve(config_from_context(ctx));
        if (!r.config.x0)
            throw ConfigError("/x0", "required field missing");
        check_initial_point(r.art, *r.config.x0);
        const Trajectory traj =
            simulate(r.art, r.perturbation, *r.config.x0, r.config.mode, r.config.integrator);
        write_trajectory(ctx, "trajectory", traj);
        json summary = summary_json(traj, r.art.gamma);
        summary.update(provenance(r));
        summary["command"] = "simulate";
        summary["warnings"] = r.warnings;
        emit_json(ctx, "summary.json", summary);
        return traj.complete() && traj.violation_count == 0 ? int(exit_ok) : int(exit_certification);
    });
}

int cmd_sweep(const Context& ctx)
{
    return guarded(ctx, [&] {
        const Resolved r = resolve(config_from_context(ctx));
        if (!r.config.x0)
            throw ConfigError("/x0", "required field missing");
        check_initial_point(r.art, *r.config.x0);
        const PerturbationSpec base = r.perturbation;
        const SweepResult result = sweep(
            r.art, [&base](double s) { return base.scaled(s); }, *r.config.x0, r.config.sweep_scales,
            r.config.mode, r.config.integrator);

        bool ok = true;
        json entries = json::array();
        std::ostringstream csv;
        csv << "scale,T,theta0,bound,max_u_norm,min_theta_dot,max_theta_dot,terminal,violations,error\n";
        for (const auto& e : result.entries)
        {
            ok = ok && e.error.empty() && e.summary && e.summary->violation_count == 0;
            json entry{{"scale", e.parameter}, {"error", e.error}};
            csv << format_double(e.parameter);
            if (e.summary)
            {
                const auto& s = *e.summary;
                entry.update({{"T", number(s.settling_time)},
                              {"theta0", s.theta0},
                              {"bound", s.time_bound},
                              {"max_u_norm", s.max_u_norm},
                              {"min_theta_dot", s.min_theta_dot},
                              {"max_theta_dot", s.max_theta_dot},
                              {"terminal", to_string(s.terminal)},
                              {"violations", s.violation_count}});
                csv << ',' << format_double(s.settling_time) << ',' << format_double(s.theta0) << ','
                    << format_double(s.time_bound) << ',' << format_double(s.max_u_norm) << ','
                    << format_double(s.min_theta_dot) << ',' << format_double(s.max_theta_dot) << ','
                    << to_string(s.terminal) << ',' << s.violation_count;
            }
            else
            {
                csv << ",,,,,,,,";
            }
            // Errors are free text; keep the CSV well-formed.
            std::string err = e.error;
            for (char& ch : err)
                if (ch == ',' || ch == '\n')
                    ch = ';';
            csv << ',' << err << '\n';
            entries.push_back(std::move(entry));
        }
        std::filesystem::create_directories(ctx.out);
        if (ctx.format == Format::Csv)
            write_atomic(ctx.out / "sweep.csv", csv.str());
        json report = provenance(r);
        report["command"] = "sweep";
        report["entries"] = entries;
        report["T_min"] = number(result.min_settling_time);
        report["T_max"] = number(result.max_settling_time);
        report["warnings"] = r.warnings;
        emit_json(ctx, "sweep.json", report);
        return ok ? int(exit_ok) : int(exit_certification);
    });
}

int cmd_verify(const Context& ctx)
{
    return guarded(ctx, [&] {
        Certificate cert;
        json report;
        if (ctx.config)
        {
            const Resolved r = resolve(config_from_context(ctx));
            std::vector<double> thetas{0.1, 0.5, 1.0, 2.0};
            if (std::isfinite(r.art.c))
                thetas.push_back(r.art.c);
            cert.append(check_identities(r.art, thetas));
            cert.append(check_total_positivity(std::min(r.art.blocks().largest(), 5)));
            if (r.config.x0)
            {
                check_initial_point(r.art, *r.config.x0);
                const Trajectory traj =
                    simulate(r.art, r.perturbation, *r.config.x0, r.config.mode, r.config.integrator);
                if (traj.complete())
                {
                    cert.append(certify_trajectory(traj, r.art, r.art.gamma, r.bound.delta));
                }
                else
                {
                    Check c;
                    c.name = "trajectory.terminal";
                    c.status = CheckStatus::Fail;
                    c.reference = "trajectory ended with " + to_string(traj.terminal);
                    cert.checks.push_back(c);
                }
            }
            report = provenance(r);
        }
        else
        {
            const Expectations exp = load_expectations(ctx.expectations.value_or(default_expectations_path()));
            const pendulum::Case1Params p;
            const pendulum::PendulumCase pc = pendulum::build_case1(p, p.k_max);
            const double c = pendulum::solvability_radius_case1(p, p.k_max, p.gamma);
            const SynthesisArtifacts art = synthesize(pc.system, {c, p.gamma, std::nullopt});
            cert.append(check_identities(art, {0.1, 0.5, 1.0, 2.0, c}));
            cert.append(check_total_positivity(5));
            cert.append(check_pendulum_reproduction(exp, ReproductionOptions{}));
            report = json{{"version", version}, {"expectations_version", exp.version}};
        }
        report["command"] = "verify";
        report["certificate"] = to_json(cert);
        std::filesystem::create_directories(ctx.out);
        write_atomic(ctx.out / "certificate.json", dump(report));
        print_table(streams(ctx).out, cert);
        return cert.passed() ? int(exit_ok) : int(exit_certification);
    });
}

int cmd_pendulum(const Context& ctx, const PendulumOptions& options)
{
    return guarded(ctx, [&] {
        std::optional<pendulum::PendulumCase> pc;
        double c = 0.0;
        double gamma = 0.0;
        json params;
        if (options.which == "case1")
        {
            const pendulum::Case1Params p;
            const double k0 = options.k0.value_or(p.k_max);
            if (!(k0 >= 0.0 && k0 <= p.k_max))
                throw ConfigError("/k0", "must lie in [0, " + format_double(p.k_max) + "]");
            pc = pendulum::build_case1(p, k0);
            c = pendulum::solvability_radius_case1(p, p.k_max, p.gamma);
            gamma = p.gamma;
            params = {{"k0", k0}, {"k_max", p.k_max}};
        }
        else if (options.which == "case2")
        {
            const pendulum::Case2Params p;
            const double l = options.length.value_or(p.l_min);
            if (!(l >= p.l_min) || !std::isfinite(l))
                throw ConfigError("/length", "must be finite and at least " + format_double(p.l_min));
            pc = pendulum::build_case2(p, l);
            c = pendulum::solvability_radius_case2(p.l_min, p.gamma, p.g);
            gamma = p.gamma;
            params = {{"length", l}, {"l_min", p.l_min}};
        }
        else
        {
            throw ConfigError("/case", "expected case1 or case2");
        }
        if (options.c)
        {
            if (!(*options.c > 0.0 && *options.c <= c))
                throw ConfigError("/c", "must lie in (0, " + format_double(c) + "], the certified radius");
            c = *options.c;
        }
        const SynthesisArtifacts art = synthesize(pc->system, {c, gamma, options.a0});
        const RobustnessBound bound = robustness_bound(art, pc->perturbation.support(), MaskKind::General);
        const Vector x0 = pendulum::default_initial_state();
        check_initial_point(art, x0);
        const Trajectory traj = simulate(art, pc->perturbation, x0, options.mode, IntegratorConfig{});
        const std::string stem = "pendulum_" + options.which;
        write_trajectory(ctx, stem, traj);

        json summary = summary_json(traj, gamma);
        summary.update({{"version", version},
                        {"command", "pendulum"},
                        {"case", options.which},
                        {"parameters", params},
                        {"a0", art.a0},
                        {"a0_max", art.a0_bound},
                        {"c", c},
                        {"Delta", pc->perturbation.bound()},
                        {"Delta_gtilde", number(bound.delta)},
                        {"rho_gtilde", bound.rho_gtilde},
                        {"gamma", gamma}});
        int code = exit_ok;
        if (traj.complete())
        {
            const Certificate cert = certify_trajectory(traj, art, gamma, pc->perturbation.bound());
            summary["certificate"] = to_json(cert);
            if (!cert.passed())
                code = exit_certification;
        }
        else
        {
            code = exit_certification;
        }
        emit_json(ctx, stem + "_summary.json", summary);
        return code;
    });
}

} // namespace cfs::cli
