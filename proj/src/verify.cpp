#include "cfsynth/verify.hpp"

#include "cfsynth/pendulum.hpp"
#include "cfsynth/rational.hpp"
#include "cfsynth/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cfs
{

std::string to_string(CheckStatus status)
{
    switch (status)
    {
    case CheckStatus::Pass:
        return "pass";
    case CheckStatus::Fail:
        return "fail";
    case CheckStatus::Warn:
        return "warn";
    }
    return "fail";
}

bool Certificate::passed() const
{
    return count(CheckStatus::Fail) == 0;
}

std::size_t Certificate::count(CheckStatus status) const
{
    return static_cast<std::size_t>(std::count_if(
        checks.begin(), checks.end(), [status](const Check& c) { return c.status == status; }));
}

const Check* Certificate::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

Check& Certificate::require_at_most(std::string name, double measured, double threshold,
                                    std::string reference)
{
    Check c;
    c.name = std::move(name);
    c.measured = measured;
    c.threshold = threshold;
    c.reference = std::move(reference);
    c.status = measured <= threshold ? CheckStatus::Pass : CheckStatus::Fail;
    checks.push_back(std::move(c));
    return checks.back();
}

void Certificate::append(const Certificate& other)
{
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

namespace
{

nlohmann::json number(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

double max_abs(const Matrix& M)
{
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

double relative_gap(const Matrix& a, const Matrix& b)
{
    return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

} // namespace

nlohmann::json to_json(const Certificate& cert)
{
    nlohmann::json out;
    out["overall"] = cert.passed() ? "pass" : "fail";
    out["counts"] = {{"pass", cert.count(CheckStatus::Pass)},
                     {"fail", cert.count(CheckStatus::Fail)},
                     {"warn", cert.count(CheckStatus::Warn)}};
    auto& list = out["checks"] = nlohmann::json::array();
    for (const auto& c : cert.checks)
    {
        nlohmann::json entry{{"name", c.name},
                             {"status", to_string(c.status)},
                             {"measured", number(c.measured)},
                             {"threshold", number(c.threshold)},
                             {"reference", c.reference}};
        if (!c.details.empty())
        {
            nlohmann::json details = nlohmann::json::object();
            for (const auto& [key, value] : c.details)
                details[key] = number(value);
            entry["details"] = std::move(details);
        }
        list.push_back(std::move(entry));
    }
    return out;
}

void print_table(std::ostream& os, const Certificate& cert)
{
    std::size_t width = 5;
    for (const auto& c : cert.checks)
        width = std::max(width, c.name.size());
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::left << std::setw(static_cast<int>(width)) << "check"
       << "  status  " << std::setw(14) << "measured" << "  threshold\n";
    os << std::setprecision(6);
    for (const auto& c : cert.checks)
    {
        os << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(6)
           << to_string(c.status) << "  " << std::setw(14) << c.measured << "  " << c.threshold
           << '\n';
        for (const auto& [key, value] : c.details)
            os << "    " << key << " = " << value << '\n';
    }
    os << "overall: " << (cert.passed() ? "pass" : "fail") << " (" << cert.count(CheckStatus::Pass)
       << " pass, " << cert.count(CheckStatus::Fail) << " fail, " << cert.count(CheckStatus::Warn)
       << " warn)\n";
    os.flags(flags);
    os.precision(precision);
}

Certificate check_identities(const SynthesisArtifacts& art, const std::vector<double>& thetas)
{
    constexpr double tol = 1e-10;
    Certificate cert;
    const BlockStructure& blocks = art.blocks();
    const Matrix& A0 = art.system.A0;
    const Matrix& B0 = art.system.B0;
    const Matrix& F = art.F;

    const Matrix lyapunov = F * A0 + A0.transpose() * F - F * B0 * B0.transpose() * F;
    cert.require_at_most("identity.lyapunov", relative_gap(lyapunov, -art.F1), tol,
                         "F A0 + A0' F - F B0 B0' F = -F1");

    double conj_gap = 0.0;
    double input_gap = 0.0;
    for (double theta : thetas)
    {
        const Vector d = build_D(blocks, theta);
        const Matrix conj = d.asDiagonal() * A0 * d.cwiseInverse().asDiagonal();
        conj_gap = std::max(conj_gap, relative_gap(conj, A0 / theta));
        const Matrix bd = B0.transpose() * d.asDiagonal();
        input_gap = std::max(input_gap, relative_gap(bd, B0.transpose() / std::sqrt(theta)));
    }
    cert.require_at_most("identity.d_conjugation", conj_gap, tol,
                         "D(theta) A0 D(theta)^-1 = A0 / theta");
    cert.require_at_most("identity.input_scaling", input_gap, tol,
                         "B0' D(theta) = theta^(-1/2) B0'");

    Matrix entrywise = Matrix::Zero(F.rows(), F.cols());
    double min_entry = std::numeric_limits<double>::infinity();
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int off = blocks.offset(i);
        const int ni = blocks.size(i);
        for (int m = 1; m <= ni; ++m)
            for (int j = 1; j <= ni; ++j)
            {
                const double f = F(off + m - 1, off + j - 1);
                entrywise(off + m - 1, off + j - 1) = (2.0 * ni - m - j + 2.0) * f;
                min_entry = std::min(min_entry, f);
            }
    }
    const Matrix algebraic = F - F * art.H - art.H * F;
    cert.require_at_most("identity.f1_formulas", relative_gap(algebraic, entrywise), tol,
                         "F - F H - H F = ((2 n_i - m - j + 2) f_mj)");
    cert.require_at_most("identity.f1_matches_artifact", relative_gap(art.F1, entrywise), tol,
                         "stored F1 equals the entrywise formula");

    Check& positivity = cert.require_at_most("identity.f_positive", -min_entry, 0.0,
                                             "every entry of each diagonal block of F is positive");
    if (min_entry <= 0.0)
        positivity.status = CheckStatus::Fail;
    positivity.details.emplace_back("min_entry", min_entry);

    // Normwise residual: for the larger blocks cond(F) passes 1e12, so an
    // entrywise gap against I would measure conditioning, not the inverse.
    const auto inf_norm = [](const Matrix& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); };
    const Matrix residual = F * art.Finv - Matrix::Identity(F.rows(), F.cols());
    Check& inv = cert.require_at_most("identity.f_inverse",
                                      inf_norm(residual) / (inf_norm(F) * inf_norm(art.Finv)), tol,
                                      "|F F^-1 - I| / (|F| |F^-1|), infinity norms");
    inv.details.emplace_back("entrywise_gap", residual.cwiseAbs().maxCoeff());
    return cert;
}

namespace
{

// Cauchy determinant prod_{m>j}(x_m - x_j)(y_m - y_j) / prod_{m,j}(x_m + y_j).
Rational cauchy_determinant(const std::vector<Rational>& xs, const std::vector<Rational>& ys)
{
    Rational num = 1;
    Rational den = 1;
    const std::size_t s = xs.size();
    for (std::size_t m = 0; m < s; ++m)
    {
        for (std::size_t j = 0; j < m; ++j)
            num *= (xs[m] - xs[j]) * (ys[m] - ys[j]);
        for (std::size_t j = 0; j < s; ++j)
            den *= xs[m] + ys[j];
    }
    return num / den;
}

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i)
        idx[i] = i;
    while (true)
    {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i)
            --i;
        if (i < 0)
            return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

Certificate check_total_positivity(int n_max)
{
    if (n_max < 1 || n_max > 5)
        throw DomainError("total positivity enumeration supports block sizes 1..5");
    Certificate cert;
    for (int n = 1; n <= n_max; ++n)
    {
        const RationalMatrix kernel = gram_kernel_block(n);
        Rational smallest = 1;
        long long minors = 0;
        for (int k = 1; k <= n; ++k)
            for_each_subset(n, k, [&](const std::vector<int>& rows) {
                for_each_subset(n, k, [&](const std::vector<int>& cols) {
                    const Rational det = determinant(submatrix(kernel, rows, cols));
                    if (minors == 0 || det < smallest)
                        smallest = det;
                    ++minors;
                });
            });
        Check& c = cert.require_at_most("total_positivity.n" + std::to_string(n) + ".minors",
                                        -smallest.convert_to<double>(), 0.0,
                                        "all minors of 1/((2n-m-j+1)(2n-m-j+2)) are positive");
        c.status = smallest > 0 ? CheckStatus::Pass : CheckStatus::Fail;
        c.details.emplace_back("minor_count", static_cast<double>(minors));
        c.details.emplace_back("smallest_minor", smallest.convert_to<double>());

        // Consecutive minors of 1/(2n-m-j+1) and 1/(2n-m-j+2): exact
        // determinant against the Cauchy closed form.
        bool cauchy_ok = true;
        for (int shift = 1; shift <= 2; ++shift)
            for (int s = 1; s <= n; ++s)
                for (int r0 = 0; r0 + s <= n; ++r0)
                    for (int c0 = 0; c0 + s <= n; ++c0)
                    {
                        RationalMatrix sub(s, s);
                        std::vector<Rational> xs(s), ys(s);
                        for (int a = 0; a < s; ++a)
                        {
                            const int m = r0 + a + 1;
                            const int j = c0 + a + 1;
                            xs[a] = n - m;
                            ys[a] = n - j + shift;
                        }
                        for (int a = 0; a < s; ++a)
                            for (int b = 0; b < s; ++b)
                                sub(a, b) = 1 / (xs[a] + ys[b]);
                        const Rational det = determinant(sub);
                        if (det != cauchy_determinant(xs, ys) || det <= 0)
                            cauchy_ok = false;
                    }
        Check cauchy;
        cauchy.name = "total_positivity.n" + std::to_string(n) + ".cauchy_factors";
        cauchy.status = cauchy_ok ? CheckStatus::Pass : CheckStatus::Fail;
        cauchy.measured = cauchy_ok ? 0.0 : 1.0;
        cauchy.reference = "consecutive minors of both Cauchy factors equal the closed-form determinant and are positive";
        cert.checks.push_back(cauchy);

        const RationalMatrix F = inverse(gram_inverse_block(n));
        Rational min_entry = F(0, 0);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j)
                min_entry = std::min(min_entry, F(m, j));
        Check& sign = cert.require_at_most("total_positivity.n" + std::to_string(n) + ".f_entries",
                                           -min_entry.convert_to<double>(), 0.0,
                                           "the exact inverse Gramian block is entrywise positive");
        sign.status = min_entry > 0 ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return cert;
}

std::vector<double> finite_difference_theta_dot(const Trajectory& traj)
{
    const auto& s = traj.samples;
    std::vector<double> out(s.size(), 0.0);
    if (s.size() < 2)
        return out;
    const std::size_t last = s.size() - 1;
    out[0] = (s[1].theta - s[0].theta) / (s[1].t - s[0].t);
    out[last] = (s[last].theta - s[last - 1].theta) / (s[last].t - s[last - 1].t);
    for (std::size_t i = 1; i < last; ++i)
        out[i] = (s[i + 1].theta - s[i - 1].theta) / (s[i + 1].t - s[i - 1].t);
    return out;
}

Certificate certify_trajectory(const Trajectory& traj, const SynthesisArtifacts& art, double gamma,
                               double delta)
{
    if (!traj.complete() || traj.samples.size() < 2)
        throw DomainError("trajectory did not reach the origin (" + to_string(traj.terminal) + ")");

    Certificate cert;
    const std::vector<double> fd = finite_difference_theta_dot(traj);
    const double fd_max = *std::max_element(fd.begin(), fd.end());
    cert.require_at_most("trajectory.theta_decay", fd_max, -gamma + 5e-3,
                         "finite-difference theta' <= -gamma along the run");

    double u_max = 0.0;
    for (const auto& s : traj.samples)
        u_max = std::max(u_max, s.u.norm());
    cert.require_at_most("trajectory.control_bound", u_max, 1.0 + 1e-9, "|u(t)| <= 1");

    Check& time = cert.require_at_most("trajectory.time_bound", traj.settling_time,
                                       traj.theta0 / gamma, "T <= theta(x0) / gamma");
    time.details.emplace_back("theta0", traj.theta0);

    Check& viol = cert.require_at_most("trajectory.delta_violations",
                                       static_cast<double>(traj.violation_count), 0.0,
                                       "no perturbation entry exceeded the certified bound");
    viol.details.emplace_back("screened_bound", traj.delta_limit);
    viol.details.emplace_back("certified_delta", delta);
    if (traj.delta_limit > delta * (1.0 + 1e-12))
        viol.status = CheckStatus::Fail;
    if (!traj.violations.empty())
    {
        viol.details.emplace_back("first_t", traj.violations.front().t);
        viol.details.emplace_back("first_row", traj.violations.front().row + 1);
        viol.details.emplace_back("first_col", traj.violations.front().col + 1);
        viol.details.emplace_back("first_value", traj.violations.front().value);
    }

    if (traj.mode == SimulationMode::Augmented)
    {
        double gap = 0.0;
        for (const auto& s : traj.samples)
            gap = std::max(gap, std::abs(s.theta - solve_theta(art, s.x)));
        cert.require_at_most("trajectory.augmented_consistency", gap, 1e-6,
                             "integrated theta matches the re-solved controllability function");
    }

    // Strict decrease while theta is above the stopping level.
    double rise = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i)
        rise = std::max(rise, traj.samples[i + 1].theta - traj.samples[i].theta);
    cert.require_at_most("trajectory.theta_monotone", rise, 1e-8,
                         "theta strictly decreases between samples");
    return cert;
}

const Expectation& Expectations::at(const std::string& name) const
{
    for (const auto& e : entries)
        if (e.name == name)
            return e;
    throw DomainError("expectations file has no entry '" + name + "'");
}

double Expectations::input(const std::string& name) const
{
    const auto it = inputs.find(name);
    if (it == inputs.end())
        throw DomainError("expectations file has no input '" + name + "'");
    return it->second;
}

Expectations parse_expectations(const nlohmann::json& doc)
{
    Expectations out;
    out.version = doc.at("version").get<int>();
    if (doc.contains("inputs"))
        for (const auto& [key, value] : doc.at("inputs").items())
            out.inputs[key] = value.get<double>();
    if (doc.contains("displayed_gtilde"))
    {
        const auto& rows = doc.at("displayed_gtilde");
        const auto n = static_cast<Eigen::Index>(rows.size());
        out.displayed_gtilde.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (rows[i].size() != static_cast<std::size_t>(n))
                throw DomainError("displayed_gtilde must be square");
            for (Eigen::Index j = 0; j < n; ++j)
                out.displayed_gtilde(i, j) = rows[i][j].get<double>();
        }
    }
    for (const auto& item : doc.at("entries"))
    {
        Expectation e;
        e.name = item.at("name").get<std::string>();
        const std::string mode = item.value("mode", "abs");
        if (mode == "abs")
        {
            e.mode = Expectation::Mode::Absolute;
            e.expected = item.at("expected").get<double>();
            e.tolerance = item.at("tolerance").get<double>();
        }
        else if (mode == "truncate")
        {
            e.mode = Expectation::Mode::Truncate;
            e.expected = item.at("expected").get<double>();
            e.digits = item.at("digits").get<int>();
        }
        else if (mode == "range")
        {
            e.mode = Expectation::Mode::Range;
            e.lo = item.at("lo").get<double>();
            e.hi = item.at("hi").get<double>();
        }
        else
        {
            throw DomainError("unknown expectation mode '" + mode + "' for " + e.name);
        }
        e.warn_only = item.value("on_mismatch", "fail") == "warn";
        e.claim = item.value("claim", "");
        out.entries.push_back(std::move(e));
    }
    return out;
}

Expectations load_expectations(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open expectations file " + path.string());
    return parse_expectations(nlohmann::json::parse(in));
}

std::filesystem::path default_expectations_path()
{
    return std::filesystem::path(CFSYNTH_DATA_DIR) / "expectations.json";
}

Check compare(const Expectation& e, double measured)
{
    Check c;
    c.name = e.name;
    c.measured = measured;
    c.reference = e.claim;
    bool ok = false;
    switch (e.mode)
    {
    case Expectation::Mode::Absolute:
        c.threshold = e.tolerance;
        ok = std::abs(measured - e.expected) <= e.tolerance;
        c.details.emplace_back("expected", e.expected);
        c.details.emplace_back("abs_error", std::abs(measured - e.expected));
        break;
    case Expectation::Mode::Truncate: {
        const double scale = std::pow(10.0, e.digits);
        const double truncated = std::trunc(measured * scale) / scale;
        c.threshold = e.expected;
        ok = std::abs(truncated - e.expected) < 0.5 / scale;
        c.details.emplace_back("expected_leading_digits", e.expected);
        c.details.emplace_back("truncated", truncated);
        break;
    }
    case Expectation::Mode::Range:
        c.threshold = e.hi;
        ok = measured >= e.lo && measured <= e.hi;
        c.details.emplace_back("lo", e.lo);
        c.details.emplace_back("hi", e.hi);
        break;
    }
    c.status = ok ? CheckStatus::Pass : (e.warn_only ? CheckStatus::Warn : CheckStatus::Fail);
    return c;
}

Certificate check_pendulum_reproduction(const Expectations& exp, const ReproductionOptions& options)
{
    Certificate cert;
    const Vector x0 = pendulum::default_initial_state();

    // First case: unknown stiffness.
    {
        const pendulum::Case1Params p;
        const pendulum::PendulumCase pc = pendulum::build_case1(p, p.k_max);
        const SynthesisArtifacts at_reference =
            synthesize(pc.system, {exp.input("case1_c"), p.gamma, std::nullopt});
        Eigen::JacobiSVD<Matrix> finv_svd(at_reference.Finv);
        Eigen::JacobiSVD<Matrix> bf_svd(at_reference.system.B0.transpose() * at_reference.F);
        cert.checks.push_back(compare(exp.at("a0.numerator"), 2.0 / finv_svd.singularValues()(0)));
        cert.checks.push_back(compare(exp.at("a0.bf_norm"), bf_svd.singularValues()(0)));
        cert.checks.push_back(compare(exp.at("case1.a0_max"), at_reference.a0_bound));

        const double c = pendulum::solvability_radius_case1(p, p.k_max, p.gamma);
        cert.checks.push_back(compare(exp.at("case1.c"), c));

        SynthesisArtifacts quoted = at_reference;
        quoted.a0 = exp.input("case1_a0");
        cert.checks.push_back(compare(exp.at("case1.theta0"), solve_theta(quoted, x0)));

        const SynthesisArtifacts preset = synthesize(pc.system, {c, p.gamma, std::nullopt});
        const RobustnessBound bound =
            robustness_bound(preset, pc.perturbation.support(), MaskKind::General);

        // Comparison matrix: computed from its definition, never taken from print.
        Check rho;
        rho.name = "case1.rho_gtilde";
        rho.measured = bound.rho_gtilde;
        const Expectation& printed = exp.at("case1.rho_gtilde");
        rho.threshold = printed.expected;
        rho.reference = "spectral radius of |F1^-1| (F R~ + R~' F): computed vs displayed matrix vs printed value";
        rho.details.emplace_back("computed", bound.rho_gtilde);
        if (exp.displayed_gtilde.size() > 0)
        {
            rho.details.emplace_back("displayed_matrix", spectral_radius(exp.displayed_gtilde));
            Check same;
            same.name = "case1.gtilde_matches_display";
            same.reference = "computed comparison matrix equals the displayed one entrywise";
            same.measured = exp.displayed_gtilde.rows() == bound.gtilde.rows()
                                ? max_abs(bound.gtilde - exp.displayed_gtilde)
                                : std::numeric_limits<double>::infinity();
            same.threshold = 1e-12;
            same.status = same.measured <= same.threshold ? CheckStatus::Pass : CheckStatus::Fail;
            cert.checks.push_back(same);
        }
        rho.details.emplace_back("printed", printed.expected);
        rho.status = std::abs(bound.rho_gtilde - printed.expected) <= printed.tolerance
                         ? CheckStatus::Pass
                         : CheckStatus::Warn;
        cert.checks.push_back(rho);

        const double delta = pc.perturbation.bound();
        Check generic;
        generic.name = "case1.c_from_gtilde";
        generic.reference = "radius from the generic comparison-matrix bound (informational)";
        generic.measured = domain_radius(p.gamma, delta, bound.rho_gtilde, 2);
        generic.threshold = c;
        generic.status = generic.measured <= c ? CheckStatus::Pass : CheckStatus::Warn;
        generic.details.emplace_back("delta", delta);
        cert.checks.push_back(generic);

        // lambda_max(F1^-1 S(theta)) closed form at a sample of stiffness values.
        double worst = 0.0;
        for (double k : {0.5, 1.7, 4.0})
            for (double theta : {0.3, 1.0, 3.2})
            {
                const pendulum::PendulumCase probe = pendulum::build_case1(p, k);
                const Matrix R = probe.perturbation.evaluate(0.0, x0);
                const Matrix S = s_matrix(preset.F, build_D(preset.blocks(), theta), R, theta);
                const double numeric = generalized_eigen_range(S, preset.F1).second;
                const double closed = pendulum::case1_lambda_max(probe.r21, probe.r41, theta);
                worst = std::max(worst, std::abs(numeric - closed) / closed);
            }
        cert.require_at_most("case1.lambda_max_closed_form", worst, 1e-8,
                             "lambda_max(F1^-1 S) = (r21 + r41 + 2 sqrt(2 (r21^2 + r41^2))) theta^2 / 6");

        const SweepResult sweep_result = sweep(
            preset, [&](double k) { return pendulum::build_case1(p, k).perturbation; }, x0,
            options.stiffness_grid, SimulationMode::Algebraic, options.integrator);
        for (const auto& entry : sweep_result.entries)
        {
            if (!entry.error.empty())
            {
                Check failed;
                failed.name = "case1.sweep.k" + std::to_string(entry.parameter);
                failed.status = CheckStatus::Fail;
                failed.reference = entry.error;
                cert.checks.push_back(failed);
                continue;
            }
            if (entry.parameter == 0.0)
                cert.checks.push_back(compare(exp.at("case1.T_unperturbed"), entry.summary->settling_time));
            if (entry.parameter == p.k_max)
                cert.checks.push_back(compare(exp.at("case1.T_kmax"), entry.summary->settling_time));
        }
        cert.checks.push_back(compare(exp.at("case1.T_min"), sweep_result.min_settling_time));
        cert.checks.push_back(compare(exp.at("case1.T_max"), sweep_result.max_settling_time));
        cert.checks.push_back(compare(exp.at("case1.time_bound"), solve_theta(preset, x0) / p.gamma));

        for (double k : {0.0, p.k_max})
        {
            const pendulum::PendulumCase run = pendulum::build_case1(p, k);
            const Trajectory traj =
                simulate(preset, run.perturbation, x0, SimulationMode::Algebraic, options.integrator);
            Certificate sub = certify_trajectory(traj, preset, p.gamma, run.perturbation.bound());
            for (auto& check : sub.checks)
                check.name = "case1.k" + std::to_string(static_cast<int>(k)) + "." + check.name;
            cert.append(sub);
        }
    }

    // Second case: unknown length.
    {
        const pendulum::Case2Params p;
        const pendulum::PendulumCase pc = pendulum::build_case2(p, p.l_min);
        const double c = pendulum::solvability_radius_case2(p.l_min, p.gamma, p.g);
        cert.checks.push_back(compare(exp.at("case2.c"), c));

        const SynthesisArtifacts at_reference =
            synthesize(pc.system, {exp.input("case2_c"), p.gamma, std::nullopt});
        cert.checks.push_back(compare(exp.at("case2.a0_max"), at_reference.a0_bound));

        SynthesisArtifacts quoted = at_reference;
        quoted.a0 = exp.input("case2_a0");
        cert.checks.push_back(compare(exp.at("case2.theta0"), solve_theta(quoted, x0)));

        const SynthesisArtifacts preset = synthesize(pc.system, {c, p.gamma, std::nullopt});

        double worst = 0.0;
        for (double l : {30.0, 75.0, 300.0})
            for (double theta : {0.3, 1.0, 2.47})
            {
                const pendulum::PendulumCase probe = pendulum::build_case2(p, l);
                const Matrix R = probe.perturbation.evaluate(0.0, x0);
                const Matrix S = s_matrix(preset.F, build_D(preset.blocks(), theta), R, theta);
                const double numeric = generalized_eigen_range(S, preset.F1).second;
                const double closed = p.g * theta * theta / (2.0 * l);
                worst = std::max(worst, std::abs(numeric - closed) / closed);
            }
        cert.require_at_most("case2.lambda_max_closed_form", worst, 1e-8,
                             "lambda_max(F1^-1 S) = g theta^2 / (2 l)");

        const SweepResult sweep_result = sweep(
            preset, [&](double l) { return pendulum::build_case2(p, l).perturbation; }, x0,
            options.length_grid, SimulationMode::Algebraic, options.integrator);
        for (const auto& entry : sweep_result.entries)
        {
            if (!entry.error.empty())
            {
                Check failed;
                failed.name = "case2.sweep.l" + std::to_string(entry.parameter);
                failed.status = CheckStatus::Fail;
                failed.reference = entry.error;
                cert.checks.push_back(failed);
                continue;
            }
            if (entry.parameter == p.l_min)
                cert.checks.push_back(compare(exp.at("case2.T_lmin"), entry.summary->settling_time));
        }
        cert.checks.push_back(compare(exp.at("case2.T_min"), sweep_result.min_settling_time));
        cert.checks.push_back(compare(exp.at("case2.T_max"), sweep_result.max_settling_time));
        cert.checks.push_back(compare(exp.at("case2.time_bound"), solve_theta(preset, x0) / p.gamma));

        const Trajectory traj =
            simulate(preset, pc.perturbation, x0, SimulationMode::Algebraic, options.integrator);
        Certificate sub = certify_trajectory(traj, preset, p.gamma, pc.perturbation.bound());
        for (auto& check : sub.checks)
            check.name = "case2.lmin." + check.name;
        cert.append(sub);
    }
    return cert;
}

} // namespace cfs
