// Copyright 2026 The theta_lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 verification failures,
// 2 invalid input. Complex numbers travel as [re, im] pairs and matrices as
// row-major nested arrays.

#ifndef THETA_LAB_CLI_HPP
#define THETA_LAB_CLI_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "theta_lab/harness.hpp"
#include "theta_lab/identities.hpp"
#include "theta_lab/numerics.hpp"
#include "theta_lab/theta.hpp"

namespace theta_lab::cli
{

inline constexpr int exit_ok = 0;
inline constexpr int exit_failures = 1;
inline constexpr int exit_invalid = 2;

class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

using nlohmann::json;

// Inline JSON when the text starts with '[' or '{', otherwise a file path.
inline json load_json(const std::string &text, const std::string &what)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    try {
        if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
            return json::parse(text);
        }
        std::ifstream in(text);
        if (!in) {
            throw InputError(what + ": cannot open file '" + text + "'");
        }
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw InputError(what + ": malformed JSON (" + e.what() + ")");
    }
}

inline double parse_real(const json &j, const std::string &what)
{
    if (!j.is_number()) {
        throw InputError(what + ": expected a number");
    }
    return j.get<double>();
}

// A plain number or an [re, im] pair.
inline cplx parse_complex(const json &j, const std::string &what)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw InputError(what + ": expected a number or an [re, im] pair");
}

inline ComplexVector parse_complex_vector(const json &j, const std::string &what)
{
    if (!j.is_array()) {
        throw InputError(what + ": expected an array of [re, im] pairs");
    }
    ComplexVector out;
    for (const auto &e : j) {
        out.push_back(parse_complex(e, what));
    }
    return out;
}

inline RealVector parse_real_vector(const json &j, const std::string &what)
{
    if (!j.is_array()) {
        throw InputError(what + ": expected an array of numbers");
    }
    RealVector out;
    for (const auto &e : j) {
        out.push_back(parse_real(e, what));
    }
    return out;
}

inline bool is_pair(const json &j) { return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(); }

inline ComplexMatrix parse_square_matrix(const json &j, const std::string &what)
{
    if (!j.is_array() || j.empty()) {
        throw InputError(what + ": expected a non-empty array of rows");
    }
    const std::size_t n = j.size();
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n) {
            throw InputError(what + ": matrix must be square");
        }
        for (std::size_t k = 0; k < n; ++k) {
            m(i, k) = parse_complex(j[i][k], what);
        }
    }
    return m;
}

// Full [[[re,im],...],...] matrix, or the g = 1 shorthand [[re, im]].
inline RiemannMatrix parse_tau(const json &j)
{
    if (j.is_array() && j.size() == 1 && is_pair(j[0])) {
        return RiemannMatrix::scalar(parse_complex(j[0], "--tau"));
    }
    return RiemannMatrix::from_full(parse_square_matrix(j, "--tau"), 1e-12);
}

inline Characteristic parse_characteristic(const json &j)
{
    if (!j.is_object() || !j.contains("a") || !j.contains("b")) {
        throw InputError("--char: expected {\"a\": [...], \"b\": [...]}");
    }
    return {parse_real_vector(j["a"], "--char.a"), parse_real_vector(j["b"], "--char.b")};
}

// Full skew matrix, or the strict upper triangle read row by row.
inline SkewMatrix parse_skew(const json &j)
{
    if (!j.is_array() || j.empty()) {
        throw InputError("--matrix: expected a non-empty array");
    }
    const bool full = j[0].is_array() && (!is_pair(j[0]) || j[0].size() == j.size());
    if (full) {
        const ComplexMatrix m = parse_square_matrix(j, "--matrix");
        const std::size_t n = m.rows();
        double asym = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                asym = std::max(asym, std::abs(m(r, c) + m(c, r)));
            }
        }
        if (asym > 1e-12) {
            throw InputError("--matrix: not skew-symmetric (max |A + A^T| = " + std::to_string(asym) + ")");
        }
        if (n % 2 != 0) {
            throw InputError("--matrix: dimension " + std::to_string(n) + " is odd");
        }
        SkewMatrix a(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = r + 1; c < n; ++c) {
                a.set(r, c, m(r, c));
            }
        }
        return a;
    }
    ComplexVector upper;
    for (const auto &e : j) {
        upper.push_back(parse_complex(e, "--matrix"));
    }
    std::size_t n = 1;
    while (n * (n - 1) / 2 < upper.size()) {
        ++n;
    }
    if (n * (n - 1) / 2 != upper.size()) {
        throw InputError("--matrix: " + std::to_string(upper.size()) + " entries is not a triangular count");
    }
    if (n % 2 != 0) {
        throw InputError("--matrix: dimension " + std::to_string(n) + " is odd");
    }
    return SkewMatrix::from_upper(n, upper);
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline std::string half_entry(double x) { return x == 0.0 ? "0" : "1/2"; }

inline std::string format_half_vector(const RealVector &v)
{
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? " " : "") + half_entry(v[i]);
    }
    return out + ")";
}

inline std::string format_sci(double x)
{
    if (!std::isfinite(x)) {
        return "inf";
    }
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << x;
    return os.str();
}

inline void print_summary_table(const SuiteReport &report, std::ostream &out)
{
    out << std::left << std::setw(26) << "identity" << std::right << std::setw(3) << "g" << std::setw(8) << "trials"
        << std::setw(12) << "max" << std::setw(12) << "mean" << std::setw(10) << "failures" << "  status\n";
    for (const auto &c : report.cells) {
        out << std::left << std::setw(26) << c.identity << std::right << std::setw(3) << c.g << std::setw(8)
            << report.config.trials_per_cell << std::setw(12) << format_sci(c.max_residual) << std::setw(12)
            << format_sci(c.mean_residual) << std::setw(10) << c.failures.size() << "  "
            << (c.failures.empty() ? "pass" : "FAIL") << '\n';
    }
    std::size_t failed = 0;
    for (const auto &c : report.cells) {
        failed += c.failures.size();
    }
    out << report.cells.size() << " cells, " << failed << " failing instances\n";
}

inline int cmd_eval(const std::string &tau_text, const std::string &u_text, const std::string &char_text, double eps,
                    std::ostream &out)
{
    const RiemannMatrix tau = parse_tau(load_json(tau_text, "--tau"));
    const ThetaPoint u(parse_complex_vector(load_json(u_text, "--u"), "--u"));
    const Characteristic ch = char_text.empty() ? Characteristic::zero(tau.genus())
                                                : parse_characteristic(load_json(char_text, "--char"));
    EvalSettings s;
    s.epsilon = eps;
    const ThetaValue v = theta_eval(u, tau, ch, s);
    out << json{{"value", complex_json(v.value)}, {"radius", v.radius}, {"terms", v.terms}}.dump() << '\n';
    return exit_ok;
}

inline int cmd_verify(const SuiteConfig &cfg, const std::string &json_path, std::ostream &out)
{
    const SuiteReport report = run_suite(cfg);
    if (!json_path.empty()) {
        std::ofstream file(json_path, std::ios::binary);
        if (!file) {
            throw InputError("--json: cannot write '" + json_path + "'");
        }
        file << to_json(report).dump(2) << '\n';
    }
    print_summary_table(report, out);
    return report.passed() ? exit_ok : exit_failures;
}

inline int cmd_half_periods(long g, std::ostream &out)
{
    if (g < 1 || g > 15) {
        throw InputError("--g must lie in [1, 15]");
    }
    const auto table = enumerate_half_periods(static_cast<std::size_t>(g));
    std::vector<HalfPeriod> all = table.even;
    all.insert(all.end(), table.odd.begin(), table.odd.end());
    std::sort(all.begin(), all.end(), [](const HalfPeriod &x, const HalfPeriod &y) {
        return std::pair(x.a_bits(), x.b_bits()) < std::pair(y.a_bits(), y.b_bits());
    });
    for (const auto &hp : all) {
        const Characteristic ch = hp.characteristic();
        out << "a=" << format_half_vector(ch.a) << " b=" << format_half_vector(ch.b) << ' '
            << to_string(parity(hp)) << '\n';
    }
    out << "even: " << table.even.size() << "\nodd: " << table.odd.size() << '\n';
    return exit_ok;
}

inline int cmd_pfaffian(const std::string &matrix_text, std::ostream &out)
{
    const SkewMatrix a = parse_skew(load_json(matrix_text, "--matrix"));
    const cplx pf = pfaffian(a);
    const cplx det = determinant(a.dense());
    const double residual = std::abs(pf * pf - det) / std::max(1.0, std::abs(det));
    out << json{{"pfaffian", complex_json(pf)}, {"residual", residual}}.dump() << '\n';
    return exit_ok;
}

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"theta_lab: multidimensional theta functions and identity verification"};
    app.require_subcommand(1);

    std::string tau_text;
    std::string u_text;
    std::string char_text;
    double eps = 1e-12;
    auto *eval = app.add_subcommand("eval", "Evaluate theta[a;b](u|tau)");
    eval->add_option("--tau", tau_text, "Riemann matrix, file or inline JSON")->required();
    eval->add_option("--u", u_text, "Argument as [[re,im],...]")->required();
    eval->add_option("--char", char_text, "Characteristic {\"a\":[...],\"b\":[...]} (default zero)");
    eval->add_option("--eps", eps, "Truncation tolerance")->capture_default_str();

    std::string identity = "all";
    std::vector<std::size_t> dims{1, 2};
    SuiteConfig cfg;
    std::string json_path;
    std::optional<double> verify_eps;
    auto *verify = app.add_subcommand("verify", "Run identity suites on random instances");
    verify->add_option("--identity", identity, "Identity name, comma-separated names, or 'all'")->capture_default_str();
    verify->add_option("--g", dims, "Genus list, e.g. 1,2")->delimiter(',')->capture_default_str();
    verify->add_option("--trials", cfg.trials_per_cell, "Trials per cell")->capture_default_str();
    verify->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
    verify->add_option("--target", cfg.target_residual, "Residual threshold")->capture_default_str();
    verify->add_option("--eps", verify_eps, "Override the per-evaluation truncation tolerance");
    verify->add_option("--threads", cfg.max_threads, "Worker threads (0: THETA_LAB_THREADS or all cores)");
    verify->add_flag("--timing", cfg.record_timing, "Record wall time in the report");
    verify->add_option("--json", json_path, "Write the report to this path");

    long hp_g = 0;
    auto *half = app.add_subcommand("half-periods", "List half-periods with parity");
    half->add_option("--g", hp_g, "Genus")->required();

    std::string matrix_text;
    auto *pf = app.add_subcommand("pfaffian", "Pfaffian of a skew-symmetric matrix");
    pf->add_option("--matrix", matrix_text, "Full skew matrix or strict upper triangle, file or inline JSON")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::Success &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return exit_invalid;
    }

    try {
        if (*eval) {
            return cmd_eval(tau_text, u_text, char_text, eps, out);
        }
        if (*verify) {
            if (identity == "all") {
                cfg.identities = identity_names();
            } else {
                cfg.identities.clear();
                std::istringstream is(identity);
                std::string name;
                while (std::getline(is, name, ',')) {
                    if (!parse_identity(name)) {
                        std::string valid;
                        for (const auto &n : identity_names()) {
                            valid += "  " + n + "\n";
                        }
                        err << "unknown identity '" << name << "'; valid names:\n" << valid << "  all\n";
                        return exit_invalid;
                    }
                    cfg.identities.push_back(name);
                }
            }
            cfg.dims = dims;
            if (verify_eps) {
                EvalSettings s;
                s.epsilon = *verify_eps;
                cfg.eval_overrides = s;
            }
            cfg.validate();
            return cmd_verify(cfg, json_path, out);
        }
        if (*half) {
            return cmd_half_periods(hp_g, out);
        }
        if (*pf) {
            return cmd_pfaffian(matrix_text, out);
        }
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_invalid;
}

} // namespace theta_lab::cli

#endif
