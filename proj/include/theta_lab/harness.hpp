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

// Seeded instance generation and suite execution over (identity, g, trial)
// grids. Every instance is a pure function of (seed, identity, g, trial) and
// can be replayed from its digest.

#ifndef THETA_LAB_HARNESS_HPP
#define THETA_LAB_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "theta_lab/identities.hpp"
#include "theta_lab/theta.hpp"

namespace theta_lab
{

enum class IdentityKind
{
    linear_a,
    linear_b,
    schroter,
    binary_forward,
    binary_inverse,
    binary_shifted,
    jacobi_first,
    jacobi_second,
    jacobi_tilde_first,
    jacobi_tilde_second,
    riemann_ww,
    riemann_ww_inverse,
    riemann_tilde,
    riemann_tilde_inverse,
    weierstrass_naive,
    weierstrass_naive_onedim,
    weierstrass_sigma,
    lemma_decomposition,
    lemma_antisymmetry,
    weierstrass_pfaffian,
    equivalence
};

struct IdentityInfo
{
    IdentityKind kind;
    std::string_view name;
    bool g1_only;
};

inline constexpr IdentityInfo identity_table[] = {
    {IdentityKind::linear_a, "linear_a", false},
    {IdentityKind::linear_b, "linear_b", false},
    {IdentityKind::schroter, "schroter", false},
    {IdentityKind::binary_forward, "binary_forward", false},
    {IdentityKind::binary_inverse, "binary_inverse", false},
    {IdentityKind::binary_shifted, "binary_shifted", false},
    {IdentityKind::jacobi_first, "jacobi_first", false},
    {IdentityKind::jacobi_second, "jacobi_second", false},
    {IdentityKind::jacobi_tilde_first, "jacobi_tilde_first", false},
    {IdentityKind::jacobi_tilde_second, "jacobi_tilde_second", false},
    {IdentityKind::riemann_ww, "riemann_ww", false},
    {IdentityKind::riemann_ww_inverse, "riemann_ww_inverse", false},
    {IdentityKind::riemann_tilde, "riemann_tilde", false},
    {IdentityKind::riemann_tilde_inverse, "riemann_tilde_inverse", false},
    {IdentityKind::weierstrass_naive, "weierstrass_naive", false},
    {IdentityKind::weierstrass_naive_onedim, "weierstrass_naive_onedim", true},
    {IdentityKind::weierstrass_sigma, "weierstrass_sigma", true},
    {IdentityKind::lemma_decomposition, "lemma_decomposition", false},
    {IdentityKind::lemma_antisymmetry, "lemma_antisymmetry", false},
    {IdentityKind::weierstrass_pfaffian, "weierstrass_pfaffian", false},
    {IdentityKind::equivalence, "equivalence", false},
};

inline std::vector<std::string> identity_names()
{
    std::vector<std::string> out;
    for (const auto &info : identity_table) {
        out.emplace_back(info.name);
    }
    return out;
}

inline std::optional<IdentityKind> parse_identity(std::string_view name)
{
    for (const auto &info : identity_table) {
        if (info.name == name) {
            return info.kind;
        }
    }
    return std::nullopt;
}

inline const IdentityInfo &identity_info(IdentityKind kind)
{
    for (const auto &info : identity_table) {
        if (info.kind == kind) {
            return info;
        }
    }
    throw std::logic_error("identity_info: unregistered identity");
}

inline std::string_view to_string(IdentityKind kind) { return identity_info(kind).name; }

inline bool supports_genus(IdentityKind kind, std::size_t g) { return g >= 1 && (g == 1 || !identity_info(kind).g1_only); }

// Theta evaluations and summands per side, for splitting the residual target
// over the truncation tails: epsilon = target / (8 * factors * terms).
inline EvalSettings budget_settings(IdentityKind kind, std::size_t g, const IntVector &extra, double target)
{
    const double two_g = std::ldexp(1.0, static_cast<int>(g));
    double factors = 1.0;
    double terms = 1.0;
    switch (kind) {
    case IdentityKind::linear_a:
    case IdentityKind::linear_b:
        terms = std::pow(extra.empty() ? 1.0 : extra[0], static_cast<double>(g)) + 1.0;
        break;
    case IdentityKind::schroter:
        factors = 2.0;
        terms = std::pow(extra.size() < 2 ? 2.0 : extra[0] + extra[1], static_cast<double>(g)) + 1.0;
        break;
    case IdentityKind::binary_forward:
    case IdentityKind::binary_inverse:
    case IdentityKind::binary_shifted:
        factors = 2.0;
        terms = two_g + 1.0;
        break;
    case IdentityKind::jacobi_first:
    case IdentityKind::jacobi_second:
    case IdentityKind::jacobi_tilde_first:
    case IdentityKind::jacobi_tilde_second:
        factors = 4.0;
        terms = 2.0 * two_g;
        break;
    case IdentityKind::riemann_ww:
    case IdentityKind::riemann_ww_inverse:
    case IdentityKind::riemann_tilde:
    case IdentityKind::riemann_tilde_inverse:
    case IdentityKind::weierstrass_naive:
    case IdentityKind::equivalence:
        factors = 4.0;
        terms = two_g * two_g + 2.0;
        break;
    case IdentityKind::weierstrass_naive_onedim:
    case IdentityKind::weierstrass_sigma:
        factors = 4.0;
        terms = 3.0;
        break;
    case IdentityKind::lemma_decomposition:
    case IdentityKind::lemma_antisymmetry:
        factors = 2.0;
        terms = 2.0 * two_g + 1.0;
        break;
    case IdentityKind::weierstrass_pfaffian: {
        const double n = two_g + 2.0;
        double matchings = 1.0;
        for (double k = n - 1.0; k > 1.0; k -= 2.0) {
            matchings *= k;
        }
        factors = n;
        terms = matchings;
        break;
    }
    }
    EvalSettings s;
    s.epsilon = std::clamp(target / (8.0 * factors * terms), 1e-15, 1e-3);
    if (kind == IdentityKind::weierstrass_pfaffian) {
        s.epsilon = std::min(s.epsilon, 1e-12);
    }
    return s;
}

namespace detail
{

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Uniform, integer and normal draws taken directly from mt19937_64 output.
class InstanceRng
{
public:
    explicit InstanceRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) // inclusive
    {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(engine_() % span);
    }
    double normal()
    {
        if (spare_) {
            const double out = *spare_;
            spare_.reset();
            return out;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        return r * std::cos(2.0 * pi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

} // namespace detail

inline std::uint64_t cell_stream_seed(std::uint64_t seed, std::string_view identity, std::size_t g,
                                      std::uint64_t trial) noexcept
{
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ detail::fnv1a(identity));
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(g));
    h = detail::splitmix64(h ^ trial);
    return h;
}

// tau = X + i (B B^T + 0.3 I), X symmetric uniform in [-1/2, 1/2], B normal * 0.5.
inline RiemannMatrix random_riemann_matrix(detail::InstanceRng &rng, std::size_t g)
{
    RealMatrix x(g, g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = i; j < g; ++j) {
            x(i, j) = rng.uniform(-0.5, 0.5);
            x(j, i) = x(i, j);
        }
    }
    RealMatrix b(g, g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            b(i, j) = 0.5 * rng.normal();
        }
    }
    ComplexMatrix tau(g, g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            double y = (i == j) ? 0.3 : 0.0;
            for (std::size_t k = 0; k < g; ++k) {
                y += b(i, k) * b(j, k);
            }
            tau(i, j) = {x(i, j), y};
        }
    }
    // Mirror the upper triangle.
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            tau(i, j) = tau(j, i);
        }
    }
    return RiemannMatrix::from_full(tau);
}

inline ThetaPoint random_point(detail::InstanceRng &rng, std::size_t g)
{
    ComplexVector u(g);
    for (auto &z : u) {
        const double re = rng.uniform(-1.0, 1.0);
        const double im = rng.uniform(-1.0, 1.0);
        z = {re, im};
    }
    return ThetaPoint(std::move(u));
}

inline HalfPeriod random_half_period(detail::InstanceRng &rng, std::size_t g)
{
    const int count = 1 << g;
    return HalfPeriod(g, static_cast<std::uint32_t>(rng.integer(0, count - 1)),
                      static_cast<std::uint32_t>(rng.integer(0, count - 1)));
}

inline HalfPeriod random_odd_half_period(detail::InstanceRng &rng, std::size_t g)
{
    const auto table = enumerate_half_periods(g);
    return table.odd[static_cast<std::size_t>(rng.integer(0, static_cast<int>(table.odd.size()) - 1))];
}

// Entries k/d with d in 1..8 and k in [-d, d].
inline Characteristic random_rational_characteristic(detail::InstanceRng &rng, std::size_t g)
{
    const auto draw = [&] {
        const int d = rng.integer(1, 8);
        const int k = rng.integer(-d, d);
        return static_cast<double>(k) / d;
    };
    RealVector a(g);
    RealVector b(g);
    for (auto &e : a) {
        e = draw();
    }
    for (auto &e : b) {
        e = draw();
    }
    return {std::move(a), std::move(b)};
}

// Half-periods for every characteristic, or rationals for every one, chosen
// per instance with equal odds.
inline std::vector<Characteristic> random_characteristics(detail::InstanceRng &rng, std::size_t g, std::size_t count)
{
    const bool half_periods = rng.uniform() < 0.5;
    std::vector<Characteristic> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(half_periods ? random_half_period(rng, g).characteristic()
                                   : random_rational_characteristic(rng, g));
    }
    return out;
}

struct InstanceKey
{
    std::string identity;
    std::size_t g = 0;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

inline std::string make_digest(const InstanceKey &key, const IntVector &extra)
{
    std::ostringstream os;
    os << key.identity << "/g=" << key.g << "/seed=" << key.seed << "/trial=" << key.trial;
    if (!extra.empty()) {
        os << "/extra=";
        for (std::size_t i = 0; i < extra.size(); ++i) {
            os << (i ? "," : "") << extra[i];
        }
    }
    return os.str();
}

// Parses the identity, g, seed and trial back out of a digest.
inline std::optional<InstanceKey> parse_digest(const std::string &digest)
{
    InstanceKey key;
    std::istringstream is(digest);
    std::string part;
    bool have_g = false;
    bool have_seed = false;
    bool have_trial = false;
    if (!std::getline(is, key.identity, '/') || !parse_identity(key.identity)) {
        return std::nullopt;
    }
    try {
        while (std::getline(is, part, '/')) {
            if (part.rfind("g=", 0) == 0) {
                key.g = std::stoul(part.substr(2));
                have_g = true;
            } else if (part.rfind("seed=", 0) == 0) {
                key.seed = std::stoull(part.substr(5));
                have_seed = true;
            } else if (part.rfind("trial=", 0) == 0) {
                key.trial = std::stoull(part.substr(6));
                have_trial = true;
            }
        }
    } catch (const std::exception &) {
        return std::nullopt;
    }
    if (!have_g || !have_seed || !have_trial) {
        return std::nullopt;
    }
    return key;
}

// Deterministic per (seed, identity, g, trial). For parametrised families the
// integer parameters are drawn too (linear: n in 1..4; Schroter: n1, n2 in
// 1..4; shifted binary: q in {0,1}^g); pass `extra` to pin them instead.
inline IdentityInstance generate_instance(std::uint64_t seed, IdentityKind kind, std::size_t g, std::uint64_t trial,
                                          double target = 1e-9, const std::optional<IntVector> &extra = std::nullopt)
{
    if (!supports_genus(kind, g)) {
        throw std::invalid_argument("generate_instance: identity " + std::string(to_string(kind))
                                    + " is not defined for g = " + std::to_string(g));
    }
    const InstanceKey key{std::string(to_string(kind)), g, seed, trial};
    detail::InstanceRng rng(cell_stream_seed(seed, key.identity, g, trial));

    RiemannMatrix tau = random_riemann_matrix(rng, g);
    std::vector<ThetaPoint> points;
    std::vector<Characteristic> chars;
    IntVector params;

    const auto draw_points = [&](std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            points.push_back(random_point(rng, g));
        }
    };

    switch (kind) {
    case IdentityKind::linear_a:
    case IdentityKind::linear_b:
        draw_points(1);
        chars = random_characteristics(rng, g, 1);
        params = {rng.integer(1, 4)};
        break;
    case IdentityKind::schroter:
        draw_points(2);
        chars = random_characteristics(rng, g, 2);
        params = {rng.integer(1, 4), rng.integer(1, 4)};
        break;
    case IdentityKind::binary_forward:
    case IdentityKind::binary_inverse:
        draw_points(2);
        chars = random_characteristics(rng, g, 2);
        break;
    case IdentityKind::binary_shifted:
        draw_points(2);
        chars = random_characteristics(rng, g, 2);
        for (std::size_t i = 0; i < g; ++i) {
            params.push_back(rng.integer(0, 1));
        }
        break;
    case IdentityKind::jacobi_first:
    case IdentityKind::jacobi_second:
    case IdentityKind::jacobi_tilde_first:
    case IdentityKind::jacobi_tilde_second:
    case IdentityKind::riemann_ww:
    case IdentityKind::riemann_ww_inverse:
    case IdentityKind::riemann_tilde:
    case IdentityKind::riemann_tilde_inverse:
    case IdentityKind::weierstrass_naive:
    case IdentityKind::weierstrass_naive_onedim:
    case IdentityKind::equivalence:
        draw_points(4);
        chars = random_characteristics(rng, g, 4);
        break;
    case IdentityKind::weierstrass_sigma:
        draw_points(4);
        chars = {Characteristic({0.5}, {0.5})};
        break;
    case IdentityKind::lemma_decomposition:
    case IdentityKind::lemma_antisymmetry:
        chars = {random_odd_half_period(rng, g).characteristic()};
        draw_points(2);
        break;
    case IdentityKind::weierstrass_pfaffian:
        chars = {random_odd_half_period(rng, g).characteristic()};
        draw_points((std::size_t{1} << g) + 2);
        break;
    }
    if (extra) {
        params = *extra;
    }
    const EvalSettings eval = budget_settings(kind, g, params, target);
    return IdentityInstance{g, std::move(tau), std::move(points), std::move(chars), params, eval,
                            make_digest(key, params)};
}

// All residual reports for one instance (several for the equivalence suite).
inline std::vector<ResidualReport> evaluate_identity(IdentityKind kind, const IdentityInstance &inst)
{
    switch (kind) {
    case IdentityKind::linear_a:
        return {linear_identity_residual(LinearKind::to_scaled, inst)};
    case IdentityKind::linear_b:
        return {linear_identity_residual(LinearKind::from_scaled, inst)};
    case IdentityKind::schroter:
        return {schroter_residual(inst)};
    case IdentityKind::binary_forward:
        return {binary_residual(BinaryDirection::forward, inst)};
    case IdentityKind::binary_inverse:
        return {binary_residual(BinaryDirection::inverse, inst)};
    case IdentityKind::binary_shifted:
        return {binary_residual(BinaryDirection::shifted, inst)};
    case IdentityKind::jacobi_first:
        return {jacobi_residual(JacobiKind::first, inst)};
    case IdentityKind::jacobi_second:
        return {jacobi_residual(JacobiKind::second, inst)};
    case IdentityKind::jacobi_tilde_first:
        return {jacobi_residual(JacobiKind::tilde_first, inst)};
    case IdentityKind::jacobi_tilde_second:
        return {jacobi_residual(JacobiKind::tilde_second, inst)};
    case IdentityKind::riemann_ww:
        return {riemann_residual(RiemannKind::ww, inst)};
    case IdentityKind::riemann_ww_inverse:
        return {riemann_residual(RiemannKind::ww_inverse, inst)};
    case IdentityKind::riemann_tilde:
        return {riemann_residual(RiemannKind::tilde, inst)};
    case IdentityKind::riemann_tilde_inverse:
        return {riemann_residual(RiemannKind::tilde_inverse, inst)};
    case IdentityKind::weierstrass_naive:
        return {naive_weierstrass_residual(NaiveWeierstrassKind::general, inst)};
    case IdentityKind::weierstrass_naive_onedim:
        return {naive_weierstrass_residual(NaiveWeierstrassKind::onedim, inst)};
    case IdentityKind::weierstrass_sigma:
        return {weierstrass_sigma_residual(inst)};
    case IdentityKind::lemma_decomposition:
        return {lemma_decomposition_residual(HalfPeriod::from_characteristic(inst.chars.at(0)), inst.points.at(0),
                                             inst.points.at(1), inst.tau, inst.eval, inst.digest)};
    case IdentityKind::lemma_antisymmetry:
        return {lemma_antisymmetry_residual(HalfPeriod::from_characteristic(inst.chars.at(0)), inst.points.at(0),
                                            inst.points.at(1), inst.tau, inst.eval, inst.digest)};
    case IdentityKind::weierstrass_pfaffian:
        return {weierstrass_pfaffian_residual(HalfPeriod::from_characteristic(inst.chars.at(0)), inst.points,
                                              inst.tau, inst.eval, inst.digest)};
    case IdentityKind::equivalence:
        return equivalence_suite(inst);
    }
    throw std::logic_error("evaluate_identity: unknown identity");
}

// Worst residual over the reports of one instance; NaN counts as +inf.
inline double worst_residual(const std::vector<ResidualReport> &reports)
{
    double worst = 0.0;
    for (const auto &r : reports) {
        worst = std::isnan(r.residual) ? std::numeric_limits<double>::infinity() : std::max(worst, r.residual);
    }
    return worst;
}

// Regenerates and re-evaluates the instance named by a digest.
inline std::vector<ResidualReport> replay(const std::string &digest, double target = 1e-9)
{
    const auto key = parse_digest(digest);
    if (!key) {
        throw std::invalid_argument("replay: malformed digest '" + digest + "'");
    }
    const IdentityKind kind = *parse_identity(key->identity);
    std::optional<IntVector> extra;
    const auto pos = digest.find("/extra=");
    if (pos != std::string::npos) {
        IntVector v;
        std::istringstream is(digest.substr(pos + 7));
        std::string item;
        while (std::getline(is, item, ',')) {
            v.push_back(std::stoi(item));
        }
        extra = v;
    }
    return evaluate_identity(kind, generate_instance(key->seed, kind, key->g, key->trial, target, extra));
}

struct SuiteConfig
{
    std::uint64_t seed = 1;
    std::vector<std::size_t> dims{1, 2};
    std::size_t trials_per_cell = 25;
    std::vector<std::string> identities = identity_names();
    double target_residual = 1e-9;
    std::optional<EvalSettings> eval_overrides;
    bool record_timing = false; // wall_time_s is 0 unless set
    std::size_t max_threads = 0; // 0: THETA_LAB_THREADS or hardware concurrency

    void validate() const
    {
        if (trials_per_cell < 1) {
            throw std::invalid_argument("SuiteConfig: trials_per_cell must be >= 1");
        }
        if (!(target_residual > 0.0) || target_residual > 1e-3) {
            throw std::invalid_argument("SuiteConfig: target_residual must lie in (0, 1e-3]");
        }
        for (const auto &name : identities) {
            if (!parse_identity(name)) {
                throw std::invalid_argument("SuiteConfig: unknown identity '" + name + "'");
            }
        }
        for (auto g : dims) {
            if (g < 1 || g > 8) {
                throw std::invalid_argument("SuiteConfig: g must lie in [1, 8]");
            }
        }
        if (eval_overrides) {
            eval_overrides->validate();
        }
    }
};

struct CellReport
{
    std::string identity;
    std::size_t g = 0;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    std::vector<std::string> failures;
};

struct SuiteReport
{
    SuiteConfig config;
    std::vector<CellReport> cells;
    double wall_time_s = 0.0;

    bool passed() const
    {
        return std::all_of(cells.begin(), cells.end(), [](const CellReport &c) { return c.failures.empty(); });
    }
};

inline std::size_t harness_thread_count(std::size_t requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("THETA_LAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<std::size_t>(v);
            }
        } catch (const std::exception &) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

inline SuiteReport run_suite(const SuiteConfig &cfg)
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    struct Cell
    {
        IdentityKind kind;
        std::string name;
        std::size_t g;
    };
    std::vector<Cell> cells;
    for (const auto &name : cfg.identities) {
        const IdentityKind kind = *parse_identity(name);
        for (auto g : cfg.dims) {
            if (supports_genus(kind, g)) {
                cells.push_back({kind, name, g});
            }
        }
    }

    struct Outcome
    {
        double residual = 0.0;
        std::string digest;
    };
    const std::size_t trials = cfg.trials_per_cell;
    std::vector<Outcome> outcomes(cells.size() * trials);

    const auto run_one = [&](std::size_t index) {
        const Cell &cell = cells[index / trials];
        const std::uint64_t trial = index % trials;
        IdentityInstance inst = generate_instance(cfg.seed, cell.kind, cell.g, trial, cfg.target_residual);
        if (cfg.eval_overrides) {
            inst.eval = *cfg.eval_overrides;
        }
        Outcome out;
        out.digest = inst.digest;
        try {
            out.residual = worst_residual(evaluate_identity(cell.kind, inst));
        } catch (const std::exception &) {
            out.residual = std::numeric_limits<double>::infinity();
        }
        outcomes[index] = std::move(out);
    };

    const std::size_t threads = std::min(harness_thread_count(cfg.max_threads), std::max<std::size_t>(1, outcomes.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            run_one(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < outcomes.size(); i = next++) {
                    run_one(i);
                }
            });
        }
    }

    SuiteReport report;
    report.config = cfg;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellReport cell;
        cell.identity = cells[c].name;
        cell.g = cells[c].g;
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const Outcome &o = outcomes[c * trials + t];
            cell.max_residual = std::max(cell.max_residual, o.residual);
            sum += o.residual;
            if (!(o.residual <= cfg.target_residual)) {
                cell.failures.push_back(o.digest);
            }
        }
        cell.mean_residual = sum / static_cast<double>(trials);
        report.cells.push_back(std::move(cell));
    }
    if (cfg.record_timing) {
        report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return report;
}

// Non-finite residuals are written as null.
inline nlohmann::json to_json(const SuiteReport &report)
{
    using nlohmann::json;
    const auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json config = {
        {"seed", report.config.seed},
        {"dims", report.config.dims},
        {"trials_per_cell", report.config.trials_per_cell},
        {"identities", report.config.identities},
        {"target_residual", report.config.target_residual},
        {"timing", report.config.record_timing},
    };
    if (report.config.eval_overrides) {
        config["eval_overrides"] = {{"epsilon", report.config.eval_overrides->epsilon},
                                    {"radius_margin", report.config.eval_overrides->radius_margin}};
    }
    json cells = json::array();
    for (const auto &c : report.cells) {
        cells.push_back({{"identity", c.identity},
                         {"g", c.g},
                         {"max_residual", num(c.max_residual)},
                         {"mean_residual", num(c.mean_residual)},
                         {"failures", c.failures}});
    }
    return {{"config", std::move(config)}, {"cells", std::move(cells)}, {"wall_time_s", report.wall_time_s}};
}

} // namespace theta_lab

#endif
