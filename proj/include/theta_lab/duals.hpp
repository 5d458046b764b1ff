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

#ifndef THETA_LAB_DUALS_HPP
#define THETA_LAB_DUALS_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace theta_lab
{

// Four vectors of a common dimension. Works for real characteristics and
// complex arguments alike.
template <typename T>
struct Quadruple
{
    std::array<std::vector<T>, 4> x;

    std::size_t dim() const { return x[0].size(); }

    void validate() const
    {
        for (const auto &v : x) {
            if (v.size() != x[0].size()) {
                throw std::invalid_argument("Quadruple: all four vectors must share one dimension");
            }
        }
    }

    std::vector<T> &operator[](std::size_t k) { return x[k]; }
    const std::vector<T> &operator[](std::size_t k) const { return x[k]; }

    friend bool operator==(const Quadruple &, const Quadruple &) = default;
};

namespace detail
{

// out_k = (1/2) sum_j sign[k][j] x_j, row by row. Halving is exact in binary
// floating point, so dyadic inputs map to dyadic outputs without rounding.
template <typename T>
Quadruple<T> signed_half_sums(const Quadruple<T> &q, const int (&sign)[4][4])
{
    q.validate();
    Quadruple<T> out;
    const std::size_t n = q.dim();
    for (std::size_t k = 0; k < 4; ++k) {
        out.x[k].assign(n, T{});
        for (std::size_t i = 0; i < n; ++i) {
            T s{};
            for (std::size_t j = 0; j < 4; ++j) {
                s = sign[k][j] > 0 ? s + q.x[j][i] : s - q.x[j][i];
            }
            out.x[k][i] = s * 0.5;
        }
    }
    return out;
}

inline constexpr int ww_signs[4][4] = {{-1, 1, 1, 1}, {1, -1, 1, 1}, {1, 1, -1, 1}, {1, 1, 1, -1}};
inline constexpr int jacobi_signs[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};

} // namespace detail

// Whittaker-Watson duals: x'_k = (1/2)(x_1 + x_2 + x_3 + x_4) - x_k.
template <typename T>
Quadruple<T> ww_dual(const Quadruple<T> &q)
{
    return detail::signed_half_sums(q, detail::ww_signs);
}

// Jacobi duals:
//   x~1 = (x1+x2+x3+x4)/2, x~2 = (x1+x2-x3-x4)/2,
//   x~3 = (x1-x2+x3-x4)/2, x~4 = (x1-x2-x3+x4)/2.
template <typename T>
Quadruple<T> jacobi_dual(const Quadruple<T> &q)
{
    return detail::signed_half_sums(q, detail::jacobi_signs);
}

// Negating x1 turns Whittaker-Watson duals into Jacobi duals up to signs:
// ww_dual(-x1, x2, x3, x4) == (x~1, -x~2, -x~3, -x~4). Returns the left side.
template <typename T>
Quadruple<T> ww_to_jacobi_sign_relation(const Quadruple<T> &q)
{
    Quadruple<T> flipped = q;
    for (auto &e : flipped.x[0]) {
        e = -e;
    }
    return ww_dual(flipped);
}

// (x~1, -x~2, -x~3, -x~4), the right side of the relation above.
template <typename T>
Quadruple<T> sign_flipped_jacobi_dual(const Quadruple<T> &q)
{
    Quadruple<T> out = jacobi_dual(q);
    for (std::size_t k = 1; k < 4; ++k) {
        for (auto &e : out.x[k]) {
            e = -e;
        }
    }
    return out;
}

} // namespace theta_lab

#endif
